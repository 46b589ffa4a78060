#include "roughwall/krylov.hpp"

#include <cmath>

namespace roughwall {

namespace {

double dotp(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double norm2(const std::vector<double>& v) { return std::sqrt(dotp(v, v)); }

GmresReport gmres(const LinearMap& A, const LinearMap& precond, const std::vector<double>& b,
                  std::vector<double>& x, double abs_tol, int restart, int max_iterations) {
  const size_t n = b.size();
  GmresReport rep;
  std::vector<double> r(n), w(n), z(n);
  std::vector<std::vector<double>> V;
  std::vector<std::vector<double>> H(restart + 1, std::vector<double>(restart, 0.0));
  std::vector<double> cs(restart), sn(restart), g(restart + 1);

  auto residual = [&]() {
    A(x, w);
    for (size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
    return norm2(r);
  };

  double beta = residual();
  rep.residual = beta;
  while (true) {
    if (beta <= abs_tol) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= max_iterations) break;
    V.assign(1, r);
    for (auto& v : V[0]) v /= beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int j = 0;
    for (; j < restart && rep.iterations < max_iterations; ++j) {
      if (precond)
        precond(V[j], z);
      else
        z = V[j];
      A(z, w);
      for (int i = 0; i <= j; ++i) {
        H[i][j] = dotp(w, V[i]);
        for (size_t q = 0; q < n; ++q) w[q] -= H[i][j] * V[i][q];
      }
      H[j + 1][j] = norm2(w);
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H[i][j] + sn[i] * H[i + 1][j];
        H[i + 1][j] = -sn[i] * H[i][j] + cs[i] * H[i + 1][j];
        H[i][j] = t;
      }
      const double den = std::hypot(H[j][j], H[j + 1][j]);
      cs[j] = den == 0.0 ? 1.0 : H[j][j] / den;
      sn[j] = den == 0.0 ? 0.0 : H[j + 1][j] / den;
      H[j][j] = den;
      const double hn = H[j + 1][j];
      H[j + 1][j] = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++rep.iterations;
      rep.history.push_back(std::abs(g[j + 1]));
      if (hn != 0.0 && j + 1 < restart) {
        V.push_back(w);
        for (auto& v : V.back()) v /= hn;
      }
      if (std::abs(g[j + 1]) <= 0.5 * abs_tol || hn == 0.0) {
        ++j;
        break;
      }
    }
    // Solve the triangular system and update x += M V y.
    std::vector<double> y(j, 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < j; ++k) s -= H[i][k] * y[k];
      y[i] = H[i][i] == 0.0 ? 0.0 : s / H[i][i];
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int i = 0; i < j; ++i)
      for (size_t q = 0; q < n; ++q) w[q] += y[i] * V[i][q];
    if (precond)
      precond(w, z);
    else
      z = w;
    for (size_t q = 0; q < n; ++q) x[q] += z[q];
    const double prev = beta;
    beta = residual();
    rep.residual = beta;
    if (j == 0 || (beta >= prev && rep.iterations >= max_iterations)) {
      rep.converged = beta <= abs_tol;
      break;
    }
  }
  return rep;
}

}  // namespace roughwall
