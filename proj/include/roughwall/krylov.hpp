#pragma once

#include <functional>
#include <vector>

namespace roughwall {

using LinearMap = std::function<void(const std::vector<double>& x, std::vector<double>& y)>;

struct GmresReport {
  int iterations = 0;
  double residual = 0.0;  // final true residual norm
  bool converged = false;
  std::vector<double> history;  // residual estimate per iteration
};

// Right-preconditioned restarted GMRES. Stops when ||b - A x|| <= abs_tol. `x` holds the
// initial guess on entry and the iterate on return. `precond` may be empty.
GmresReport gmres(const LinearMap& A, const LinearMap& precond, const std::vector<double>& b,
                  std::vector<double>& x, double abs_tol, int restart, int max_iterations);

double norm2(const std::vector<double>& v);

}  // namespace roughwall
