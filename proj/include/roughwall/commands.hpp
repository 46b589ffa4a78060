#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "roughwall/config.hpp"
#include "roughwall/error.hpp"

namespace roughwall {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitSolver = 2, kExitAcceptance = 3 };

// Exit code for an error raised while running a command.
int exit_code_for(ErrorKind kind);

// Each command writes its artifacts and the expanded config into cfg.out and returns an exit code.
int cmd_corrector(const RunConfig& cfg, std::ostream& out);
int cmd_slip_matrix(const RunConfig& cfg, std::ostream& out);
int cmd_channel(const RunConfig& cfg, std::ostream& out);
int cmd_walllaw_report(const RunConfig& cfg, std::ostream& out);
int cmd_halfspace_eval(const RunConfig& cfg, std::ostream& out);
int cmd_selftest(const RunConfig& cfg, std::ostream& out);

// Dispatches on cfg.command; library errors become exit codes with a diagnostic JSON in cfg.out.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Full command line, args[0] being the subcommand.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "alpha_j = (a1, a2, a3) +- delta" with the delta printed as n/a when no refinement ran.
std::string alpha_summary(int j, const Vec3& alpha, double refinement_delta);

}  // namespace roughwall
