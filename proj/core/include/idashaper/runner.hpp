#pragma once

#include "idashaper/cases.hpp"
#include "idashaper/scenario.hpp"

namespace idashaper {

/// Exit codes of the scenario commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCertificationFailure = 1;
inline constexpr int kExitSchemaError = 2;

/// Builds the controller bundle a scenario describes (per-case defaults plus
/// overrides such as an explicit constant M_d).
Bundle bundle_from_scenario(const Scenario& sc);

/// verify: necessary condition, positive definiteness, Psi rank, kinetic /
/// potential / scalar-PDE residual grids and the open-loop-vs-target match
/// certificate. Writes report.txt and residuals.csv into out_dir. Returns 0
/// iff every gating check passes.
int cmd_verify(const Scenario& sc, const std::string& out_dir);

/// solve: produces the a(q) artifact for the scenario's regime (sampled ODE
/// table with residual column, verified constant, or characteristic
/// verification report).
int cmd_solve(const Scenario& sc, const std::string& out_dir);

/// simulate: closed-loop trajectory CSV plus a gnuplot script.
int cmd_simulate(const Scenario& sc, const std::string& out_dir);

/// Full command-line entry point: ida-shaper {verify|solve|simulate}
/// <scenario> [--out DIR] [--seed N]. Catches library errors and maps them
/// to the exit-code contract.
int run_cli(int argc, const char* const* argv);

}  // namespace idashaper
