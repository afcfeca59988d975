#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "navslip/estimates.hpp"
#include "navslip/scenario.hpp"

namespace navslip {

struct RunOptions {
  /// Artifact directory; empty writes nothing.
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  int threads = 1;                    // concurrent sweep members
};

struct RunResult {
  nlohmann::json report;
  Verdict verdict = Verdict::Fail;
  /// 0 on Pass/Inconclusive, 1 on any Fail, 2 on an error.
  int exit_code = 2;
};

/// Fail if any verdict fails, Pass if all pass, Inconclusive otherwise.
Verdict aggregate(const std::vector<Verdict>& verdicts);
int exit_code(Verdict v);

/// Sorted keys, two-space indent, trailing newline.
std::string dump_report(const nlohmann::json& report);

/// Continuation solve of the scenario; report holds the solve summary.
RunResult run_solve(const Scenario& scenario, const RunOptions& options);
/// Solve followed by every check listed in verify.checks.
RunResult run_verify(const Scenario& scenario, const RunOptions& options);
/// run_verify per sweep value (subdirectories <parameter>_<k>) plus an
/// aggregate table. Members run in batches of `threads`, merged by index.
RunResult run_sweep(const Scenario& scenario, const RunOptions& options);
/// Poincaré / L⁴ bounds, Korn margins, star decompositions and Bogovskii
/// ratios on the scenario profile.
RunResult run_inequalities(const Scenario& scenario, const RunOptions& options);
/// Carrier bounds across the configured domain half-lengths.
RunResult run_carrier_check(const Scenario& scenario, const RunOptions& options);

/// Dispatches by subcommand name; library errors become exit code 2 with an
/// "error" entry. report.json is written to options.out when set.
RunResult run_command(const std::string& command, const Scenario& scenario, const RunOptions& options);

}  // namespace navslip
