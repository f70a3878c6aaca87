#pragma once

// Command-line front end: fixed-point, analyze, sweep, simulate.
// All numeric CSV fields use 12 significant digits.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "baoi/model_core.hpp"
#include "baoi/queue_analysis.hpp"
#include "baoi/simulator.hpp"

namespace baoi::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInfeasible = 2,
  kExitRuntime = 3,
};

enum class ModeSelection { kConsistent, kPaper, kBoth };

ModeSelection parse_mode_selection(const std::string& text);
const char* to_string(ModeSelection modes);

/// "%.12g"; NaN as "nan".
std::string format_number(double value);

/// Analytic evaluation of one parameter point. Failures are recorded in
/// `status` rather than thrown.
struct PointResult {
  explicit PointResult(model::NetworkParams p, std::optional<double> mu = std::nullopt)
      : params(p), mu_override(mu) {}

  model::NetworkParams params;
  std::optional<double> mu_override;
  /// ok | unstable | infeasible | no_convergence
  std::string status = "ok";
  std::string message;
  std::optional<model::EquivalentModel> model;
  double mu = 0.0;
  std::optional<queue::QueueSolution> consistent;
  std::optional<queue::QueueSolution> paper;

  bool ok() const { return status == "ok"; }
  int exit_code() const;
};

PointResult analyze_point(const model::NetworkParams& params, ModeSelection modes,
                          std::optional<double> mu_override = std::nullopt);

/// Column names shared by `analyze` and `sweep` rows.
std::vector<std::string> analysis_columns();
std::vector<std::string> analysis_fields(const PointResult& point);

std::vector<std::string> fixed_point_columns();
std::vector<std::string> fixed_point_fields(const PointResult& point);

/// Grid "min:max:step" or a single value. Values are min + i * step.
struct Grid {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  std::vector<double> values() const;
};

Grid parse_grid(const std::string& text);

/// Flat key=value configuration; '#' starts a comment. Keys are long flag
/// names without the leading dashes.
std::vector<std::pair<std::string, std::string>> parse_config(std::istream& in);

/// Entry point used by the `baoi` executable. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace baoi::cli
