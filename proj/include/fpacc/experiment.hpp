#ifndef FPACC_EXPERIMENT_HPP
#define FPACC_EXPERIMENT_HPP

#include "fpacc/fixed_point.hpp"

#include <string>
#include <vector>

namespace fpacc {

class usage_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Method { picard, aa, aaoptd };

std::string method_name(Method m);

/// One benchmark run: problem from the catalog, solver method, and the
/// solver settings. Method/damping compatibility is enforced by validate():
/// picard takes no window or damping, aa takes none/constant, aaoptd is
/// always optimized.
struct ExperimentSpec {
  std::string problem;
  Method method = Method::picard;
  int window = 0;
  DampingPolicy damping{};
  double tolerance = 1e-10;
  int max_iterations = 200;
  std::string out_path; // empty: derive from problem + label
  unsigned long seed = 0; // reserved; the catalog problems are deterministic

  void validate() const;
  /// Short column-safe identifier, e.g. "aaoptd-m10-flip0.3".
  std::string label() const;
};

/// Everything one invocation asked for: a single run, or several method
/// blocks compared on one problem.
struct RunPlan {
  std::vector<ExperimentSpec> specs;
  bool comparison = false;
  std::string compare_out; // wide-file path for comparisons
};

/// Parses command-line arguments (without argv[0]). Throws usage_error on
/// invalid flags or method/damping combinations. `help_requested` is set
/// instead of throwing when --help was asked for; `help_text` then carries
/// the usage text.
RunPlan parse_args(const std::vector<std::string>& args, bool& help_requested,
                   std::string& help_text);

/// Parses one --compare block, e.g. "aaoptd:m=10,safeguard=flip,eta=0.3".
ExperimentSpec parse_method_block(const std::string& block, const std::string& problem,
                                  double tolerance, int max_iterations);

struct ExperimentResult {
  ExperimentSpec spec;
  SolveReport report;
  bool diverged = false;
  std::string divergence_reason;
  double wall_ms = 0.0;
  std::string trace_path;
};

/// Builds the problem, runs the configured solver, and writes the trace file
/// (also on divergence, with whatever rows were produced). Throws io_error
/// when the trace cannot be written.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Runs every member spec (all must name the same problem) and writes the
/// wide residual-per-method file to `out_path`.
std::vector<ExperimentResult> compare_experiments(const std::vector<ExperimentSpec>& specs,
                                                  const std::string& out_path);

/// Trace file: fixed header, one row per iteration, absent scalars as empty
/// fields. Byte-stable across runs except the elapsed_ms column.
void write_trace(const std::string& path, const SolveReport& report);

void write_comparison(const std::string& path, const std::vector<ExperimentResult>& results);

std::string summary_line(const ExperimentResult& result);
std::string summary_json(const ExperimentResult& result);

/// Labels ordered by iterations-to-tolerance (non-converged runs last).
std::vector<std::string> ranking(const std::vector<ExperimentResult>& results);

} // namespace fpacc

#endif
