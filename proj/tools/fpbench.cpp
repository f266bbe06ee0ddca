#include "fpacc/experiment.hpp"

#include <iostream>

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitNotConverged = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

int run(const fpacc::RunPlan& plan) {
  using fpacc::ExperimentResult;

  if (!plan.comparison) {
    const ExperimentResult result = fpacc::run_experiment(plan.specs.front());
    std::cout << fpacc::summary_line(result) << '\n';
    std::cout << fpacc::summary_json(result) << '\n';
    return result.report.converged ? kExitConverged : kExitNotConverged;
  }

  const std::vector<ExperimentResult> results =
      fpacc::compare_experiments(plan.specs, plan.compare_out);
  bool all_converged = true;
  for (const auto& result : results) {
    std::cout << fpacc::summary_line(result) << '\n';
    std::cout << fpacc::summary_json(result) << '\n';
    all_converged = all_converged && result.report.converged;
  }
  const auto order = fpacc::ranking(results);
  for (size_t i = 0; i < order.size(); ++i) {
    std::cout << "rank=" << (i + 1) << " label=" << order[i] << '\n';
  }
  std::cout << "comparison=" << plan.compare_out << '\n';
  return all_converged ? kExitConverged : kExitNotConverged;
}

} // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    bool help_requested = false;
    std::string help_text;
    const fpacc::RunPlan plan = fpacc::parse_args(args, help_requested, help_text);
    if (help_requested) {
      std::cout << help_text;
      return kExitConverged;
    }
    return run(plan);
  } catch (const fpacc::usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fpacc::io_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}
