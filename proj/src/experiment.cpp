#include "fpacc/experiment.hpp"

#include "fpacc/accelerator.hpp"
#include "fpacc/problems.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fpacc {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string safeguard_suffix(const SafeguardStrategy& s) {
  switch (s.kind) {
  case SafeguardStrategy::Kind::raw:
    return "raw";
  case SafeguardStrategy::Kind::clamp_floor:
    return "clamp" + format_short(s.eta);
  case SafeguardStrategy::Kind::flip_below:
    return "flip" + format_short(s.eta);
  }
  return "raw";
}

} // namespace

std::string method_name(Method m) {
  switch (m) {
  case Method::picard:
    return "picard";
  case Method::aa:
    return "aa";
  case Method::aaoptd:
    return "aaoptd";
  }
  return "?";
}

void ExperimentSpec::validate() const {
  if (problem.empty()) {
    throw usage_error("no problem given");
  }
  if (!(tolerance > 0.0)) {
    throw usage_error("tolerance must be positive");
  }
  if (max_iterations < 1) {
    throw usage_error("max-iters must be >= 1");
  }
  switch (method) {
  case Method::picard:
    if (window != 0) {
      throw usage_error("picard accepts no window");
    }
    if (damping.kind != DampingPolicy::Kind::undamped) {
      throw usage_error("picard accepts no damping");
    }
    break;
  case Method::aa:
    if (window < 1) {
      throw usage_error("aa needs a window size >= 1");
    }
    if (damping.kind == DampingPolicy::Kind::optimized) {
      throw usage_error("aa does not take optimized damping; use method aaoptd");
    }
    break;
  case Method::aaoptd:
    if (window < 1) {
      throw usage_error("aaoptd needs a window size >= 1");
    }
    if (damping.kind != DampingPolicy::Kind::optimized) {
      throw usage_error("aaoptd requires optimized damping");
    }
    break;
  }
}

std::string ExperimentSpec::label() const {
  switch (method) {
  case Method::picard:
    return "picard";
  case Method::aa: {
    std::string s = "aa-m" + std::to_string(window);
    if (damping.kind == DampingPolicy::Kind::constant) {
      s += "-beta" + format_short(damping.beta);
    }
    return s;
  }
  case Method::aaoptd:
    return "aaoptd-m" + std::to_string(window) + "-" + safeguard_suffix(damping.safeguard);
  }
  return "?";
}

namespace {

Method parse_method(const std::string& s) {
  if (s == "picard") return Method::picard;
  if (s == "aa") return Method::aa;
  if (s == "aaoptd") return Method::aaoptd;
  throw usage_error("unknown method: " + s);
}

SafeguardStrategy parse_safeguard(const std::string& s, double eta) {
  try {
    if (s == "raw") return SafeguardStrategy::Raw();
    if (s == "clamp") return SafeguardStrategy::ClampFloor(eta);
    if (s == "flip") return SafeguardStrategy::FlipBelow(eta);
  } catch (const std::invalid_argument& e) {
    throw usage_error(e.what());
  }
  throw usage_error("unknown safeguard: " + s + " (expected raw, clamp or flip)");
}

struct MethodOptions {
  std::string method;
  int window = -1; // -1: take the catalog suggestion
  std::string damping;
  double beta = -1.0;
  std::string safeguard;
  double eta = -1.0;
};

// Resolves one method block into a full spec, filling unset knobs from the
// catalog entry's defaults.
ExperimentSpec resolve_spec(const MethodOptions& opt, const std::string& problem,
                            double tolerance, int max_iterations) {
  ExperimentSpec spec;
  spec.problem = problem;
  spec.tolerance = tolerance;
  spec.max_iterations = max_iterations;
  spec.method = parse_method(opt.method);

  const ProblemCatalogEntry* entry = nullptr;
  try {
    entry = &catalog_lookup(problem);
  } catch (const std::out_of_range& e) {
    throw usage_error(e.what());
  }

  if (spec.method == Method::picard) {
    if (opt.window >= 0) throw usage_error("picard accepts no window");
    if (!opt.damping.empty()) throw usage_error("picard accepts no damping");
    if (opt.beta >= 0.0) throw usage_error("picard accepts no beta");
    if (!opt.safeguard.empty() || opt.eta >= 0.0) {
      throw usage_error("picard accepts no safeguard");
    }
    return spec;
  }

  spec.window = opt.window >= 0 ? opt.window : entry->suggested_window;

  if (spec.method == Method::aa) {
    if (!opt.safeguard.empty() || opt.eta >= 0.0) {
      throw usage_error("safeguards apply to aaoptd only");
    }
    if (opt.damping.empty() || opt.damping == "none") {
      if (opt.beta >= 0.0) throw usage_error("beta requires --damping constant");
      spec.damping = DampingPolicy::Undamped();
    } else if (opt.damping == "constant") {
      if (opt.beta < 0.0) throw usage_error("constant damping needs --beta");
      try {
        spec.damping = DampingPolicy::Constant(opt.beta);
      } catch (const std::invalid_argument& e) {
        throw usage_error(e.what());
      }
    } else if (opt.damping == "optimized") {
      throw usage_error("aa does not take optimized damping; use method aaoptd");
    } else {
      throw usage_error("unknown damping: " + opt.damping);
    }
    return spec;
  }

  // aaoptd
  if (!opt.damping.empty() && opt.damping != "optimized") {
    throw usage_error("aaoptd requires optimized damping");
  }
  if (opt.beta >= 0.0) throw usage_error("aaoptd takes no constant beta");
  SafeguardStrategy guard;
  if (!opt.safeguard.empty()) {
    guard = parse_safeguard(opt.safeguard, opt.eta >= 0.0 ? opt.eta : 0.3);
  } else if (opt.eta >= 0.0) {
    throw usage_error("--eta needs --safeguard clamp or flip");
  } else {
    guard = SafeguardStrategy::Raw();
  }
  spec.damping = DampingPolicy::Optimized(guard);
  return spec;
}

} // namespace

ExperimentSpec parse_method_block(const std::string& block, const std::string& problem,
                                  double tolerance, int max_iterations) {
  MethodOptions opt;
  std::string rest;
  const auto colon = block.find(':');
  opt.method = block.substr(0, colon);
  if (colon != std::string::npos) {
    rest = block.substr(colon + 1);
  }
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw usage_error("malformed compare block entry: " + item);
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      if (key == "m" || key == "window") {
        opt.window = std::stoi(value);
      } else if (key == "damping") {
        opt.damping = value;
      } else if (key == "beta") {
        opt.beta = std::stod(value);
      } else if (key == "safeguard") {
        opt.safeguard = value;
      } else if (key == "eta") {
        opt.eta = std::stod(value);
      } else {
        throw usage_error("unknown compare block key: " + key);
      }
    } catch (const std::logic_error&) {
      throw usage_error("bad value in compare block entry: " + item);
    }
  }
  ExperimentSpec spec = resolve_spec(opt, problem, tolerance, max_iterations);
  spec.validate();
  return spec;
}

RunPlan parse_args(const std::vector<std::string>& args, bool& help_requested,
                   std::string& help_text) {
  help_requested = false;
  help_text.clear();

  CLI::App app{"fixed-point acceleration benchmark runner"};
  std::string problem;
  MethodOptions opt;
  double tolerance = 1e-10;
  int max_iterations = 200;
  std::string out;
  unsigned long seed = 0;
  std::vector<std::string> compare_blocks;

  app.add_option("--problem", problem, "catalog problem name")->required();
  app.add_option("--method", opt.method, "picard | aa | aaoptd");
  app.add_option("--window", opt.window, "history window size m");
  app.add_option("--damping", opt.damping, "none | constant | optimized");
  app.add_option("--beta", opt.beta, "constant damping factor in (0,1]");
  app.add_option("--safeguard", opt.safeguard, "raw | clamp | flip");
  app.add_option("--eta", opt.eta, "safeguard threshold in (0,0.5)");
  app.add_option("--tol", tolerance, "residual 2-norm stopping threshold");
  app.add_option("--max-iters", max_iterations, "iteration cap");
  app.add_option("--out", out, "trace / comparison output path");
  app.add_option("--seed", seed, "reserved; catalog problems are deterministic");
  app.add_option("--compare", compare_blocks,
                 "method block 'method[:k=v,...]' (repeatable; keys m, damping, "
                 "beta, safeguard, eta)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    help_requested = true;
    help_text = app.help();
    return {};
  } catch (const CLI::ParseError& e) {
    throw usage_error(e.what());
  }

  RunPlan plan;
  if (!compare_blocks.empty()) {
    if (!opt.method.empty() || opt.window >= 0 || !opt.damping.empty() ||
        opt.beta >= 0.0 || !opt.safeguard.empty() || opt.eta >= 0.0) {
      throw usage_error("use either --method with its flags or --compare blocks, not both");
    }
    plan.comparison = true;
    for (const auto& block : compare_blocks) {
      plan.specs.push_back(parse_method_block(block, problem, tolerance, max_iterations));
      plan.specs.back().seed = seed;
    }
    plan.compare_out = out.empty() ? problem + "_compare.csv" : out;
    return plan;
  }

  if (opt.method.empty()) {
    throw usage_error("--method is required (or give --compare blocks)");
  }
  ExperimentSpec spec = resolve_spec(opt, problem, tolerance, max_iterations);
  spec.seed = seed;
  spec.out_path = out;
  spec.validate();
  plan.specs.push_back(std::move(spec));
  return plan;
}

namespace {

SolverConfig config_for(const ExperimentSpec& spec) {
  SolverConfig cfg;
  cfg.window_size = spec.window;
  cfg.tolerance = spec.tolerance;
  cfg.max_iterations = spec.max_iterations;
  cfg.damping = spec.damping;
  return cfg;
}

std::string field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

} // namespace

void write_trace(const std::string& path, const SolveReport& report) {
  std::ofstream out(path);
  if (!out) {
    throw io_error("cannot open trace file: " + path);
  }
  out << "iter,residual_norm,beta_raw,beta_applied,theta,m_k,g_evals,elapsed_ms\n";
  for (const auto& rec : report.trace) {
    char elapsed[32];
    std::snprintf(elapsed, sizeof(elapsed), "%.3f", rec.elapsed_ms);
    out << rec.iteration << ',' << format_double(rec.residual_norm) << ','
        << field(rec.beta_raw) << ',' << format_double(rec.beta_applied) << ','
        << field(rec.theta) << ',' << rec.active_window << ',' << rec.g_evaluations
        << ',' << elapsed << '\n';
  }
  if (!out) {
    throw io_error("failed writing trace file: " + path);
  }
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult result;
  result.spec = spec;

  FixedPointProblem problem;
  try {
    problem = catalog_lookup(spec.problem).make();
  } catch (const std::out_of_range& e) {
    throw usage_error(e.what());
  }

  const SolverConfig cfg = config_for(spec);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    result.report = spec.method == Method::picard ? solve_picard(problem, cfg)
                                                  : solve_aa(problem, cfg);
  } catch (const divergence_error& e) {
    result.report = e.partial_report();
    result.diverged = true;
    result.divergence_reason = e.what();
  }
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();

  result.trace_path =
      spec.out_path.empty() ? spec.problem + "_" + spec.label() + ".csv" : spec.out_path;
  write_trace(result.trace_path, result.report);
  return result;
}

std::vector<ExperimentResult> compare_experiments(const std::vector<ExperimentSpec>& specs,
                                                  const std::string& out_path) {
  if (specs.empty()) {
    throw usage_error("--compare needs at least one method block");
  }
  for (const auto& spec : specs) {
    if (spec.problem != specs.front().problem) {
      throw usage_error("comparison members must share one problem");
    }
  }
  std::vector<ExperimentResult> results;
  results.reserve(specs.size());
  for (auto spec : specs) {
    if (spec.out_path.empty()) {
      spec.out_path = spec.problem + "_" + spec.label() + ".csv";
    }
    results.push_back(run_experiment(spec));
  }
  write_comparison(out_path, results);
  return results;
}

void write_comparison(const std::string& path, const std::vector<ExperimentResult>& results) {
  std::ofstream out(path);
  if (!out) {
    throw io_error("cannot open comparison file: " + path);
  }
  out << "iter";
  size_t rows = 0;
  for (const auto& r : results) {
    out << ',' << r.spec.label();
    rows = std::max(rows, r.report.trace.size());
  }
  out << '\n';
  for (size_t i = 0; i < rows; ++i) {
    out << (i + 1);
    for (const auto& r : results) {
      out << ',';
      if (i < r.report.trace.size()) {
        out << format_double(r.report.trace[i].residual_norm);
      }
    }
    out << '\n';
  }
  if (!out) {
    throw io_error("failed writing comparison file: " + path);
  }
}

std::string summary_line(const ExperimentResult& r) {
  std::ostringstream os;
  os << "problem=" << r.spec.problem << " method=" << method_name(r.spec.method)
     << " label=" << r.spec.label() << " m=" << r.spec.window
     << " converged=" << (r.report.converged ? "yes" : "no")
     << " iterations=" << r.report.iterations_used
     << " final_residual=" << format_short(r.report.final_residual_norm)
     << " g_evals=" << (r.report.trace.empty() ? 0 : r.report.trace.back().g_evaluations)
     << " wall_ms=" << format_short(r.wall_ms);
  if (r.diverged) {
    os << " diverged=yes";
  }
  return os.str();
}

std::string summary_json(const ExperimentResult& r) {
  nlohmann::json j;
  j["problem"] = r.spec.problem;
  j["method"] = method_name(r.spec.method);
  j["label"] = r.spec.label();
  j["window"] = r.spec.window;
  j["tolerance"] = r.spec.tolerance;
  j["max_iterations"] = r.spec.max_iterations;
  j["converged"] = r.report.converged;
  j["diverged"] = r.diverged;
  j["iterations"] = r.report.iterations_used;
  j["final_residual"] = r.report.final_residual_norm;
  j["g_evaluations"] =
      r.report.trace.empty() ? 0 : r.report.trace.back().g_evaluations;
  j["wall_ms"] = r.wall_ms;
  j["trace"] = r.trace_path;
  return j.dump();
}

std::vector<std::string> ranking(const std::vector<ExperimentResult>& results) {
  std::vector<const ExperimentResult*> order;
  order.reserve(results.size());
  for (const auto& r : results) {
    order.push_back(&r);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const ExperimentResult* a, const ExperimentResult* b) {
                     const int ia = a->report.converged ? a->report.iterations_used
                                                        : std::numeric_limits<int>::max();
                     const int ib = b->report.converged ? b->report.iterations_used
                                                        : std::numeric_limits<int>::max();
                     return ia < ib;
                   });
  std::vector<std::string> labels;
  labels.reserve(order.size());
  for (const auto* r : order) {
    labels.push_back(r->spec.label());
  }
  return labels;
}

} // namespace fpacc
