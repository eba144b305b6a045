// monmf command-line tool: scenario synthesis, single fits, and method
// comparisons with machine-readable reports.
//
// Exit codes: 0 success, 2 usage error, 3 data/precondition error,
// 4 numerical failure (--strict and a fit did not converge), 1 unexpected.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "monmf/monmf.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace monmf;

namespace {

// ---------------------------------------------------------------- logging

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("MONMF_LOG");
    if (env == nullptr) return LogLevel::error;
    const std::string v(env);
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    return LogLevel::error;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::info) std::cerr << "monmf: " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::debug)
    std::cerr << "monmf[debug]: " << msg << "\n";
}

// A command-line problem discovered after CLI11 parsing (bad pattern
// tokens, inconsistent lengths, ...): exit code 2 rather than 3.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------- formatting

const char* to_string(Termination t) {
  return t == Termination::converged ? "converged" : "max_iterations";
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MonotonicityPattern parse_pattern(const std::string& text) {
  MonotonicityPattern pattern;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string tok =
        text.substr(start, comma == std::string::npos ? std::string::npos
                                                      : comma - start);
    try {
      pattern.push_back(direction_from_string(tok));
    } catch (const std::invalid_argument&) {
      throw UsageError("bad pattern entry '" + tok +
                       "' (expected inc or dec)");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return pattern;
}

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    out.push_back(text.substr(start, comma == std::string::npos
                                         ? std::string::npos
                                         : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// ------------------------------------------------------------ fit plumbing

struct FitFlags {
  std::uint64_t seed = 0;
  int max_iter = 500;
  double tol = 1e-6;
  double inner_tol = 1e-8;
  std::string backend = "pava-pgd";
  bool no_normalize = false;
  bool clamp_negatives = false;
  bool strict = false;
};

FitOptions make_options(const FitFlags& flags) {
  FitOptions options;
  options.seed = flags.seed;
  options.max_outer_iter = flags.max_iter;
  options.tol = flags.tol;
  options.inner_tol = flags.inner_tol;
  options.normalize = !flags.no_normalize;
  if (flags.backend == "pava-pgd")
    options.h_backend = HBackend::pava_pgd;
  else if (flags.backend == "generic-qp")
    options.h_backend = HBackend::generic_qp;
  else
    throw UsageError("unknown backend '" + flags.backend + "'");
  return options;
}

bool method_is_monotone(const std::string& method) {
  return method == "mnmf" || method == "msemi";
}

FactorResult dispatch_fit(const std::string& method, const DenseMatrix& z,
                          Index rank, const MonotonicityPattern& pattern,
                          const FitOptions& options) {
  if (method == "mnmf") return fit_monotonous_nmf(z, rank, pattern, options);
  if (method == "msemi")
    return fit_monotonous_semi_nmf(z, rank, pattern, options);
  if (method == "nnmf-mult") return fit_nmf_multiplicative(z, rank, options);
  if (method == "nmf-als") return fit_nmf_als(z, rank, options);
  throw UsageError("unknown method '" + method + "'");
}

json options_to_json(const FitOptions& options) {
  json j;
  j["seed"] = options.seed;
  j["max_outer_iter"] = options.max_outer_iter;
  j["tol"] = options.tol;
  j["inner_tol"] = options.inner_tol;
  j["h_backend"] =
      options.h_backend == HBackend::pava_pgd ? "pava-pgd" : "generic-qp";
  j["normalize"] = options.normalize;
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_trace_csv(const fs::path& path, const FactorResult& fit) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path.string());
  out << "iter,objective,w_change,h_change\n";
  for (std::size_t k = 0; k < fit.objective_trace.size(); ++k)
    out << (k + 1) << ',' << format_g17(fit.objective_trace[k]) << ','
        << format_g17(fit.w_change_trace[k]) << ','
        << format_g17(fit.h_change_trace[k]) << "\n";
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// --------------------------------------------------------------- commands

struct SynthArgs {
  std::string scenario;
  std::uint64_t seed = 0;
  double noise = 0.05;
  std::string out_dir;
};

int cmd_synth(const SynthArgs& args) {
  ScenarioData sd =
      generate_scenario(scenario_from_string(args.scenario), args.seed,
                        args.noise);
  save_scenario(args.out_dir, sd);
  log_info("wrote scenario bundle to " + args.out_dir);
  return 0;
}

struct FitArgs {
  std::string method;
  std::string data_path;
  Index rank = 0;
  std::string pattern_text;
  std::string out_dir;
  FitFlags flags;
};

int cmd_fit(const FitArgs& args) {
  MonotonicityPattern pattern;
  if (!args.pattern_text.empty()) pattern = parse_pattern(args.pattern_text);

  if (method_is_monotone(args.method)) {
    if (pattern.empty())
      throw UsageError("--pattern is required for " + args.method +
                       " (e.g. --pattern inc,inc,dec)");
    if (pattern.size() != static_cast<std::size_t>(args.rank))
      throw UsageError("pattern length " + std::to_string(pattern.size()) +
                       " does not match rank " + std::to_string(args.rank));
  } else if (!pattern.empty()) {
    log_info("method " + args.method + " ignores --pattern");
  }

  DenseMatrix z = read_matrix_csv(args.data_path);
  log_debug("read " + std::to_string(z.rows()) + "x" +
            std::to_string(z.cols()) + " matrix from " + args.data_path);
  bool clamped = false;
  if (args.flags.clamp_negatives && (z.view().array() < 0.0).any()) {
    z = DenseMatrix::from_eigen(z.eigen().cwiseMax(0.0));
    clamped = true;
    log_info("negative entries clamped to zero");
  }

  const FitOptions options = make_options(args.flags);
  log_info("fitting " + args.method + " rank " + std::to_string(args.rank) +
           " on " + args.data_path);
  const auto t0 = std::chrono::steady_clock::now();
  FactorResult fit;
  try {
    fit = dispatch_fit(args.method, z, args.rank, pattern, options);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("fit " + args.method + " on " +
                                args.data_path + ": " + e.what());
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  log_info("finished in " + std::to_string(fit.outer_iterations) +
           " iterations (" + to_string(fit.termination) + ")");

  fs::create_directories(args.out_dir);
  const fs::path base(args.out_dir);
  write_matrix_csv((base / "W.csv").string(), fit.w);
  write_matrix_csv((base / "H.csv").string(), fit.h);
  write_trace_csv(base / "trace.csv", fit);

  json report;
  report["schema_version"] = 1;
  report["method"] = args.method;
  report["seed"] = args.flags.seed;
  report["scenario"] = "custom";
  report["reconstruction_error"] = reconstruction_error(z, fit.w, fit.h);
  report["h_effective_rank"] = effective_rank(fit.h);
  report["per_source_signal_error"] = json::array();  // no ground truth
  report["monotonicity_feasible"] =
      !pattern.empty() && pattern_feasible(fit.h.eigen(), pattern);
  report["outer_iterations"] = fit.outer_iterations;
  report["termination"] = to_string(fit.termination);
  report["wall_time_s"] = wall;
  report["diagnostics"] = fit.diagnostics;

  json config = options_to_json(options);
  config["method"] = args.method;
  config["data"] = args.data_path;
  config["rank"] = args.rank;
  config["pattern"] =
      pattern.empty() ? json(nullptr) : pattern_to_json(pattern);
  config["clamp_negatives"] = args.flags.clamp_negatives;
  config["clamped"] = clamped;
  config["strict"] = args.flags.strict;
  report["config"] = config;
  write_json(base / "report.json", report);

  for (const auto& d : fit.diagnostics) log_info("diagnostic: " + d);
  if (args.flags.strict && fit.termination != Termination::converged) {
    std::cerr << "monmf: fit did not converge within "
              << options.max_outer_iter << " iterations (strict mode)\n";
    return 4;
  }
  return 0;
}

struct CompareArgs {
  std::string scenario;
  std::uint64_t seed = 0;
  double noise = 0.05;
  std::string methods_text = "mnmf,nnmf-mult,nmf-als";
  std::string out_dir;
  FitFlags flags;
};

int cmd_compare(const CompareArgs& args) {
  const std::vector<std::string> methods = split_csv_list(args.methods_text);
  for (const auto& m : methods)
    if (m != "mnmf" && m != "msemi" && m != "nnmf-mult" && m != "nmf-als")
      throw UsageError("unknown method '" + m + "'");
  if (methods.empty()) throw UsageError("empty --methods list");

  ScenarioData sd = generate_scenario(scenario_from_string(args.scenario),
                                      args.seed, args.noise);
  const Index rank = sd.h_true.rows();

  // One shared input for every method: the baselines require Z >= 0, and
  // comparing methods on different matrices would be meaningless.
  const bool clamped = (sd.z_noisy.view().array() < 0.0).any();
  const DenseMatrix z =
      clamped ? DenseMatrix::from_eigen(sd.z_noisy.eigen().cwiseMax(0.0))
              : sd.z_noisy;
  if (clamped) log_info("noisy data clamped at zero for all methods");

  FitOptions options = make_options(args.flags);
  options.seed = args.seed;  // scenario seed doubles as the fit seed

  json entries = json::array();
  std::vector<std::pair<std::string, FactorResult>> fits;
  bool partial = false;
  bool all_converged = true;
  for (const auto& method : methods) {
    log_info("fitting " + method);
    try {
      FactorResult fit = dispatch_fit(method, z, rank, sd.pattern, options);
      EvalReport rep =
          evaluate_factors(method, z, fit, &sd.pattern, &sd.h_true);
      json e;
      e["method"] = rep.method;
      e["reconstruction_error"] = rep.reconstruction_error;
      e["h_effective_rank"] = rep.h_effective_rank;
      e["per_source_signal_error"] = rep.per_source_signal_error;
      e["monotonicity_feasible"] = rep.monotonicity_feasible;
      e["outer_iterations"] = rep.outer_iterations;
      e["termination"] = to_string(rep.termination);
      e["diagnostics"] = fit.diagnostics;
      entries.push_back(e);
      all_converged =
          all_converged && fit.termination == Termination::converged;
      fits.emplace_back(method, std::move(fit));
    } catch (const std::exception& e) {
      log_info(method + " failed: " + e.what());
      json err;
      err["method"] = method;
      err["error"] = e.what();
      entries.push_back(err);
      partial = true;
    }
  }

  fs::create_directories(args.out_dir);
  const fs::path base(args.out_dir);

  json report;
  report["schema_version"] = 1;
  report["scenario"] = to_string(sd.scenario);
  report["seed"] = args.seed;
  report["noise_level"] = args.noise;
  report["clamped"] = clamped;
  report["partial"] = partial;
  report["methods"] = entries;
  json config = options_to_json(options);
  config["methods"] = methods;
  config["rank"] = rank;
  config["strict"] = args.flags.strict;
  report["config"] = config;
  write_json(base / "comparison.json", report);

  // Plot-ready table: true sources and each method's estimate aligned to
  // them (best permutation, nonnegative per-row scale).
  std::ofstream sig(base / "signals.csv");
  if (!sig)
    throw std::runtime_error("cannot open for writing: " +
                             (base / "signals.csv").string());
  sig << "sample";
  for (Index k = 0; k < rank; ++k) sig << ",true_" << (k + 1);
  for (const auto& [method, fit] : fits)
    for (Index k = 0; k < rank; ++k)
      sig << ',' << method << "_" << (k + 1);
  sig << "\n";
  std::vector<AlignmentResult> aligned;
  aligned.reserve(fits.size());
  for (const auto& [method, fit] : fits)
    aligned.push_back(align_signals(fit.h, sd.h_true));
  for (Index j = 0; j < sd.h_true.cols(); ++j) {
    sig << (j + 1);
    for (Index k = 0; k < rank; ++k)
      sig << ',' << format_g17(sd.h_true(k, j));
    for (std::size_t f = 0; f < fits.size(); ++f) {
      const auto& al = aligned[f];
      const auto& h = fits[f].second.h;
      for (Index k = 0; k < rank; ++k) {
        const Index src = al.permutation[static_cast<std::size_t>(k)];
        sig << ','
            << format_g17(al.scales[static_cast<std::size_t>(k)] *
                          h(src, j));
      }
    }
    sig << "\n";
  }
  sig.flush();
  if (!sig)
    throw std::runtime_error("write failed: " +
                             (base / "signals.csv").string());

  if (fits.empty()) {
    std::cerr << "monmf: every method failed\n";
    return 3;
  }
  if (args.flags.strict && (partial || !all_converged)) {
    std::cerr << "monmf: not all methods converged (strict mode)\n";
    return 4;
  }
  return 0;
}

void add_fit_flags(CLI::App* cmd, FitFlags& flags) {
  cmd->add_option("--max-iter", flags.max_iter,
                  "outer iteration limit")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol", flags.tol, "outer stopping tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--inner-tol", flags.inner_tol, "subproblem tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--backend", flags.backend,
                  "H update backend: pava-pgd or generic-qp")
      ->check(CLI::IsMember({"pava-pgd", "generic-qp"}));
  cmd->add_flag("--no-normalize", flags.no_normalize,
                "skip per-iteration row normalization of H");
  cmd->add_flag("--strict", flags.strict,
                "exit 4 when a fit stops at its iteration limit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monotonous (semi-)nonnegative matrix factorization"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a synthetic scenario bundle (CSV + meta.json)");
  synth->add_option("--scenario", synth_args.scenario, "s1 or s2")
      ->required()
      ->check(CLI::IsMember({"s1", "s2"}));
  synth->add_option("--seed", synth_args.seed, "scenario RNG seed");
  synth->add_option("--noise", synth_args.noise,
                    "noise amplitude as a fraction of the data range")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--out", synth_args.out_dir, "output directory")
      ->required();

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand(
      "fit", "fit one method to a CSV matrix and write factors + report");
  fit->add_option("--method", fit_args.method,
                  "mnmf, msemi, nnmf-mult, or nmf-als")
      ->required()
      ->check(CLI::IsMember({"mnmf", "msemi", "nnmf-mult", "nmf-als"}));
  fit->add_option("--data", fit_args.data_path, "input matrix CSV")
      ->required();
  fit->add_option("--rank", fit_args.rank, "number of sources")
      ->required()
      ->check(CLI::PositiveNumber);
  fit->add_option("--pattern", fit_args.pattern_text,
                  "per-source directions, e.g. inc,inc,dec");
  fit->add_option("--seed", fit_args.flags.seed, "RNG seed for initialization");
  fit->add_option("--out", fit_args.out_dir, "output directory")->required();
  fit->add_flag("--clamp-negatives", fit_args.flags.clamp_negatives,
                "clamp negative data entries to zero before fitting");
  add_fit_flags(fit, fit_args.flags);

  CompareArgs cmp_args;
  CLI::App* cmp = app.add_subcommand(
      "compare",
      "generate a scenario and fit several methods on the same data");
  cmp->add_option("--scenario", cmp_args.scenario, "s1 or s2")
      ->required()
      ->check(CLI::IsMember({"s1", "s2"}));
  cmp->add_option("--seed", cmp_args.seed,
                  "scenario seed (also used as the fit seed)");
  cmp->add_option("--noise", cmp_args.noise,
                  "noise amplitude as a fraction of the data range")
      ->check(CLI::NonNegativeNumber);
  cmp->add_option("--methods", cmp_args.methods_text,
                  "comma-separated subset of mnmf,msemi,nnmf-mult,nmf-als");
  cmp->add_option("--out", cmp_args.out_dir, "output directory")->required();
  add_fit_flags(cmp, cmp_args.flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_args);
    if (fit->parsed()) return cmd_fit(fit_args);
    return cmd_compare(cmp_args);
  } catch (const UsageError& e) {
    std::cerr << "monmf: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "monmf: " << e.what() << "\n";
    return 3;
  } catch (const std::runtime_error& e) {
    std::cerr << "monmf: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "monmf: unexpected error: " << e.what() << "\n";
    return 1;
  }
}
