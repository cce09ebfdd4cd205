#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "volsamp/volsamp.hpp"

namespace volsamp::cli {

// Exit codes shared by all subcommands.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kIo = 2,
  kParse = 3,
  kUsage = 4,
  kRank = 5,
  kBlowup = 6,
};

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError: return kIo;
    case ErrorCode::ParseError:
    case ErrorCode::NonFiniteEntry:
    case ErrorCode::NonPositiveWeight:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::InvalidGrid:
    case ErrorCode::SpectrumTooLong: return kParse;
    case ErrorCode::UnknownStrategy:
    case ErrorCode::InvalidArgument:
    case ErrorCode::IndexOutOfRange: return kUsage;
    case ErrorCode::RankDeficient: return kRank;
    case ErrorCode::CombinatorialBlowup: return kBlowup;
    default: return kCheckFailed;
  }
}

using nlohmann::json;

inline std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline json one_based(const IndexList& indices) {
  json out = json::array();
  for (std::size_t i : indices) out.push_back(i + 1);
  return out;
}

inline json to_json(const SelectionResult& s) {
  return {{"indices", one_based(s.indices)},
          {"squared_error", s.squared_error},
          {"method", s.method},
          {"draws_used", s.draws_used},
          {"padded", s.padded}};
}

inline json to_json(const BoundCertificate& c) {
  return {{"k", c.k},
          {"optimal_tail_squared", c.optimal_tail_squared},
          {"achieved_squared_error", c.achieved_squared_error},
          {"prefactor_squared", c.prefactor_squared ? json(*c.prefactor_squared) : json(nullptr)},
          {"bound_squared", c.bound_squared()},
          {"satisfied", c.satisfied}};
}

struct InstanceSource {
  std::string values_path;
  std::string weights_path;
  std::string spec_path;

  DiscretizedFunction load(json& description) const {
    if (!spec_path.empty() && !values_path.empty())
      throw Error(ErrorCode::InvalidArgument, "--values and --spec are mutually exclusive");
    if (!spec_path.empty()) {
      const InstanceSpec spec = read_instance_spec(spec_path);
      DiscretizedFunction f = generate(spec);
      description = {{"source", "spec"}, {"path", spec_path}, {"spec", volsamp::to_json(spec)}};
      description["m"] = f.dimension();
      description["n"] = f.num_points();
      return f;
    }
    if (values_path.empty()) throw Error(ErrorCode::InvalidArgument, "one of --values or --spec is required");
    DiscretizedFunction f = load_function(values_path, weights_path);
    description = {{"source", "csv"},
                   {"values", values_path},
                   {"weights", weights_path.empty() ? json(nullptr) : json(weights_path)},
                   {"m", f.dimension()},
                   {"n", f.num_points()}};
    return f;
  }
};

/// Everything a command prints; reproducible from the command line and seed.
struct RunReport {
  std::string command;
  json instance;
  json body = json::object();
  std::optional<std::uint64_t> seed;
  std::optional<double> wall_seconds;

  json to_json() const {
    json out = {{"command", command}, {"instance", instance}};
    if (seed) out["seed"] = *seed;
    for (auto it = body.begin(); it != body.end(); ++it) out[it.key()] = it.value();
    if (wall_seconds) out["wall_seconds"] = *wall_seconds;
    return out;
  }
};

struct Options {
  InstanceSource source;
  std::vector<std::size_t> ks;
  std::string strategy = "exhaustive";
  std::size_t draws = 16;
  std::uint64_t seed = 0;
  std::string method = "kdpp";
  std::optional<std::size_t> mcmc_steps;
  std::size_t max_enum = kDefaultEnumerationLimit;
  double rank_tol = kDefaultRankTolerance;
  double tolerance = 1e-9;
  double corrupt_gram = 0.0;
  bool json_output = false;
  bool timing = false;
  std::string out_values;
  std::string out_weights;
};

inline RunReport cmd_decompose(const Options& opt, std::ostream& out) {
  RunReport report;
  report.command = "decompose";
  const DiscretizedFunction f = opt.source.load(report.instance);
  const SchmidtDecomposition d = schmidt_decompose(f, opt.rank_tol);

  json sigma = json::array();
  for (Eigen::Index i = 0; i < d.sigma.size(); ++i) sigma.push_back(d.sigma(i));
  json tails = json::array();
  for (std::size_t k : opt.ks) tails.push_back({{"k", k}, {"d_k", tail_width(d, k)}});
  report.body = {{"rank", d.rank()},
                 {"sigma", sigma},
                 {"total_l2_norm_squared", total_l2_norm_squared(f)},
                 {"tail_widths", tails}};

  if (!opt.json_output) {
    out << "rank " << d.rank() << "\nsigma";
    for (Eigen::Index i = 0; i < d.sigma.size(); ++i) out << ' ' << fmt17(d.sigma(i));
    out << '\n';
    for (std::size_t k : opt.ks) out << "d_" << k << ' ' << fmt17(tail_width(d, k)) << '\n';
  }
  return report;
}

inline RunReport cmd_select(const Options& opt, std::ostream& out) {
  RunReport report;
  report.command = "select";
  report.seed = opt.seed;
  const Strategy strategy = parse_strategy(opt.strategy);
  if (strategy == Strategy::VolumeBestOf && opt.draws < 1)
    throw Error(ErrorCode::InvalidArgument, "--draws must be at least 1");
  const DiscretizedFunction f = opt.source.load(report.instance);
  const SchmidtDecomposition d = schmidt_decompose(f, opt.rank_tol);

  SamplerConfig config;
  config.seed = opt.seed;
  config.method = parse_sampling_method(opt.method);
  config.mcmc_steps = opt.mcmc_steps;
  config.max_enumeration = opt.max_enum;

  json results = json::array();
  for (std::size_t k : opt.ks) {
    if (k > f.num_points())
      throw Error(ErrorCode::InvalidArgument, "k = " + std::to_string(k) + " exceeds n");
    SelectionResult sel = run_strategy(f, k, strategy, config, opt.draws);
    const BoundCertificate cert =
        make_certificate(k, tail_width_squared(d, k), sel, total_l2_norm_squared(f));

    json analytic = {{"tail_width", tail_width(d, k)},
                     {"tail_width_squared", tail_width_squared(d, k)},
                     {"expected_volume", expected_volume(d, k)}};
    analytic["expected_projection_error"] =
        (k >= 1 && k <= d.rank()) ? json(expected_projection_error(d, k)) : json(nullptr);

    results.push_back({{"k", k},
                       {"strategy", std::string(to_string(strategy))},
                       {"selection", to_json(sel)},
                       {"certificate", to_json(cert)},
                       {"analytic", analytic}});

    if (!opt.json_output) {
      out << "k " << k << " strategy " << to_string(strategy) << "\n  indices";
      for (std::size_t i : sel.indices) out << ' ' << i + 1;
      out << "\n  squared_error " << fmt17(sel.squared_error) << "\n  optimal_tail_squared "
          << fmt17(cert.optimal_tail_squared) << "\n  prefactor_squared "
          << (cert.prefactor_squared ? fmt17(*cert.prefactor_squared) : std::string("undefined (d_k = 0)"))
          << "\n  bound " << (cert.satisfied ? "satisfied" : "NOT satisfied") << '\n';
      if (sel.padded) out << "  note: rank < k, sample padded with uniform draws\n";
    }
  }
  report.body = {{"method", opt.method}, {"draws", opt.draws}, {"results", results}};
  return report;
}

inline RunReport cmd_verify(const Options& opt, std::ostream& out, bool& passed) {
  RunReport report;
  report.command = "verify";
  const DiscretizedFunction f = opt.source.load(report.instance);

  VerifyOptions vopt;
  vopt.ks = opt.ks;
  vopt.tolerance = opt.tolerance;
  vopt.max_enumeration = opt.max_enum;
  vopt.gram_corruption = opt.corrupt_gram;
  const VerifyReport vr = verify_identities(f, vopt);
  passed = vr.all_passed();

  json checks = json::array();
  for (const IdentityCheck& c : vr.checks) {
    checks.push_back({{"name", c.name},
                      {"k", c.k},
                      {"status", c.skipped ? "skipped" : (c.passed ? "pass" : "fail")},
                      {"max_deviation", c.max_deviation},
                      {"tolerance", c.tolerance},
                      {"evaluations", c.evaluations}});
    if (!opt.json_output) {
      out << (c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL")) << ' ' << c.name << " k=" << c.k;
      if (!c.skipped) out << " max_deviation=" << fmt17(c.max_deviation) << " tol=" << fmt17(c.tolerance);
      if (!c.note.empty()) out << " (" << c.note << ')';
      out << '\n';
    }
  }
  report.body = {{"checks", checks}, {"passed", passed}};
  if (!opt.json_output) out << (passed ? "all identities hold\n" : "identity check FAILED\n");
  return report;
}

inline RunReport cmd_generate(const Options& opt, std::ostream& out) {
  RunReport report;
  report.command = "generate";
  const DiscretizedFunction f = opt.source.load(report.instance);
  auto write_to = [](const std::string& path, const Matrix& m) {
    std::ofstream file(path);
    if (!file) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    write_matrix_csv(file, m);
  };
  if (!opt.out_values.empty()) {
    write_to(opt.out_values, f.values());
    if (!opt.out_weights.empty()) write_to(opt.out_weights, f.weights());
  } else if (!opt.json_output) {
    write_matrix_csv(out, f.values());
  }
  return report;
}

/**
 * Runs one CLI invocation. args excludes the program name. Returns the
 * process exit code; all output goes to `out` and diagnostics to `err`.
 */
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Volume sampling for sample-based subspace approximation", "volsamp"};
  app.require_subcommand(1);
  Options opt;

  auto add_instance = [&](CLI::App* sub) {
    sub->add_option("--values", opt.source.values_path, "CSV of function values (rows = coordinates)");
    sub->add_option("--weights", opt.source.weights_path, "single-column CSV of point weights");
    sub->add_option("--spec", opt.source.spec_path, "JSON instance spec (instead of --values)");
    sub->add_flag("--json", opt.json_output, "print a JSON report");
    sub->add_flag("--timing", opt.timing, "include wall time in the JSON report");
  };

  CLI::App* decompose = app.add_subcommand("decompose", "weighted Schmidt decomposition and tail widths");
  add_instance(decompose);
  decompose->add_option("--rank-tol", opt.rank_tol, "relative singular value cutoff");

  CLI::App* select = app.add_subcommand("select", "choose k sample points and certify the error bound");
  add_instance(select);
  select->add_option("--strategy", opt.strategy,
                     "exhaustive | volume-best-of | greedy-residual | greedy-volume");
  select->add_option("--draws", opt.draws, "number of volume samples for volume-best-of");
  select->add_option("--seed", opt.seed, "RNG seed");
  select->add_option("--method", opt.method, "sampler: enumerate | kdpp | mcmc");
  select->add_option("--mcmc-steps", opt.mcmc_steps, "MCMC chain length (default 50 n k)");
  select->add_option("--max-enum", opt.max_enum, "cap on enumerated subsets");
  select->add_option("--rank-tol", opt.rank_tol, "relative singular value cutoff");

  CLI::App* verify = app.add_subcommand("verify", "brute-force check of the volume-sampling identities");
  add_instance(verify);
  verify->add_option("--max-enum", opt.max_enum, "cap on enumerated tuples and subsets");
  verify->add_option("--tolerance", opt.tolerance, "relative tolerance for identity checks");
  verify->add_option("--corrupt-gram", opt.corrupt_gram, "test hook: perturb Gram entries by this factor");

  CLI::App* gen = app.add_subcommand("generate", "materialize an instance spec as CSV");
  add_instance(gen);
  gen->add_option("--out-values", opt.out_values, "write values CSV here");
  gen->add_option("--out-weights", opt.out_weights, "write weights CSV here");

  // Defaults for --k are applied after parsing: verify uses 1,2,3, the others 1.
  for (CLI::App* sub : {decompose, select, verify})
    sub->add_option("--k", opt.ks, "comma-separated subset sizes")->delimiter(',');

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }
  if (opt.ks.empty()) opt.ks = *verify ? std::vector<std::size_t>{1, 2, 3} : std::vector<std::size_t>{1};

  const auto start = std::chrono::steady_clock::now();
  try {
    RunReport report;
    bool passed = true;
    if (*decompose)
      report = cmd_decompose(opt, out);
    else if (*select)
      report = cmd_select(opt, out);
    else if (*verify)
      report = cmd_verify(opt, out, passed);
    else
      report = cmd_generate(opt, out);

    if (opt.timing)
      report.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (opt.json_output) out << report.to_json().dump(2) << '\n';
    return passed ? kOk : kCheckFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
}

}  // namespace volsamp::cli
