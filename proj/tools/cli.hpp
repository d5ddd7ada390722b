#pragma once

// Command-line front end: `gen`, `measure` and `repro`. Kept in a header so
// the test suites can drive commands in-process.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcorr/mcorr.hpp"

namespace mcorr::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { ok = 0, flag_error = 2, data_error = 3, estimator_error = 4 };

/// Relative drop (in output standard deviations) above which a fitted g is
/// reported as non-monotone.
inline constexpr double non_monotone_threshold = 0.25;
/// A fitted g has a flat segment when it stays within
/// `flat_segment_tolerance` output sds over at least `flat_segment_threshold`
/// of its input range.
inline constexpr double flat_segment_tolerance = 0.05;
inline constexpr double flat_segment_threshold = 0.25;

inline Json knots_json(const EmpiricalTransform& t) {
  Json arr = Json::array();
  for (const Knot& k : t.knots()) arr.push_back({k.input, k.output});
  return arr;
}

inline Json result_json(const MeasureResult& r, const SampleTable& t) {
  Json j;
  j["measure"] = std::string(to_string(r.kind));
  j["value"] = r.value;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["e2"] = r.e2;
  j["e2_history"] = r.e2_history;
  j["diagnostics"] = r.diagnostics;
  Json f = Json::object();
  for (std::size_t k = 0; k < r.f.size(); ++k) f[t.predictor_names()[k]] = knots_json(r.f[k]);
  j["transforms"] = {{"g", r.g ? knots_json(*r.g) : Json::array()}, {"f", f}};
  return j;
}

/// Writes g.csv and f_<column>.csv under `dir`; returns the written paths.
inline std::vector<std::string> write_transforms(const std::filesystem::path& dir, const std::string& prefix,
                                                 const MeasureResult& r, const SampleTable& t) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  if (r.g) {
    const auto path = dir / (prefix + "g.csv");
    write_transform_csv(path, *r.g);
    paths.push_back(path.generic_string());
  }
  for (std::size_t k = 0; k < r.f.size(); ++k) {
    const auto path = dir / (prefix + "f_" + t.predictor_names()[k] + ".csv");
    write_transform_csv(path, r.f[k]);
    paths.push_back(path.generic_string());
  }
  return paths;
}

// ---------------------------------------------------------------------------
// repro

/// Fixed seeds for the repro scenarios.
inline const std::map<std::string, std::uint64_t>& repro_seeds() {
  static const std::map<std::string, std::uint64_t> seeds = {
      {"1", 1001}, {"2a", 2001}, {"2b", 2002}, {"3", 3001}, {"lsb", 4001}};
  return seeds;
}

inline constexpr int repro_lsb_bits = 6;

/// Smoother used by `repro`. Example 3 keeps the library default. The
/// others use equal-count bins of about 1000 samples, whose noise floor sits
/// well under the differences being compared, and lsb uses one bin per
/// attainable value so the shared parity is resolved.
inline SmootherSpec repro_smoother(const std::string& id, std::size_t n) {
  if (id == "lsb") return SmootherSpec::bins(std::min<std::size_t>(n, std::size_t{1} << (repro_lsb_bits + 1)));
  if (id == "3") return default_smoother(n);
  return SmootherSpec::bins(std::max<std::size_t>(2, (n + 500) / 1000));
}

struct ReproRun {
  Json report;
  std::vector<std::string> table_rows;  // aligned text lines
};

namespace detail {

struct Entry {
  std::string label;
  std::string slug;
  MeasureResult result;
  const SampleTable* table;
};

inline ReproRun assemble(const std::string& id, std::size_t n, std::uint64_t seed, const SmootherSpec& smoother,
                         const std::filesystem::path& out_dir, std::vector<Entry>& entries, Json checks) {
  ReproRun run;
  Json& rep = run.report;
  rep["example"] = id;
  rep["n"] = n;
  rep["seed"] = seed;
  rep["smoother"] = to_string(smoother);
  Json measures = Json::array();
  Json plots = Json::array();
  std::ostringstream header;
  header << std::left << std::setw(34) << "measure" << std::right << std::setw(10) << "value" << std::setw(8) << "iters"
         << std::setw(11) << "converged";
  run.table_rows.push_back(header.str());
  for (auto& e : entries) {
    Json m;
    m["label"] = e.label;
    m["measure"] = std::string(to_string(e.result.kind));
    m["predictors"] = e.table->predictor_names();
    m["response"] = e.table->response_name();
    m["value"] = e.result.value;
    m["iterations"] = e.result.iterations;
    m["converged"] = e.result.converged;
    m["diagnostics"] = e.result.diagnostics;
    if (e.result.g) {
      m["g_monotone_violation"] = relative_monotone_violation(*e.result.g);
      m["g_non_monotone"] = relative_monotone_violation(*e.result.g) > non_monotone_threshold;
      m["g_flat_fraction"] = largest_flat_fraction(*e.result.g, flat_segment_tolerance);
    }
    for (auto& p : write_transforms(out_dir, e.slug + "_", e.result, *e.table)) plots.push_back(p);
    measures.push_back(m);
    std::ostringstream row;
    row << std::left << std::setw(34) << e.label << std::right << std::setw(10) << std::fixed << std::setprecision(4)
        << e.result.value << std::setw(8) << e.result.iterations << std::setw(11)
        << (e.result.converged ? "yes" : "no");
    run.table_rows.push_back(row.str());
  }
  rep["measures"] = measures;
  rep["checks"] = std::move(checks);
  rep["plots"] = plots;
  return run;
}

}  // namespace detail

/// Regenerates one reference scenario and runs the measures compared for it.
/// Throws mcorr::Error on estimator failure.
inline ReproRun run_repro(const std::string& id, std::size_t n, const std::filesystem::path& out_dir) {
  const std::uint64_t seed = repro_seeds().at(id);
  const SmootherSpec smoother = repro_smoother(id, n);
  AceConfig cfg;
  cfg.smoother = smoother;
  cfg.seed = seed;

  GeneratorSpec spec;
  spec.n_samples = n;
  spec.seed = seed;
  std::vector<detail::Entry> entries;
  std::deque<SampleTable> tables;  // stable addresses for entries
  Json checks = Json::object();

  if (id == "1") {
    spec.scenario = Scenario::example1;
    const SampleTable& full = tables.emplace_back(generate(spec));
    const SampleTable& only1 = tables.emplace_back(full.select(0));
    const SampleTable& only2 = tables.emplace_back(full.select(1));
    entries.push_back({"maxcorr(y; x1)", "maxcorr_x1", ace_classic(only1, cfg), &only1});
    entries.push_back({"maxcorr(y; x2)", "maxcorr_x2", ace_classic(only2, cfg), &only2});
    entries.push_back({"maxcorr(y; x1, x2)", "maxcorr_x1_x2", ace_classic(full, cfg), &full});
    entries.push_back({"semi-mono(y; x1, x2)", "semi-mono_x1_x2", ace_semi_monotone(full, cfg), &full});
    const double diff = entries[3].result.value - entries[1].result.value;
    checks["maxcorr_x1_x2_g_non_monotone"] = relative_monotone_violation(*entries[2].result.g) > non_monotone_threshold;
    checks["maxcorr_x2_g_non_monotone"] = relative_monotone_violation(*entries[1].result.g) > non_monotone_threshold;
    checks["semi_mono_minus_maxcorr_x2"] = diff;
    checks["semi_mono_close_to_maxcorr_x2"] = std::abs(diff) <= 0.05;
  } else if (id == "2a") {
    spec.scenario = Scenario::circle;
    const SampleTable& t = tables.emplace_back(generate(spec));
    const GaKappa g = g_a_kappa(0.0, 0.5);
    const SampleTable& tg =
        tables.emplace_back(g.apply(t.y()), std::vector<std::vector<double>>{{t.x(0).begin(), t.x(0).end()}},
                            "g_0_0.5(y)", std::vector<std::string>{"x"});
    entries.push_back({"corr-ratio(y; x)", "corr-ratio_x", corr_ratio(t, cfg), &t});
    entries.push_back({"semi-mono(y; x)", "semi-mono_x", ace_semi_monotone(t, cfg), &t});
    entries.push_back({"corr-ratio(g_{0,0.5}(y); x)", "corr-ratio_gak_x", corr_ratio(tg, cfg), &tg});
    checks["corr_ratio"] = entries[0].result.value;
    checks["corr_ratio_near_zero"] = entries[0].result.value <= 0.05;
    checks["semi_mono_margin_over_corr_ratio"] = entries[1].result.value - entries[0].result.value;
    checks["g_a_kappa_corr_ratio"] = entries[2].result.value;
  } else if (id == "2b") {
    spec.scenario = Scenario::log_noise;
    const SampleTable& t = tables.emplace_back(generate(spec));
    entries.push_back({"corr-ratio(y; x)", "corr-ratio_x", corr_ratio(t, cfg), &t});
    entries.push_back({"semi-mono(y; x)", "semi-mono_x", ace_semi_monotone(t, cfg), &t});
    checks["semi_mono_minus_corr_ratio"] = entries[1].result.value - entries[0].result.value;
  } else if (id == "3") {
    spec.scenario = Scenario::threshold;
    const SampleTable& t = tables.emplace_back(generate(spec));
    AceConfig reg = cfg;
    reg.kappa = 0.1;
    entries.push_back({"corr-ratio(y; x)", "corr-ratio_x", corr_ratio(t, cfg), &t});
    entries.push_back({"semi-mono(y; x)", "semi-mono_x", ace_semi_monotone(t, cfg), &t});
    entries.push_back({"regularized(y; x), kappa=0.1", "regularized_x", ace_regularized(t, reg), &t});
    const MeasureResult& semi = entries[1].result;
    const MeasureResult& rr = entries[2].result;
    const double flat = largest_flat_fraction(*semi.g, flat_segment_tolerance);
    checks["semi_mono_flat_fraction"] = flat;
    checks["semi_mono_flat_segment"] = flat >= flat_segment_threshold;
    checks["regularized_min_slope"] = min_slope(*rr.g);
    checks["regularized_kappa_increasing"] = is_kappa_increasing(*rr.g, 0.1);
    checks["regularized_below_semi_mono"] = rr.value < semi.value;
  } else if (id == "lsb") {
    spec.scenario = Scenario::lsb;
    spec.bits = repro_lsb_bits;
    const SampleTable& t = tables.emplace_back(generate(spec));
    entries.push_back({"maxcorr(y; x)", "maxcorr_x", ace_classic(t, cfg), &t});
    entries.push_back({"semi-mono(y; x)", "semi-mono_x", ace_semi_monotone(t, cfg), &t});
    entries.push_back({"corr-ratio(y; x)", "corr-ratio_x", corr_ratio(t, cfg), &t});
    checks["bits"] = repro_lsb_bits;
    checks["maxcorr_minus_semi_mono"] = entries[0].result.value - entries[1].result.value;
  } else {
    throw Error(ErrorKind::InvalidParameter, "unknown example '" + id + "'");
  }
  return detail::assemble(id, n, seed, smoother, out_dir, entries, std::move(checks));
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"mcorr: classical and monotonicity-constrained maximal correlation"};
  app.require_subcommand(1);

  // measure
  auto* measure = app.add_subcommand("measure", "Estimate a dependence measure from a CSV file");
  std::string input, response = "y", measure_name, smoother_name = "knn", transforms_out;
  std::optional<double> kappa;
  double tol = 1e-6;
  int max_iter = 200;
  std::optional<std::size_t> k_opt, bins_opt;
  std::uint64_t seed = 0;
  bool pretty = false;
  measure->add_option("--input", input, "CSV file with a header row")->required();
  measure->add_option("--response", response, "Name of the response column");
  measure->add_option("--measure", measure_name, "Measure to estimate")
      ->required()
      ->check(CLI::IsMember({"pearson", "corr-ratio", "maxcorr", "mono-mono", "semi-mono", "regularized"}));
  measure->add_option("--kappa", kappa, "Minimum slope for --measure regularized (default 0.1)");
  measure->add_option("--tol", tol, "Relative e^2 improvement that ends iteration");
  measure->add_option("--max-iter", max_iter, "Maximum outer iterations");
  measure->add_option("--smoother", smoother_name, "Conditional-mean smoother")->check(CLI::IsMember({"knn", "bins"}));
  measure->add_option("--k", k_opt, "Neighbour count for knn (default: grows with N)");
  measure->add_option("--bins", bins_opt, "Bin count for bins");
  measure->add_option("--seed", seed, "Seed recorded with the run");
  measure->add_option("--transforms-out", transforms_out, "Directory for fitted-transform CSVs");
  measure->add_flag("--pretty", pretty, "Indent the JSON output");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic scenario as CSV");
  std::string scenario_name, out_path;
  std::size_t n = 20000;
  std::uint64_t gen_seed = 0;
  int bits = 6;
  double rho = 0.5;
  bool rescale = false;
  gen->add_option("--scenario", scenario_name, "Scenario")
      ->required()
      ->check(CLI::IsMember({"lsb", "example1", "circle", "log-noise", "threshold", "gaussian-pair"}));
  gen->add_option("--n", n, "Number of rows");
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("--out", out_path, "Output CSV path")->required();
  gen->add_option("--bits", bits, "lsb: number of independent high bits");
  gen->add_option("--rho", rho, "gaussian-pair: correlation coefficient");
  gen->add_flag("--rescale", rescale, "lsb: divide both columns by 2^bits");

  // repro
  auto* repro = app.add_subcommand("repro", "Reproduce a reference example");
  std::string example_id, out_dir;
  std::size_t repro_n = 20000;
  repro->add_option("example", example_id, "Example id")->required()->check(CLI::IsMember({"1", "2a", "2b", "3", "lsb"}));
  repro->add_option("--out-dir", out_dir, "Directory for plot-data CSVs (default repro-<id>)");
  repro->add_option("--n", repro_n, "Sample count");
  repro->add_flag("--pretty", pretty, "Indent the JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return flag_error;
  }
  const int indent = pretty ? 2 : -1;

  if (measure->parsed()) {
    const MeasureKind kind = *parse_measure_kind(measure_name);
    AceConfig cfg;
    cfg.tol = tol;
    cfg.max_iters = max_iter;
    cfg.seed = seed;
    if (kappa && kind != MeasureKind::semi_monotone_kappa) {
      err << "--kappa is only valid with --measure regularized\n";
      return flag_error;
    }
    if (kind == MeasureKind::semi_monotone_kappa) {
      cfg.kappa = kappa.value_or(0.1);
      if (!(cfg.kappa > 0.0 && cfg.kappa < 1.0)) {
        err << "--kappa must lie in (0, 1)\n";
        return flag_error;
      }
    }
    if (!(tol > 0.0) || max_iter < 1) {
      err << "--tol must be positive and --max-iter at least 1\n";
      return flag_error;
    }
    if (smoother_name == "knn") {
      if (bins_opt) {
        err << "--bins requires --smoother bins\n";
        return flag_error;
      }
      if (k_opt) {
        if (*k_opt < 1) {
          err << "--k must be positive\n";
          return flag_error;
        }
        cfg.smoother = SmootherSpec::knn(*k_opt);
      }
    } else {
      if (k_opt) {
        err << "--k requires --smoother knn\n";
        return flag_error;
      }
      if (!bins_opt || *bins_opt < 1) {
        err << "--smoother bins requires a positive --bins\n";
        return flag_error;
      }
      cfg.smoother = SmootherSpec::bins(*bins_opt);
    }

    std::optional<SampleTable> table;
    try {
      table.emplace(load_csv(input, response));
    } catch (const Error& e) {
      err << e.what() << '\n';
      return data_error;
    }
    MeasureResult result;
    try {
      result = estimate(*table, kind, cfg);
    } catch (const Error& e) {
      err << e.what() << '\n';
      return estimator_error;
    }
    if (!transforms_out.empty()) {
      try {
        write_transforms(transforms_out, "", result, *table);
      } catch (const std::exception& e) {
        err << e.what() << '\n';
        return data_error;
      }
    }
    out << result_json(result, *table).dump(indent) << '\n';
    return ok;
  }

  if (gen->parsed()) {
    GeneratorSpec spec;
    spec.scenario = *parse_scenario(scenario_name);
    spec.n_samples = n;
    spec.seed = gen_seed;
    spec.bits = bits;
    spec.rho = rho;
    spec.rescale = rescale;
    try {
      spec.validate();
    } catch (const Error& e) {
      err << e.what() << '\n';
      return flag_error;
    }
    try {
      write_csv(out_path, generate(spec));
    } catch (const Error& e) {
      err << e.what() << '\n';
      return data_error;
    }
    Json summary;
    summary["scenario"] = scenario_name;
    summary["n"] = n;
    summary["seed"] = gen_seed;
    summary["path"] = out_path;
    out << summary.dump() << '\n';
    return ok;
  }

  if (repro->parsed()) {
    if (repro_n < 10) {
      err << "--n must be at least 10\n";
      return flag_error;
    }
    if (out_dir.empty()) out_dir = "repro-" + example_id;
    try {
      const ReproRun run = run_repro(example_id, repro_n, out_dir);
      for (const auto& row : run.table_rows) err << row << '\n';
      out << run.report.dump(indent) << '\n';
    } catch (const Error& e) {
      err << e.what() << '\n';
      return estimator_error;
    } catch (const std::filesystem::filesystem_error& e) {
      err << e.what() << '\n';
      return data_error;
    }
    return ok;
  }
  return flag_error;
}

}  // namespace mcorr::cli
