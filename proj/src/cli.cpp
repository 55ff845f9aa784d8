#include "sdidml/cli.hpp"

#include "sdidml/diagnostics.hpp"
#include "sdidml/error.hpp"
#include "sdidml/monte_carlo.hpp"
#include "sdidml/panel_io.hpp"
#include "sdidml/parallel.hpp"
#include "sdidml/simulate.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace sdidml {

namespace {

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write '" + path.string() + "'");
  return out;
}

void write_json(const fs::path& path, const Json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::InvalidConfig, "cannot create '" + dir.string() + "': " + ec.message());
}

template <class T>
void read_field(const Json& j, const char* key, T& into) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    into = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InvalidConfig, std::string("field '") + key + "' has the wrong type");
  }
}

std::map<UnitId, std::string> read_subgroups(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingArtifacts, "cannot open subgroup file '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind("unit,label", 0) != 0) throw Error(ErrorCode::MissingField, "subgroup file needs header unit,label");
  std::map<UnitId, std::string> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::InvalidValue, "malformed subgroup row '" + line + "'");
    out[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return out;
}

}  // namespace

RunConfig run_config_from_json(const Json& j) {
  static const std::set<std::string> allowed{
      "input_path",   "output_dir", "subgroups_path", "g_learner", "m_learner", "K",        "clip_eps",
      "control_rule", "fold_pooling", "anticipation", "estimator", "aggregation", "bootstrap", "ci_level",
      "seed",         "placebo_shift", "allow_no_crossfit"};
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "run config must be a JSON object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw Error(ErrorCode::InvalidConfig, "unknown field '" + item.key() + "'");

  RunConfig c;
  read_field(j, "input_path", c.input_path);
  read_field(j, "output_dir", c.output_dir);
  if (j.contains("subgroups_path") && !j["subgroups_path"].is_null())
    c.subgroups_path = j["subgroups_path"].get<std::string>();
  if (j.contains("g_learner")) c.pipeline.g_learner = learner_from_json(j["g_learner"]);
  if (j.contains("m_learner")) c.pipeline.m_learner = learner_from_json(j["m_learner"]);
  read_field(j, "K", c.pipeline.k);
  read_field(j, "clip_eps", c.pipeline.clip_eps);
  if (j.contains("control_rule"))
    c.pipeline.contrast.control_rule = control_rule_from_string(j["control_rule"].get<std::string>());
  if (j.contains("fold_pooling")) {
    const std::string p = j["fold_pooling"];
    if (p == "per_fold")
      c.pipeline.contrast.pooling = FoldPooling::PerFold;
    else if (p == "pooled")
      c.pipeline.contrast.pooling = FoldPooling::Pooled;
    else
      throw Error(ErrorCode::InvalidConfig, "fold_pooling must be per_fold or pooled");
  }
  read_field(j, "anticipation", c.pipeline.contrast.anticipation);
  if (j.contains("estimator")) c.pipeline.estimator = estimator_form_from_string(j["estimator"].get<std::string>());
  if (j.contains("aggregation")) {
    c.aggregation.clear();
    for (const auto& s : j["aggregation"]) c.aggregation.push_back(aggregation_scheme_from_string(s.get<std::string>()));
  }
  if (j.contains("bootstrap")) {
    const Json& b = j["bootstrap"];
    if (!b.is_object()) throw Error(ErrorCode::InvalidConfig, "bootstrap must be an object");
    for (const auto& item : b.items())
      if (item.key() != "B" && item.key() != "mode")
        throw Error(ErrorCode::InvalidConfig, "unknown field '" + item.key() + "' in bootstrap");
    read_field(b, "B", c.bootstrap_b);
    if (b.contains("mode")) c.bootstrap_mode = bootstrap_mode_from_string(b["mode"].get<std::string>());
  }
  read_field(j, "ci_level", c.pipeline.ci_level);
  read_field(j, "seed", c.pipeline.seed);
  read_field(j, "placebo_shift", c.placebo_shift);
  read_field(j, "allow_no_crossfit", c.allow_no_crossfit);
  return c;
}

Json to_json(const RunConfig& c) {
  Json aggregation = Json::array();
  for (auto s : c.aggregation) aggregation.push_back(to_string(s));
  return {{"input_path", c.input_path},
          {"output_dir", c.output_dir},
          {"subgroups_path", c.subgroups_path ? Json(*c.subgroups_path) : Json(nullptr)},
          {"g_learner", to_json(c.pipeline.g_learner)},
          {"m_learner", to_json(c.pipeline.m_learner)},
          {"K", c.pipeline.k},
          {"clip_eps", c.pipeline.clip_eps},
          {"control_rule", to_string(c.pipeline.contrast.control_rule)},
          {"fold_pooling", c.pipeline.contrast.pooling == FoldPooling::PerFold ? "per_fold" : "pooled"},
          {"anticipation", c.pipeline.contrast.anticipation},
          {"estimator", to_string(c.pipeline.estimator)},
          {"aggregation", aggregation},
          {"bootstrap", {{"B", c.bootstrap_b}, {"mode", to_string(c.bootstrap_mode)}}},
          {"ci_level", c.pipeline.ci_level},
          {"seed", c.pipeline.seed},
          {"placebo_shift", c.placebo_shift},
          {"allow_no_crossfit", c.allow_no_crossfit}};
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (c.input_path.empty()) fail("input_path is required (config field or --input)");
  if (c.pipeline.k < 1) fail("K must be >= 1");
  if (c.pipeline.k == 1 && !c.allow_no_crossfit)
    fail("K=1 disables cross-fitting: nuisance predictions would be in-sample, which is a diagnostic-only mode. "
         "Pass --allow-no-crossfit to run it anyway");
  if (!(c.pipeline.clip_eps >= 0.0 && c.pipeline.clip_eps < 0.5)) fail("clip_eps must be in [0, 0.5)");
  if (c.pipeline.contrast.anticipation < 0) fail("anticipation must be >= 0");
  if (!(c.pipeline.ci_level > 0.0 && c.pipeline.ci_level < 1.0)) fail("ci_level must be in (0, 1)");
  if (c.bootstrap_b < 1) fail("bootstrap.B must be >= 1");
  if (c.placebo_shift < 1) fail("placebo_shift must be >= 1");
  if (c.aggregation.empty()) fail("aggregation must list at least one scheme");
  try {
    validate(c.pipeline.g_learner);
    validate(c.pipeline.m_learner);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
}

Json execute_run(const RunConfig& config, int threads, std::ostream& log) {
  validate(config);
  auto has = [&](AggregationScheme s) {
    return std::find(config.aggregation.begin(), config.aggregation.end(), s) != config.aggregation.end();
  };
  auto panel = std::make_shared<const PanelDataset>(read_panel_csv(fs::path(config.input_path)));
  log << "panel: " << panel->n_units() << " units, " << panel->n_periods() << " periods, "
      << panel->n_covariates() << " covariates\n";

  PipelineConfig pc = config.pipeline;
  pc.threads = threads;
  PipelineResult point = run_pipeline(panel, pc);
  const BootstrapOptions bo{config.bootstrap_b, config.bootstrap_mode, pc.seed, threads};
  const BootstrapResult boot = bootstrap(point, pc, bo);
  attach_bootstrap(boot, point.aggregated, point.effects);

  DiagnosticsReport diag;
  diag.warnings = point.fits->warnings;
  if (config.pipeline.k == 1) diag.warnings.push_back("K=1: nuisance predictions are in-sample (diagnostic-only run)");
  if (config.bootstrap_mode == BootstrapMode::FixedNuisance)
    diag.warnings.push_back("FixedNuisance bootstrap ignores nuisance estimation error; intervals are approximate");
  if (!boot.failed.empty())
    diag.warnings.push_back(std::to_string(boot.failed.size()) + " bootstrap replicates failed; " +
                            boot.first_failure.value_or(""));
  diag.overlap = overlap_report(*point.fits);
  if (diag.overlap.weak_overlap)
    diag.warnings.push_back("WeakOverlap: " + std::to_string(diag.overlap.n_clipped) + " of " +
                            std::to_string(diag.overlap.n) + " propensities were clipped");
  try {
    diag.pretrend = pretrend_test(point.effects, event_time_ses(boot));
  } catch (const Error& e) {
    diag.pretrend_error = e.what();
  }
  try {
    const BootstrapOptions pbo{config.bootstrap_b, config.bootstrap_mode,
                               pc.seed + static_cast<std::uint64_t>(config.bootstrap_b), threads};
    diag.placebo = placebo_test(*panel, pc, config.placebo_shift, pbo);
  } catch (const Error& e) {
    diag.placebo_error = e.what();
  }

  Json subgroups = nullptr;
  if (config.subgroups_path) {
    subgroups = Json::array();
    const auto labels = read_subgroups(*config.subgroups_path);
    for (const auto& [label, res] : subgroup_effects(point.residuals, labels, pc.contrast)) {
      Json row = {{"label", label}};
      if (res.effects) {
        try {
          row["overall_att"] = aggregate(*res.effects, pc.ci_level).overall.att;
        } catch (const Error& e) {
          row["error"] = e.what();
        }
        row["group_time"] = to_json(*res.effects)["cells"];
      } else {
        row["error"] = res.error.value_or("");
      }
      subgroups.push_back(row);
    }
  }

  const Json agg = to_json(point.aggregated);
  Json results;
  results["overall"] = agg["overall"];
  results["overall"]["bootstrap"] = {{"B", boot.replicates},
                                     {"mode", to_string(boot.mode)},
                                     {"approximate", boot.mode == BootstrapMode::FixedNuisance},
                                     {"n_failed", boot.failed.size()}};
  results["event_curve"] = has(AggregationScheme::EventTime) ? agg["event_curve"] : Json::array();
  results["groups"] = has(AggregationScheme::ByGroup) ? agg["groups"] : Json::array();
  results["weights"] = agg["weights"];
  results["group_time"] = to_json(point.effects);
  if (!subgroups.is_null()) results["subgroups"] = subgroups;
  results["diagnostics"] = to_json(diag);
  results["config_echo"] = to_json(config);
  results["versions"] = versions_json();

  const fs::path dir(config.output_dir);
  make_dir(dir);
  write_json(dir / "results.json", results);
  write_json(dir / "diagnostics.json", to_json(diag));
  {
    auto out = open_output(dir / "group_time.csv");
    write_group_time_csv(point.effects, out);
  }
  if (has(AggregationScheme::EventTime)) {
    auto out = open_output(dir / "event_curve.csv");
    write_event_curve_csv(point.aggregated, out);
  }
  return results;
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

int cmd_diagnose(const fs::path& dir, std::ostream& out) {
  const fs::path file = dir / "diagnostics.json";
  if (!fs::exists(file))
    throw Error(ErrorCode::MissingArtifacts, "no diagnostics.json in '" + dir.string() + "'; run `sdidml run` first");
  Json d;
  {
    std::ifstream in(file);
    try {
      d = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MissingArtifacts, "diagnostics.json is unreadable: " + std::string(e.what()));
    }
  }
  const Json& pre = d["pretrend"];
  if (pre.is_null()) {
    out << "pretrend  SKIP  " << d.value("pretrend_error", std::string("not available")) << '\n';
  } else {
    const double p = pre["p_value"];
    out << "pretrend  " << (p >= 0.05 ? "PASS" : "WARN") << "  statistic=" << fmt(pre["statistic"].is_null() ? INFINITY : pre["statistic"].get<double>())
        << " dof=" << pre["dof"].get<int>() << " p=" << fmt(p) << " (chi-square reference, approximate)\n";
  }
  const Json& pl = d["placebo"];
  if (pl.is_null()) {
    out << "placebo   SKIP  " << d.value("placebo_error", std::string("not available")) << '\n';
  } else {
    const Json& ci = pl["ci"];
    const bool has_ci = !ci[0].is_null() && !ci[1].is_null();
    const bool covers = has_ci && ci[0].get<double>() <= 0.0 && ci[1].get<double>() >= 0.0;
    out << "placebo   " << (!has_ci ? "SKIP" : covers ? "PASS" : "WARN") << "  shift=" << pl["shift"].get<int>()
        << " pseudo_att=" << fmt(pl["pseudo_att"]);
    if (has_ci) out << " ci=[" << fmt(ci[0]) << ", " << fmt(ci[1]) << "]";
    out << '\n';
  }
  const Json& ov = d["overlap"];
  out << "overlap   " << (ov["weak_overlap"].get<bool>() ? "WARN" : "PASS") << "  min=" << fmt(ov["min"])
      << " max=" << fmt(ov["max"]) << " share_outside=" << fmt(ov["share_outside"])
      << " n_clipped=" << ov["n_clipped"].get<int>() << '\n';
  for (const auto& w : d["warnings"]) out << "warning   " << w.get<std::string>() << '\n';
  return 0;
}

DGPConfig resolve_dgp(const std::string& scenario_or_config) {
  if (scenario_or_config.size() > 5 && scenario_or_config.substr(scenario_or_config.size() - 5) == ".json")
    return dgp_from_json(read_json_file(scenario_or_config));
  return scenario(scenario_or_config);
}

int cmd_simulate(const std::string& what, std::optional<std::uint64_t> seed, const fs::path& dir, std::ostream& out) {
  DGPConfig config = resolve_dgp(what);
  if (seed) config.seed = *seed;
  const OraclePanel oracle = generate(config);
  make_dir(dir);
  {
    auto f = open_output(dir / "panel.csv");
    write_panel_csv(oracle.panel, f);
  }
  {
    auto f = open_output(dir / "subgroups.csv");
    f << "unit,label\n";
    for (const auto& [unit, label] : oracle.subgroup) f << unit << ',' << label << '\n';
  }
  write_json(dir / "oracle.json", to_json(oracle, config));
  out << "wrote " << (dir / "panel.csv").string() << " (" << oracle.panel.n_obs()
      << " rows); true overall ATT = " << fmt(oracle.true_overall_att) << '\n';
  return 0;
}

int cmd_benchmark(const std::string& what, int reps, std::uint64_t seed, int threads,
                  const std::optional<std::string>& config_path, const fs::path& dir, std::ostream& out) {
  if (reps < 1) throw Error(ErrorCode::InvalidConfig, "--reps must be >= 1");
  const DGPConfig dgp = resolve_dgp(what);
  MonteCarloOptions mc;
  mc.methods = {Method::SDidml, Method::Twfe, Method::UnadjustedDid};
  mc.threads = threads;
  BootstrapOptions bo;
  bo.mode = BootstrapMode::FixedNuisance;
  if (config_path) {
    Json j = read_json_file(*config_path);
    if (!j.contains("input_path")) j["input_path"] = "unused";
    RunConfig rc = run_config_from_json(j);
    validate(rc);
    mc.pipeline = rc.pipeline;
    bo.replicates = rc.bootstrap_b;
    bo.mode = rc.bootstrap_mode;
  }
  mc.bootstrap = bo;
  const MonteCarloResult res = monte_carlo(dgp, mc, reps, seed);

  make_dir(dir);
  {
    auto f = open_output(dir / "benchmark.csv");
    f << "method,reps,mean_estimate,bias,rmse,coverage\n";
    for (const auto& [m, s] : res.summary)
      f << to_string(m) << ',' << reps << ',' << format_double(s.mean_estimate) << ',' << format_double(s.bias) << ','
        << format_double(s.rmse) << ',' << (s.coverage ? format_double(*s.coverage) : "") << '\n';
  }
  Json j = to_json(res);
  j["scenario"] = to_json(dgp);
  j["seed"] = seed;
  j["bootstrap"] = {{"B", bo.replicates}, {"mode", to_string(bo.mode)}};
  j["versions"] = versions_json();
  write_json(dir / "benchmark.json", j);

  out << std::left << std::setw(16) << "method" << std::setw(12) << "bias" << std::setw(12) << "rmse"
      << "coverage\n";
  for (const auto& [m, s] : res.summary)
    out << std::setw(16) << to_string(m) << std::setw(12) << fmt(s.bias) << std::setw(12) << fmt(s.rmse)
        << (s.coverage ? fmt(*s.coverage) : "-") << '\n';
  return 0;
}

void report_error(const Error& e, std::ostream& err) {
  static const char* categories[] = {"config", "data", "estimation"};
  const Json j = {{"error",
                   {{"code", std::string(to_string(e.code()))},
                    {"category", categories[static_cast<int>(e.category())]},
                    {"message", e.what()}}}};
  err << j.dump() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Double-residualized staggered difference-in-differences"};
  app.require_subcommand(1);
  std::optional<int> threads_flag;
  app.add_option("--threads", threads_flag, "worker threads (default: SDIDML_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  std::string config_path, input_path, output;
  std::optional<std::uint64_t> seed;
  bool allow_no_crossfit = false;
  auto* run = app.add_subcommand("run", "estimate effects on a panel CSV");
  run->add_option("--config", config_path, "run config JSON");
  run->add_option("--input", input_path, "panel CSV (overrides input_path)");
  run->add_option("--seed", seed, "overrides the config seed");
  run->add_option("--output", output, "output directory (overrides output_dir)");
  run->add_flag("--allow-no-crossfit", allow_no_crossfit, "permit K=1 (in-sample nuisances)");
  run->add_option("--threads", threads_flag)->check(CLI::PositiveNumber);

  std::string scenario_arg;
  auto* sim = app.add_subcommand("simulate", "write a synthetic panel and its oracle");
  sim->add_option("scenario", scenario_arg, "scenario name or DGP config JSON")->required();
  sim->add_option("--seed", seed);
  sim->add_option("--output", output, "output directory")->default_val("sim_out");

  int reps = 100;
  auto* bench = app.add_subcommand("benchmark", "Monte Carlo comparison against TWFE");
  bench->add_option("scenario", scenario_arg, "scenario name or DGP config JSON")->required();
  bench->add_option("--reps", reps, "Monte Carlo repetitions");
  bench->add_option("--seed", seed);
  bench->add_option("--config", config_path, "run config JSON for the estimator settings");
  bench->add_option("--output", output, "output directory")->default_val("benchmark_out");
  bench->add_option("--threads", threads_flag)->check(CLI::PositiveNumber);

  std::string results_dir;
  auto* diag = app.add_subcommand("diagnose", "summarize the diagnostics of a finished run");
  diag->add_option("results_dir", results_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const int threads = threads_flag.value_or(default_thread_count());
  try {
    if (*run) {
      Json j = config_path.empty() ? Json::object() : read_json_file(config_path);
      if (!input_path.empty()) j["input_path"] = input_path;
      RunConfig config = run_config_from_json(j);
      if (seed) config.pipeline.seed = *seed;
      if (!output.empty()) config.output_dir = output;
      if (allow_no_crossfit) config.allow_no_crossfit = true;
      const Json results = execute_run(config, threads, out);
      const Json& o = results["overall"];
      out << "overall ATT = " << fmt(o["att"]);
      if (!o["ci_low"].is_null()) out << "  [" << fmt(o["ci_low"]) << ", " << fmt(o["ci_high"]) << "]";
      out << "\nresults written to " << config.output_dir << '\n';
      return 0;
    }
    if (*sim) return cmd_simulate(scenario_arg, seed, output, out);
    if (*bench) return cmd_benchmark(scenario_arg, reps, seed.value_or(0), threads,
                                     config_path.empty() ? std::nullopt : std::optional(config_path), output, out);
    return cmd_diagnose(results_dir, out);
  } catch (const Error& e) {
    report_error(e, err);
    return exit_code_for(e.category());
  }
}

}  // namespace sdidml
