#include "fdd/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <sstream>

#include "fdd/io.hpp"
#include "fdd/random.hpp"

namespace fdd {

namespace {

template <class T>
T field(const json& j, const char* key, T fallback, std::string_view ctx) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidValue, std::string(ctx) + "." + key + ": " + e.what());
  }
}

std::optional<std::size_t> optional_count(const json& j, const char* key,
                                          std::optional<std::size_t> fallback, std::string_view ctx) {
  if (!j.contains(key)) return fallback;
  if (j[key].is_null()) return std::nullopt;
  return field<std::size_t>(j, key, 0, ctx);
}

template <class F>
auto in_stage(const char* module, const char* operation, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(e, module, operation);
  }
}

}  // namespace

void PipelineConfig::validate() const {
  if (csv_path && csv_path->empty()) fail(ErrorCode::InvalidValue, "data.csv_path is empty");
  if (!csv_path) simgen.validate();
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(ErrorCode::InvalidValue, "preprocessing.train_fraction must lie in (0, 1)");
  ensemble.validate();
  if (!(rfa_threshold > 0.0 && rfa_threshold <= 1.0))
    fail(ErrorCode::InvalidValue, "rfa.threshold must lie in (0, 1]");
  if (!std::isfinite(rfa_snr_db)) fail(ErrorCode::InvalidValue, "rfa.snr_db must be finite");
  if (rfa_max_sensors && *rfa_max_sensors == 0)
    fail(ErrorCode::InvalidValue, "rfa.max_sensors must be >= 1");
  for (double s : robustness_snr_db)
    if (!std::isfinite(s)) fail(ErrorCode::InvalidValue, "robustness.snr_list entries must be finite");
  if (output_dir.empty()) fail(ErrorCode::InvalidValue, "output_dir is empty");
}

PipelineConfig parse_config(std::string_view json_text, const ConfigOverrides& overrides) {
  const json j = parse_json(json_text, "pipeline config");
  require_keys(j, {"seed", "output_dir", "data", "preprocessing", "ensemble", "importance", "rfa",
                   "robustness"},
               "config");
  PipelineConfig c;
  c.seed = field<std::uint64_t>(j, "seed", c.seed, "config");

  if (j.contains("data")) {
    const auto& d = j["data"];
    require_keys(d, {"source", "csv_path", "schema_policy", "simgen"}, "data");
    const auto source = field<std::string>(d, "source", d.contains("csv_path") ? "csv" : "simgen", "data");
    if (source == "csv") {
      c.csv_path = field<std::string>(d, "csv_path", "", "data");
      if (c.csv_path->empty()) fail(ErrorCode::InvalidValue, "data.csv_path is required for csv source");
    } else if (source != "simgen") {
      fail(ErrorCode::InvalidValue, "data.source must be \"simgen\" or \"csv\"");
    }
    const auto policy = field<std::string>(d, "schema_policy", "strict", "data");
    if (policy == "strict")
      c.schema_policy = SchemaPolicy::Strict;
    else if (policy == "infer")
      c.schema_policy = SchemaPolicy::Infer;
    else
      fail(ErrorCode::InvalidValue, "data.schema_policy must be \"strict\" or \"infer\"");
    if (d.contains("simgen")) {
      if (d["simgen"].contains("seed"))
        fail(ErrorCode::InvalidValue, "data.simgen.seed is derived from the top-level seed");
      c.simgen = generator_config_from_json(d["simgen"]);
    }
  }

  if (j.contains("preprocessing")) {
    const auto& p = j["preprocessing"];
    require_keys(p, {"undersample", "undersample_target", "train_fraction", "stratified"},
                 "preprocessing");
    c.undersample = field<bool>(p, "undersample", c.undersample, "preprocessing");
    c.undersample_target = optional_count(p, "undersample_target", c.undersample_target, "preprocessing");
    c.train_fraction = field<double>(p, "train_fraction", c.train_fraction, "preprocessing");
    c.stratified = field<bool>(p, "stratified", c.stratified, "preprocessing");
  }

  if (j.contains("ensemble")) {
    if (j["ensemble"].contains("master_seed"))
      fail(ErrorCode::InvalidValue, "ensemble.master_seed is derived from the top-level seed");
    c.ensemble = ensemble_config_from_json(j["ensemble"]);
  }
  c.importance = c.ensemble.family == EnsembleFamily::Bagging ? ImportanceMode::Mdi
                                                              : ImportanceMode::Gain;
  if (j.contains("importance"))
    c.importance = importance_mode_from_string(field<std::string>(j, "importance", "", "config"));

  if (j.contains("rfa")) {
    const auto& r = j["rfa"];
    require_keys(r, {"threshold", "snr_db", "max_sensors"}, "rfa");
    c.rfa_threshold = field<double>(r, "threshold", c.rfa_threshold, "rfa");
    c.rfa_snr_db = field<double>(r, "snr_db", c.rfa_snr_db, "rfa");
    c.rfa_max_sensors = optional_count(r, "max_sensors", c.rfa_max_sensors, "rfa");
  }
  if (j.contains("robustness")) {
    const auto& r = j["robustness"];
    require_keys(r, {"snr_list", "include_failure"}, "robustness");
    c.robustness_snr_db = field<std::vector<double>>(r, "snr_list", c.robustness_snr_db, "robustness");
    c.include_failure = field<bool>(r, "include_failure", c.include_failure, "robustness");
  }

  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.output_dir)
    c.output_dir = *overrides.output_dir;
  else if (j.contains("output_dir"))
    c.output_dir = field<std::string>(j, "output_dir", c.output_dir, "config");
  else if (overrides.env_output_dir && !overrides.env_output_dir->empty())
    c.output_dir = *overrides.env_output_dir;

  c.ensemble.master_seed = stage_seed(c, Stage::Ensemble);
  c.simgen.seed = stage_seed(c, Stage::Simgen);
  c.validate();
  return c;
}

std::uint64_t stage_seed(const PipelineConfig& cfg, Stage s) {
  return derive_seed(cfg.seed, static_cast<std::uint64_t>(s));
}

json resolved_config_json(const PipelineConfig& c) {
  json data;
  data["source"] = c.csv_path ? "csv" : "simgen";
  if (c.csv_path) data["csv_path"] = *c.csv_path;
  data["schema_policy"] = c.schema_policy == SchemaPolicy::Strict ? "strict" : "infer";
  json sim = to_json(c.simgen);
  sim.erase("seed");
  data["simgen"] = std::move(sim);

  json ens = to_json(c.ensemble);
  ens.erase("master_seed");

  auto opt = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
  return {{"seed", c.seed},
          {"data", std::move(data)},
          {"preprocessing",
           {{"undersample", c.undersample},
            {"undersample_target", opt(c.undersample_target)},
            {"train_fraction", c.train_fraction},
            {"stratified", c.stratified}}},
          {"ensemble", std::move(ens)},
          {"importance", to_string(c.importance)},
          {"rfa",
           {{"threshold", c.rfa_threshold},
            {"snr_db", c.rfa_snr_db},
            {"max_sensors", opt(c.rfa_max_sensors)}}},
          {"robustness", {{"snr_list", c.robustness_snr_db}, {"include_failure", c.include_failure}}}};
}

json error_json(const Error& e) {
  json j{{"error", {{"code", error_code_name(e.code())},
                    {"status", static_cast<int>(e.code())},
                    {"message", e.what()}}}};
  if (const auto* s = dynamic_cast<const StageError*>(&e)) {
    j["error"]["module"] = s->module();
    j["error"]["operation"] = s->operation();
  }
  if (const auto* m = dynamic_cast<const MalformedRowsError*>(&e)) {
    json rows = json::array();
    for (const auto& issue : m->issues())
      rows.push_back({{"row", issue.row}, {"column", issue.column}, {"reason", issue.reason}});
    j["error"]["rows"] = std::move(rows);
  }
  return j;
}

std::string dump_pretty(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Artifacts

std::string render_rfa_svg(const RfaTrace& trace, double threshold) {
  constexpr double width = 640, height = 400, left = 60, right = 20, top = 30, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const std::size_t n = std::max<std::size_t>(trace.iterations.size(), 1);
  auto x_of = [&](std::size_t count) {
    return n == 1 ? left + plot_w / 2
                  : left + plot_w * static_cast<double>(count - 1) / static_cast<double>(n - 1);
  };
  auto y_of = [&](double f1) { return top + plot_h * (1.0 - std::clamp(f1, 0.0, 1.0)); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
    << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
    << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << num(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
       "Recursive feature addition: macro-F1 vs sensor count</text>\n";
  // axes
  s << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + plot_h) << "\" x2=\""
    << num(left + plot_w) << "\" y2=\"" << num(top + plot_h) << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left)
    << "\" y2=\"" << num(top + plot_h) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = k / 5.0;
    s << "<text x=\"" << num(left - 8) << "\" y=\"" << num(y_of(v) + 4)
      << "\" text-anchor=\"end\" font-size=\"11\">" << num(v) << "</text>\n";
  }
  for (const auto& it : trace.iterations)
    s << "<text x=\"" << num(x_of(it.sensor_count)) << "\" y=\"" << num(top + plot_h + 16)
      << "\" text-anchor=\"middle\" font-size=\"11\">" << it.sensor_count << "</text>\n";
  s << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(height - 10)
    << "\" text-anchor=\"middle\" font-size=\"12\">sensors</text>\n";
  s << "<line x1=\"" << num(left) << "\" y1=\"" << num(y_of(threshold)) << "\" x2=\""
    << num(left + plot_w) << "\" y2=\"" << num(y_of(threshold))
    << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";

  auto series = [&](const char* colour, const char* name, auto value, double legend_y) {
    s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (const auto& it : trace.iterations)
      s << num(x_of(it.sensor_count)) << ',' << num(y_of(value(it))) << ' ';
    s << "\"/>\n";
    for (const auto& it : trace.iterations)
      s << "<circle cx=\"" << num(x_of(it.sensor_count)) << "\" cy=\"" << num(y_of(value(it)))
        << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
    s << "<text x=\"" << num(left + plot_w - 4) << "\" y=\"" << num(legend_y)
      << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << colour << "\">" << name
      << "</text>\n";
  };
  series("#1f77b4", "clean F1", [](const RfaIteration& it) { return it.clean_f1; }, top + plot_h - 24);
  series("#d62728", "noisy F1", [](const RfaIteration& it) { return it.noisy_f1; }, top + plot_h - 8);
  s << "</svg>\n";
  return s.str();
}

namespace {
std::string join(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}
}  // namespace

std::vector<std::string> write_rfa_artifacts(const RfaTrace& trace, double threshold,
                                             const std::string& dir) {
  write_file_atomic(join(dir, "rfa_trace.json"), dump_pretty(to_json(trace)));
  write_file_atomic(join(dir, "rfa_trace.csv"), to_csv(trace));
  write_file_atomic(join(dir, "rfa_curves.svg"), render_rfa_svg(trace, threshold));
  return {"rfa_trace.json", "rfa_trace.csv", "rfa_curves.svg"};
}

std::vector<std::string> write_robustness_artifacts(const RobustnessReport& r,
                                                    const std::string& dir) {
  write_file_atomic(join(dir, "robustness.json"), dump_pretty(to_json(r)));
  write_file_atomic(join(dir, "robustness.csv"), to_csv(r));
  return {"robustness.json", "robustness.csv"};
}

// ---------------------------------------------------------------------------
// Orchestration

PipelineResult run_pipeline(const PipelineConfig& cfg, unsigned threads) {
  in_stage("cli", "parse_config", [&] { cfg.validate(); });
  const std::string& out = cfg.output_dir;
  PipelineResult result;
  auto emit = [&](const char* name, std::string_view contents) {
    in_stage("cli", "write_artifact", [&] { write_file_atomic(join(out, name), contents); });
    result.artifacts.emplace_back(name);
  };
  emit("resolved_config.json", dump_pretty(resolved_config_json(cfg)));

  Dataset source = cfg.csv_path
                       ? in_stage("dataset", "load_dataset",
                                  [&] { return load_dataset(*cfg.csv_path, cfg.schema_policy); })
                       : in_stage("simgen", "generate_dataset",
                                  [&] { return generate_dataset(cfg.simgen); });
  if (cfg.undersample)
    source = in_stage("dataset", "undersample_majority", [&] {
      return undersample_majority(source, {cfg.undersample_target}, stage_seed(cfg, Stage::Undersample));
    });
  const SplitPair split = in_stage("dataset", "split_train_test", [&] {
    return split_train_test(source, cfg.train_fraction, cfg.stratified, stage_seed(cfg, Stage::Split));
  });
  {
    std::ostringstream tr, te;
    write_csv(split.train, tr);
    write_csv(split.test, te);
    emit("train.csv", tr.str());
    emit("test.csv", te.str());
  }

  const EnsembleModel full = in_stage("ensembles", "fit_ensemble",
                                      [&] { return fit_ensemble(split.train, cfg.ensemble, threads); });
  result.ranking = in_stage("ensembles", "feature_importance",
                            [&] { return feature_importance(full, cfg.importance); });
  const double all_sensor_f1 =
      in_stage("metrics", "macro_f1", [&] { return evaluate(full, split.test).macro_f1; });
  emit("importance.json", dump_pretty(to_json(result.ranking)));

  RfaConfig rfa;
  rfa.threshold = cfg.rfa_threshold;
  rfa.ranking = result.ranking;
  rfa.ensemble = cfg.ensemble;
  rfa.robustness_snr_db = cfg.rfa_snr_db;
  rfa.max_sensors = cfg.rfa_max_sensors;
  rfa.noise_seed = stage_seed(cfg, Stage::RfaNoise);
  result.trace = in_stage("selection", "run_rfa", [&] { return run_rfa(split.train, split.test, rfa, threads); });
  in_stage("cli", "write_artifact", [&] {
    for (auto& name : write_rfa_artifacts(result.trace, cfg.rfa_threshold, out))
      result.artifacts.push_back(std::move(name));
  });

  const auto& selected = result.trace.selected_set;
  const Dataset train_sel = split.train.select_sensors(selected);
  const Dataset test_sel = split.test.select_sensors(selected);
  const EnsembleModel model = in_stage("ensembles", "fit_ensemble",
                                       [&] { return fit_ensemble(train_sel, cfg.ensemble, threads); });
  emit("model.json", model_to_string(model));

  result.final_report = in_stage("metrics", "macro_f1", [&] { return evaluate(model, test_sel); });
  emit("class_report.json", dump_pretty(to_json(result.final_report)));
  emit("class_report.csv", to_csv(result.final_report));

  result.robustness = in_stage("robustness", "run_scenarios", [&] {
    return run_scenarios(model, test_sel, selected.front(), cfg.robustness_snr_db, cfg.include_failure,
                         stage_seed(cfg, Stage::Robustness), threads);
  });
  in_stage("cli", "write_artifact", [&] {
    for (auto& name : write_robustness_artifacts(result.robustness, out))
      result.artifacts.push_back(std::move(name));
  });

  json summary{{"rows_after_preprocessing", source.rows()},
               {"train_rows", split.train.rows()},
               {"test_rows", split.test.rows()},
               {"all_sensor_macro_f1", all_sensor_f1},
               {"top_sensors", result.ranking.ordered_symbols()},
               {"selected_set", selected},
               {"threshold_met", result.trace.threshold_met},
               {"final_macro_f1", result.final_report.macro_f1},
               {"robustness_baseline_f1", result.robustness.baseline_f1}};
  emit("summary.json", dump_pretty(summary));
  return result;
}

}  // namespace fdd
