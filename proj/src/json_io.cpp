#include "fdd/json_io.hpp"

#include <algorithm>
#include <sstream>

#include "fdd/io.hpp"

namespace fdd {

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string(what) + ": JSON syntax error at byte " +
                                    std::to_string(e.byte) + ": " + e.what());
  }
}

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                  std::string_view context) {
  if (!obj.is_object()) fail(ErrorCode::InvalidValue, std::string(context) + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(ErrorCode::InvalidValue, std::string(context) + ": unknown field \"" + key + "\"");
}

namespace {

template <class T>
T get(const json& j, const char* key, std::string_view context) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidValue, std::string(context) + "." + key + ": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, std::string_view context) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, context);
}

std::string_view subsample_name(FeatureSubsample::Kind k) {
  return k == FeatureSubsample::Kind::Sqrt ? "sqrt" : "all";
}

}  // namespace

std::string_view to_string(EnsembleFamily f) {
  return f == EnsembleFamily::Bagging ? "bagging" : "boosting";
}

std::string_view to_string(ImportanceMode m) { return m == ImportanceMode::Mdi ? "mdi" : "gain"; }

ImportanceMode importance_mode_from_string(std::string_view s) {
  if (s == "mdi") return ImportanceMode::Mdi;
  if (s == "gain") return ImportanceMode::Gain;
  fail(ErrorCode::InvalidValue, "importance mode must be \"mdi\" or \"gain\"");
}

// ---------------------------------------------------------------------------
// Configs

json to_json(const TreeConfig& c) {
  json j;
  j["max_depth"] = c.max_depth ? json(*c.max_depth) : json(nullptr);
  j["min_leaf"] = c.min_leaf;
  if (c.feature_subsample.kind == FeatureSubsample::Kind::Count)
    j["feature_subsample"] = c.feature_subsample.count;
  else
    j["feature_subsample"] = subsample_name(c.feature_subsample.kind);
  j["split"] = c.split.kind == SplitStrategy::Kind::Exact ? "exact" : "histogram";
  j["bins"] = c.split.bins;
  j["task"] = c.task == TreeTask::Classification ? "classification" : "regression_on_gradients";
  return j;
}

TreeConfig tree_config_from_json(const json& j, TreeConfig c) {
  constexpr std::string_view ctx = "tree";
  require_keys(j, {"max_depth", "min_leaf", "feature_subsample", "split", "bins", "task"}, ctx);
  if (j.contains("max_depth")) {
    if (j["max_depth"].is_null())
      c.max_depth.reset();
    else
      c.max_depth = get<std::size_t>(j, "max_depth", ctx);
  }
  c.min_leaf = get_or<std::size_t>(j, "min_leaf", c.min_leaf, ctx);
  if (j.contains("feature_subsample")) {
    const auto& fs = j["feature_subsample"];
    if (fs.is_number_unsigned())
      c.feature_subsample = FeatureSubsample::fixed(fs.get<std::size_t>());
    else if (fs == "sqrt")
      c.feature_subsample = FeatureSubsample::sqrt();
    else if (fs == "all")
      c.feature_subsample = FeatureSubsample::all();
    else
      fail(ErrorCode::InvalidValue, "tree.feature_subsample must be \"all\", \"sqrt\" or a count");
  }
  if (j.contains("split")) {
    const auto s = get<std::string>(j, "split", ctx);
    if (s == "exact")
      c.split.kind = SplitStrategy::Kind::Exact;
    else if (s == "histogram")
      c.split.kind = SplitStrategy::Kind::Histogram;
    else
      fail(ErrorCode::InvalidValue, "tree.split must be \"exact\" or \"histogram\"");
  }
  c.split.bins = get_or<std::size_t>(j, "bins", c.split.bins, ctx);
  if (j.contains("task")) {
    const auto t = get<std::string>(j, "task", ctx);
    if (t == "classification")
      c.task = TreeTask::Classification;
    else if (t == "regression_on_gradients")
      c.task = TreeTask::RegressionOnGradients;
    else
      fail(ErrorCode::InvalidValue, "tree.task must be classification or regression_on_gradients");
  }
  c.validate();
  return c;
}

json to_json(const EnsembleConfig& c) {
  json j;
  j["family"] = to_string(c.family);
  j["n_trees"] = c.n_trees;
  j["learning_rate"] = c.learning_rate;
  j["bootstrap"] = c.bootstrap;
  j["master_seed"] = c.master_seed;
  j["voting"] = c.voting == Voting::Soft ? "soft" : "hard";
  j["tree"] = to_json(c.tree);
  return j;
}

EnsembleConfig ensemble_config_from_json(const json& j) {
  constexpr std::string_view ctx = "ensemble";
  require_keys(j, {"family", "n_trees", "learning_rate", "bootstrap", "master_seed", "voting", "tree"},
               ctx);
  EnsembleConfig c = EnsembleConfig::bagging_defaults();
  if (j.contains("family")) {
    const auto f = get<std::string>(j, "family", ctx);
    if (f == "boosting")
      c = EnsembleConfig::boosting_defaults();
    else if (f != "bagging")
      fail(ErrorCode::InvalidValue, "ensemble.family must be \"bagging\" or \"boosting\"");
  }
  c.n_trees = get_or<std::size_t>(j, "n_trees", c.n_trees, ctx);
  c.learning_rate = get_or<double>(j, "learning_rate", c.learning_rate, ctx);
  c.bootstrap = get_or<bool>(j, "bootstrap", c.bootstrap, ctx);
  c.master_seed = get_or<std::uint64_t>(j, "master_seed", c.master_seed, ctx);
  if (j.contains("voting")) {
    const auto v = get<std::string>(j, "voting", ctx);
    if (v == "soft")
      c.voting = Voting::Soft;
    else if (v == "hard")
      c.voting = Voting::Hard;
    else
      fail(ErrorCode::InvalidValue, "ensemble.voting must be \"soft\" or \"hard\"");
  }
  if (j.contains("tree")) c.tree = tree_config_from_json(j["tree"], c.tree);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Model

namespace {

json tree_to_json(const DecisionTree& t) {
  const auto& nodes = t.nodes();
  auto node_json = [&](const TreeNode& n) {
    json j;
    j["n"] = n.n_samples;
    j["weight"] = n.weight;
    if (n.is_leaf()) {
      j["value"] = n.value;
    } else {
      j["feature"] = n.feature;
      j["threshold"] = n.threshold;
      j["impurity_decrease"] = n.impurity_decrease;
      j["gain"] = n.gain;
    }
    return j;
  };
  // Build bottom-up: children always have larger indices than parents.
  std::vector<json> built(nodes.size());
  for (std::size_t i = nodes.size(); i-- > 0;) {
    json j = node_json(nodes[i]);
    if (!nodes[i].is_leaf()) {
      j["left"] = std::move(built[nodes[i].left]);
      j["right"] = std::move(built[nodes[i].right]);
    }
    built[i] = std::move(j);
  }
  return std::move(built[0]);
}

// Rebuilds the flat layout the grower produces: both children are allocated
// when their parent is visited, then the left subtree is expanded first.
std::vector<TreeNode> tree_nodes_from_json(const json& root) {
  std::vector<TreeNode> nodes(1);
  std::vector<std::pair<const json*, std::size_t>> stack{{&root, 0}};
  constexpr std::string_view ctx = "tree node";
  while (!stack.empty()) {
    auto [j, idx] = stack.back();
    stack.pop_back();
    TreeNode n;
    n.n_samples = get<std::size_t>(*j, "n", ctx);
    n.weight = get<double>(*j, "weight", ctx);
    if (j->contains("value")) {
      require_keys(*j, {"n", "weight", "value"}, ctx);
      n.value = get<std::vector<double>>(*j, "value", ctx);
      nodes[idx] = std::move(n);
      continue;
    }
    require_keys(*j, {"n", "weight", "feature", "threshold", "impurity_decrease", "gain", "left", "right"},
                 ctx);
    n.feature = get<std::int32_t>(*j, "feature", ctx);
    if (n.feature < 0) fail(ErrorCode::InvalidValue, "internal node with negative feature");
    n.threshold = get<double>(*j, "threshold", ctx);
    n.impurity_decrease = get<double>(*j, "impurity_decrease", ctx);
    n.gain = get<double>(*j, "gain", ctx);
    n.left = static_cast<std::uint32_t>(nodes.size());
    n.right = n.left + 1;
    nodes.resize(nodes.size() + 2);
    stack.push_back({&j->at("right"), n.right});
    stack.push_back({&j->at("left"), n.left});
    nodes[idx] = std::move(n);
  }
  return nodes;
}

}  // namespace

json to_json(const EnsembleModel& m) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["config"] = to_json(m.config());
  j["schema"] = m.symbols();
  j["schema_fingerprint"] = m.schema_fingerprint();
  j["class_count"] = m.class_count();
  j["base_scores"] = m.base_scores();
  json trees = json::array();
  for (const auto& t : m.trees()) trees.push_back(tree_to_json(t));
  j["trees"] = std::move(trees);
  return j;
}

EnsembleModel model_from_json(const json& j) {
  constexpr std::string_view ctx = "model";
  if (!j.is_object() || !j.contains("format_version"))
    fail(ErrorCode::UnsupportedVersion, "model JSON has no format_version");
  const int version = get<int>(j, "format_version", ctx);
  if (version != kModelFormatVersion)
    fail(ErrorCode::UnsupportedVersion,
         "unsupported model format_version " + std::to_string(version));
  require_keys(j, {"format_version", "config", "schema", "schema_fingerprint", "class_count",
                   "base_scores", "trees"},
               ctx);
  auto config = ensemble_config_from_json(j.at("config"));
  auto symbols = get<std::vector<std::string>>(j, "schema", ctx);
  const auto k = get<std::size_t>(j, "class_count", ctx);
  auto base = get<std::vector<double>>(j, "base_scores", ctx);
  const std::size_t outputs = config.family == EnsembleFamily::Boosting ? 1 : k;
  std::vector<DecisionTree> trees;
  for (const auto& t : j.at("trees"))
    trees.emplace_back(symbols.size(), outputs, config.tree, tree_nodes_from_json(t));
  EnsembleModel m(std::move(config), std::move(symbols), k, std::move(base), std::move(trees));
  if (m.schema_fingerprint() != get<std::string>(j, "schema_fingerprint", ctx))
    fail(ErrorCode::SchemaMismatch, "schema_fingerprint does not match the schema symbols");
  return m;
}

std::string model_to_string(const EnsembleModel& m) { return to_json(m).dump() + "\n"; }

EnsembleModel model_from_string(std::string_view text) {
  return model_from_json(parse_json(text, "model"));
}

// ---------------------------------------------------------------------------
// Reports

json to_json(const ImportanceRanking& r) {
  json j;
  j["mode"] = to_string(r.mode);
  j["mode_mismatch"] = r.mode_mismatch;
  j["symbols"] = r.symbols;
  j["scores"] = r.scores;
  j["order"] = r.order;
  j["ranked_symbols"] = r.ordered_symbols();
  return j;
}

ImportanceRanking ranking_from_json(const json& j) {
  constexpr std::string_view ctx = "ranking";
  require_keys(j, {"mode", "mode_mismatch", "symbols", "scores", "order", "ranked_symbols"}, ctx);
  ImportanceRanking r;
  r.mode = importance_mode_from_string(get<std::string>(j, "mode", ctx));
  r.mode_mismatch = get_or<bool>(j, "mode_mismatch", false, ctx);
  r.symbols = get<std::vector<std::string>>(j, "symbols", ctx);
  r.scores = get<std::vector<double>>(j, "scores", ctx);
  if (j.contains("order")) {
    r.order = get<std::vector<std::size_t>>(j, "order", ctx);
  } else {
    r = make_ranking(std::move(r.symbols), std::move(r.scores), r.mode, r.mode_mismatch);
  }
  if (r.scores.size() != r.symbols.size())
    fail(ErrorCode::RankingSchemaMismatch, "ranking needs one score per symbol");
  return r;
}

json to_json(const ClassReport& r) {
  json per = json::array();
  for (const auto& c : r.per_class)
    per.push_back({{"class", c.id},
                   {"precision", c.precision},
                   {"recall", c.recall},
                   {"f1", c.f1},
                   {"support", c.support}});
  return {{"per_class", std::move(per)}, {"macro_f1", r.macro_f1}};
}

std::string to_csv(const ClassReport& r) {
  std::ostringstream ss;
  ss << "class,precision,recall,f1,support\n";
  std::uint64_t total = 0;
  for (const auto& c : r.per_class) {
    ss << c.id << ',' << format_double(c.precision) << ',' << format_double(c.recall) << ','
       << format_double(c.f1) << ',' << c.support << '\n';
    total += c.support;
  }
  ss << "macro,,," << format_double(r.macro_f1) << ',' << total << '\n';
  return ss.str();
}

json to_json(const RfaTrace& t) {
  json its = json::array();
  for (const auto& it : t.iterations)
    its.push_back({{"sensor_added", it.sensor_added},
                   {"sensor_count", it.sensor_count},
                   {"clean_f1", it.clean_f1},
                   {"noisy_f1", it.noisy_f1}});
  return {{"iterations", std::move(its)},
          {"selected_set", t.selected_set},
          {"noise_sensor", t.noise_sensor},
          {"threshold_met", t.threshold_met}};
}

RfaTrace rfa_trace_from_json(const json& j) {
  constexpr std::string_view ctx = "rfa_trace";
  require_keys(j, {"iterations", "selected_set", "noise_sensor", "threshold_met"}, ctx);
  RfaTrace t;
  for (const auto& it : j.at("iterations"))
    t.iterations.push_back({get<std::string>(it, "sensor_added", ctx),
                            get<std::size_t>(it, "sensor_count", ctx),
                            get<double>(it, "clean_f1", ctx), get<double>(it, "noisy_f1", ctx)});
  t.selected_set = get<std::vector<std::string>>(j, "selected_set", ctx);
  t.noise_sensor = get<std::string>(j, "noise_sensor", ctx);
  t.threshold_met = get<bool>(j, "threshold_met", ctx);
  return t;
}

std::string to_csv(const RfaTrace& t) {
  std::ostringstream ss;
  ss << "iteration,sensor_added,sensor_count,clean_f1,noisy_f1\n";
  std::size_t k = 0;
  for (const auto& it : t.iterations)
    ss << ++k << ',' << it.sensor_added << ',' << it.sensor_count << ',' << format_double(it.clean_f1) << ','
       << format_double(it.noisy_f1) << '\n';
  return ss.str();
}

json to_json(const RobustnessReport& r) {
  json sc = json::array();
  for (const auto& s : r.scenarios) {
    json e{{"scenario", s.label()}, {"f1", s.f1}};
    if (s.kind == ScenarioResult::Kind::Snr) {
      e["type"] = "snr";
      e["snr_db"] = s.snr_db;
    } else {
      e["type"] = "sensor_failure";
    }
    if (s.measured_snr_db) e["measured_snr_db"] = *s.measured_snr_db;
    sc.push_back(std::move(e));
  }
  return {{"model_id", r.model_id},
          {"optimal_set", r.optimal_set},
          {"top_sensor", r.top_sensor},
          {"baseline_f1", r.baseline_f1},
          {"scenarios", std::move(sc)}};
}

std::string to_csv(const RobustnessReport& r) {
  std::ostringstream ss;
  ss << "scenario,f1\n";
  ss << "baseline," << format_double(r.baseline_f1) << '\n';
  for (const auto& s : r.scenarios) ss << s.label() << ',' << format_double(s.f1) << '\n';
  return ss.str();
}

json to_json(const GeneratorConfig& c) {
  json inf = json::array();
  for (const auto& s : c.informative_sensors)
    inf.push_back({{"symbol", s.symbol}, {"shifts", s.shifts}});
  return {{"n_rows", c.n_rows},
          {"class_proportions", c.class_proportions},
          {"informative_sensors", std::move(inf)},
          {"nuisance_noise_sd", c.nuisance_noise_sd},
          {"seed", c.seed}};
}

GeneratorConfig generator_config_from_json(const json& j) {
  constexpr std::string_view ctx = "simgen";
  require_keys(j, {"n_rows", "class_proportions", "informative_sensors", "nuisance_noise_sd", "seed"},
               ctx);
  GeneratorConfig c = GeneratorConfig::defaults();
  c.n_rows = get_or<std::size_t>(j, "n_rows", c.n_rows, ctx);
  c.class_proportions = get_or<std::vector<double>>(j, "class_proportions", c.class_proportions, ctx);
  if (j.contains("informative_sensors")) {
    c.informative_sensors.clear();
    for (const auto& s : j["informative_sensors"]) {
      require_keys(s, {"symbol", "shifts"}, "simgen.informative_sensors[]");
      c.informative_sensors.push_back(
          {get<std::string>(s, "symbol", ctx), get<std::vector<double>>(s, "shifts", ctx)});
    }
  }
  c.nuisance_noise_sd = get_or<double>(j, "nuisance_noise_sd", c.nuisance_noise_sd, ctx);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, ctx);
  c.validate();
  return c;
}

}  // namespace fdd
