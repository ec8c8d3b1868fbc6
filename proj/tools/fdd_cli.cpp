// fdd-cli: command-line front end over the C interface.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fdd/fdd.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kEnvOutput = "FDD_OUTPUT_DIR";
constexpr const char* kDefaultOutput = "fdd_out";

struct Failure {
  fdd_status status;
};

// Where error.json goes when the command has no usable --out.
std::string error_dir = kDefaultOutput;

std::string default_output_dir() {
  const char* env = std::getenv(kEnvOutput);
  return env && *env ? env : kDefaultOutput;
}

void check(fdd_status s) {
  if (s != FDD_OK) throw Failure{s};
}

// Error raised by the CLI itself, in the library's error document shape.
[[noreturn]] void raise(fdd_status status, const std::string& message, json extra = json::object()) {
  json err{{"code", fdd_status_name(status)}, {"status", status}, {"message", message}};
  err.update(extra);
  throw json{{"error", std::move(err)}};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(FDD_FILE_NOT_FOUND, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct DatasetDeleter {
  void operator()(fdd_dataset* d) const { fdd_dataset_free(d); }
};
struct ModelDeleter {
  void operator()(fdd_model* m) const { fdd_model_free(m); }
};
struct StringDeleter {
  void operator()(char* s) const { fdd_string_free(s); }
};
using DatasetPtr = std::unique_ptr<fdd_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<fdd_model, ModelDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

DatasetPtr load_csv(const std::string& path, bool infer) {
  fdd_dataset* d = nullptr;
  check(fdd_dataset_load_csv(path.c_str(), infer ? 1 : 0, &d));
  return DatasetPtr(d);
}

ModelPtr load_model(const std::string& path) {
  fdd_model* m = nullptr;
  check(fdd_model_load(path.c_str(), &m));
  return ModelPtr(m);
}

void write_text(const std::string& path, const std::string& text) {
  check(fdd_write_text(path.c_str(), text.c_str()));
}

std::string path_in(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

// Directory for error.json given an output file path.
std::string parent_or_default(const std::string& file) {
  const auto parent = fs::path(file).parent_path();
  return parent.empty() ? std::string(".") : parent.string();
}

std::vector<double> parse_snr_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      raise(FDD_INVALID_VALUE, "--snr: not a number: " + item);
    }
  }
  return out;
}

json parse_json_file(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    raise(FDD_PARSE_ERROR, path + ": " + e.what(), {{"position", e.byte}});
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fault detection and diagnosis with tree ensembles"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  // simgen
  auto* simgen = app.add_subcommand("simgen", "Generate a synthetic refrigeration dataset");
  std::size_t sim_rows = 20000;
  std::uint64_t sim_seed = 42;
  std::string sim_out, sim_config;
  simgen->add_option("--rows", sim_rows, "Number of rows");
  simgen->add_option("--seed", sim_seed, "Generator seed");
  simgen->add_option("--config", sim_config, "Generator config JSON file");
  simgen->add_option("--out", sim_out, "Output CSV file");

  // split
  auto* split = app.add_subcommand("split", "Undersample and split a dataset into train/test CSVs");
  std::string split_data, split_out;
  double split_fraction = 0.75;
  std::uint64_t split_seed = 42;
  bool split_no_stratify = false, split_no_undersample = false, split_infer = false;
  std::optional<std::size_t> split_target;
  split->add_option("--data", split_data, "Input CSV")->required();
  split->add_option("--fraction", split_fraction, "Training fraction");
  split->add_option("--seed", split_seed, "Seed");
  split->add_option("--target", split_target, "Explicit majority class size after undersampling");
  split->add_flag("--no-stratify", split_no_stratify, "Plain random split");
  split->add_flag("--no-undersample", split_no_undersample, "Keep the class balance as is");
  split->add_flag("--infer-schema", split_infer, "Accept non-reference column names");
  split->add_option("--out", split_out, "Output directory");

  // train
  auto* train = app.add_subcommand("train", "Fit an ensemble");
  std::string train_data, train_config, train_out, train_test;
  std::string train_family = "bagging";
  std::uint64_t train_seed = 42;
  train->add_option("--train", train_data, "Training CSV")->required();
  train->add_option("--test", train_test, "Optional test CSV; writes a class report");
  train->add_option("--family", train_family, "bagging or boosting")
      ->check(CLI::IsMember({"bagging", "boosting"}));
  train->add_option("--config", train_config, "Ensemble config JSON file");
  train->add_option("--seed", train_seed, "Master seed");
  train->add_option("--out", train_out, "Output model JSON file");

  // importance
  auto* importance = app.add_subcommand("importance", "Rank sensors by feature importance");
  std::string imp_model, imp_mode, imp_out;
  importance->add_option("--model", imp_model, "Model JSON")->required();
  importance->add_option("--mode", imp_mode, "mdi or gain")->check(CLI::IsMember({"mdi", "gain"}));
  importance->add_option("--out", imp_out, "Output ranking JSON file");

  // rfa
  auto* rfa = app.add_subcommand("rfa", "Recursive feature addition over a ranking");
  std::string rfa_train, rfa_test, rfa_ranking, rfa_config, rfa_out;
  std::optional<double> rfa_threshold, rfa_snr;
  std::optional<std::size_t> rfa_max;
  std::optional<std::uint64_t> rfa_seed;
  rfa->add_option("--train", rfa_train, "Training CSV")->required();
  rfa->add_option("--test", rfa_test, "Test CSV")->required();
  rfa->add_option("--ranking", rfa_ranking, "Ranking JSON")->required();
  rfa->add_option("--threshold", rfa_threshold, "Stopping macro-F1 (default 0.99)");
  rfa->add_option("--snr", rfa_snr, "SNR in dB for the noisy curve (default 3.0)");
  rfa->add_option("--max-sensors", rfa_max, "Sensor cap");
  rfa->add_option("--seed", rfa_seed, "Noise and ensemble seed");
  rfa->add_option("--config", rfa_config, "RFA config JSON file");
  rfa->add_option("--out", rfa_out, "Output directory");

  // robustness
  auto* robust = app.add_subcommand("robustness", "Noise and sensor-failure scenarios");
  std::string rob_model, rob_test, rob_snr = "10,3,0", rob_sensor, rob_out;
  bool rob_fail = false;
  std::uint64_t rob_seed = 42;
  robust->add_option("--model", rob_model, "Model JSON")->required();
  robust->add_option("--test", rob_test, "Test CSV")->required();
  robust->add_option("--snr", rob_snr, "Comma-separated SNR list in dB");
  robust->add_flag("--fail-sensor", rob_fail, "Add the zeroed-sensor scenario");
  robust->add_option("--sensor", rob_sensor, "Sensor to perturb (default: the model's top-ranked)");
  robust->add_option("--seed", rob_seed, "Noise seed");
  robust->add_option("--out", rob_out, "Output directory");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run the whole workflow end to end");
  std::string pipe_config;
  std::optional<std::uint64_t> pipe_seed;
  std::optional<std::string> pipe_out;
  pipeline->add_option("--config", pipe_config, "Pipeline config JSON file")->required();
  pipeline->add_option("--seed", pipe_seed, "Top-level seed");
  pipeline->add_option("--out", pipe_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) {
      const json doc{{"error", {{"code", "InvalidArgument"}, {"status", FDD_INVALID_ARGUMENT}, {"message", e.what()}}}};
      fdd_write_text(path_in(default_output_dir(), "error.json").c_str(), (doc.dump() + "\n").c_str());
    }
    return code;
  }
  fdd_set_threads(threads);

  try {
    if (simgen->parsed()) {
      if (sim_out.empty()) sim_out = path_in(default_output_dir(), "simgen.csv");
      error_dir = parent_or_default(sim_out);
      json cfg = sim_config.empty() ? json::object() : parse_json_file(sim_config);
      if (simgen->count("--rows") || !cfg.contains("n_rows")) cfg["n_rows"] = sim_rows;
      cfg.erase("seed");
      fdd_dataset* d = nullptr;
      check(fdd_dataset_generate(cfg.dump().c_str(), sim_seed, &d));
      DatasetPtr data(d);
      check(fdd_dataset_write_csv(data.get(), sim_out.c_str()));
      std::cout << "wrote " << sim_out << " (" << fdd_dataset_rows(data.get()) << " rows, "
                << fdd_dataset_sensors(data.get()) << " sensors)\n";
    } else if (split->parsed()) {
      if (split_out.empty()) split_out = default_output_dir();
      error_dir = split_out;
      DatasetPtr data = load_csv(split_data, split_infer);
      if (!split_no_undersample) {
        fdd_dataset* u = nullptr;
        const auto target = split_target ? static_cast<std::int64_t>(*split_target) : std::int64_t{-1};
        check(fdd_dataset_undersample(data.get(), target, split_seed, &u));
        data.reset(u);
      }
      fdd_dataset *tr = nullptr, *te = nullptr;
      check(fdd_dataset_split(data.get(), split_fraction, split_no_stratify ? 0 : 1, split_seed, &tr, &te));
      DatasetPtr train_set(tr), test_set(te);
      check(fdd_dataset_write_csv(train_set.get(), path_in(split_out, "train.csv").c_str()));
      check(fdd_dataset_write_csv(test_set.get(), path_in(split_out, "test.csv").c_str()));
      std::cout << "train " << fdd_dataset_rows(train_set.get()) << " rows, test "
                << fdd_dataset_rows(test_set.get()) << " rows -> " << split_out << "\n";
    } else if (train->parsed()) {
      if (train_out.empty()) train_out = path_in(default_output_dir(), "model.json");
      error_dir = parent_or_default(train_out);
      json cfg = train_config.empty() ? json::object() : parse_json_file(train_config);
      if (train->count("--family") || !cfg.contains("family")) cfg["family"] = train_family;
      cfg.erase("master_seed");
      DatasetPtr data = load_csv(train_data, true);
      fdd_model* m = nullptr;
      check(fdd_model_fit(data.get(), cfg.dump().c_str(), train_seed, &m));
      ModelPtr model(m);
      check(fdd_model_save(model.get(), train_out.c_str()));
      std::cout << "wrote " << train_out << "\n";
      if (!train_test.empty()) {
        DatasetPtr test_set = load_csv(train_test, true);
        char* report = nullptr;
        check(fdd_model_evaluate(model.get(), test_set.get(), &report));
        StringPtr text(report);
        write_text(path_in(parent_or_default(train_out), "class_report.json"), text.get());
        std::cout << "macro-F1 " << json::parse(text.get())["macro_f1"].get<double>() << "\n";
      }
    } else if (importance->parsed()) {
      if (imp_out.empty()) imp_out = path_in(default_output_dir(), "importance.json");
      error_dir = parent_or_default(imp_out);
      ModelPtr model = load_model(imp_model);
      char* out = nullptr;
      check(fdd_model_importance(model.get(), imp_mode.empty() ? nullptr : imp_mode.c_str(), &out));
      StringPtr text(out);
      write_text(imp_out, text.get());
      const auto ranked = json::parse(text.get())["ranked_symbols"];
      std::cout << "top sensors:";
      for (std::size_t i = 0; i < ranked.size() && i < 8; ++i) std::cout << ' ' << ranked[i].get<std::string>();
      std::cout << "\nwrote " << imp_out << "\n";
    } else if (rfa->parsed()) {
      if (rfa_out.empty()) rfa_out = default_output_dir();
      error_dir = rfa_out;
      json cfg = rfa_config.empty() ? json::object() : parse_json_file(rfa_config);
      if (rfa_threshold) cfg["threshold"] = *rfa_threshold;
      if (rfa_snr) cfg["snr_db"] = *rfa_snr;
      if (rfa_max) cfg["max_sensors"] = *rfa_max;
      if (rfa_seed) cfg["seed"] = *rfa_seed;
      DatasetPtr train_set = load_csv(rfa_train, true);
      DatasetPtr test_set = load_csv(rfa_test, true);
      const std::string ranking = read_text(rfa_ranking);
      char* out = nullptr;
      check(fdd_rfa_run(train_set.get(), test_set.get(), ranking.c_str(), cfg.dump().c_str(), rfa_out.c_str(),
                        &out));
      StringPtr text(out);
      const auto trace = json::parse(text.get());
      for (const auto& it : trace["iterations"])
        std::cout << it["sensor_count"].get<std::size_t>() << " +" << it["sensor_added"].get<std::string>()
                  << "  clean " << it["clean_f1"].get<double>() << "  noisy " << it["noisy_f1"].get<double>()
                  << "\n";
      std::cout << (trace["threshold_met"].get<bool>() ? "threshold met" : "threshold not met") << "\n";
    } else if (robust->parsed()) {
      if (rob_out.empty()) rob_out = default_output_dir();
      error_dir = rob_out;
      const auto snrs = parse_snr_list(rob_snr);
      ModelPtr model = load_model(rob_model);
      DatasetPtr test_set = load_csv(rob_test, true);
      char* out = nullptr;
      check(fdd_robustness_run(model.get(), test_set.get(), rob_sensor.empty() ? nullptr : rob_sensor.c_str(),
                               snrs.data(), snrs.size(), rob_fail ? 1 : 0, rob_seed, rob_out.c_str(), &out));
      StringPtr text(out);
      const auto report = json::parse(text.get());
      std::cout << "baseline " << report["baseline_f1"].get<double>() << "\n";
      for (const auto& s : report["scenarios"])
        std::cout << s["scenario"].get<std::string>() << " " << s["f1"].get<double>() << "\n";
    } else if (pipeline->parsed()) {
      error_dir = pipe_out ? *pipe_out : default_output_dir();
      const std::string text = read_text(pipe_config);
      const std::uint64_t seed = pipe_seed.value_or(0);
      const char* out_dir = pipe_out ? pipe_out->c_str() : nullptr;
      // resolve first so a failure lands next to where the artifacts would
      char* resolved = nullptr;
      if (fdd_config_resolve(text.c_str(), pipe_seed ? &seed : nullptr, out_dir, &resolved) == FDD_OK) {
        StringPtr r(resolved);
        error_dir = json::parse(r.get())["output_dir"].get<std::string>();
      }
      char* summary = nullptr;
      check(fdd_pipeline_run(text.c_str(), pipe_seed ? &seed : nullptr, out_dir, &summary));
      StringPtr s(summary);
      std::cout << s.get();
    }
    return 0;
  } catch (const Failure& f) {
    const std::string doc = fdd_last_error_json();
    std::cerr << "error: " << fdd_status_name(f.status) << ": " << fdd_last_error() << "\n";
    if (fdd_write_text(path_in(error_dir, "error.json").c_str(), (doc + "\n").c_str()) != FDD_OK)
      std::cerr << doc << "\n";
    return static_cast<int>(f.status) & 0xff ? static_cast<int>(f.status) & 0xff : 1;
  } catch (const json& doc) {
    std::cerr << "error: " << doc["error"]["message"].get<std::string>() << "\n";
    if (fdd_write_text(path_in(error_dir, "error.json").c_str(), (doc.dump() + "\n").c_str()) != FDD_OK)
      std::cerr << doc.dump() << "\n";
    return doc["error"]["status"].get<int>();
  }
}
