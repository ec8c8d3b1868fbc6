#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "fdd/fdd.h"
#include "helpers.hpp"
#include "json.hpp"

using nlohmann::json;

namespace {

std::string take(char* s) {
  std::string out(s);
  fdd_string_free(s);
  return out;
}

}  // namespace

TEST(CApi, StagedWorkflow) {
  fdd_set_threads(1);
  const auto dir = fdd::test::temp_dir("capi");
  fdd_dataset* data = nullptr;
  ASSERT_EQ(fdd_dataset_generate(R"({"n_rows": 2000})", 5, &data), FDD_OK);
  EXPECT_EQ(fdd_dataset_rows(data), 2000u);
  EXPECT_EQ(fdd_dataset_sensors(data), 40u);
  EXPECT_EQ(fdd_dataset_class_count(data), 7u);

  const auto csv = (dir / "data.csv").string();
  ASSERT_EQ(fdd_dataset_write_csv(data, csv.c_str()), FDD_OK);
  fdd_dataset* loaded = nullptr;
  ASSERT_EQ(fdd_dataset_load_csv(csv.c_str(), 0, &loaded), FDD_OK);
  EXPECT_EQ(fdd_dataset_rows(loaded), 2000u);

  fdd_dataset* balanced = nullptr;
  ASSERT_EQ(fdd_dataset_undersample(loaded, -1, 1, &balanced), FDD_OK);
  fdd_dataset *train = nullptr, *test = nullptr;
  ASSERT_EQ(fdd_dataset_split(balanced, 0.75, 1, 2, &train, &test), FDD_OK);

  fdd_model* model = nullptr;
  ASSERT_EQ(fdd_model_fit(train, R"({"n_trees": 8})", 3, &model), FDD_OK);
  EXPECT_EQ(fdd_model_class_count(model), 7u);
  const auto model_path = (dir / "model.json").string();
  ASSERT_EQ(fdd_model_save(model, model_path.c_str()), FDD_OK);
  fdd_model* reloaded = nullptr;
  ASSERT_EQ(fdd_model_load(model_path.c_str(), &reloaded), FDD_OK);

  std::vector<double> row(40, 0.0);
  std::vector<double> probs(7);
  uint32_t a = 0, b = 0;
  ASSERT_EQ(fdd_model_predict(model, row.data(), row.size(), &a, probs.data()), FDD_OK);
  ASSERT_EQ(fdd_model_predict(reloaded, row.data(), row.size(), &b, nullptr), FDD_OK);
  EXPECT_EQ(a, b);
  EXPECT_EQ(fdd_model_predict(model, row.data(), 3, &a, nullptr), FDD_DIMENSION_MISMATCH);
  EXPECT_NE(std::string(fdd_last_error()), "");

  char* out = nullptr;
  ASSERT_EQ(fdd_model_evaluate(model, test, &out), FDD_OK);
  EXPECT_GT(json::parse(take(out))["macro_f1"].get<double>(), 0.9);

  ASSERT_EQ(fdd_model_importance(model, nullptr, &out), FDD_OK);
  const std::string ranking = take(out);
  EXPECT_EQ(json::parse(ranking)["mode"], "mdi");

  const auto rfa_dir = (dir / "rfa").string();
  ASSERT_EQ(fdd_rfa_run(train, test, ranking.c_str(), R"({"threshold": 0.9, "ensemble": {"n_trees": 8}})",
                        rfa_dir.c_str(), &out),
            FDD_OK);
  const auto trace = json::parse(take(out));
  EXPECT_TRUE(std::filesystem::exists(dir / "rfa" / "rfa_curves.svg"));
  EXPECT_GE(trace["iterations"].size(), 1u);

  const double snrs[] = {10, 0};
  ASSERT_EQ(fdd_robustness_run(model, test, nullptr, snrs, 2, 1, 4, nullptr, &out), FDD_OK);
  const auto report = json::parse(take(out));
  EXPECT_EQ(report["scenarios"].size(), 3u);
  EXPECT_EQ(report["top_sensor"], json::parse(ranking)["ranked_symbols"][0]);

  const char* names[] = {"T_FI", "T_C"};
  fdd_dataset* narrow = nullptr;
  ASSERT_EQ(fdd_dataset_select(test, names, 2, &narrow), FDD_OK);
  EXPECT_EQ(fdd_dataset_sensors(narrow), 2u);
  EXPECT_EQ(fdd_model_evaluate(model, narrow, &out), FDD_SCHEMA_MISMATCH);

  for (auto* d : {data, loaded, balanced, train, test, narrow}) fdd_dataset_free(d);
  fdd_model_free(model);
  fdd_model_free(reloaded);
}

TEST(CApi, ErrorsAndStatusNames) {
  fdd_dataset* d = nullptr;
  EXPECT_EQ(fdd_dataset_load_csv("/nonexistent.csv", 0, &d), FDD_FILE_NOT_FOUND);
  EXPECT_EQ(d, nullptr);
  const auto err = json::parse(fdd_last_error_json());
  EXPECT_EQ(err["error"]["code"], "FileNotFound");
  EXPECT_STREQ(fdd_status_name(FDD_FILE_NOT_FOUND), "FileNotFound");
  EXPECT_STREQ(fdd_status_name(FDD_OK), "Ok");
  EXPECT_EQ(fdd_dataset_load_csv(nullptr, 0, &d), FDD_INVALID_ARGUMENT);
  EXPECT_EQ(fdd_dataset_generate(R"({"class_proportions": [0.5, 0.6]})", 1, &d), FDD_BAD_PROPORTIONS);
  EXPECT_EQ(fdd_dataset_generate("{", 1, &d), FDD_PARSE_ERROR);
}

TEST(CApi, ConfigResolveAndPipeline) {
  const auto dir = fdd::test::temp_dir("capi_pipe");
  char* out = nullptr;
  const uint64_t seed = 11;
  ASSERT_EQ(fdd_config_resolve("{}", &seed, dir.string().c_str(), &out), FDD_OK);
  const auto resolved = json::parse(take(out));
  EXPECT_EQ(resolved["seed"], 11);
  EXPECT_EQ(resolved["rfa"]["threshold"], 0.99);
  EXPECT_EQ(resolved["output_dir"], dir.string());
  EXPECT_EQ(fdd_config_resolve(R"({"rfa": {"threshold": 1.5}})", nullptr, nullptr, &out), FDD_INVALID_VALUE);

  const char* cfg = R"({"data": {"simgen": {"n_rows": 2000}}, "ensemble": {"n_trees": 6}})";
  ASSERT_EQ(fdd_pipeline_run(cfg, &seed, dir.string().c_str(), &out), FDD_OK);
  const auto summary = json::parse(take(out));
  EXPECT_EQ(summary["artifacts"].size(), 13u);
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
}
