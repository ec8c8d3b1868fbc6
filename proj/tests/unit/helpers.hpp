#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fdd/dataset.hpp"

namespace fdd::test {

// Dataset with synthetic symbols x0, x1, ... from row-major rows.
inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<ClassId>& labels,
                            std::size_t k) {
  const std::size_t n = rows.size();
  const std::size_t f = n ? rows[0].size() : 0;
  std::vector<SensorMeta> schema;
  for (std::size_t j = 0; j < f; ++j)
    schema.push_back({"x" + std::to_string(j), "", SensorKind::Temperature});
  std::vector<double> values(n * f);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < f; ++j) values[j * n + i] = rows[i][j];
  return Dataset(std::move(schema), std::move(values), labels, k);
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("fdd_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace fdd::test
