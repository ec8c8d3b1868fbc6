#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"

#include "fdd/ensemble.hpp"
#include "fdd/metrics.hpp"
#include "fdd/robustness.hpp"
#include "fdd/selection.hpp"
#include "fdd/simgen.hpp"

namespace fdd {

using json = nlohmann::json;

inline constexpr int kModelFormatVersion = 1;

/// Parses text, mapping syntax errors to ParseError with the byte offset.
json parse_json(std::string_view text, std::string_view what);

/// InvalidValue if `obj` is not an object or has keys outside `allowed`.
void require_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                  std::string_view context);

json to_json(const TreeConfig& c);
TreeConfig tree_config_from_json(const json& j, TreeConfig defaults);

json to_json(const EnsembleConfig& c);
/// Missing fields keep the family's defaults (family read first).
EnsembleConfig ensemble_config_from_json(const json& j);

json to_json(const EnsembleModel& m);
EnsembleModel model_from_json(const json& j);
std::string model_to_string(const EnsembleModel& m);
EnsembleModel model_from_string(std::string_view text);

json to_json(const ImportanceRanking& r);
ImportanceRanking ranking_from_json(const json& j);

json to_json(const ClassReport& r);
std::string to_csv(const ClassReport& r);

json to_json(const RfaTrace& t);
RfaTrace rfa_trace_from_json(const json& j);
std::string to_csv(const RfaTrace& t);

json to_json(const RobustnessReport& r);
std::string to_csv(const RobustnessReport& r);

json to_json(const GeneratorConfig& c);
GeneratorConfig generator_config_from_json(const json& j);

std::string_view to_string(EnsembleFamily f);
std::string_view to_string(ImportanceMode m);
ImportanceMode importance_mode_from_string(std::string_view s);

}  // namespace fdd
