#include "fdd/selection.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "fdd/metrics.hpp"
#include "fdd/robustness.hpp"

namespace fdd {

namespace {

void check_ranking(const ImportanceRanking& r, const Dataset& train, const Dataset& test) {
  if (r.order.empty()) fail(ErrorCode::EmptyRanking, "importance ranking is empty");
  if (r.symbols != train.symbols())
    fail(ErrorCode::RankingSchemaMismatch, "ranking sensors differ from the training schema");
  if (test.symbols() != train.symbols())
    fail(ErrorCode::RankingSchemaMismatch, "train and test schemas differ");
  std::vector<bool> seen(r.symbols.size(), false);
  if (r.order.size() != r.symbols.size())
    fail(ErrorCode::RankingSchemaMismatch, "ranking order does not cover every sensor");
  for (auto j : r.order) {
    if (j >= seen.size() || seen[j])
      fail(ErrorCode::RankingSchemaMismatch, "ranking order is not a permutation");
    seen[j] = true;
  }
}

}  // namespace

RfaTrace run_rfa(const Dataset& train, const Dataset& test, const RfaConfig& cfg,
                 unsigned threads) {
  if (!(cfg.threshold > 0.0) || !std::isfinite(cfg.threshold))
    fail(ErrorCode::InvalidValue, "RFA threshold must be positive and finite");
  // F1 never exceeds 1, so a larger threshold means "run to exhaustion"
  const double threshold = std::min(cfg.threshold, 1.0);
  if (cfg.max_sensors && *cfg.max_sensors == 0)
    fail(ErrorCode::InvalidValue, "max_sensors must be >= 1");
  check_ranking(cfg.ranking, train, test);

  const auto ranked = cfg.ranking.ordered_symbols();
  std::size_t limit = ranked.size();
  if (cfg.max_sensors) limit = std::min(limit, *cfg.max_sensors);

  RfaTrace trace;
  trace.noise_sensor = ranked.front();
  for (std::size_t k = 1; k <= limit; ++k) {
    const std::vector<std::string> subset(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
    const Dataset train_k = train.select_sensors(subset);
    auto test_k = std::make_shared<const Dataset>(test.select_sensors(subset));

    const EnsembleModel model = fit_ensemble(train_k, cfg.ensemble, threads);
    RfaIteration it;
    it.sensor_added = ranked[k - 1];
    it.sensor_count = k;
    it.clean_f1 = evaluate(model, *test_k).macro_f1;
    if (test_k->find_sensor(trace.noise_sensor)) {
      const auto noisy =
          inject_awgn(test_k, {cfg.robustness_snr_db, trace.noise_sensor, cfg.noise_seed});
      it.noisy_f1 = evaluate(model, noisy.materialize()).macro_f1;
    } else {
      it.noisy_f1 = it.clean_f1;
    }
    trace.iterations.push_back(it);
    trace.selected_set = subset;
    if (it.clean_f1 >= threshold) {
      trace.threshold_met = true;
      break;
    }
  }
  return trace;
}

}  // namespace fdd
