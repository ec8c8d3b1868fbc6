#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fdd/error.hpp"
#include "fdd/tree.hpp"
#include "helpers.hpp"

using namespace fdd;
using fdd::test::make_dataset;

namespace {

// Independent reference: recompute Gini from probabilities, try every
// candidate threshold by explicit partitioning, recurse depth-first.
struct OracleNode {
  int feature = -1;
  double threshold = 0;
  std::size_t n = 0;
  std::vector<double> dist;
};

double oracle_gini(const std::vector<std::size_t>& rows, const std::vector<ClassId>& y, std::size_t k) {
  std::vector<double> p(k, 0.0);
  for (auto r : rows) p[y[r]] += 1.0;
  double g = 1.0;
  for (double c : p) g -= (c / rows.size()) * (c / rows.size());
  return g;
}

void oracle_grow(const std::vector<std::vector<double>>& x, const std::vector<ClassId>& y, std::size_t k,
                 const std::vector<std::size_t>& rows, std::vector<OracleNode>& out) {
  OracleNode node;
  node.n = rows.size();
  node.dist.assign(k, 0.0);
  for (auto r : rows) node.dist[y[r]] += 1.0 / static_cast<double>(rows.size());

  const double parent = oracle_gini(rows, y, k);
  struct Cand {
    int f;
    double t, d;
  };
  std::vector<Cand> cands;
  for (std::size_t f = 0; f < x[0].size(); ++f) {
    std::vector<double> vals;
    for (auto r : rows) vals.push_back(x[r][f]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      double t = vals[i] + (vals[i + 1] - vals[i]) / 2;
      if (!(t < vals[i + 1])) t = vals[i];
      std::vector<std::size_t> l, r;
      for (auto row : rows) (x[row][f] <= t ? l : r).push_back(row);
      const double n = static_cast<double>(rows.size());
      const double d = parent - (l.size() / n) * oracle_gini(l, y, k) - (r.size() / n) * oracle_gini(r, y, k);
      cands.push_back({static_cast<int>(f), t, d});
    }
  }
  double best = 0;
  for (auto& c : cands) best = std::max(best, c.d);
  const Cand* pick = nullptr;
  if (best > 1e-12)
    for (auto& c : cands)
      if (c.d >= best - 1e-12) {
        pick = &c;
        break;
      }
  if (!pick) {
    out.push_back(node);
    return;
  }
  node.feature = pick->f;
  node.threshold = pick->t;
  out.push_back(node);
  std::vector<std::size_t> l, r;
  for (auto row : rows) (x[row][pick->f] <= pick->t ? l : r).push_back(row);
  oracle_grow(x, y, k, l, out);
  oracle_grow(x, y, k, r, out);
}

void preorder(const DecisionTree& t, std::size_t i, std::vector<const TreeNode*>& out) {
  const auto& n = t.nodes()[i];
  out.push_back(&n);
  if (!n.is_leaf()) {
    preorder(t, n.left, out);
    preorder(t, n.right, out);
  }
}

}  // namespace

TEST(Gini, HandValues) {
  const std::vector<std::size_t> a{5, 0}, b{5, 5}, c{2, 2, 2};
  EXPECT_EQ(gini_impurity(a), 0.0);
  EXPECT_NEAR(gini_impurity(b), 0.5, 1e-15);
  EXPECT_NEAR(gini_impurity(c), 2.0 / 3.0, 1e-15);
}

TEST(Gini, EmptyNodeRejected) {
  const std::vector<std::size_t> z{0, 0};
  try {
    gini_impurity(z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyNode);
  }
}

TEST(FitTree, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  int with_ties = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    const std::size_t k = 2 + rng() % 2;
    // few distinct values so equal-gain candidates are common
    std::uniform_int_distribution<int> v(0, trial % 2 ? 3 : 9);
    std::vector<std::vector<double>> x(n, std::vector<double>(2));
    std::vector<ClassId> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = {static_cast<double>(v(rng)), static_cast<double>(v(rng)) * 0.5};
      y[i] = static_cast<ClassId>(rng() % k);
    }
    y[0] = 0;
    y[1] = 1;

    std::vector<OracleNode> expected;
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    oracle_grow(x, y, k, all, expected);

    const auto tree = fit_tree(make_dataset(x, y, k), TreeConfig{}, 7);
    std::vector<const TreeNode*> got;
    preorder(tree, 0, got);
    ASSERT_EQ(got.size(), expected.size()) << "trial " << trial;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i]->feature, expected[i].feature) << "trial " << trial << " node " << i;
      EXPECT_EQ(got[i]->n_samples, expected[i].n);
      if (expected[i].feature >= 0) {
        EXPECT_EQ(got[i]->threshold, expected[i].threshold) << "trial " << trial << " node " << i;
      } else {
        for (std::size_t c = 0; c < k; ++c) EXPECT_NEAR(got[i]->value[c], expected[i].dist[c], 1e-15);
      }
    }
    // count trials where the root had more than one optimal candidate
    if (expected[0].feature >= 0) {
      double best = -1;
      int ties = 0;
      for (std::size_t f = 0; f < 2; ++f) {
        std::vector<double> vals;
        for (auto& row : x) vals.push_back(row[f]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
          const double t = vals[i] + (vals[i + 1] - vals[i]) / 2;
          std::vector<std::size_t> l, r;
          for (std::size_t row = 0; row < n; ++row) (x[row][f] <= t ? l : r).push_back(row);
          const double d = oracle_gini(all, y, k) - (double(l.size()) / n) * oracle_gini(l, y, k) -
                           (double(r.size()) / n) * oracle_gini(r, y, k);
          if (d > best + 1e-12) {
            best = d;
            ties = 1;
          } else if (std::abs(d - best) <= 1e-12) {
            ++ties;
          }
        }
      }
      if (ties > 1) ++with_ties;
    }
  }
  EXPECT_GT(with_ties, 10);
}

TEST(FitTree, TieBreaksToLowestFeatureThenThreshold) {
  // both features separate perfectly; feature 0 must win
  const auto d = make_dataset({{0, 0}, {0, 0}, {1, 1}, {1, 1}}, {0, 0, 1, 1}, 2);
  const auto t = fit_tree(d, TreeConfig{}, 1);
  EXPECT_EQ(t.nodes()[0].feature, 0);
  EXPECT_EQ(t.nodes()[0].threshold, 0.5);

  // XOR-like: every threshold ties at zero gain, so no split at all
  const auto x = make_dataset({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0}, 2);
  EXPECT_EQ(fit_tree(x, TreeConfig{}, 1).nodes().size(), 1u);
}

TEST(FitTree, NodeBookkeeping) {
  const auto d = make_dataset({{1}, {2}, {3}, {4}, {5}, {6}}, {0, 0, 0, 1, 1, 0}, 2);
  const auto t = fit_tree(d, TreeConfig{}, 3);
  const auto& root = t.nodes()[0];
  EXPECT_EQ(root.n_samples, 6u);
  EXPECT_DOUBLE_EQ(root.weight, 1.0);
  EXPECT_DOUBLE_EQ(root.gain, 6 * root.impurity_decrease);
  for (const auto& n : t.nodes()) {
    EXPECT_DOUBLE_EQ(n.weight, n.n_samples / 6.0);
    if (!n.is_leaf()) {
      EXPECT_EQ(t.nodes()[n.left].n_samples + t.nodes()[n.right].n_samples, n.n_samples);
      EXPECT_EQ(n.right, n.left + 1);
    }
  }
}

TEST(FitTree, DepthAndLeafSizeLimits) {
  std::mt19937_64 rng(5);
  std::vector<std::vector<double>> x;
  std::vector<ClassId> y;
  for (int i = 0; i < 200; ++i) {
    x.push_back({double(rng() % 100), double(rng() % 100)});
    y.push_back(static_cast<ClassId>(rng() % 3));
  }
  const auto d = make_dataset(x, y, 3);
  TreeConfig cfg;
  cfg.max_depth = 3;
  EXPECT_LE(fit_tree(d, cfg, 1).depth(), 3u);
  cfg.max_depth.reset();
  cfg.min_leaf = 10;
  for (const auto& n : fit_tree(d, cfg, 1).nodes()) EXPECT_GE(n.n_samples, 10u);
}

TEST(FitTree, HistogramMatchesExactWhenBinsCoverValues) {
  std::mt19937_64 rng(11);
  std::vector<std::vector<double>> x;
  std::vector<ClassId> y;
  for (int i = 0; i < 300; ++i) {
    x.push_back({double(rng() % 20), double(rng() % 7) * 0.25, double(rng() % 40)});
    y.push_back(static_cast<ClassId>((x.back()[0] > 9) + (x.back()[2] > 25) + (rng() % 10 == 0)));
  }
  const auto d = make_dataset(x, y, 4);
  TreeConfig exact, hist;
  hist.split = SplitStrategy::histogram(64);
  EXPECT_EQ(fit_tree(d, exact, 1).nodes(), fit_tree(d, hist, 1).nodes());
}

TEST(FitTree, HistogramWithFewBinsStillLearns) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> x;
  std::vector<ClassId> y;
  for (int i = 0; i < 1000; ++i) {
    const ClassId c = static_cast<ClassId>(i % 2);
    x.push_back({g(rng) + 4.0 * c});
    y.push_back(c);
  }
  TreeConfig cfg;
  cfg.split = SplitStrategy::histogram(8);
  const auto t = fit_tree(make_dataset(x, y, 2), cfg, 1);
  const std::vector<double> lo{-1.0}, hi{5.0};
  EXPECT_GT(t.predict(lo)[0], 0.9);
  EXPECT_GT(t.predict(hi)[1], 0.9);
}

TEST(FitTree, RegressionLeavesAreMeans) {
  const auto d = make_dataset({{1}, {2}, {3}, {10}, {11}, {12}}, {0, 0, 0, 0, 0, 0}, 1);
  const std::vector<double> targets{1, 2, 3, 10, 20, 30};
  TreeConfig cfg;
  cfg.task = TreeTask::RegressionOnGradients;
  cfg.max_depth = 1;
  const auto t = fit_tree(d, targets, cfg, 1);
  ASSERT_EQ(t.nodes().size(), 3u);
  // SSE 50 + 50 at 10.5 beats 2 + 200 at 6.5
  EXPECT_EQ(t.nodes()[0].threshold, 10.5);
  EXPECT_DOUBLE_EQ(t.nodes()[1].value[0], 4.0);
  EXPECT_DOUBLE_EQ(t.nodes()[2].value[0], 25.0);
}

TEST(DecisionTree, PredictValidatesInput) {
  const auto d = make_dataset({{0, 1}, {1, 0}, {2, 1}}, {0, 1, 1}, 2);
  const auto t = fit_tree(d, TreeConfig{}, 1);
  const std::vector<double> short_row{1.0};
  const std::vector<double> nan_row{std::numeric_limits<double>::quiet_NaN(), 0.0};
  try {
    t.predict(short_row);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  try {
    t.predict(nan_row);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteInput);
  }
}

TEST(FitTree, RejectsTooFewRows) {
  const auto d = make_dataset({{0}}, {0}, 2);
  try {
    fit_tree(d, TreeConfig{}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(FitTree, SeedControlsFeatureSubsets) {
  std::mt19937_64 rng(3);
  std::vector<std::vector<double>> x;
  std::vector<ClassId> y;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> row;
    for (int j = 0; j < 9; ++j) row.push_back(double(rng() % 50));
    y.push_back(static_cast<ClassId>((row[0] + row[4] + row[8]) > 75));
    x.push_back(row);
  }
  const auto d = make_dataset(x, y, 2);
  TreeConfig cfg;
  cfg.feature_subsample = FeatureSubsample::sqrt();
  EXPECT_EQ(fit_tree(d, cfg, 99).nodes(), fit_tree(d, cfg, 99).nodes());
  EXPECT_NE(fit_tree(d, cfg, 99).nodes(), fit_tree(d, cfg, 100).nodes());
  EXPECT_EQ(cfg.feature_subsample.resolve(9), 3u);
  EXPECT_EQ(FeatureSubsample::fixed(20).resolve(9), 9u);
}

TEST(TreeImportance, ContributionsFromHandBuiltTree) {
  // root splits feature 1 over 10 rows, left child splits feature 0 over 4
  std::vector<TreeNode> nodes(5);
  nodes[0] = {1, 0.5, 1, 2, 0.3, 3.0, 1.0, 10, {}};
  nodes[1] = {0, 0.5, 3, 4, 0.5, 2.0, 0.4, 4, {}};
  nodes[2] = {-1, 0, 0, 0, 0, 0, 0.6, 6, {0.0, 1.0}};
  nodes[3] = {-1, 0, 0, 0, 0, 0, 0.2, 2, {1.0, 0.0}};
  nodes[4] = {-1, 0, 0, 0, 0, 0, 0.2, 2, {0.0, 1.0}};
  const DecisionTree t(2, 2, TreeConfig{}, nodes);
  const auto mdi = tree_importance_contributions(t, ContributionMode::Impurity);
  EXPECT_DOUBLE_EQ(mdi[0], 0.4 * 0.5);
  EXPECT_DOUBLE_EQ(mdi[1], 0.3);
  const auto raw = tree_importance_contributions(t, ContributionMode::Impurity, false);
  EXPECT_DOUBLE_EQ(raw[0], 0.5);
  const auto gain = tree_importance_contributions(t, ContributionMode::Gain);
  EXPECT_DOUBLE_EQ(gain[0], 2.0);
  EXPECT_DOUBLE_EQ(gain[1], 3.0);
  EXPECT_EQ(t.depth(), 2u);
  EXPECT_EQ(t.leaf_count(), 3u);
  EXPECT_EQ(t.split_log().size(), 2u);
}

TEST(DecisionTree, RejectsMalformedStructure) {
  std::vector<TreeNode> nodes(2);
  nodes[0] = {0, 0.5, 1, 1, 0.1, 0.1, 1.0, 2, {}};
  nodes[1] = {-1, 0, 0, 0, 0, 0, 0.5, 1, {1.0, 0.0}};
  EXPECT_THROW(DecisionTree(1, 2, TreeConfig{}, nodes), Error);
}
