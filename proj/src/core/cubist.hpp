#pragma once

// Rule-based regressor: a committee of model trees with linear models at
// every node, recursive prediction smoothing, and an optional instance-based
// correction from the k nearest training rows.
//
// The trees regress the transformed demand (the same standardized log1p scale
// the network uses) on a flat row of 25 columns: the 17 standardized numeric
// features, the 5 binary flags, and the 3 categorical features replaced by
// the mean training target of their value. Autoregression happens through
// the lag features: at forecast time each step's prediction is fed back into
// the LagState that derives the next step's lags.

#include <cstdint>
#include <string>
#include <vector>

#include "core/features.hpp"

namespace demandcast {

constexpr int kCubistCols = kNumNumeric + kNumBinary + kNumCategorical;

struct CubistConfig {
  int committee_size = 50;       // trees, each grown on re-adjusted targets
  int neighbors = 9;             // k for the nearest-neighbor correction
  int min_leaf = 4;              // minimum samples per side of a split
  double smoothing = 15.0;       // ancestor blending constant
  double sd_stop_fraction = 0.05;  // stop when node sd < fraction of root sd
  double ridge = 1e-8;           // damping on linear-model coefficients
  bool neighbor_adjust = true;

  void validate() const;
  KvConfig to_kv() const;
  static CubistConfig from_kv(const KvConfig& kv);
};

// ---------------------------------------------------------------------------

// Least-squares fit over a subset of row columns. The intercept is not
// damped, so an empty feature set reproduces the node mean exactly.
struct LinearModel {
  std::vector<int> features;
  std::vector<double> coef;  // aligned with `features`
  double intercept = 0.0;

  double eval(const double* row) const;
};

struct TreeNode {
  int split_feature = -1;  // -1 on leaves
  double split_threshold = 0.0;
  int left = -1;
  int right = -1;
  int64_t n_samples = 0;
  double residual_sd = 0.0;
  LinearModel model;  // features limited to the ancestors' split features

  bool is_leaf() const { return left < 0; }
};

// Binary model tree in preorder storage; nodes[0] is the root. Rows go left
// when row[split_feature] <= split_threshold.
struct ModelTree {
  std::vector<TreeNode> nodes;

  // Leaf prediction blended bottom-up with each ancestor's model:
  // p' = (n_child * p + c * p_ancestor) / (n_child + c). c = 0 returns the
  // raw leaf model, the c -> infinity limit is the root model.
  double predict(const double* row, double smoothing) const;
};

// ---------------------------------------------------------------------------

// Flat training matrix. Rows are stored contiguously, kCubistCols wide.
struct CubistSamples {
  std::vector<double> rows;
  std::vector<double> targets;

  size_t size() const { return targets.size(); }
  const double* row(size_t i) const {
    return rows.data() + i * static_cast<size_t>(kCubistCols);
  }
  void validate() const;
};

// Greedy binary splits maximizing standard-deviation reduction, ties broken
// toward the lowest feature index and then the lowest threshold. Each node
// fits its linear model on the split features of its ancestors (the root is
// intercept-only). Fewer than 2*min_leaf samples yield a single leaf.
ModelTree grow_tree(const CubistSamples& samples, const CubistConfig& cfg);

// Per-round targets and smoothed in-sample fits, for inspecting the
// committee's target adjustment.
struct CommitteeTrace {
  std::vector<std::vector<double>> targets;  // targets tree k was grown on
  std::vector<std::vector<double>> fits;     // tree k's smoothed predictions
};

// Tree 1 is grown on the raw targets; tree k then sees
// y_i^(k) = 2 * y_i - fit_i^(k-1), clamped to the raw target range, so each
// round leans against the previous tree's error and a perfectly fitting tree
// leaves the targets unchanged. Prediction averages the smoothed trees.
std::vector<ModelTree> grow_committee(const CubistSamples& samples,
                                      const CubistConfig& cfg,
                                      CommitteeTrace* trace = nullptr);

// ---------------------------------------------------------------------------

// Training rows kept for prediction-time correction: targets t_l and the
// committee's own fitted values on them.
struct NeighborIndex {
  int k = 9;
  std::vector<double> rows;    // kCubistCols wide, standardized
  std::vector<double> targets;
  std::vector<double> fitted;

  size_t size() const { return targets.size(); }
  void validate() const;
};

// Shifts y_hat by the k nearest rows (Manhattan distance, ties to the lower
// row index): sum_l w_l * (t_l + y_hat - fitted_l) with w_l proportional to
// 1 / (d_l + 0.5), normalized to sum 1.
double neighbor_adjust(double y_hat, const double* row,
                       const NeighborIndex& index);

// ---------------------------------------------------------------------------

struct CubistModel {
  CubistConfig cfg;
  std::vector<ModelTree> trees;
  NeighborIndex index;
  // Per categorical feature: vocabulary index -> mean training target.
  // Slot 0 (out of vocabulary) and values never seen carry the global mean.
  std::vector<std::vector<double>> category_means;

  double committee_mean(const double* row) const;
  // Committee mean plus the neighbor correction when enabled.
  double predict_row(const double* row) const;

  std::string to_json() const;
  static CubistModel from_json(const std::string& text);
  uint64_t hash() const { return fnv1a64(to_json()); }
};

// Mean transformed target per categorical value over all training cells;
// layout matches CubistModel::category_means.
std::vector<std::vector<double>> fit_category_means(const Dataset& train,
                                                    const FeatureSchema& schema);

// One row per (series, week) cell, targets on the transformed demand scale.
CubistSamples build_samples(const Dataset& ds, const FeatureSchema& schema,
                            const std::vector<std::vector<double>>& means);

void cubist_row_from_week(const EncodedWeek& w,
                          const std::vector<std::vector<double>>& means,
                          double* out);

// Fits category means, grows the committee and builds the neighbor index.
// `k` is clamped to the number of training rows.
CubistModel train_cubist(const Dataset& train, const FeatureSchema& schema,
                         const CubistConfig& cfg,
                         CommitteeTrace* trace = nullptr);

// One-step-ahead rollout: week t's lag features are derived from the model's
// own prediction for week t-1. Returns point forecasts in demand units.
// Requires feature rows for all of [history_len, history_len + horizon).
std::vector<double> forecast_cubist(const CubistModel& m,
                                    const SeriesInstance& s,
                                    size_t history_len, int horizon,
                                    const FeatureSchema& schema);

}  // namespace demandcast
