#pragma once

// Feature engineering: turns raw weekly rows into the model input layout.
//
// Per week the models see 17 numeric features (raw prices/stock plus derived
// lags and calendar distances), 5 binary promotion flags passed through as
// 0/1, and 3 categorical ids mapped to vocabulary indices (0 reserved for
// out-of-vocabulary). Lagged features depend only on weeks strictly before
// the current one, so the same derivation runs at training time (actual
// demand) and at forecast time (model feedback) through an explicit LagState.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/dataset.hpp"

namespace demandcast {

constexpr int kNumNumeric = 17;
constexpr int kNumBinary = 5;
constexpr int kNumCategorical = 3;
constexpr int kLagWindow = 4;        // weeks of price/sale history kept
constexpr int64_t kMaxEventDistance = 52;  // cap for event/price-age features

const std::array<const char*, kNumNumeric>& numeric_feature_names();
const std::array<const char*, kNumBinary>& binary_feature_names();
const std::array<const char*, kNumCategorical>& categorical_feature_names();

// ---------------------------------------------------------------------------

// Rolling per-series state. Advance it with the demand that week actually
// had (training) or the model's own prediction (forecasting); derivation for
// week w requires the state to have been advanced through week w-1.
struct LagState {
  int64_t current_week = 0;
  std::vector<double> price_hist;  // effective prices, most recent last, <= 4
  std::vector<double> sale_hist;   // demand, most recent last, <= 4
  double last_discounted = 0.0;    // price-change detection uses the
  bool has_last_discounted = false;  // discounted price: event-week markdowns
                                     // on the effective price do not count
  int64_t weeks_since_change = 0;  // advances since last detected change
  int64_t first_sale_week = -1;    // -1 until a week with demand > 0
  int64_t last_event_week = -1;    // -1 until an event week is advanced past
  double hist_price_min = 0.0;
  double hist_price_max = 0.0;
  double hist_price_sum = 0.0;
  int64_t hist_price_n = 0;
  double vertical_avg_discount = 0.0;  // schema constant for this vertical
};

LagState init_lag_state(const SeriesInstance& s, double vertical_avg_discount);

void advance_lag_state(LagState& state, double demand,
                       const RawFeatureRow& row);

// Unstandardized numeric features for week index t. The series provides the
// current row and the forward event calendar; everything backward-looking
// comes from the state. Throws if the state is not positioned at week t.
std::array<double, kNumNumeric> derive_numeric(const SeriesInstance& s,
                                               size_t t,
                                               const LagState& state);

// ---------------------------------------------------------------------------

// Vocabulary over observed string values. Index 0 is reserved for values not
// seen when the schema was fitted; known values map to 1..size()-1.
struct Vocabulary {
  std::vector<std::string> values;  // sorted; position i maps to index i+1

  int lookup(const std::string& v) const;
  int size() const { return static_cast<int>(values.size()) + 1; }

  static Vocabulary build(std::vector<std::string> observed);
};

struct NumericStats {
  double mean = 0.0;
  double std = 1.0;       // 1.0 when the feature was constant
  bool constant = false;
};

// Demand is modeled on a standardized log1p scale; the inverse clamps
// negative unit counts to zero.
struct DemandTransform {
  double mean = 0.0;
  double std = 1.0;
  bool constant = false;

  double apply(double demand) const { return (std::log1p(demand) - mean) / std; }
  // The exponent is capped so inversion stays finite even when a model's
  // forecast feedback loop runs away; such forecasts score as the huge
  // misses they are instead of poisoning downstream math with infinities.
  double invert(double z) const {
    const double y = std::expm1(std::min(z * std + mean, 700.0));
    return y > 0.0 ? y : 0.0;
  }
};

struct FeatureSchema {
  static constexpr int kVersion = 1;

  Vocabulary product_id;
  Vocabulary event_type;
  Vocabulary product_tier;
  std::array<NumericStats, kNumNumeric> numeric;
  std::map<std::string, double> vertical_avg_discount;
  double global_avg_discount = 0.0;
  std::map<std::string, DemandTransform> vertical_transform;
  DemandTransform global_transform;

  double avg_discount_for(const std::string& vertical_id) const;
  // Per-vertical transform, global for verticals unseen at fit time.
  const DemandTransform& transform_for(const std::string& vertical_id) const;

  std::string to_json() const;
  static FeatureSchema from_json(const std::string& text);
  uint64_t hash() const { return fnv1a64(to_json()); }
};

// Fits vocabularies, per-feature standardization stats (over the same
// sequential derivation used for encoding) and per-vertical demand
// transforms on the training window.
FeatureSchema fit_schema(const Dataset& train);

// ---------------------------------------------------------------------------

struct EncodedWeek {
  std::array<double, kNumNumeric> numeric{};   // standardized
  std::array<double, kNumBinary> binary{};     // 0/1 pass-through
  std::array<int, kNumCategorical> category{}; // product_id, event, tier
};

struct EncodedSeries {
  std::string sku_id;
  std::string region_id;
  std::string vertical_id;
  int64_t start_week = 0;
  std::vector<EncodedWeek> weeks;
  std::vector<double> y;           // transformed demand
  std::vector<double> raw_demand;  // original units
};

// Standardized features for week t given a correctly positioned state.
EncodedWeek encode_week(const SeriesInstance& s, size_t t,
                        const LagState& state, const FeatureSchema& schema);

// Full sequential pass over a series, advancing on actual demand.
EncodedSeries encode_series(const SeriesInstance& s,
                            const FeatureSchema& schema);

}  // namespace demandcast
