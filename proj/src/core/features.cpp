#include "core/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

namespace demandcast {

using ordered_json = nlohmann::ordered_json;

const std::array<const char*, kNumNumeric>& numeric_feature_names() {
  static const std::array<const char*, kNumNumeric> names = {
      "oos_pct",
      "listed_price",
      "discounted_price",
      "effective_price",
      "week_of_month",
      "lag_price_1w",
      "lag_price_4w",
      "lag_sale_1w",
      "lag_sale_4w",
      "weeks_since_price_change",
      "weeks_since_last_event",
      "weeks_to_next_event",
      "weeks_since_first_sale",
      "price_diff_from_mean",
      "price_hist_min",
      "price_hist_max",
      "vertical_avg_discount",
  };
  return names;
}

const std::array<const char*, kNumBinary>& binary_feature_names() {
  static const std::array<const char*, kNumBinary> names = {
      "deal_card", "banner", "no_cost_emi", "exchange", "exclusive",
  };
  return names;
}

const std::array<const char*, kNumCategorical>& categorical_feature_names() {
  static const std::array<const char*, kNumCategorical> names = {
      "product_id", "event_type", "product_tier",
  };
  return names;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kPriceChangeTol = 1e-9;  // relative

bool price_changed(double prev, double curr) {
  return std::abs(curr - prev) > kPriceChangeTol * std::max(1.0, std::abs(prev));
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

LagState init_lag_state(const SeriesInstance& s, double vertical_avg_discount) {
  LagState state;
  state.current_week = s.start_week;
  state.vertical_avg_discount = vertical_avg_discount;
  return state;
}

void advance_lag_state(LagState& state, double demand,
                       const RawFeatureRow& row) {
  if (state.has_last_discounted &&
      price_changed(state.last_discounted, row.discounted_price))
    state.weeks_since_change = 0;
  else
    ++state.weeks_since_change;
  state.last_discounted = row.discounted_price;
  state.has_last_discounted = true;

  state.price_hist.push_back(row.effective_price);
  if (state.price_hist.size() > kLagWindow)
    state.price_hist.erase(state.price_hist.begin());
  state.sale_hist.push_back(demand);
  if (state.sale_hist.size() > kLagWindow)
    state.sale_hist.erase(state.sale_hist.begin());

  state.hist_price_min = state.hist_price_n == 0
                             ? row.effective_price
                             : std::min(state.hist_price_min, row.effective_price);
  state.hist_price_max = state.hist_price_n == 0
                             ? row.effective_price
                             : std::max(state.hist_price_max, row.effective_price);
  state.hist_price_sum += row.effective_price;
  ++state.hist_price_n;

  if (row.event_type != "none") state.last_event_week = state.current_week;
  if (state.first_sale_week < 0 && demand > 0.0)
    state.first_sale_week = state.current_week;
  ++state.current_week;
}

std::array<double, kNumNumeric> derive_numeric(const SeriesInstance& s,
                                               size_t t,
                                               const LagState& state) {
  if (t >= s.length())
    fail(ErrorCode::invalid_argument,
         "feature index " + std::to_string(t) + " outside series " + s.sku_id);
  const int64_t week = s.week_at(t);
  if (state.current_week != week)
    fail(ErrorCode::invalid_argument,
         "lag state at week " + std::to_string(state.current_week) +
             " but derivation asked for week " + std::to_string(week));
  const RawFeatureRow& row = s.features[t];

  std::array<double, kNumNumeric> x{};
  x[0] = row.out_of_stock_pct;
  x[1] = row.listed_price;
  x[2] = row.discounted_price;
  x[3] = row.effective_price;
  // Position within a 4-week cycle; floor-mod so pre-epoch weeks stay in 1..4.
  x[4] = static_cast<double>(((week - 1) % 4 + 4) % 4 + 1);
  x[5] = state.price_hist.empty() ? row.effective_price
                                  : state.price_hist.back();
  x[6] = state.price_hist.empty() ? row.effective_price
                                  : mean_of(state.price_hist);
  x[7] = state.sale_hist.empty() ? 0.0 : state.sale_hist.back();
  x[8] = state.sale_hist.empty() ? 0.0 : mean_of(state.sale_hist);

  // 0 means the price moved this very week, 1 the week before, capped.
  int64_t since_change = kMaxEventDistance;
  if (state.has_last_discounted) {
    since_change = price_changed(state.last_discounted, row.discounted_price)
                       ? 0
                       : std::min(state.weeks_since_change + 1,
                                  kMaxEventDistance);
  }
  x[9] = static_cast<double>(since_change);

  int64_t since_event = kMaxEventDistance;
  if (state.last_event_week >= 0)
    since_event = std::min(week - state.last_event_week, kMaxEventDistance);
  x[10] = static_cast<double>(since_event);

  // Forward scan over the known calendar; 0 when this week is an event.
  int64_t to_event = kMaxEventDistance;
  for (size_t u = t; u < s.length(); ++u) {
    const int64_t d = s.week_at(u) - week;
    if (d >= kMaxEventDistance) break;
    if (s.features[u].event_type != "none") {
      to_event = d;
      break;
    }
  }
  x[11] = static_cast<double>(to_event);

  x[12] = state.first_sale_week >= 0
              ? static_cast<double>(week - state.first_sale_week)
              : 0.0;
  const double hist_mean = state.hist_price_n > 0
                               ? state.hist_price_sum /
                                     static_cast<double>(state.hist_price_n)
                               : row.effective_price;
  x[13] = row.effective_price - hist_mean;
  x[14] = state.hist_price_n > 0 ? state.hist_price_min : row.effective_price;
  x[15] = state.hist_price_n > 0 ? state.hist_price_max : row.effective_price;
  x[16] = state.vertical_avg_discount;
  return x;
}

// ---------------------------------------------------------------------------

int Vocabulary::lookup(const std::string& v) const {
  const auto it = std::lower_bound(values.begin(), values.end(), v);
  if (it != values.end() && *it == v)
    return static_cast<int>(it - values.begin()) + 1;
  return 0;
}

Vocabulary Vocabulary::build(std::vector<std::string> observed) {
  std::sort(observed.begin(), observed.end());
  observed.erase(std::unique(observed.begin(), observed.end()),
                 observed.end());
  return Vocabulary{std::move(observed)};
}

double FeatureSchema::avg_discount_for(const std::string& vertical_id) const {
  const auto it = vertical_avg_discount.find(vertical_id);
  return it == vertical_avg_discount.end() ? global_avg_discount : it->second;
}

const DemandTransform& FeatureSchema::transform_for(
    const std::string& vertical_id) const {
  const auto it = vertical_transform.find(vertical_id);
  return it == vertical_transform.end() ? global_transform : it->second;
}

namespace {

ordered_json vocab_to_json(const Vocabulary& v) {
  return ordered_json(v.values);
}

Vocabulary vocab_from_json(const ordered_json& j) {
  Vocabulary v;
  for (const auto& x : j) v.values.push_back(x.get<std::string>());
  if (!std::is_sorted(v.values.begin(), v.values.end()))
    fail(ErrorCode::schema_mismatch, "vocabulary values not sorted");
  return v;
}

ordered_json transform_to_json(const DemandTransform& t) {
  return ordered_json{{"mean", t.mean}, {"std", t.std}, {"constant", t.constant}};
}

DemandTransform transform_from_json(const ordered_json& j) {
  DemandTransform t;
  t.mean = j.at("mean").get<double>();
  t.std = j.at("std").get<double>();
  t.constant = j.at("constant").get<bool>();
  return t;
}

}  // namespace

std::string FeatureSchema::to_json() const {
  ordered_json j;
  j["version"] = kVersion;
  j["product_id"] = vocab_to_json(product_id);
  j["event_type"] = vocab_to_json(event_type);
  j["product_tier"] = vocab_to_json(product_tier);
  ordered_json stats = ordered_json::array();
  for (int i = 0; i < kNumNumeric; ++i)
    stats.push_back(ordered_json{{"name", numeric_feature_names()[i]},
                                 {"mean", numeric[i].mean},
                                 {"std", numeric[i].std},
                                 {"constant", numeric[i].constant}});
  j["numeric"] = std::move(stats);
  ordered_json disc;
  for (const auto& [k, v] : vertical_avg_discount) disc[k] = v;
  j["vertical_avg_discount"] = std::move(disc);
  j["global_avg_discount"] = global_avg_discount;
  ordered_json tr;
  for (const auto& [k, v] : vertical_transform) tr[k] = transform_to_json(v);
  j["vertical_transform"] = std::move(tr);
  j["global_transform"] = transform_to_json(global_transform);
  return j.dump(2);
}

FeatureSchema FeatureSchema::from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("schema json: ") + e.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != kVersion)
    fail(ErrorCode::schema_mismatch,
         "schema version mismatch (want " + std::to_string(kVersion) + ")");
  FeatureSchema s;
  s.product_id = vocab_from_json(j.at("product_id"));
  s.event_type = vocab_from_json(j.at("event_type"));
  s.product_tier = vocab_from_json(j.at("product_tier"));
  const auto& stats = j.at("numeric");
  if (stats.size() != kNumNumeric)
    fail(ErrorCode::schema_mismatch, "schema has wrong numeric feature count");
  for (int i = 0; i < kNumNumeric; ++i) {
    if (stats[i].at("name").get<std::string>() != numeric_feature_names()[i])
      fail(ErrorCode::schema_mismatch,
           "schema numeric feature order mismatch at index " +
               std::to_string(i));
    s.numeric[i].mean = stats[i].at("mean").get<double>();
    s.numeric[i].std = stats[i].at("std").get<double>();
    s.numeric[i].constant = stats[i].at("constant").get<bool>();
  }
  for (const auto& [k, v] : j.at("vertical_avg_discount").items())
    s.vertical_avg_discount[k] = v.get<double>();
  s.global_avg_discount = j.at("global_avg_discount").get<double>();
  for (const auto& [k, v] : j.at("vertical_transform").items())
    s.vertical_transform[k] = transform_from_json(v);
  s.global_transform = transform_from_json(j.at("global_transform"));
  return s;
}

// ---------------------------------------------------------------------------

namespace {

// Welford's online moments: exactly zero variance on constant input, which
// the constant-feature detection below relies on.
struct MeanVar {
  double mean_ = 0.0;
  double m2_ = 0.0;
  int64_t n = 0;

  void add(double x) {
    ++n;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n);
    m2_ += d * (x - mean_);
  }
  double mean() const { return mean_; }
  double variance() const {
    return n == 0 ? 0.0 : std::max(0.0, m2_ / static_cast<double>(n));
  }
};

NumericStats finalize(const MeanVar& mv) {
  NumericStats s;
  s.mean = mv.mean();
  const double sd = std::sqrt(mv.variance());
  if (sd < 1e-8) {
    s.std = 1.0;
    s.constant = true;
  } else {
    s.std = sd;
  }
  return s;
}

DemandTransform finalize_transform(const MeanVar& mv) {
  DemandTransform t;
  t.mean = mv.mean();
  const double sd = std::sqrt(mv.variance());
  if (sd < 1e-8) {
    t.std = 1.0;
    t.constant = true;
  } else {
    t.std = sd;
  }
  return t;
}

}  // namespace

FeatureSchema fit_schema(const Dataset& train) {
  if (train.empty()) fail(ErrorCode::data, "cannot fit schema on empty data");
  FeatureSchema schema;

  std::vector<std::string> skus, events, tiers;
  for (const auto& s : train.instances) {
    skus.push_back(s.sku_id);
    for (const auto& f : s.features) {
      events.push_back(f.event_type);
      tiers.push_back(f.product_tier);
    }
  }
  schema.product_id = Vocabulary::build(std::move(skus));
  schema.event_type = Vocabulary::build(std::move(events));
  schema.product_tier = Vocabulary::build(std::move(tiers));

  // Average discount depth per vertical; needed before the numeric pass
  // because it feeds derivation as a constant feature.
  std::map<std::string, MeanVar> disc;
  MeanVar disc_all;
  for (const auto& s : train.instances) {
    for (const auto& f : s.features) {
      const double d = f.listed_price > 0.0
                           ? (f.listed_price - f.effective_price) /
                                 f.listed_price
                           : 0.0;
      disc[s.vertical_id].add(d);
      disc_all.add(d);
    }
  }
  for (const auto& [k, mv] : disc) schema.vertical_avg_discount[k] = mv.mean();
  schema.global_avg_discount = disc_all.mean();

  std::array<MeanVar, kNumNumeric> numeric_mv;
  std::map<std::string, MeanVar> tr;
  MeanVar tr_all;
  for (const auto& s : train.instances) {
    LagState state = init_lag_state(s, schema.avg_discount_for(s.vertical_id));
    for (size_t t = 0; t < s.length(); ++t) {
      const auto x = derive_numeric(s, t, state);
      for (int i = 0; i < kNumNumeric; ++i) numeric_mv[i].add(x[i]);
      advance_lag_state(state, s.demand[t], s.features[t]);
      const double ly = std::log1p(s.demand[t]);
      tr[s.vertical_id].add(ly);
      tr_all.add(ly);
    }
  }
  for (int i = 0; i < kNumNumeric; ++i)
    schema.numeric[i] = finalize(numeric_mv[i]);
  for (const auto& [k, mv] : tr)
    schema.vertical_transform[k] = finalize_transform(mv);
  schema.global_transform = finalize_transform(tr_all);
  return schema;
}

// ---------------------------------------------------------------------------

EncodedWeek encode_week(const SeriesInstance& s, size_t t,
                        const LagState& state, const FeatureSchema& schema) {
  EncodedWeek w;
  const auto raw = derive_numeric(s, t, state);
  for (int i = 0; i < kNumNumeric; ++i)
    w.numeric[i] = (raw[i] - schema.numeric[i].mean) / schema.numeric[i].std;
  const RawFeatureRow& row = s.features[t];
  w.binary[0] = row.deal_card;
  w.binary[1] = row.banner;
  w.binary[2] = row.no_cost_emi;
  w.binary[3] = row.exchange;
  w.binary[4] = row.exclusive;
  w.category[0] = schema.product_id.lookup(s.sku_id);
  w.category[1] = schema.event_type.lookup(row.event_type);
  w.category[2] = schema.product_tier.lookup(row.product_tier);
  return w;
}

EncodedSeries encode_series(const SeriesInstance& s,
                            const FeatureSchema& schema) {
  s.validate();
  EncodedSeries enc;
  enc.sku_id = s.sku_id;
  enc.region_id = s.region_id;
  enc.vertical_id = s.vertical_id;
  enc.start_week = s.start_week;
  enc.weeks.reserve(s.length());
  enc.y.reserve(s.length());
  enc.raw_demand = s.demand;
  const DemandTransform& tr = schema.transform_for(s.vertical_id);
  LagState state = init_lag_state(s, schema.avg_discount_for(s.vertical_id));
  for (size_t t = 0; t < s.length(); ++t) {
    enc.weeks.push_back(encode_week(s, t, state, schema));
    enc.y.push_back(tr.apply(s.demand[t]));
    advance_lag_state(state, s.demand[t], s.features[t]);
  }
  return enc;
}

}  // namespace demandcast
