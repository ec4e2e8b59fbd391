#include "core/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace demandcast {

void RawFeatureRow::validate(const std::string& context) const {
  if (!(effective_price <= discounted_price + 1e-9) ||
      !(discounted_price <= listed_price + 1e-9))
    fail(ErrorCode::data,
         context + ": price ordering violated (effective <= discounted <= "
                   "listed required)");
  if (deal_card > 1 || banner > 1 || no_cost_emi > 1 || exchange > 1 ||
      exclusive > 1)
    fail(ErrorCode::data, context + ": binary feature outside {0,1}");
  if (!(out_of_stock_pct >= 0.0 && out_of_stock_pct <= 1.0))
    fail(ErrorCode::data, context + ": oos_pct outside [0,1]");
  if (!std::isfinite(listed_price) || !std::isfinite(discounted_price) ||
      !std::isfinite(effective_price))
    fail(ErrorCode::data, context + ": non-finite price");
}

size_t SeriesInstance::index_of(int64_t week) const {
  if (!covers(week))
    fail(ErrorCode::invalid_argument,
         "week " + std::to_string(week) + " outside series " + sku_id + "/" +
             region_id);
  return static_cast<size_t>(week - start_week);
}

void SeriesInstance::validate() const {
  const std::string ctx = "series " + sku_id + "/" + region_id;
  if (demand.empty()) fail(ErrorCode::data, ctx + ": empty series");
  if (demand.size() != features.size())
    fail(ErrorCode::data, ctx + ": demand and feature lengths differ");
  for (size_t i = 0; i < demand.size(); ++i) {
    if (!(demand[i] >= 0.0) || !std::isfinite(demand[i]))
      fail(ErrorCode::data, ctx + ": negative or non-finite demand at week " +
                                std::to_string(week_at(i)));
    features[i].validate(ctx + " week " + std::to_string(week_at(i)));
  }
}

const SeriesInstance* Dataset::find(const std::string& sku_id,
                                    const std::string& region_id) const {
  for (const auto& s : instances)
    if (s.sku_id == sku_id && s.region_id == region_id) return &s;
  return nullptr;
}

std::vector<std::string> Dataset::vertical_ids() const {
  std::set<std::string> ids;
  for (const auto& s : instances) ids.insert(s.vertical_id);
  return {ids.begin(), ids.end()};
}

std::vector<std::string> Dataset::sku_ids() const {
  std::set<std::string> ids;
  for (const auto& s : instances) ids.insert(s.sku_id);
  return {ids.begin(), ids.end()};
}

void Dataset::validate() const {
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& s : instances) {
    s.validate();
    if (!keys.insert({s.sku_id, s.region_id}).second)
      fail(ErrorCode::data,
           "duplicate series for " + s.sku_id + "/" + s.region_id);
  }
}

Dataset aggregate_national(const Dataset& ds) {
  // Keyed by SKU; vertical comes along for the ride.
  std::map<std::string, std::vector<const SeriesInstance*>> by_sku;
  for (const auto& s : ds.instances) by_sku[s.sku_id].push_back(&s);

  Dataset out;
  for (const auto& [sku, parts] : by_sku) {
    int64_t lo = parts.front()->start_week;
    int64_t hi = parts.front()->end_week();
    for (const auto* p : parts) {
      lo = std::min(lo, p->start_week);
      hi = std::max(hi, p->end_week());
    }
    SeriesInstance nat;
    nat.sku_id = sku;
    nat.region_id = "NATIONAL";
    nat.vertical_id = parts.front()->vertical_id;
    nat.start_week = lo;
    const size_t len = static_cast<size_t>(hi - lo + 1);
    nat.demand.assign(len, 0.0);
    nat.features.resize(len);
    std::vector<bool> have_row(len, false);
    for (const auto* p : parts) {
      for (size_t i = 0; i < p->length(); ++i) {
        const size_t j = static_cast<size_t>(p->week_at(i) - lo);
        nat.demand[j] += p->demand[i];
        if (!have_row[j]) {
          nat.features[j] = p->features[i];
          have_row[j] = true;
        }
      }
    }
    out.instances.push_back(std::move(nat));
  }
  return out;
}

Dataset filter_vertical(const Dataset& ds, const std::string& vertical_id) {
  Dataset out;
  for (const SeriesInstance& s : ds.instances)
    if (s.vertical_id == vertical_id) out.instances.push_back(s);
  if (out.empty())
    fail(ErrorCode::data, "no series in vertical '" + vertical_id + "'");
  return out;
}

// ---------------------------------------------------------------------------

void GeneratorConfig::validate() const {
  if (n_skus < 0) fail(ErrorCode::invalid_argument, "n_skus must be >= 0");
  if (n_verticals < 1 || n_regions < 1 || n_weeks < 1)
    fail(ErrorCode::invalid_argument,
         "n_verticals, n_regions and n_weeks must be >= 1");
  if (!(price_change_prob >= 0.0 && price_change_prob <= 1.0))
    fail(ErrorCode::invalid_argument, "price_change_prob outside [0,1]");
  if (!(event_lift_lo >= 1.0))
    fail(ErrorCode::invalid_argument, "event_lift lower bound must be >= 1");
  if (!(event_lift_hi >= event_lift_lo))
    fail(ErrorCode::invalid_argument, "event_lift interval inverted");
  if (!(noise_scale >= 0.0))
    fail(ErrorCode::invalid_argument, "noise_scale must be >= 0");
}

std::vector<int64_t> GeneratorConfig::resolved_event_weeks() const {
  if (!event_weeks.empty()) {
    std::vector<int64_t> v = event_weeks;
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }
  std::vector<int64_t> v;
  for (int64_t w = 13; w <= n_weeks; w += 13) v.push_back(w);
  return v;
}

KvConfig GeneratorConfig::to_kv() const {
  KvConfig kv;
  kv.set_int("n_skus", n_skus);
  kv.set_int("n_verticals", n_verticals);
  kv.set_int("n_regions", n_regions);
  kv.set_int("n_weeks", n_weeks);
  kv.set_int_list("event_weeks", event_weeks);
  kv.set_double("event_lift_lo", event_lift_lo);
  kv.set_double("event_lift_hi", event_lift_hi);
  kv.set_double("price_change_prob", price_change_prob);
  kv.set("demand_modality",
         demand_modality == Modality::bimodal ? "bimodal" : "unimodal");
  kv.set_double("noise_scale", noise_scale);
  kv.set_int("seed", static_cast<int64_t>(seed));
  return kv;
}

GeneratorConfig GeneratorConfig::from_kv(const KvConfig& kv) {
  GeneratorConfig c;
  c.n_skus = kv.get_int("n_skus", c.n_skus);
  c.n_verticals = kv.get_int("n_verticals", c.n_verticals);
  c.n_regions = kv.get_int("n_regions", c.n_regions);
  c.n_weeks = kv.get_int("n_weeks", c.n_weeks);
  c.event_weeks = kv.get_int_list("event_weeks", c.event_weeks);
  c.event_lift_lo = kv.get_double("event_lift_lo", c.event_lift_lo);
  c.event_lift_hi = kv.get_double("event_lift_hi", c.event_lift_hi);
  c.price_change_prob = kv.get_double("price_change_prob", c.price_change_prob);
  const std::string mode = kv.get_string("demand_modality", "unimodal");
  if (mode == "unimodal")
    c.demand_modality = Modality::unimodal;
  else if (mode == "bimodal")
    c.demand_modality = Modality::bimodal;
  else
    fail(ErrorCode::invalid_argument, "demand_modality must be unimodal|bimodal");
  c.noise_scale = kv.get_double("noise_scale", c.noise_scale);
  c.seed = static_cast<uint64_t>(kv.get_int("seed", 0));
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------

SplitResult split_windows(const Dataset& ds, int64_t train_end_week,
                          int horizon) {
  if (horizon < 1) fail(ErrorCode::invalid_argument, "horizon must be >= 1");
  SplitResult out;
  bool any_train = false;
  for (const auto& s : ds.instances) {
    if (s.start_week > train_end_week) {
      out.excluded.push_back(s.sku_id + "/" + s.region_id);
      continue;
    }
    any_train = true;
    SeriesInstance train = s;
    const int64_t cut = std::min(train_end_week, s.end_week());
    const size_t train_len = static_cast<size_t>(cut - s.start_week + 1);
    train.demand.resize(train_len);
    train.features.resize(train_len);
    out.train.instances.push_back(std::move(train));

    const int64_t need_end = train_end_week + horizon;
    if (s.end_week() < need_end) {
      out.excluded.push_back(s.sku_id + "/" + s.region_id);
      continue;
    }
    SeriesInstance test;
    test.sku_id = s.sku_id;
    test.region_id = s.region_id;
    test.vertical_id = s.vertical_id;
    test.start_week = train_end_week + 1;
    const size_t from = s.index_of(train_end_week + 1);
    test.demand.assign(s.demand.begin() + from,
                       s.demand.begin() + from + horizon);
    test.features.assign(s.features.begin() + from,
                         s.features.begin() + from + horizon);
    out.test.instances.push_back(std::move(test));
  }
  if (!any_train && !ds.instances.empty())
    fail(ErrorCode::invalid_argument,
         "train_end_week " + std::to_string(train_end_week) +
             " precedes all data");
  return out;
}

}  // namespace demandcast
