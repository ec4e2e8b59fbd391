#pragma once

// Data model for weekly sales series: one SeriesInstance per (SKU, region),
// demand aligned 1:1 with per-week causal feature rows. Datasets are immutable
// after construction and safe for concurrent reads.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace demandcast {

// Per-week causal features as recorded in the sales data.
struct RawFeatureRow {
  double listed_price = 0.0;
  double discounted_price = 0.0;
  double effective_price = 0.0;
  std::string event_type = "none";  // "none" outside event weeks
  uint8_t deal_card = 0;
  uint8_t banner = 0;
  uint8_t no_cost_emi = 0;
  uint8_t exchange = 0;
  uint8_t exclusive = 0;
  double out_of_stock_pct = 0.0;  // fraction of the week out of stock, [0,1]
  std::string product_tier = "T2";

  bool operator==(const RawFeatureRow&) const = default;

  // effective <= discounted <= listed, binaries in {0,1}, oos in [0,1]
  void validate(const std::string& context) const;
};

struct SeriesInstance {
  std::string sku_id;
  std::string region_id;
  std::string vertical_id;
  int64_t start_week = 0;  // weeks since epoch; consecutive thereafter
  std::vector<double> demand;          // units/week, >= 0
  std::vector<RawFeatureRow> features;  // aligned 1:1 with demand

  size_t length() const { return demand.size(); }
  int64_t end_week() const {
    return start_week + static_cast<int64_t>(demand.size()) - 1;
  }
  int64_t week_at(size_t idx) const {
    return start_week + static_cast<int64_t>(idx);
  }
  // Index of `week` into demand/features; throws if out of range.
  size_t index_of(int64_t week) const;
  bool covers(int64_t week) const {
    return week >= start_week && week <= end_week();
  }

  bool operator==(const SeriesInstance&) const = default;

  void validate() const;
};

struct Dataset {
  std::vector<SeriesInstance> instances;

  size_t size() const { return instances.size(); }
  bool empty() const { return instances.empty(); }
  const SeriesInstance* find(const std::string& sku_id,
                             const std::string& region_id) const;
  std::vector<std::string> vertical_ids() const;  // sorted, unique
  std::vector<std::string> sku_ids() const;       // sorted, unique

  bool operator==(const Dataset&) const = default;

  void validate() const;
};

// Sums demand across regions per SKU; feature rows are national-level and
// identical across regions, so the first region's rows are kept. Output
// instances use region_id "NATIONAL". SKUs whose regions disagree on span are
// summed over the union of weeks with missing regions treated as zero demand.
Dataset aggregate_national(const Dataset& ds);

// Keeps only series of one vertical, e.g. the subset a per-vertical
// fine-tuning pass trains on. Throws ErrorCode::data when nothing matches.
Dataset filter_vertical(const Dataset& ds, const std::string& vertical_id);

// ---------------------------------------------------------------------------

struct GeneratorConfig {
  int64_t n_skus = 100;
  int64_t n_verticals = 4;
  int64_t n_regions = 1;
  int64_t n_weeks = 80;
  std::vector<int64_t> event_weeks;  // empty means every 13th week
  double event_lift_lo = 2.0;        // multiplier interval, lower bound >= 1
  double event_lift_hi = 5.0;
  double price_change_prob = 0.08;  // per week
  enum class Modality { unimodal, bimodal };
  Modality demand_modality = Modality::unimodal;
  double noise_scale = 0.2;  // lognormal sd of the multiplicative noise
  uint64_t seed = 0;

  void validate() const;
  std::vector<int64_t> resolved_event_weeks() const;

  KvConfig to_kv() const;
  static GeneratorConfig from_kv(const KvConfig& kv);
};

// Deterministic synthetic e-retail dataset: per-SKU lognormal base level with
// yearly seasonality, planned event weeks with demand lifts, price changes
// with transient decaying demand pulses, and optional bimodal week-to-week
// demand. Identical config + seed reproduces the dataset bit for bit.
Dataset generate_synthetic(const GeneratorConfig& config);

// ---------------------------------------------------------------------------
// CSV schema (header required):
// sku_id,region_id,vertical_id,week,demand,listed_price,discounted_price,
// effective_price,event_type,deal_card,banner,no_cost_emi,exchange,exclusive,
// oos_pct,tier

Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);

// ---------------------------------------------------------------------------

struct SplitResult {
  Dataset train;  // weeks <= train_end_week
  Dataset test;   // the next `horizon` weeks (features + actuals)
  // SKU/region keys excluded from test for lacking coverage of the horizon,
  // or excluded entirely for starting after train_end_week.
  std::vector<std::string> excluded;
};

// Splits every instance at train_end_week. Instances must have at least one
// training week to be kept; instances that do not fully cover the horizon are
// excluded from test and listed. Throws if no instance has training data.
SplitResult split_windows(const Dataset& ds, int64_t train_end_week,
                          int horizon);

}  // namespace demandcast
