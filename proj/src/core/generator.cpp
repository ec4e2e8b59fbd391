#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "core/dataset.hpp"

namespace demandcast {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string padded_id(const char* prefix, int64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%05lld", prefix,
                static_cast<long long>(i));
  return std::string(buf);
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

const char* kEventTypes[] = {"festive", "payday", "clearance"};

}  // namespace

Dataset generate_synthetic(const GeneratorConfig& config) {
  config.validate();
  Dataset ds;
  if (config.n_skus == 0) return ds;

  const Rng root(config.seed);
  const std::vector<int64_t> event_weeks = config.resolved_event_weeks();

  // Event identities are calendar-wide: all SKUs see the same type per week.
  std::map<int64_t, std::string> event_type_by_week;
  {
    Rng ev = root.fork("event-calendar");
    for (int64_t w : event_weeks)
      event_type_by_week[w] = kEventTypes[ev.uniform_int(3)];
  }

  const bool bimodal =
      config.demand_modality == GeneratorConfig::Modality::bimodal;

  for (int64_t sku = 0; sku < config.n_skus; ++sku) {
    Rng rng = root.fork("sku", static_cast<uint64_t>(sku));
    const std::string sku_id = padded_id("SKU", sku);
    const std::string vertical_id =
        padded_id("V", sku % config.n_verticals);

    // Launch timing: most SKUs have full history, some launch mid-range.
    int64_t start_week = 1;
    if (config.n_weeks >= 8 && rng.uniform01() < 0.15)
      start_week = 2 + static_cast<int64_t>(
                           rng.uniform_int(static_cast<uint64_t>(
                               std::max<int64_t>(1, config.n_weeks / 2))));

    const double base = std::exp(rng.normal(std::log(40.0), 0.9));
    const double season_amp = rng.uniform(0.05, 0.35);
    const double season_phase = rng.uniform(0.0, 52.0);
    const double listed = std::round(rng.uniform(500.0, 20000.0));
    double discount = rng.uniform(0.05, 0.30);
    const uint8_t emi = rng.uniform01() < 0.4 ? 1 : 0;
    const uint8_t exchange = rng.uniform01() < 0.3 ? 1 : 0;
    const uint8_t exclusive = rng.uniform01() < 0.15 ? 1 : 0;
    const std::string tier = base >= 100.0 ? "T1" : (base >= 20.0 ? "T2" : "T3");

    // Per-event demand lift for this SKU.
    std::map<int64_t, double> lift_by_week;
    for (int64_t w : event_weeks)
      lift_by_week[w] = rng.uniform(config.event_lift_lo, config.event_lift_hi);

    std::vector<double> region_weight(
        static_cast<size_t>(config.n_regions));
    for (auto& g : region_weight) g = rng.uniform(0.5, 1.5);

    std::vector<double> national_demand;
    std::vector<RawFeatureRow> rows;
    std::vector<std::vector<int64_t>> region_demand(
        static_cast<size_t>(config.n_regions));

    double prev_discounted = round2(listed * (1.0 - discount));
    double pulse = 0.0;  // excess demand multiplier from a recent price drop

    for (int64_t week = start_week; week <= config.n_weeks; ++week) {
      const bool is_event = event_type_by_week.count(week) != 0;

      if (rng.uniform01() < config.price_change_prob)
        discount = rng.uniform(0.05, 0.40);
      const double discounted = round2(listed * (1.0 - discount));
      double effective = discounted;
      if (is_event) effective = round2(discounted * (1.0 - rng.uniform(0.03, 0.15)));

      // Price drops cause a transient lift that decays back to baseline.
      if (discounted < prev_discounted * 0.99) {
        pulse = std::min(2.0, 1.5 * (prev_discounted / discounted - 1.0));
      }
      const double pulse_mult = 1.0 + pulse;
      pulse *= 0.55;
      prev_discounted = discounted;

      const double season =
          1.0 + season_amp *
                    std::sin(2.0 * kPi * (static_cast<double>(week) + season_phase) / 52.0);
      const double event_mult = is_event ? lift_by_week[week] : 1.0;
      const double mode_mult = (bimodal && rng.uniform01() < 0.5) ? 4.0 : 1.0;

      double oos = 0.0;
      if (!is_event && rng.uniform01() < 0.05) oos = rng.uniform(0.05, 0.5);

      // Mean-one lognormal noise so noise_scale does not bias the level.
      const double noise = std::exp(config.noise_scale * rng.normal() -
                                    0.5 * config.noise_scale * config.noise_scale);
      const double mean = base * season * event_mult * pulse_mult * mode_mult;
      const int64_t units = std::max<int64_t>(
          0, static_cast<int64_t>(std::llround(mean * (1.0 - oos) * noise)));

      RawFeatureRow row;
      row.listed_price = listed;
      row.discounted_price = discounted;
      row.effective_price = effective;
      row.event_type = is_event ? event_type_by_week[week] : "none";
      row.deal_card = rng.uniform01() < (is_event ? 0.8 : 0.05) ? 1 : 0;
      row.banner = rng.uniform01() < (is_event ? 0.7 : 0.03) ? 1 : 0;
      row.no_cost_emi = emi;
      row.exchange = exchange;
      row.exclusive = exclusive;
      row.out_of_stock_pct = oos;
      row.product_tier = tier;

      national_demand.push_back(static_cast<double>(units));
      rows.push_back(std::move(row));

      // Weekly regional shares jitter around the SKU's stable weights.
      std::vector<double> shares(region_weight);
      if (config.n_regions > 1)
        for (auto& s : shares) s *= std::exp(0.1 * rng.normal());
      const std::vector<int64_t> split =
          apportion_largest_remainder(units, shares);
      for (size_t r = 0; r < split.size(); ++r)
        region_demand[r].push_back(split[r]);
    }

    if (national_demand.empty()) continue;

    for (int64_t r = 0; r < config.n_regions; ++r) {
      SeriesInstance inst;
      inst.sku_id = sku_id;
      inst.region_id = padded_id("R", r);
      inst.vertical_id = vertical_id;
      inst.start_week = start_week;
      inst.features = rows;
      inst.demand.reserve(national_demand.size());
      for (int64_t units : region_demand[static_cast<size_t>(r)])
        inst.demand.push_back(static_cast<double>(units));
      ds.instances.push_back(std::move(inst));
    }
  }
  ds.validate();
  return ds;
}

}  // namespace demandcast
