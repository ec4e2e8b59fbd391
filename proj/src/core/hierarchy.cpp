#include "core/hierarchy.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace demandcast {

const SkuRatios* RegionRatios::find(const std::string& sku_id) const {
  const auto it = std::lower_bound(
      skus.begin(), skus.end(), sku_id,
      [](const SkuRatios& a, const std::string& k) { return a.sku_id < k; });
  if (it == skus.end() || it->sku_id != sku_id) return nullptr;
  return &*it;
}

std::string RegionRatios::to_csv() const {
  std::ostringstream os;
  os << "sku_id,region_id,ratio,weeks_used\n";
  for (const SkuRatios& sr : skus)
    for (const RegionShare& r : sr.regions)
      os << sr.sku_id << ',' << r.region_id << ',' << format_double(r.ratio)
         << ',' << r.weeks_used << '\n';
  return os.str();
}

RegionRatios compute_ratios(const Dataset& ds, int64_t as_of_week) {
  ds.validate();
  if (ds.empty()) fail(ErrorCode::data, "cannot compute ratios on empty data");

  std::map<std::string, std::vector<const SeriesInstance*>> by_sku;
  for (const SeriesInstance& inst : ds.instances)
    by_sku[inst.sku_id].push_back(&inst);

  RegionRatios out;
  out.skus.reserve(by_sku.size());
  for (auto& [sku, series] : by_sku) {
    std::sort(series.begin(), series.end(),
              [](const SeriesInstance* a, const SeriesInstance* b) {
                return a->region_id < b->region_id;
              });
    const size_t n_regions = series.size();
    const int64_t win_begin = as_of_week - kRatioWindowWeeks + 1;

    std::vector<std::vector<double>> shares(n_regions);
    int weeks_used = 0;
    for (int64_t w = win_begin; w <= as_of_week; ++w) {
      double national = 0.0;
      std::vector<double> demand(n_regions, 0.0);
      for (size_t i = 0; i < n_regions; ++i) {
        if (!series[i]->covers(w)) continue;
        demand[i] = series[i]->demand[series[i]->index_of(w)];
        national += demand[i];
      }
      if (!(national > 0.0)) continue;  // no share sample for dead weeks
      ++weeks_used;
      for (size_t i = 0; i < n_regions; ++i)
        shares[i].push_back(demand[i] / national);
    }

    SkuRatios sr;
    sr.sku_id = sku;
    sr.regions.resize(n_regions);
    for (size_t i = 0; i < n_regions; ++i) {
      sr.regions[i].region_id = series[i]->region_id;
      sr.regions[i].weeks_used = weeks_used;
    }
    if (weeks_used == 0) {
      sr.zero_history = true;
      for (RegionShare& r : sr.regions)
        r.ratio = 1.0 / static_cast<double>(n_regions);
    } else {
      double sum = 0.0;
      for (size_t i = 0; i < n_regions; ++i) {
        std::vector<double> sorted = shares[i];
        std::sort(sorted.begin(), sorted.end());
        const double q1 = quantile_sorted(sorted, 0.25);
        const double q3 = quantile_sorted(sorted, 0.75);
        const double lo = q1 - 1.5 * (q3 - q1);
        const double hi = q3 + 1.5 * (q3 - q1);
        double mean = 0.0;
        for (double v : shares[i]) {
          if (v < lo) {
            v = lo;
            ++sr.regions[i].weeks_clipped;
          } else if (v > hi) {
            v = hi;
            ++sr.regions[i].weeks_clipped;
          }
          mean += v;
        }
        mean /= static_cast<double>(shares[i].size());
        sr.regions[i].ratio = mean;
        sum += mean;
      }
      for (RegionShare& r : sr.regions) r.ratio /= sum;
    }
    out.skus.push_back(std::move(sr));
  }
  return out;
}

std::vector<double> disaggregate_real(double national,
                                      const SkuRatios& ratios) {
  if (ratios.regions.empty())
    fail(ErrorCode::invalid_argument, "no regions to disaggregate into");
  std::vector<double> out;
  out.reserve(ratios.regions.size());
  for (const RegionShare& r : ratios.regions) out.push_back(national * r.ratio);
  return out;
}

std::vector<int64_t> disaggregate_integer(int64_t national,
                                          const SkuRatios& ratios) {
  if (ratios.regions.empty())
    fail(ErrorCode::invalid_argument, "no regions to disaggregate into");
  if (national < 0)
    fail(ErrorCode::invalid_argument, "cannot split negative units");
  std::vector<double> weights;
  weights.reserve(ratios.regions.size());
  for (const RegionShare& r : ratios.regions) weights.push_back(r.ratio);
  return apportion_largest_remainder(national, weights);
}

}  // namespace demandcast
