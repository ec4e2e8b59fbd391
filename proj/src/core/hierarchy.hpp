#pragma once

// National -> region disaggregation. Regional shares are estimated from the
// trailing 8 weeks of each SKU's history (fewer for young products); weekly
// share outliers are clipped to the nearest 1.5*IQR fence before averaging,
// and the averaged shares are renormalized to sum to 1 per SKU.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/dataset.hpp"

namespace demandcast {

constexpr int kRatioWindowWeeks = 8;

struct RegionShare {
  std::string region_id;
  double ratio = 0.0;
  int weeks_used = 0;
  int weeks_clipped = 0;  // weekly shares pulled back to an IQR fence
};

struct SkuRatios {
  std::string sku_id;
  std::vector<RegionShare> regions;  // region_id ascending; ratios sum to 1
  bool zero_history = false;  // no demand in the window: uniform fallback
};

struct RegionRatios {
  std::vector<SkuRatios> skus;  // sku_id ascending

  const SkuRatios* find(const std::string& sku_id) const;
  // sku_id,region_id,ratio,weeks_used rows, deterministic order.
  std::string to_csv() const;
};

// Shares per (sku, region) over the trailing window ending at `as_of_week`
// (inclusive). Weeks with zero national demand contribute no share samples.
// A SKU with no demand at all in the window gets uniform ratios and its
// zero_history flag set.
RegionRatios compute_ratios(const Dataset& ds, int64_t as_of_week);

// national * ratio per region, in ratio order.
std::vector<double> disaggregate_real(double national, const SkuRatios& ratios);

// Integer units by largest remainder; per-region counts sum to `national`.
std::vector<int64_t> disaggregate_integer(int64_t national,
                                          const SkuRatios& ratios);

}  // namespace demandcast
