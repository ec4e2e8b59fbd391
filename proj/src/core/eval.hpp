#pragma once

// Forecast accuracy metrics and the model-variant comparison harness.
//
// Accuracy is reported as wMAPE, absolute error weighted by actual demand so
// high-volume products dominate, plus a hit rate: the fraction of SKUs whose
// own error stays under a cutoff. A report carries the row-level forecasts
// next to the aggregates so every number in it can be recomputed from the
// rows alone.

#include <cstdint>
#include <string>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/hierarchy.hpp"
#include "core/train.hpp"

namespace demandcast {

// 100 * sum|Y - y| / sum Y over aligned vectors. Throws on empty, misaligned
// or non-finite input and when the actuals sum to zero.
double wmape(const std::vector<double>& actuals,
             const std::vector<double>& forecasts);

// Fraction of per-SKU errors strictly below the cutoff (in percent).
// Throws on empty input.
double hit_rate(const std::vector<double>& per_sku_errors,
                double cutoff_pct = 30.0);

// The comparison set: the full network, the network without the nonlinear
// associative layer (r_mdn), without the recurrence (a_mdn, the lag features
// already in the schema supply the temporal context), with a single mixture
// component (ar), the rule-based committee, and a last-value floor baseline.
enum class Variant { armdn, r_mdn, a_mdn, ar, cubist, persistence };

extern const std::vector<Variant> kAllVariants;

std::string variant_name(Variant v);
// Case-insensitive; '-' and '_' are interchangeable. Throws on unknown names.
Variant variant_from_name(const std::string& name);

struct ReportRow {
  std::string sku_id;
  std::string vertical_id;
  int horizon_week = 0;  // 1-based step past the training window
  double actual = 0.0;
  double forecast = 0.0;
  double abs_err = 0.0;

  bool operator==(const ReportRow&) const = default;
};

struct HorizonWmape {
  int horizon_week = 0;
  double wmape = 0.0;
};

struct VerticalWmape {
  std::string vertical_id;
  double wmape = 0.0;
};

struct ForecastReport {
  std::string variant;
  uint64_t seed = 0;
  uint64_t config_hash = 0;  // resolved run configuration
  int horizon = 0;
  double hit_cutoff_pct = 30.0;
  std::vector<ReportRow> rows;  // sku_id ascending, then horizon_week
  double overall_wmape = 0.0;
  double hit_rate = 0.0;  // per-SKU wMAPE under hit_cutoff_pct
  std::vector<HorizonWmape> per_horizon;    // one entry per step 1..horizon
  std::vector<VerticalWmape> per_vertical;  // vertical_id ascending

  std::string to_json() const;
  static ForecastReport from_json(const std::string& text);
  // Row-level table: sku_id,vertical_id,horizon_week,actual,forecast,abs_err
  std::string to_csv() const;
};

// Computes every aggregate from the rows, accumulating in row order so a
// recomputation over the emitted rows reproduces the stored values exactly.
// A SKU with zero actual demand counts as a hit only for a zero-error
// forecast. Throws when rows are empty, malformed, or the total actual
// demand is zero.
ForecastReport build_report(const std::string& variant, uint64_t seed,
                            uint64_t config_hash, int horizon,
                            std::vector<ReportRow> rows,
                            double hit_cutoff_pct = 30.0);

enum class ReportFormat { json, csv };

void emit_report(const ForecastReport& report, const std::string& path,
                 ReportFormat format);
ForecastReport load_report(const std::string& path);  // JSON only

// ---------------------------------------------------------------------------

struct EvalSpec {
  int64_t train_end_week = 0;  // last training week (inclusive)
  int horizon = 4;
  double hit_cutoff_pct = 30.0;
};

// Trains the variant on weeks <= train_end_week and forecasts the next
// `horizon` weeks for every series that covers them. The dataset must have
// exactly one series per SKU (aggregate regions first); series starting
// after the training window or ending inside the horizon are skipped, and
// per-variant architecture switches are applied on top of `tc`.
ForecastReport evaluate_variant(const Dataset& ds, Variant v,
                                const EvalSpec& spec, const TrainConfig& tc,
                                const CubistConfig& cc);

struct AblationResult {
  std::vector<ForecastReport> reports;  // one per requested variant, in order

  // variant,overall_wmape,hit_rate,wmape_h1..wmape_hH, one row per variant.
  std::string comparison_csv() const;
};

// Runs every variant against the identical split, schema and seed.
AblationResult run_ablation(const Dataset& ds,
                            const std::vector<Variant>& variants,
                            const EvalSpec& spec, const TrainConfig& tc,
                            const CubistConfig& cc);

// Evaluates an already-trained artifact over the post-training weeks; a null
// checkpoint scores the last-value baseline. For model checkpoints the schema
// refitted on the training window must hash-match the checkpoint's schema,
// so the model is fed exactly the features it was trained on. The report's
// variant label is derived from the checkpoint's architecture switches.
ForecastReport evaluate_checkpoint(const Checkpoint* ckpt, const Dataset& ds,
                                   const EvalSpec& spec);

// Point forecasts for steps 1..horizon past as_of_week, one block per series
// whose feature rows cover the whole range (demand beyond as_of_week is
// ignored). CSV columns: sku_id,region_id,week,forecast.
std::string forecast_csv(const Checkpoint& ckpt, const Dataset& ds,
                         int64_t as_of_week, int horizon);

// Splits each national forecast row across regions by historical share.
// CSV columns: sku_id,region_id,horizon_week,forecast. Every SKU in the
// report must be present in the ratios.
std::string fc_split_csv(const ForecastReport& report,
                         const RegionRatios& ratios);

}  // namespace demandcast
