#include "core/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace demandcast {

using ordered_json = nlohmann::ordered_json;

double wmape(const std::vector<double>& actuals,
             const std::vector<double>& forecasts) {
  if (actuals.empty())
    fail(ErrorCode::invalid_argument, "wmape needs at least one observation");
  if (actuals.size() != forecasts.size())
    fail(ErrorCode::invalid_argument,
         "wmape needs aligned actual and forecast vectors");
  double err_sum = 0.0, act_sum = 0.0;
  for (size_t i = 0; i < actuals.size(); ++i) {
    if (!std::isfinite(actuals[i]) || !std::isfinite(forecasts[i]))
      fail(ErrorCode::invalid_argument, "wmape inputs must be finite");
    err_sum += std::abs(actuals[i] - forecasts[i]);
    act_sum += actuals[i];
  }
  if (!(act_sum > 0.0))
    fail(ErrorCode::data, "wmape is undefined when actuals sum to zero");
  return 100.0 * err_sum / act_sum;
}

double hit_rate(const std::vector<double>& per_sku_errors, double cutoff_pct) {
  if (per_sku_errors.empty())
    fail(ErrorCode::invalid_argument, "hit rate needs at least one SKU error");
  size_t hits = 0;
  for (double e : per_sku_errors)
    if (e < cutoff_pct) ++hits;
  return static_cast<double>(hits) /
         static_cast<double>(per_sku_errors.size());
}

const std::vector<Variant> kAllVariants = {
    Variant::armdn, Variant::r_mdn,  Variant::a_mdn,
    Variant::ar,    Variant::cubist, Variant::persistence};

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::armdn: return "ARMDN";
    case Variant::r_mdn: return "R_MDN";
    case Variant::a_mdn: return "A_MDN";
    case Variant::ar: return "AR";
    case Variant::cubist: return "CUBIST";
    case Variant::persistence: return "PERSISTENCE";
  }
  fail(ErrorCode::internal, "unhandled variant");
}

Variant variant_from_name(const std::string& name) {
  std::string key;
  key.reserve(name.size());
  for (char c : name)
    key.push_back(c == '-' ? '_'
                           : static_cast<char>(std::toupper(
                                 static_cast<unsigned char>(c))));
  for (Variant v : kAllVariants)
    if (variant_name(v) == key) return v;
  fail(ErrorCode::invalid_argument, "unknown model variant '" + name + "'");
}

namespace {

uint64_t hash_from_hex(const std::string& s) {
  if (s.size() != 16) fail(ErrorCode::parse, "bad config hash '" + s + "'");
  char* end = nullptr;
  const uint64_t v = std::strtoull(s.c_str(), &end, 16);
  if (end != s.c_str() + s.size())
    fail(ErrorCode::parse, "bad config hash '" + s + "'");
  return v;
}

// Per-SKU wMAPE with a zero-demand convention: a SKU that sold nothing is a
// perfect hit when the forecast error is also zero and a miss otherwise.
double sku_error(double err_sum, double act_sum) {
  if (act_sum > 0.0) return 100.0 * err_sum / act_sum;
  return err_sum == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

double group_wmape(double err_sum, double act_sum, const std::string& what) {
  if (act_sum > 0.0) return 100.0 * err_sum / act_sum;
  if (err_sum == 0.0) return 0.0;
  fail(ErrorCode::data, "wMAPE for " + what +
                            " is undefined: actuals sum to zero with a "
                            "nonzero forecast error");
}

}  // namespace

ForecastReport build_report(const std::string& variant, uint64_t seed,
                            uint64_t config_hash, int horizon,
                            std::vector<ReportRow> rows,
                            double hit_cutoff_pct) {
  if (horizon < 1) fail(ErrorCode::invalid_argument, "horizon must be >= 1");
  if (rows.empty()) fail(ErrorCode::data, "report has no rows");

  ForecastReport r;
  r.variant = variant;
  r.seed = seed;
  r.config_hash = config_hash;
  r.horizon = horizon;
  r.hit_cutoff_pct = hit_cutoff_pct;

  std::vector<double> h_err(size_t(horizon), 0.0), h_act(size_t(horizon), 0.0);
  std::map<std::string, std::pair<double, double>> by_sku, by_vertical;
  double err_sum = 0.0, act_sum = 0.0;
  for (const ReportRow& row : rows) {
    if (row.horizon_week < 1 || row.horizon_week > horizon)
      fail(ErrorCode::data, "row horizon_week outside 1.." +
                                std::to_string(horizon));
    if (!std::isfinite(row.actual) || !std::isfinite(row.forecast) ||
        !std::isfinite(row.abs_err))
      fail(ErrorCode::data, "report rows must be finite");
    err_sum += row.abs_err;
    act_sum += row.actual;
    h_err[size_t(row.horizon_week - 1)] += row.abs_err;
    h_act[size_t(row.horizon_week - 1)] += row.actual;
    auto& sku = by_sku[row.sku_id];
    sku.first += row.abs_err;
    sku.second += row.actual;
    auto& vert = by_vertical[row.vertical_id];
    vert.first += row.abs_err;
    vert.second += row.actual;
  }

  r.overall_wmape = group_wmape(err_sum, act_sum, "the report");
  if (!(act_sum > 0.0))
    fail(ErrorCode::data, "report has zero total actual demand");
  for (int h = 1; h <= horizon; ++h)
    r.per_horizon.push_back(
        {h, group_wmape(h_err[size_t(h - 1)], h_act[size_t(h - 1)],
                        "horizon week " + std::to_string(h))});
  for (const auto& [vertical, sums] : by_vertical)
    r.per_vertical.push_back(
        {vertical, group_wmape(sums.first, sums.second,
                               "vertical '" + vertical + "'")});
  std::vector<double> errors;
  errors.reserve(by_sku.size());
  for (const auto& [sku, sums] : by_sku)
    errors.push_back(sku_error(sums.first, sums.second));
  r.hit_rate = hit_rate(errors, hit_cutoff_pct);

  r.rows = std::move(rows);
  return r;
}

std::string ForecastReport::to_json() const {
  ordered_json j;
  j["type"] = "forecast_report";
  j["version"] = 1;
  j["variant"] = variant;
  j["seed"] = seed;
  j["config_hash"] = hash_hex(config_hash);
  j["horizon"] = horizon;
  j["hit_cutoff_pct"] = hit_cutoff_pct;
  j["overall_wmape"] = overall_wmape;
  j["hit_rate"] = hit_rate;
  j["per_horizon"] = ordered_json::array();
  for (const HorizonWmape& h : per_horizon)
    j["per_horizon"].push_back(
        {{"horizon_week", h.horizon_week}, {"wmape", h.wmape}});
  j["per_vertical"] = ordered_json::array();
  for (const VerticalWmape& v : per_vertical)
    j["per_vertical"].push_back(
        {{"vertical_id", v.vertical_id}, {"wmape", v.wmape}});
  j["rows"] = ordered_json::array();
  for (const ReportRow& row : rows)
    j["rows"].push_back({{"sku_id", row.sku_id},
                         {"vertical_id", row.vertical_id},
                         {"horizon_week", row.horizon_week},
                         {"actual", row.actual},
                         {"forecast", row.forecast},
                         {"abs_err", row.abs_err}});
  return j.dump(1);
}

ForecastReport ForecastReport::from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("bad report JSON: ") + e.what());
  }
  try {
    if (j.at("type").get<std::string>() != "forecast_report")
      fail(ErrorCode::schema_mismatch, "not a forecast report");
    if (j.at("version").get<int>() != 1)
      fail(ErrorCode::schema_mismatch, "unsupported report version");
    ForecastReport r;
    r.variant = j.at("variant").get<std::string>();
    r.seed = j.at("seed").get<uint64_t>();
    r.config_hash = hash_from_hex(j.at("config_hash").get<std::string>());
    r.horizon = j.at("horizon").get<int>();
    r.hit_cutoff_pct = j.at("hit_cutoff_pct").get<double>();
    r.overall_wmape = j.at("overall_wmape").get<double>();
    r.hit_rate = j.at("hit_rate").get<double>();
    for (const auto& h : j.at("per_horizon"))
      r.per_horizon.push_back({h.at("horizon_week").get<int>(),
                               h.at("wmape").get<double>()});
    for (const auto& v : j.at("per_vertical"))
      r.per_vertical.push_back({v.at("vertical_id").get<std::string>(),
                                v.at("wmape").get<double>()});
    for (const auto& row : j.at("rows"))
      r.rows.push_back({row.at("sku_id").get<std::string>(),
                        row.at("vertical_id").get<std::string>(),
                        row.at("horizon_week").get<int>(),
                        row.at("actual").get<double>(),
                        row.at("forecast").get<double>(),
                        row.at("abs_err").get<double>()});
    return r;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("malformed report JSON: ") + e.what());
  }
}

std::string ForecastReport::to_csv() const {
  std::ostringstream os;
  os << "sku_id,vertical_id,horizon_week,actual,forecast,abs_err\n";
  for (const ReportRow& row : rows)
    os << row.sku_id << ',' << row.vertical_id << ',' << row.horizon_week
       << ',' << format_double(row.actual) << ',' << format_double(row.forecast)
       << ',' << format_double(row.abs_err) << '\n';
  return os.str();
}

void emit_report(const ForecastReport& report, const std::string& path,
                 ReportFormat format) {
  write_text_file(path, format == ReportFormat::json ? report.to_json()
                                                     : report.to_csv());
}

ForecastReport load_report(const std::string& path) {
  return ForecastReport::from_json(read_text_file(path));
}

// ---------------------------------------------------------------------------

namespace {

TrainConfig variant_train_config(const TrainConfig& base, Variant v) {
  TrainConfig tc = base;
  switch (v) {
    case Variant::armdn:
      break;
    case Variant::r_mdn:
      tc.arch.use_elu = false;
      break;
    case Variant::a_mdn:
      tc.arch.use_lstm = false;
      tc.arch.hidden = tc.arch.assoc_width;
      break;
    case Variant::ar:
      tc.arch.mixtures = 1;
      break;
    case Variant::cubist:
    case Variant::persistence:
      break;
  }
  return tc;
}

uint64_t eval_config_hash(Variant v, const EvalSpec& spec,
                          const TrainConfig& tc, const CubistConfig& cc) {
  std::ostringstream os;
  os << "variant = " << variant_name(v) << '\n'
     << "train_end_week = " << spec.train_end_week << '\n'
     << "horizon = " << spec.horizon << '\n'
     << "hit_cutoff_pct = " << format_double(spec.hit_cutoff_pct) << '\n'
     << tc.to_kv().dump() << cc.to_kv().dump();
  return fnv1a64(os.str());
}

struct EvalTargets {
  SplitResult split;
  std::vector<const SeriesInstance*> targets;  // sku_id ascending, unique
};

// One series per SKU keeps rows and the hit rate unambiguous.
EvalTargets gather_targets(const Dataset& ds, const EvalSpec& spec) {
  if (spec.horizon < 1)
    fail(ErrorCode::invalid_argument, "horizon must be >= 1");
  EvalTargets et{split_windows(ds, spec.train_end_week, spec.horizon), {}};
  if (et.split.test.empty())
    fail(ErrorCode::data, "no series covers the evaluation horizon");
  et.targets.reserve(et.split.test.size());
  for (const SeriesInstance& t : et.split.test.instances) {
    const SeriesInstance* orig = ds.find(t.sku_id, t.region_id);
    if (!orig) fail(ErrorCode::internal, "test split lost its source series");
    et.targets.push_back(orig);
  }
  std::sort(et.targets.begin(), et.targets.end(),
            [](const SeriesInstance* a, const SeriesInstance* b) {
              return a->sku_id < b->sku_id;
            });
  for (size_t i = 1; i < et.targets.size(); ++i)
    if (et.targets[i]->sku_id == et.targets[i - 1]->sku_id)
      fail(ErrorCode::data, "SKU '" + et.targets[i]->sku_id +
                                "' has multiple series; evaluation needs one "
                                "series per SKU (aggregate regions first)");
  return et;
}

std::vector<ReportRow> forecast_rows(
    const EvalTargets& et, const EvalSpec& spec,
    const std::function<std::vector<double>(const SeriesInstance&, size_t)>&
        forecaster) {
  std::vector<ReportRow> rows;
  rows.reserve(et.targets.size() * size_t(spec.horizon));
  for (const SeriesInstance* s : et.targets) {
    const size_t history_len = s->index_of(spec.train_end_week) + 1;
    const std::vector<double> units = forecaster(*s, history_len);
    for (int h = 1; h <= spec.horizon; ++h) {
      ReportRow row;
      row.sku_id = s->sku_id;
      row.vertical_id = s->vertical_id;
      row.horizon_week = h;
      row.actual = s->demand[history_len + size_t(h - 1)];
      row.forecast = units[size_t(h - 1)];
      row.abs_err = std::abs(row.actual - row.forecast);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<double> armdn_point_units(const ArmdnModel& m,
                                      const FeatureSchema& schema,
                                      const SeriesInstance& s,
                                      size_t history_len, int horizon) {
  const std::vector<ForecastStep> steps =
      armdn_forecast(m, s, history_len, horizon, schema);
  std::vector<double> units(steps.size());
  for (size_t i = 0; i < steps.size(); ++i) units[i] = steps[i].point_units;
  return units;
}

}  // namespace

ForecastReport evaluate_variant(const Dataset& ds, Variant v,
                                const EvalSpec& spec, const TrainConfig& tc,
                                const CubistConfig& cc) {
  const EvalTargets et = gather_targets(ds, spec);
  const TrainConfig vtc = variant_train_config(tc, v);

  std::vector<ReportRow> rows;
  if (v == Variant::persistence) {
    rows = forecast_rows(et, spec,
                         [&](const SeriesInstance& s, size_t history_len) {
                           return std::vector<double>(
                               size_t(spec.horizon),
                               s.demand[history_len - 1]);
                         });
  } else if (v == Variant::cubist) {
    const FeatureSchema schema = fit_schema(et.split.train);
    const CubistModel model = train_cubist(et.split.train, schema, cc);
    rows = forecast_rows(et, spec,
                         [&](const SeriesInstance& s, size_t history_len) {
                           return forecast_cubist(model, s, history_len,
                                                  spec.horizon, schema);
                         });
  } else {
    const TrainResult tr = train_armdn(et.split.train, vtc);
    rows = forecast_rows(et, spec,
                         [&](const SeriesInstance& s, size_t history_len) {
                           return armdn_point_units(tr.model, tr.schema, s,
                                                    history_len, spec.horizon);
                         });
  }

  return build_report(variant_name(v), tc.seed,
                      eval_config_hash(v, spec, vtc, cc), spec.horizon,
                      std::move(rows), spec.hit_cutoff_pct);
}

std::string AblationResult::comparison_csv() const {
  std::ostringstream os;
  os << "variant,overall_wmape,hit_rate";
  const int horizon = reports.empty() ? 0 : reports.front().horizon;
  for (int h = 1; h <= horizon; ++h) os << ",wmape_h" << h;
  os << '\n';
  for (const ForecastReport& r : reports) {
    os << r.variant << ',' << format_double(r.overall_wmape) << ','
       << format_double(r.hit_rate);
    for (const HorizonWmape& h : r.per_horizon)
      os << ',' << format_double(h.wmape);
    os << '\n';
  }
  return os.str();
}

AblationResult run_ablation(const Dataset& ds,
                            const std::vector<Variant>& variants,
                            const EvalSpec& spec, const TrainConfig& tc,
                            const CubistConfig& cc) {
  if (variants.empty())
    fail(ErrorCode::invalid_argument, "no variants to compare");
  AblationResult out;
  out.reports.reserve(variants.size());
  for (Variant v : variants)
    out.reports.push_back(evaluate_variant(ds, v, spec, tc, cc));
  return out;
}

namespace {

// The architecture switches identify which comparison variant a trained
// network is; combined ablations collapse to the most structural one.
std::string armdn_variant_label(const ArmdnConfig& cfg) {
  if (!cfg.use_lstm) return variant_name(Variant::a_mdn);
  if (!cfg.use_elu) return variant_name(Variant::r_mdn);
  if (cfg.mixtures == 1) return variant_name(Variant::ar);
  return variant_name(Variant::armdn);
}

void check_schema_match(const Checkpoint& ckpt, const Dataset& train) {
  const uint64_t want = ckpt.schema.hash();
  const uint64_t got = fit_schema(train).hash();
  if (want != got)
    fail(ErrorCode::schema_mismatch,
         "checkpoint schema " + hash_hex(want) +
             " does not match the dataset's training window (" +
             hash_hex(got) + "); evaluate with the split the model was "
             "trained on");
}

}  // namespace

ForecastReport evaluate_checkpoint(const Checkpoint* ckpt, const Dataset& ds,
                                   const EvalSpec& spec) {
  const EvalTargets et = gather_targets(ds, spec);

  std::string variant = variant_name(Variant::persistence);
  std::vector<ReportRow> rows;
  if (!ckpt) {
    rows = forecast_rows(et, spec,
                         [&](const SeriesInstance& s, size_t history_len) {
                           return std::vector<double>(
                               size_t(spec.horizon),
                               s.demand[history_len - 1]);
                         });
  } else if (ckpt->kind == "armdn") {
    variant = armdn_variant_label(ckpt->armdn.cfg);
    check_schema_match(*ckpt, et.split.train);
    rows = forecast_rows(et, spec,
                         [&](const SeriesInstance& s, size_t history_len) {
                           return armdn_point_units(ckpt->armdn, ckpt->schema,
                                                    s, history_len,
                                                    spec.horizon);
                         });
  } else if (ckpt->kind == "cubist") {
    variant = variant_name(Variant::cubist);
    check_schema_match(*ckpt, et.split.train);
    rows = forecast_rows(et, spec,
                         [&](const SeriesInstance& s, size_t history_len) {
                           return forecast_cubist(ckpt->cubist, s, history_len,
                                                  spec.horizon, ckpt->schema);
                         });
  } else {
    fail(ErrorCode::schema_mismatch,
         "checkpoint kind '" + ckpt->kind + "' is not known");
  }

  std::ostringstream os;
  os << "variant = " << variant << '\n'
     << "train_end_week = " << spec.train_end_week << '\n'
     << "horizon = " << spec.horizon << '\n'
     << "hit_cutoff_pct = " << format_double(spec.hit_cutoff_pct) << '\n'
     << "checkpoint = " << (ckpt ? hash_hex(ckpt->hash()) : "none") << '\n';
  return build_report(variant, ckpt ? ckpt->seed : 0, fnv1a64(os.str()),
                      spec.horizon, std::move(rows), spec.hit_cutoff_pct);
}

std::string forecast_csv(const Checkpoint& ckpt, const Dataset& ds,
                         int64_t as_of_week, int horizon) {
  if (horizon < 1) fail(ErrorCode::invalid_argument, "horizon must be >= 1");
  if (ckpt.kind != "armdn" && ckpt.kind != "cubist")
    fail(ErrorCode::schema_mismatch,
         "checkpoint kind '" + ckpt.kind + "' is not known");
  ds.validate();

  std::vector<const SeriesInstance*> covered;
  for (const SeriesInstance& s : ds.instances)
    if (s.covers(as_of_week) && s.covers(as_of_week + horizon))
      covered.push_back(&s);
  if (covered.empty())
    fail(ErrorCode::data,
         "no series has feature rows for the whole forecast horizon");
  std::sort(covered.begin(), covered.end(),
            [](const SeriesInstance* a, const SeriesInstance* b) {
              return std::tie(a->sku_id, a->region_id) <
                     std::tie(b->sku_id, b->region_id);
            });

  std::ostringstream os;
  os << "sku_id,region_id,week,forecast\n";
  for (const SeriesInstance* s : covered) {
    const size_t history_len = s->index_of(as_of_week) + 1;
    const std::vector<double> units =
        ckpt.kind == "armdn"
            ? armdn_point_units(ckpt.armdn, ckpt.schema, *s, history_len,
                                horizon)
            : forecast_cubist(ckpt.cubist, *s, history_len, horizon,
                              ckpt.schema);
    for (int h = 1; h <= horizon; ++h)
      os << s->sku_id << ',' << s->region_id << ',' << (as_of_week + h) << ','
         << format_double(units[size_t(h - 1)]) << '\n';
  }
  return os.str();
}

std::string fc_split_csv(const ForecastReport& report,
                         const RegionRatios& ratios) {
  std::ostringstream os;
  os << "sku_id,region_id,horizon_week,forecast\n";
  for (const ReportRow& row : report.rows) {
    const SkuRatios* sr = ratios.find(row.sku_id);
    if (!sr)
      fail(ErrorCode::data,
           "no regional ratios for SKU '" + row.sku_id + "'");
    const std::vector<double> parts = disaggregate_real(row.forecast, *sr);
    for (size_t i = 0; i < parts.size(); ++i)
      os << row.sku_id << ',' << sr->regions[i].region_id << ','
         << row.horizon_week << ',' << format_double(parts[i]) << '\n';
  }
  return os.str();
}

}  // namespace demandcast
