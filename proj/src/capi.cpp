// C binding over the core library. Every entry point traps exceptions at the
// language boundary, translates the typed error into a status code and stashes
// the message in thread-local state for dc_last_error().

#include "demandcast.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/eval.hpp"

using namespace demandcast;

struct dc_dataset {
  Dataset ds;
};

struct dc_model {
  Checkpoint ckpt;
  std::vector<EpochLog> log;  // empty unless this handle ran training
  double best_val_nll = std::numeric_limits<double>::quiet_NaN();
  int best_epoch = -1;
};

struct dc_report {
  ForecastReport report;
};

struct dc_ablation {
  AblationResult result;
};

namespace {

thread_local std::string g_last_error;

dc_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return DC_ERR_INVALID_ARGUMENT;
    case ErrorCode::io: return DC_ERR_IO;
    case ErrorCode::parse: return DC_ERR_PARSE;
    case ErrorCode::data: return DC_ERR_DATA;
    case ErrorCode::diverged: return DC_ERR_DIVERGED;
    case ErrorCode::schema_mismatch: return DC_ERR_SCHEMA_MISMATCH;
    case ErrorCode::internal: return DC_ERR_INTERNAL;
  }
  return DC_ERR_INTERNAL;
}

template <typename Fn>
dc_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return DC_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DC_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr)
    fail(ErrorCode::invalid_argument, std::string(what) + " is null");
}

// Transfers a string across the C boundary; released by dc_string_free.
void give_string(const std::string& s, char** out) {
  require(out, "output pointer");
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) fail(ErrorCode::internal, "out of memory");
  std::memcpy(p, s.c_str(), s.size() + 1);
  *out = p;
}

KvConfig parse_kv(const char* text) {
  return KvConfig::parse(text == nullptr ? "" : text);
}

TrainConfig train_config_from(const char* text) {
  const KvConfig kv = parse_kv(text);
  TrainConfig cfg = TrainConfig::from_kv(kv);
  kv.fail_on_unconsumed();
  return cfg;
}

CubistConfig cubist_config_from(const char* text) {
  const KvConfig kv = parse_kv(text);
  CubistConfig cfg = CubistConfig::from_kv(kv);
  kv.fail_on_unconsumed();
  return cfg;
}

dc_model* model_from_training(TrainResult&& tr, uint64_t seed) {
  auto* m = new dc_model;
  m->ckpt = make_armdn_checkpoint(std::move(tr.model), std::move(tr.schema),
                                  seed);
  m->log = std::move(tr.log);
  m->best_val_nll = tr.best_val_nll;
  m->best_epoch = tr.best_epoch;
  return m;
}

}  // namespace

extern "C" {

const char* dc_version(void) { return "0.1.0"; }

const char* dc_last_error(void) { return g_last_error.c_str(); }

void dc_string_free(char* s) { std::free(s); }

// ---------------------------------------------------------------------------

dc_status dc_resolve_generator_config(const char* kv_text, char** out_text) {
  return guarded([&] {
    const KvConfig kv = parse_kv(kv_text);
    const GeneratorConfig cfg = GeneratorConfig::from_kv(kv);
    kv.fail_on_unconsumed();
    give_string(cfg.to_kv().dump(), out_text);
  });
}

dc_status dc_resolve_train_config(const char* kv_text, char** out_text) {
  return guarded([&] {
    give_string(train_config_from(kv_text).to_kv().dump(), out_text);
  });
}

dc_status dc_resolve_cubist_config(const char* kv_text, char** out_text) {
  return guarded([&] {
    give_string(cubist_config_from(kv_text).to_kv().dump(), out_text);
  });
}

// ---------------------------------------------------------------------------

dc_status dc_dataset_generate(const char* kv_text, dc_dataset** out) {
  return guarded([&] {
    require(out, "output pointer");
    const KvConfig kv = parse_kv(kv_text);
    const GeneratorConfig cfg = GeneratorConfig::from_kv(kv);
    kv.fail_on_unconsumed();
    *out = new dc_dataset{generate_synthetic(cfg)};
  });
}

dc_status dc_dataset_load_csv(const char* path, dc_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "output pointer");
    *out = new dc_dataset{load_csv(path)};
  });
}

dc_status dc_dataset_save_csv(const dc_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds, "dataset");
    require(path, "path");
    save_csv(ds->ds, path);
  });
}

dc_status dc_dataset_aggregate_national(const dc_dataset* ds,
                                        dc_dataset** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "output pointer");
    *out = new dc_dataset{aggregate_national(ds->ds)};
  });
}

dc_status dc_dataset_filter_vertical(const dc_dataset* ds,
                                     const char* vertical_id,
                                     dc_dataset** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(vertical_id, "vertical_id");
    require(out, "output pointer");
    *out = new dc_dataset{filter_vertical(ds->ds, vertical_id)};
  });
}

dc_status dc_dataset_truncate(const dc_dataset* ds, long long last_week,
                              dc_dataset** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "output pointer");
    *out = new dc_dataset{split_windows(ds->ds, last_week, 1).train};
  });
}

size_t dc_dataset_series_count(const dc_dataset* ds) {
  return ds == nullptr ? 0 : ds->ds.size();
}

dc_status dc_dataset_vertical_ids(const dc_dataset* ds, char** out_text) {
  return guarded([&] {
    require(ds, "dataset");
    std::string lines;
    for (const std::string& v : ds->ds.vertical_ids()) {
      lines += v;
      lines += '\n';
    }
    give_string(lines, out_text);
  });
}

void dc_dataset_free(dc_dataset* ds) { delete ds; }

// ---------------------------------------------------------------------------

dc_status dc_train_armdn(const dc_dataset* train, const char* kv_text,
                         dc_model** out) {
  return guarded([&] {
    require(train, "dataset");
    require(out, "output pointer");
    const TrainConfig cfg = train_config_from(kv_text);
    TrainResult tr = train_armdn(train->ds, cfg);
    *out = model_from_training(std::move(tr), cfg.seed);
  });
}

dc_status dc_finetune_armdn(const dc_model* base, const dc_dataset* subset,
                            const char* kv_text, dc_model** out) {
  return guarded([&] {
    require(base, "model");
    require(subset, "dataset");
    require(out, "output pointer");
    if (base->ckpt.kind != "armdn")
      fail(ErrorCode::invalid_argument,
           "fine-tuning needs a network checkpoint, got '" + base->ckpt.kind +
               "'");
    const TrainConfig cfg = train_config_from(kv_text);
    TrainResult tr =
        finetune_armdn(base->ckpt.armdn, base->ckpt.schema, subset->ds, cfg);
    *out = model_from_training(std::move(tr), cfg.seed);
  });
}

dc_status dc_train_cubist(const dc_dataset* train, const char* kv_text,
                          unsigned long long seed, dc_model** out) {
  return guarded([&] {
    require(train, "dataset");
    require(out, "output pointer");
    const CubistConfig cfg = cubist_config_from(kv_text);
    FeatureSchema schema = fit_schema(train->ds);
    CubistModel model = train_cubist(train->ds, schema, cfg);
    auto* m = new dc_model;
    m->ckpt = make_cubist_checkpoint(std::move(model), std::move(schema),
                                     seed);
    *out = m;
  });
}

dc_status dc_model_save(const dc_model* m, const char* path) {
  return guarded([&] {
    require(m, "model");
    require(path, "path");
    save_checkpoint(m->ckpt, path);
  });
}

dc_status dc_model_load(const char* path, dc_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "output pointer");
    auto* m = new dc_model;
    m->ckpt = load_checkpoint(path);
    *out = m;
  });
}

const char* dc_model_kind(const dc_model* m) {
  return m == nullptr ? "" : m->ckpt.kind.c_str();
}

unsigned long long dc_model_seed(const dc_model* m) {
  return m == nullptr ? 0 : m->ckpt.seed;
}

unsigned long long dc_model_hash(const dc_model* m) {
  return m == nullptr ? 0 : m->ckpt.hash();
}

dc_status dc_model_train_log_csv(const dc_model* m, char** out_text) {
  return guarded([&] {
    require(m, "model");
    std::string csv = "epoch,lr,train_nll,val_nll\n";
    for (const EpochLog& e : m->log) {
      csv += std::to_string(e.epoch);
      csv += ',';
      csv += format_double(e.lr);
      csv += ',';
      csv += format_double(e.train_nll);
      csv += ',';
      csv += format_double(e.val_nll);
      csv += '\n';
    }
    give_string(csv, out_text);
  });
}

int dc_model_best_epoch(const dc_model* m) {
  return m == nullptr ? -1 : m->best_epoch;
}

double dc_model_best_val_nll(const dc_model* m) {
  return m == nullptr ? std::numeric_limits<double>::quiet_NaN()
                      : m->best_val_nll;
}

dc_status dc_model_mean_nll(const dc_model* m, const dc_dataset* ds,
                            int tail_weeks, int threads, double* out) {
  return guarded([&] {
    require(m, "model");
    require(ds, "dataset");
    require(out, "output pointer");
    if (m->ckpt.kind != "armdn")
      fail(ErrorCode::invalid_argument,
           "likelihood is defined for network checkpoints only");
    *out = mean_nll(m->ckpt.armdn, m->ckpt.schema, ds->ds, tail_weeks,
                    threads);
  });
}

void dc_model_free(dc_model* m) { delete m; }

// ---------------------------------------------------------------------------

dc_status dc_forecast_csv(const dc_model* m, const dc_dataset* ds,
                          long long as_of_week, int horizon, char** out_text) {
  return guarded([&] {
    require(m, "model");
    require(ds, "dataset");
    give_string(forecast_csv(m->ckpt, ds->ds, as_of_week, horizon), out_text);
  });
}

dc_status dc_evaluate(const dc_model* m_or_null, const dc_dataset* ds,
                      long long train_end_week, int horizon,
                      double hit_cutoff_pct, dc_report** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "output pointer");
    EvalSpec spec;
    spec.train_end_week = train_end_week;
    spec.horizon = horizon;
    spec.hit_cutoff_pct = hit_cutoff_pct;
    const Checkpoint* ckpt =
        m_or_null == nullptr ? nullptr : &m_or_null->ckpt;
    *out = new dc_report{evaluate_checkpoint(ckpt, ds->ds, spec)};
  });
}

dc_status dc_report_json(const dc_report* r, char** out_text) {
  return guarded([&] {
    require(r, "report");
    give_string(r->report.to_json(), out_text);
  });
}

dc_status dc_report_csv(const dc_report* r, char** out_text) {
  return guarded([&] {
    require(r, "report");
    give_string(r->report.to_csv(), out_text);
  });
}

dc_status dc_report_load(const char* path, dc_report** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "output pointer");
    *out = new dc_report{load_report(path)};
  });
}

double dc_report_wmape(const dc_report* r) {
  return r == nullptr ? std::numeric_limits<double>::quiet_NaN()
                      : r->report.overall_wmape;
}

double dc_report_hit_rate(const dc_report* r) {
  return r == nullptr ? std::numeric_limits<double>::quiet_NaN()
                      : r->report.hit_rate;
}

const char* dc_report_variant(const dc_report* r) {
  return r == nullptr ? "" : r->report.variant.c_str();
}

void dc_report_free(dc_report* r) { delete r; }

// ---------------------------------------------------------------------------

dc_status dc_region_ratios_csv(const dc_dataset* regional,
                               long long as_of_week, char** out_text) {
  return guarded([&] {
    require(regional, "dataset");
    give_string(compute_ratios(regional->ds, as_of_week).to_csv(), out_text);
  });
}

dc_status dc_fc_split_csv(const dc_report* national_report,
                          const dc_dataset* regional, long long as_of_week,
                          char** out_text) {
  return guarded([&] {
    require(national_report, "report");
    require(regional, "dataset");
    const RegionRatios ratios = compute_ratios(regional->ds, as_of_week);
    give_string(fc_split_csv(national_report->report, ratios), out_text);
  });
}

// ---------------------------------------------------------------------------

dc_status dc_ablate(const dc_dataset* ds, const char* variants_csv,
                    long long train_end_week, int horizon,
                    const char* train_kv_text, const char* cubist_kv_text,
                    dc_ablation** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "output pointer");
    std::vector<Variant> variants;
    const std::string names = variants_csv == nullptr ? "" : variants_csv;
    if (names.empty()) {
      variants = kAllVariants;
    } else {
      std::istringstream in(names);
      std::string tok;
      while (std::getline(in, tok, ','))
        variants.push_back(variant_from_name(tok));
    }
    EvalSpec spec;
    spec.train_end_week = train_end_week;
    spec.horizon = horizon;
    const TrainConfig tc = train_config_from(train_kv_text);
    const CubistConfig cc = cubist_config_from(cubist_kv_text);
    *out = new dc_ablation{run_ablation(ds->ds, variants, spec, tc, cc)};
  });
}

dc_status dc_ablation_comparison_csv(const dc_ablation* a, char** out_text) {
  return guarded([&] {
    require(a, "ablation");
    give_string(a->result.comparison_csv(), out_text);
  });
}

size_t dc_ablation_count(const dc_ablation* a) {
  return a == nullptr ? 0 : a->result.reports.size();
}

dc_status dc_ablation_report(const dc_ablation* a, size_t index,
                             dc_report** out) {
  return guarded([&] {
    require(a, "ablation");
    require(out, "output pointer");
    if (index >= a->result.reports.size())
      fail(ErrorCode::invalid_argument, "ablation report index out of range");
    *out = new dc_report{a->result.reports[index]};
  });
}

void dc_ablation_free(dc_ablation* a) { delete a; }

// ---------------------------------------------------------------------------

dc_status dc_hash_file_hex(const char* path, char** out_text) {
  return guarded([&] {
    require(path, "path");
    give_string(hash_hex(hash_file(path)), out_text);
  });
}

}  // extern "C"
