#ifndef DEMANDCAST_H
#define DEMANDCAST_H

/* C interface to the demandcast forecasting library.
 *
 * Every fallible call returns a dc_status code and reports results through
 * out-parameters. On failure the out-parameters are left untouched and
 * dc_last_error() holds a message for the calling thread. Strings returned
 * through char** are heap-allocated and must be released with
 * dc_string_free(); const char* returns borrow storage owned by the handle
 * (or by thread-local state) and must not be freed.
 *
 * Handles are opaque and single-owner. They are safe to use from multiple
 * threads only for concurrent reads.
 *
 * Config text is flat `key = value` lines ('#' comments, blank lines
 * ignored); unknown keys are rejected. NULL config text means all defaults.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dc_status {
  DC_OK = 0,
  DC_ERR_INVALID_ARGUMENT = 1,
  DC_ERR_IO = 2,
  DC_ERR_PARSE = 3,
  DC_ERR_DATA = 4,
  DC_ERR_DIVERGED = 5,
  DC_ERR_SCHEMA_MISMATCH = 6,
  DC_ERR_INTERNAL = 7
} dc_status;

typedef struct dc_dataset dc_dataset;
typedef struct dc_model dc_model;
typedef struct dc_report dc_report;
typedef struct dc_ablation dc_ablation;

const char* dc_version(void);

/* Message from the calling thread's most recent failed call; empty after a
 * successful one. */
const char* dc_last_error(void);

void dc_string_free(char* s);

/* --------------------------------------------------------------------------
 * Config resolution. Parses config text, applies defaults to absent keys and
 * returns the fully resolved config in canonical form (sorted `key = value`
 * lines), suitable for run manifests and hashing. */

dc_status dc_resolve_generator_config(const char* kv_text, char** out_text);
dc_status dc_resolve_train_config(const char* kv_text, char** out_text);
dc_status dc_resolve_cubist_config(const char* kv_text, char** out_text);

/* --------------------------------------------------------------------------
 * Datasets. */

dc_status dc_dataset_generate(const char* kv_text, dc_dataset** out);
dc_status dc_dataset_load_csv(const char* path, dc_dataset** out);
dc_status dc_dataset_save_csv(const dc_dataset* ds, const char* path);

/* Sums demand across regions per SKU into region "NATIONAL". */
dc_status dc_dataset_aggregate_national(const dc_dataset* ds,
                                        dc_dataset** out);

/* Keeps only series of one vertical; fails when nothing matches. */
dc_status dc_dataset_filter_vertical(const dc_dataset* ds,
                                     const char* vertical_id,
                                     dc_dataset** out);

/* Keeps only weeks <= last_week of every series, dropping series that start
 * later; fails when nothing remains. Training on the truncated set is what
 * makes a later backtest with train_end_week = last_week accept the model. */
dc_status dc_dataset_truncate(const dc_dataset* ds, long long last_week,
                              dc_dataset** out);

size_t dc_dataset_series_count(const dc_dataset* ds);

/* Newline-terminated sorted unique vertical ids, one per line. */
dc_status dc_dataset_vertical_ids(const dc_dataset* ds, char** out_text);

void dc_dataset_free(dc_dataset* ds);

/* --------------------------------------------------------------------------
 * Training. A model handle wraps a checkpoint (feature schema + fitted
 * parameters + training seed); after a training call it also carries the
 * epoch log. */

dc_status dc_train_armdn(const dc_dataset* train, const char* kv_text,
                         dc_model** out);

/* Continues from an existing network checkpoint on a data subset with a
 * fresh optimizer; architecture keys in the config are ignored. */
dc_status dc_finetune_armdn(const dc_model* base, const dc_dataset* subset,
                            const char* kv_text, dc_model** out);

dc_status dc_train_cubist(const dc_dataset* train, const char* kv_text,
                          unsigned long long seed, dc_model** out);

dc_status dc_model_save(const dc_model* m, const char* path);
dc_status dc_model_load(const char* path, dc_model** out);

/* "armdn" or "cubist". */
const char* dc_model_kind(const dc_model* m);

unsigned long long dc_model_seed(const dc_model* m);

/* Hash of the serialized checkpoint; equal for byte-identical artifacts. */
unsigned long long dc_model_hash(const dc_model* m);

/* Epoch log as CSV (epoch,lr,train_nll,val_nll). Deliberately excludes wall
 * time so reruns emit byte-identical logs. Header only when the handle was
 * loaded from a file or trained for zero epochs. */
dc_status dc_model_train_log_csv(const dc_model* m, char** out_text);

/* Epoch whose snapshot the model carries; -1 when validation never ran. */
int dc_model_best_epoch(const dc_model* m);

/* NaN when validation never ran. */
double dc_model_best_val_nll(const dc_model* m);

/* Mean teacher-forced negative log-likelihood per cell over the last
 * tail_weeks of every series (0 = whole series). Network models only. */
dc_status dc_model_mean_nll(const dc_model* m, const dc_dataset* ds,
                            int tail_weeks, int threads, double* out);

void dc_model_free(dc_model* m);

/* --------------------------------------------------------------------------
 * Forecasting and evaluation. */

/* Point forecasts for weeks as_of_week+1 .. as_of_week+horizon, one block
 * per series whose feature rows cover the range.
 * CSV: sku_id,region_id,week,forecast. */
dc_status dc_forecast_csv(const dc_model* m, const dc_dataset* ds,
                          long long as_of_week, int horizon, char** out_text);

/* Backtests over the horizon weeks after train_end_week. A NULL model scores
 * the last-value persistence baseline. For model handles the feature schema
 * refitted on the training window must hash-match the checkpoint's schema. */
dc_status dc_evaluate(const dc_model* m_or_null, const dc_dataset* ds,
                      long long train_end_week, int horizon,
                      double hit_cutoff_pct, dc_report** out);

dc_status dc_report_json(const dc_report* r, char** out_text);

/* Row-level table: sku_id,vertical_id,horizon_week,actual,forecast,abs_err */
dc_status dc_report_csv(const dc_report* r, char** out_text);

dc_status dc_report_load(const char* path, dc_report** out);

double dc_report_wmape(const dc_report* r);
double dc_report_hit_rate(const dc_report* r);
const char* dc_report_variant(const dc_report* r);

void dc_report_free(dc_report* r);

/* --------------------------------------------------------------------------
 * Hierarchy: national forecasts split across regions by trailing sales
 * share. */

/* Per-(SKU, region) shares from the regional history up to as_of_week.
 * CSV: sku_id,region_id,ratio,weeks_used. */
dc_status dc_region_ratios_csv(const dc_dataset* regional,
                               long long as_of_week, char** out_text);

/* Splits each row of a national-level report across regions.
 * CSV: sku_id,region_id,horizon_week,forecast. */
dc_status dc_fc_split_csv(const dc_report* national_report,
                          const dc_dataset* regional, long long as_of_week,
                          char** out_text);

/* --------------------------------------------------------------------------
 * Ablation: every requested variant trained and scored on the identical
 * split. variants_csv is comma-separated names (ARMDN, R_MDN, A_MDN, AR,
 * CUBIST, PERSISTENCE; case-insensitive); NULL or "" runs all of them. */

dc_status dc_ablate(const dc_dataset* ds, const char* variants_csv,
                    long long train_end_week, int horizon,
                    const char* train_kv_text, const char* cubist_kv_text,
                    dc_ablation** out);

/* variant,overall_wmape,hit_rate,wmape_h1..wmape_hH, one row per variant. */
dc_status dc_ablation_comparison_csv(const dc_ablation* a, char** out_text);

size_t dc_ablation_count(const dc_ablation* a);

/* Copies variant i's report into a standalone handle. */
dc_status dc_ablation_report(const dc_ablation* a, size_t index,
                             dc_report** out);

void dc_ablation_free(dc_ablation* a);

/* --------------------------------------------------------------------------
 * Utilities. */

/* 16-hex-digit content fingerprint of a file. */
dc_status dc_hash_file_hex(const char* path, char** out_text);

#ifdef __cplusplus
}
#endif

#endif /* DEMANDCAST_H */
