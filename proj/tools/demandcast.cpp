// Command-line front end over the C library: generate synthetic datasets,
// train and fine-tune models, produce forward forecasts, backtest checkpoints
// and run variant comparisons.
//
// Every command writes its artifacts into --out-dir together with a
// <command>.manifest.json recording the fully resolved configuration, the
// effective seed and a content hash of every emitted file. Reruns with the
// same inputs reproduce every artifact byte for byte.
//
// Config values resolve in precedence order: built-in defaults, then the
// --config file, then the DEMANDCAST_SEED environment variable (seed only),
// then explicit flags. Relative paths resolve against --out-dir.
//
// The process exit code is 0 on success or the dc_status of the first
// failure; bad command lines exit with the invalid-argument code.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "demandcast.h"
#include "json.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void die(dc_status st) {
  std::fprintf(stderr, "error: %s\n", dc_last_error());
  std::exit(static_cast<int>(st));
}

void need(dc_status st) {
  if (st != DC_OK) die(st);
}

[[noreturn]] void die_usage(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  std::exit(static_cast<int>(DC_ERR_INVALID_ARGUMENT));
}

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  dc_string_free(s);
  return out;
}

struct DatasetDeleter {
  void operator()(dc_dataset* p) const { dc_dataset_free(p); }
};
struct ModelDeleter {
  void operator()(dc_model* p) const { dc_model_free(p); }
};
struct ReportDeleter {
  void operator()(dc_report* p) const { dc_report_free(p); }
};
struct AblationDeleter {
  void operator()(dc_ablation* p) const { dc_ablation_free(p); }
};
using DatasetPtr = std::unique_ptr<dc_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<dc_model, ModelDeleter>;
using ReportPtr = std::unique_ptr<dc_report, ReportDeleter>;
using AblationPtr = std::unique_ptr<dc_ablation, AblationDeleter>;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "error: cannot read '%s'\n", path.c_str());
    std::exit(static_cast<int>(DC_ERR_IO));
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.flush();
  if (!out) {
    std::fprintf(stderr, "error: cannot write '%s'\n", path.c_str());
    std::exit(static_cast<int>(DC_ERR_IO));
  }
}

std::string resolve_path(const std::string& out_dir, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(out_dir) / path).string();
}

// Last occurrence of `key` in canonical `key = value` text.
std::string kv_get(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  std::string found;
  const std::string prefix = key + " = ";
  while (std::getline(in, line))
    if (line.rfind(prefix, 0) == 0) found = line.substr(prefix.size());
  return found;
}

// Flags that forward into config keys. Only flags the user actually passed
// are appended, after the config file's text, so flags win.
class KvFlags {
 public:
  void add(CLI::App* cmd, const std::string& flag, const std::string& key,
           const std::string& desc) {
    entries_.push_back({nullptr, key, ""});
    Entry& e = entries_.back();
    e.opt = cmd->add_option(flag, e.value, desc);
  }

  std::string overrides() const {
    std::string out;
    for (const Entry& e : entries_)
      if (e.opt->count() > 0) out += e.key + " = " + e.value + "\n";
    return out;
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::string key;
    std::string value;
  };
  std::deque<Entry> entries_;  // stable addresses for CLI11 bindings
};

// file text, then the seed environment variable, then flag overrides;
// KvConfig::parse keeps the last occurrence of a key.
std::string assemble_config(const std::string& file_text, bool env_seed,
                            const KvFlags& flags) {
  std::string text = file_text;
  if (!text.empty() && text.back() != '\n') text += '\n';
  if (env_seed) {
    if (const char* env = std::getenv("DEMANDCAST_SEED"))
      text += std::string("seed = ") + env + "\n";
  }
  text += flags.overrides();
  return text;
}

unsigned long long parse_seed(const std::string& s) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    die_usage("seed must be an unsigned integer, got '" + s + "'");
  return v;
}

// ---------------------------------------------------------------------------

struct Manifest {
  std::string command;
  std::string config_file;
  std::string out_dir;
  unsigned long long seed = 0;
  ordered_json configs = ordered_json::object();    // name -> resolved text
  ordered_json artifacts = ordered_json::object();  // file name -> hash
};

// Records the hash of a file the run already wrote into out_dir.
void note_artifact(Manifest& m, const std::string& name) {
  const std::string path = (fs::path(m.out_dir) / name).string();
  char* h = nullptr;
  need(dc_hash_file_hex(path.c_str(), &h));
  m.artifacts[name] = take(h);
}

void write_artifact(Manifest& m, const std::string& name,
                    const std::string& content) {
  spill((fs::path(m.out_dir) / name).string(), content);
  note_artifact(m, name);
}

void write_manifest(const Manifest& m) {
  ordered_json j;
  j["type"] = "run_manifest";
  j["version"] = 1;
  j["command"] = m.command;
  j["config_file"] = m.config_file;
  j["out_dir"] = m.out_dir;
  j["seed"] = m.seed;
  j["config"] = m.configs;
  j["artifacts"] = m.artifacts;
  spill((fs::path(m.out_dir) / (m.command + ".manifest.json")).string(),
        j.dump(1) + "\n");
}

Manifest start_manifest(const std::string& command, const std::string& out_dir,
                        const std::string& config_file) {
  fs::create_directories(out_dir);
  Manifest m;
  m.command = command;
  m.out_dir = out_dir;
  m.config_file = config_file;
  return m;
}

DatasetPtr load_data(const std::string& out_dir, const std::string& path) {
  dc_dataset* ds = nullptr;
  need(dc_dataset_load_csv(resolve_path(out_dir, path).c_str(), &ds));
  return DatasetPtr(ds);
}

ModelPtr load_model(const std::string& out_dir, const std::string& path) {
  dc_model* m = nullptr;
  need(dc_model_load(resolve_path(out_dir, path).c_str(), &m));
  return ModelPtr(m);
}

void aggregate_in_place(DatasetPtr& data) {
  dc_dataset* nat = nullptr;
  need(dc_dataset_aggregate_national(data.get(), &nat));
  data.reset(nat);
}

void add_aggregate_flag(CLI::App* cmd, bool& flag) {
  cmd->add_flag("--aggregate", flag,
                "Sum demand across regions into one national series per SKU "
                "before using --data");
}

// ---------------------------------------------------------------------------

struct GenerateOpts {
  std::string out_dir = ".";
  std::string config_file;
  KvFlags kv;
};

int run_generate(const GenerateOpts& o) {
  Manifest m = start_manifest("generate", o.out_dir, o.config_file);
  const std::string file_text =
      o.config_file.empty()
          ? ""
          : slurp(resolve_path(o.out_dir, o.config_file));
  const std::string text = assemble_config(file_text, true, o.kv);

  char* resolved = nullptr;
  need(dc_resolve_generator_config(text.c_str(), &resolved));
  const std::string canon = take(resolved);
  m.configs["generator"] = canon;
  m.seed = parse_seed(kv_get(canon, "seed"));

  dc_dataset* raw = nullptr;
  need(dc_dataset_generate(canon.c_str(), &raw));
  DatasetPtr ds(raw);
  need(dc_dataset_save_csv(ds.get(),
                           (fs::path(o.out_dir) / "data.csv").string().c_str()));
  note_artifact(m, "data.csv");
  write_manifest(m);
  std::printf("generate: %zu series -> %s\n", dc_dataset_series_count(ds.get()),
              (fs::path(o.out_dir) / "data.csv").string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainOpts {
  std::string out_dir = ".";
  bool aggregate = false;
  std::string config_file;
  std::string data_path;
  std::string model_kind = "armdn";
  std::string stage = "global";
  std::string vertical;
  std::string base_checkpoint;
  std::string seed_flag;
  bool seed_given = false;
  int64_t train_end = 0;
  bool train_end_given = false;
  KvFlags kv;
};

int run_train(const TrainOpts& o) {
  Manifest m = start_manifest("train", o.out_dir, o.config_file);
  DatasetPtr data = load_data(o.out_dir, o.data_path);
  if (o.aggregate) aggregate_in_place(data);
  if (o.train_end_given) {
    dc_dataset* cut = nullptr;
    need(dc_dataset_truncate(data.get(), o.train_end, &cut));
    data.reset(cut);
  }

  const std::string file_text =
      o.config_file.empty()
          ? ""
          : slurp(resolve_path(o.out_dir, o.config_file));

  ModelPtr model;
  if (o.model_kind == "armdn") {
    std::string text = assemble_config(file_text, true, o.kv);
    if (o.seed_given) text += "seed = " + o.seed_flag + "\n";
    char* resolved = nullptr;
    need(dc_resolve_train_config(text.c_str(), &resolved));
    const std::string canon = take(resolved);
    m.configs["train"] = canon;

    dc_model* raw = nullptr;
    if (o.stage == "global") {
      need(dc_train_armdn(data.get(), canon.c_str(), &raw));
    } else if (o.stage == "finetune") {
      if (o.base_checkpoint.empty() || o.vertical.empty())
        die_usage("--stage finetune requires --base-checkpoint and --vertical");
      ModelPtr base = load_model(o.out_dir, o.base_checkpoint);
      dc_dataset* sub = nullptr;
      need(dc_dataset_filter_vertical(data.get(), o.vertical.c_str(), &sub));
      DatasetPtr subset(sub);
      need(dc_finetune_armdn(base.get(), subset.get(), canon.c_str(), &raw));
    } else {
      die_usage("--stage must be global or finetune");
    }
    model.reset(raw);
  } else if (o.model_kind == "cubist") {
    if (o.stage != "global")
      die_usage("--stage finetune applies to the armdn model only");
    const std::string text = assemble_config(file_text, false, o.kv);
    char* resolved = nullptr;
    need(dc_resolve_cubist_config(text.c_str(), &resolved));
    const std::string canon = take(resolved);
    m.configs["cubist"] = canon;

    unsigned long long seed = 0;
    if (const char* env = std::getenv("DEMANDCAST_SEED")) seed = parse_seed(env);
    if (o.seed_given) seed = parse_seed(o.seed_flag);
    dc_model* raw = nullptr;
    need(dc_train_cubist(data.get(), canon.c_str(), seed, &raw));
    model.reset(raw);
  } else {
    die_usage("--model must be armdn or cubist");
  }

  m.seed = dc_model_seed(model.get());
  need(dc_model_save(model.get(),
                     (fs::path(o.out_dir) / "model.json").string().c_str()));
  note_artifact(m, "model.json");

  char* log = nullptr;
  need(dc_model_train_log_csv(model.get(), &log));
  write_artifact(m, "train_log.csv", take(log));
  write_manifest(m);
  std::printf("train: %s checkpoint -> %s (best epoch %d)\n",
              dc_model_kind(model.get()),
              (fs::path(o.out_dir) / "model.json").string().c_str(),
              dc_model_best_epoch(model.get()));
  return 0;
}

// ---------------------------------------------------------------------------

struct ForecastOpts {
  std::string out_dir = ".";
  bool aggregate = false;
  std::string data_path;
  std::string checkpoint;
  int64_t as_of = 0;
  int horizon = 4;
};

int run_forecast(const ForecastOpts& o) {
  Manifest m = start_manifest("forecast", o.out_dir, "");
  DatasetPtr data = load_data(o.out_dir, o.data_path);
  if (o.aggregate) aggregate_in_place(data);
  ModelPtr model = load_model(o.out_dir, o.checkpoint);
  m.seed = dc_model_seed(model.get());

  char* csv = nullptr;
  need(dc_forecast_csv(model.get(), data.get(), o.as_of, o.horizon, &csv));
  write_artifact(m, "forecast.csv", take(csv));
  write_manifest(m);
  std::printf("forecast: weeks %lld..%lld -> %s\n",
              static_cast<long long>(o.as_of + 1),
              static_cast<long long>(o.as_of + o.horizon),
              (fs::path(o.out_dir) / "forecast.csv").string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateOpts {
  std::string out_dir = ".";
  bool aggregate = false;
  std::string data_path;
  std::string checkpoint;
  std::string variant;
  std::string fc_split_data;
  int64_t train_end = 0;
  int horizon = 4;
  double hit_cutoff = 30.0;
  int teacher_nll_weeks = 0;
  int threads = 1;
};

int run_evaluate(const EvaluateOpts& o) {
  Manifest m = start_manifest("evaluate", o.out_dir, "");
  DatasetPtr data = load_data(o.out_dir, o.data_path);
  if (o.aggregate) aggregate_in_place(data);

  ModelPtr model;
  if (!o.checkpoint.empty()) {
    if (!o.variant.empty())
      die_usage("pass either --checkpoint or --variant, not both");
    model = load_model(o.out_dir, o.checkpoint);
  } else if (o.variant != "persistence") {
    die_usage(
        "evaluate needs --checkpoint FILE, or --variant persistence for the "
        "baseline");
  }
  m.seed = model ? dc_model_seed(model.get()) : 0;

  dc_report* raw = nullptr;
  need(dc_evaluate(model.get(), data.get(), o.train_end, o.horizon,
                   o.hit_cutoff, &raw));
  ReportPtr report(raw);

  char* json = nullptr;
  need(dc_report_json(report.get(), &json));
  write_artifact(m, "report.json", take(json));
  char* csv = nullptr;
  need(dc_report_csv(report.get(), &csv));
  write_artifact(m, "report.csv", take(csv));

  if (!o.fc_split_data.empty()) {
    DatasetPtr regional = load_data(o.out_dir, o.fc_split_data);
    char* ratios = nullptr;
    need(dc_region_ratios_csv(regional.get(), o.train_end, &ratios));
    write_artifact(m, "ratios.csv", take(ratios));
    char* split = nullptr;
    need(dc_fc_split_csv(report.get(), regional.get(), o.train_end, &split));
    write_artifact(m, "fc_split.csv", take(split));
  }

  if (o.teacher_nll_weeks > 0) {
    if (!model)
      die_usage("--teacher-nll-weeks needs a network checkpoint");
    dc_dataset* cut = nullptr;
    need(dc_dataset_truncate(data.get(), o.train_end, &cut));
    DatasetPtr window(cut);
    double nll = 0.0;
    need(dc_model_mean_nll(model.get(), window.get(), o.teacher_nll_weeks,
                           o.threads, &nll));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g\n", nll);
    write_artifact(m, "teacher_nll.txt", buf);
  }

  write_manifest(m);
  std::printf("evaluate: %s wMAPE %.3f, hit rate %.3f -> %s\n",
              dc_report_variant(report.get()), dc_report_wmape(report.get()),
              dc_report_hit_rate(report.get()),
              (fs::path(o.out_dir) / "report.json").string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct AblateOpts {
  std::string out_dir = ".";
  bool aggregate = false;
  std::string train_config_file;
  std::string cubist_config_file;
  std::string data_path;
  std::string variants;
  int64_t train_end = 0;
  int horizon = 4;
  KvFlags train_kv;
  KvFlags cubist_kv;
};

int run_ablate(const AblateOpts& o) {
  Manifest m = start_manifest("ablate", o.out_dir, o.train_config_file);
  DatasetPtr data = load_data(o.out_dir, o.data_path);
  if (o.aggregate) aggregate_in_place(data);

  const std::string train_file =
      o.train_config_file.empty()
          ? ""
          : slurp(resolve_path(o.out_dir, o.train_config_file));
  const std::string cubist_file =
      o.cubist_config_file.empty()
          ? ""
          : slurp(resolve_path(o.out_dir, o.cubist_config_file));

  char* resolved = nullptr;
  need(dc_resolve_train_config(
      assemble_config(train_file, true, o.train_kv).c_str(), &resolved));
  const std::string train_canon = take(resolved);
  need(dc_resolve_cubist_config(
      assemble_config(cubist_file, false, o.cubist_kv).c_str(), &resolved));
  const std::string cubist_canon = take(resolved);
  m.configs["train"] = train_canon;
  m.configs["cubist"] = cubist_canon;
  m.seed = parse_seed(kv_get(train_canon, "seed"));

  dc_ablation* raw = nullptr;
  need(dc_ablate(data.get(), o.variants.empty() ? nullptr : o.variants.c_str(),
                 o.train_end, o.horizon, train_canon.c_str(),
                 cubist_canon.c_str(), &raw));
  AblationPtr ab(raw);

  char* table = nullptr;
  need(dc_ablation_comparison_csv(ab.get(), &table));
  const std::string comparison = take(table);
  write_artifact(m, "comparison.csv", comparison);

  for (size_t i = 0; i < dc_ablation_count(ab.get()); ++i) {
    dc_report* r = nullptr;
    need(dc_ablation_report(ab.get(), i, &r));
    ReportPtr report(r);
    char* json = nullptr;
    need(dc_report_json(report.get(), &json));
    write_artifact(
        m, std::string("report_") + dc_report_variant(report.get()) + ".json",
        take(json));
  }
  write_manifest(m);
  std::fputs(comparison.c_str(), stdout);
  return 0;
}

// ---------------------------------------------------------------------------

void add_out_dir(CLI::App* cmd, std::string& out_dir) {
  cmd->add_option("--out-dir", out_dir,
                  "Directory artifacts are written into (created if missing); "
                  "relative paths resolve against it");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Weekly demand forecasting: synthetic data, mixture-density network and "
      "rule-committee models, backtesting and hierarchy splits"};
  app.require_subcommand(1);

  GenerateOpts gen;
  CLI::App* generate =
      app.add_subcommand("generate", "Generate a synthetic weekly dataset");
  add_out_dir(generate, gen.out_dir);
  generate->add_option("--config", gen.config_file,
                       "Generator config file (key = value lines)");
  gen.kv.add(generate, "--skus", "n_skus", "Number of SKUs");
  gen.kv.add(generate, "--verticals", "n_verticals", "Number of verticals");
  gen.kv.add(generate, "--regions", "n_regions", "Number of regions");
  gen.kv.add(generate, "--weeks", "n_weeks", "Number of weeks");
  gen.kv.add(generate, "--event-weeks", "event_weeks",
             "Comma-separated sale weeks (default: every 13th)");
  gen.kv.add(generate, "--event-lift-lo", "event_lift_lo",
             "Lower bound of the event demand multiplier");
  gen.kv.add(generate, "--event-lift-hi", "event_lift_hi",
             "Upper bound of the event demand multiplier");
  gen.kv.add(generate, "--price-change-prob", "price_change_prob",
             "Per-week price change probability");
  gen.kv.add(generate, "--modality", "demand_modality",
             "Demand modality: unimodal or bimodal");
  gen.kv.add(generate, "--noise-scale", "noise_scale",
             "Lognormal noise scale");
  gen.kv.add(generate, "--seed", "seed", "Generator seed");

  TrainOpts tr;
  CLI::App* train = app.add_subcommand("train", "Train a model checkpoint");
  add_out_dir(train, tr.out_dir);
  train->add_option("--data", tr.data_path, "Dataset CSV")->required();
  add_aggregate_flag(train, tr.aggregate);
  train->add_option("--train-end", tr.train_end,
                    "Last week to train on (later weeks are dropped)")
      ->each([&](const std::string&) { tr.train_end_given = true; });
  train->add_option("--model", tr.model_kind, "Model kind: armdn or cubist");
  train->add_option("--config", tr.config_file,
                    "Training config file (key = value lines)");
  train->add_option("--stage", tr.stage,
                    "global trains from scratch; finetune continues a "
                    "checkpoint on one vertical");
  train->add_option("--vertical", tr.vertical,
                    "Vertical id for --stage finetune");
  train->add_option("--base-checkpoint", tr.base_checkpoint,
                    "Checkpoint to continue from for --stage finetune");
  train->add_option("--seed", tr.seed_flag, "Training seed")
      ->each([&](const std::string&) { tr.seed_given = true; });
  tr.kv.add(train, "--epochs", "epochs", "Training epochs (armdn)");
  tr.kv.add(train, "--lr", "lr", "Learning rate (armdn)");
  tr.kv.add(train, "--batch-size", "batch_size", "Series per batch (armdn)");
  tr.kv.add(train, "--val-weeks", "val_weeks",
            "Validation tail weeks per series (armdn)");
  tr.kv.add(train, "--dropout", "dropout", "Dropout probability (armdn)");
  tr.kv.add(train, "--threads", "threads", "Worker threads (armdn)");
  tr.kv.add(train, "--embed-dim", "embed_dim", "Embedding width (armdn)");
  tr.kv.add(train, "--assoc-width", "assoc_width",
            "Associative layer width (armdn)");
  tr.kv.add(train, "--hidden", "hidden", "Recurrent state width (armdn)");
  tr.kv.add(train, "--mixtures", "mixtures", "Mixture components (armdn)");
  tr.kv.add(train, "--committees", "committee_size",
            "Committee members (cubist)");
  tr.kv.add(train, "--neighbors", "neighbors",
            "Nearest neighbors blended into predictions (cubist)");

  ForecastOpts fc;
  CLI::App* forecast = app.add_subcommand(
      "forecast", "Forecast the weeks after --as-of from a checkpoint");
  add_out_dir(forecast, fc.out_dir);
  forecast->add_option("--data", fc.data_path, "Dataset CSV")->required();
  add_aggregate_flag(forecast, fc.aggregate);
  forecast->add_option("--checkpoint", fc.checkpoint, "Model checkpoint")
      ->required();
  forecast->add_option("--as-of", fc.as_of, "Last observed week")->required();
  forecast->add_option("--horizon", fc.horizon, "Weeks to forecast");

  EvaluateOpts ev;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Backtest a checkpoint on expanding horizons");
  add_out_dir(evaluate, ev.out_dir);
  evaluate->add_option("--data", ev.data_path, "Dataset CSV")->required();
  add_aggregate_flag(evaluate, ev.aggregate);
  evaluate->add_option("--checkpoint", ev.checkpoint, "Model checkpoint");
  evaluate->add_option("--variant", ev.variant,
                       "persistence scores the last-value baseline instead of "
                       "a checkpoint");
  evaluate->add_option("--train-end", ev.train_end,
                       "Last training week; scoring starts after it")
      ->required();
  evaluate->add_option("--horizon", ev.horizon, "Weeks to score");
  evaluate->add_option("--hit-cutoff", ev.hit_cutoff,
                       "Per-SKU error ceiling (percent) counted as a hit");
  evaluate->add_option("--fc-split", ev.fc_split_data,
                       "Regional dataset CSV; also emits per-region forecast "
                       "shares");
  evaluate->add_option("--teacher-nll-weeks", ev.teacher_nll_weeks,
                       "Also report the teacher-forced likelihood over this "
                       "many trailing training weeks");
  evaluate->add_option("--threads", ev.threads, "Worker threads");

  AblateOpts ab;
  CLI::App* ablate = app.add_subcommand(
      "ablate", "Train and score model variants on one split");
  add_out_dir(ablate, ab.out_dir);
  ablate->add_option("--data", ab.data_path, "Dataset CSV")->required();
  add_aggregate_flag(ablate, ab.aggregate);
  ablate->add_option("--train-end", ab.train_end, "Last training week")
      ->required();
  ablate->add_option("--horizon", ab.horizon, "Weeks to score");
  ablate->add_option("--variants", ab.variants,
                     "Comma-separated variant names (default: all)");
  ablate->add_option("--train-config", ab.train_config_file,
                     "Network training config file");
  ablate->add_option("--cubist-config", ab.cubist_config_file,
                     "Rule-committee config file");
  ab.train_kv.add(ablate, "--epochs", "epochs", "Training epochs");
  ab.train_kv.add(ablate, "--lr", "lr", "Learning rate");
  ab.train_kv.add(ablate, "--val-weeks", "val_weeks",
                  "Validation tail weeks per series");
  ab.train_kv.add(ablate, "--batch-size", "batch_size", "Series per batch");
  ab.train_kv.add(ablate, "--threads", "threads", "Worker threads");
  ab.train_kv.add(ablate, "--seed", "seed", "Training seed");
  ab.train_kv.add(ablate, "--mixtures", "mixtures", "Mixture components");
  ab.cubist_kv.add(ablate, "--committees", "committee_size",
                   "Committee members");
  ab.cubist_kv.add(ablate, "--neighbors", "neighbors",
                   "Nearest neighbors blended into predictions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(DC_ERR_INVALID_ARGUMENT);
  }

  if (generate->parsed()) return run_generate(gen);
  if (train->parsed()) return run_train(tr);
  if (forecast->parsed()) return run_forecast(fc);
  if (evaluate->parsed()) return run_evaluate(ev);
  if (ablate->parsed()) return run_ablate(ab);
  return static_cast<int>(DC_ERR_INVALID_ARGUMENT);
}
