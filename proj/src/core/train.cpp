#include "core/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace demandcast {

void TrainConfig::validate() const {
  // Zero epochs is legal: the snapshot is then the untouched initialization.
  if (epochs < 0) fail(ErrorCode::invalid_argument, "epochs must be >= 0");
  if (!(lr > 0.0)) fail(ErrorCode::invalid_argument, "lr must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0))
    fail(ErrorCode::invalid_argument, "lr_decay must be in (0, 1]");
  if (lr_decay_steps < 1)
    fail(ErrorCode::invalid_argument, "lr_decay_steps must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    fail(ErrorCode::invalid_argument, "adam betas must be in [0, 1)");
  if (!(adam_eps > 0.0)) fail(ErrorCode::invalid_argument, "adam_eps must be > 0");
  if (!(grad_clip > 0.0))
    fail(ErrorCode::invalid_argument, "grad_clip must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0))
    fail(ErrorCode::invalid_argument, "dropout must be in [0, 1)");
  if (batch_size < 1) fail(ErrorCode::invalid_argument, "batch_size must be >= 1");
  if (val_weeks < 0) fail(ErrorCode::invalid_argument, "val_weeks must be >= 0");
  if (threads < 1) fail(ErrorCode::invalid_argument, "threads must be >= 1");
}

KvConfig TrainConfig::to_kv() const {
  KvConfig kv;
  kv.set_int("epochs", epochs);
  kv.set_double("lr", lr);
  kv.set_double("lr_decay", lr_decay);
  kv.set_int("lr_decay_steps", lr_decay_steps);
  kv.set_double("beta1", beta1);
  kv.set_double("beta2", beta2);
  kv.set_double("adam_eps", adam_eps);
  kv.set_double("grad_clip", grad_clip);
  kv.set_double("dropout", dropout);
  kv.set_int("batch_size", batch_size);
  kv.set_int("val_weeks", val_weeks);
  kv.set_int("seed", static_cast<int64_t>(seed));
  kv.set_int("threads", threads);
  kv.set_int("embed_dim", arch.embed_dim);
  kv.set_int("assoc_width", arch.assoc_width);
  kv.set_int("hidden", arch.hidden);
  kv.set_int("mixtures", arch.mixtures);
  kv.set_bool("use_elu", arch.use_elu);
  kv.set_bool("use_lstm", arch.use_lstm);
  return kv;
}

TrainConfig TrainConfig::from_kv(const KvConfig& kv) {
  TrainConfig c;
  c.epochs = static_cast<int>(kv.get_int("epochs", c.epochs));
  c.lr = kv.get_double("lr", c.lr);
  c.lr_decay = kv.get_double("lr_decay", c.lr_decay);
  c.lr_decay_steps = kv.get_int("lr_decay_steps", c.lr_decay_steps);
  c.beta1 = kv.get_double("beta1", c.beta1);
  c.beta2 = kv.get_double("beta2", c.beta2);
  c.adam_eps = kv.get_double("adam_eps", c.adam_eps);
  c.grad_clip = kv.get_double("grad_clip", c.grad_clip);
  c.dropout = kv.get_double("dropout", c.dropout);
  c.batch_size = static_cast<int>(kv.get_int("batch_size", c.batch_size));
  c.val_weeks = static_cast<int>(kv.get_int("val_weeks", c.val_weeks));
  c.seed = static_cast<uint64_t>(kv.get_int("seed", 0));
  c.threads = static_cast<int>(kv.get_int("threads", c.threads));
  c.arch.embed_dim = static_cast<int>(kv.get_int("embed_dim", c.arch.embed_dim));
  c.arch.assoc_width =
      static_cast<int>(kv.get_int("assoc_width", c.arch.assoc_width));
  c.arch.hidden = static_cast<int>(kv.get_int("hidden", c.arch.hidden));
  c.arch.mixtures = static_cast<int>(kv.get_int("mixtures", c.arch.mixtures));
  c.arch.use_elu = kv.get_bool("use_elu", c.arch.use_elu);
  c.arch.use_lstm = kv.get_bool("use_lstm", c.arch.use_lstm);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------

namespace {

struct Prepared {
  std::vector<EncodedSeries> series;
  std::vector<size_t> val_len;  // validation tail per series (0 = none)
};

Prepared prepare(const Dataset& ds, const FeatureSchema& schema,
                 const TrainConfig& cfg) {
  Prepared prep;
  prep.series.resize(ds.size());
  prep.val_len.resize(ds.size());
  parallel_for(cfg.threads, ds.size(), [&](size_t b, size_t e, int) {
    for (size_t i = b; i < e; ++i) {
      prep.series[i] = encode_series(ds.instances[i], schema);
      const size_t len = prep.series[i].weeks.size();
      // Short series train on all their weeks rather than lose half to
      // validation.
      prep.val_len[i] =
          len > 2 * static_cast<size_t>(cfg.val_weeks) ? cfg.val_weeks : 0;
    }
  });
  return prep;
}

struct Adam {
  std::vector<double> m, v;
  int64_t steps = 0;

  explicit Adam(size_t n) : m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& g,
            double lr, const TrainConfig& cfg) {
    ++steps;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(steps));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(steps));
    for (size_t i = 0; i < params.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_eps);
    }
  }
};

double validation_nll(const ArmdnModel& model, const Prepared& prep,
                      const TrainConfig& cfg, int64_t* cells_out) {
  std::vector<double> sums(cfg.threads, 0.0);
  std::vector<int64_t> cells(cfg.threads, 0);
  parallel_for(cfg.threads, prep.series.size(), [&](size_t b, size_t e, int th) {
    for (size_t i = b; i < e; ++i) {
      const size_t vs = prep.val_len[i];
      if (vs == 0) continue;
      const size_t len = prep.series[i].weeks.size();
      const LossStats st =
          armdn_nll(model, prep.series[i], len - vs, len, nullptr);
      sums[th] += st.nll_sum;
      cells[th] += st.cells;
    }
  });
  double sum = 0.0;
  int64_t n = 0;
  for (int th = 0; th < cfg.threads; ++th) {
    sum += sums[th];
    n += cells[th];
  }
  *cells_out = n;
  return n == 0 ? std::numeric_limits<double>::quiet_NaN()
                : sum / static_cast<double>(n);
}

TrainResult optimize(ArmdnModel model, const FeatureSchema& schema,
                     const Prepared& prep, const TrainConfig& cfg) {
  const size_t n_params = model.params.size();
  const size_t n_series = prep.series.size();
  Adam adam(n_params);
  const Rng run_rng(cfg.seed);

  TrainResult result;
  result.schema = schema;
  result.best_val_nll = std::numeric_limits<double>::quiet_NaN();

  std::vector<size_t> order(n_series);
  for (size_t i = 0; i < n_series; ++i) order[i] = i;
  std::vector<std::vector<double>> thread_grad(
      cfg.threads, std::vector<double>(n_params, 0.0));
  std::vector<double> grad(n_params, 0.0);
  std::vector<double> best_params;

  int64_t batch_index = 0;
  int consecutive_bad = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double t0 = now_ms();
    Rng order_rng = run_rng.fork("order", static_cast<uint64_t>(epoch));
    order_rng.shuffle(order);

    double epoch_nll = 0.0;
    int64_t epoch_cells = 0;
    double lr_used = cfg.lr;

    for (size_t batch_start = 0; batch_start < n_series;
         batch_start += cfg.batch_size) {
      const size_t batch_end =
          std::min(n_series, batch_start + static_cast<size_t>(cfg.batch_size));
      const size_t batch_n = batch_end - batch_start;
      const Rng batch_rng =
          run_rng.fork("batch", static_cast<uint64_t>(batch_index));
      ++batch_index;

      std::vector<double> sums(cfg.threads, 0.0);
      std::vector<int64_t> cells(cfg.threads, 0);
      // Buffers are zeroed here, not in the workers: a batch smaller than the
      // thread count leaves some workers unlaunched.
      for (auto& tg : thread_grad) std::fill(tg.begin(), tg.end(), 0.0);
      parallel_for(cfg.threads, batch_n, [&](size_t b, size_t e, int th) {
        for (size_t k = b; k < e; ++k) {
          const size_t idx = order[batch_start + k];
          const EncodedSeries& s = prep.series[idx];
          const size_t len = s.weeks.size();
          const size_t train_end = len - prep.val_len[idx];
          DropoutPlan plan;
          plan.rate = cfg.dropout;
          plan.base = &batch_rng;
          plan.series_key = static_cast<uint64_t>(idx);
          const LossStats st = armdn_backward(model, s, 0, train_end, nullptr,
                                              plan, thread_grad[th]);
          sums[th] += st.nll_sum;
          cells[th] += st.cells;
        }
      });

      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_nll = 0.0;
      int64_t batch_cells = 0;
      for (int th = 0; th < cfg.threads; ++th) {
        const std::vector<double>& tg = thread_grad[th];
        for (size_t i = 0; i < n_params; ++i) grad[i] += tg[i];
        batch_nll += sums[th];
        batch_cells += cells[th];
      }
      if (batch_cells == 0) continue;
      const double inv = 1.0 / static_cast<double>(batch_cells);
      for (double& g : grad) g *= inv;

      double norm_sq = 0.0;
      for (double g : grad) norm_sq += g * g;
      if (!std::isfinite(batch_nll) || !std::isfinite(norm_sq)) {
        // A pathological batch is skipped; persistent blow-ups abort.
        if (++consecutive_bad >= 3)
          fail(ErrorCode::diverged,
               "training diverged: 3 consecutive batches with non-finite "
               "loss or gradient (epoch " + std::to_string(epoch) + ")");
        continue;
      }
      consecutive_bad = 0;
      if (norm_sq > cfg.grad_clip * cfg.grad_clip) {
        const double scale = cfg.grad_clip / std::sqrt(norm_sq);
        for (double& g : grad) g *= scale;
      }

      lr_used = cfg.lr * std::pow(cfg.lr_decay,
                                  static_cast<double>(adam.steps /
                                                      cfg.lr_decay_steps));
      adam.step(model.params, grad, lr_used, cfg);
      epoch_nll += batch_nll;
      epoch_cells += batch_cells;
    }

    int64_t val_cells = 0;
    const double val = validation_nll(model, prep, cfg, &val_cells);
    EpochLog log;
    log.epoch = epoch;
    log.lr = lr_used;
    log.train_nll = epoch_cells == 0
                        ? std::numeric_limits<double>::quiet_NaN()
                        : epoch_nll / static_cast<double>(epoch_cells);
    log.val_nll = val;
    log.wall_ms = now_ms() - t0;
    result.log.push_back(log);

    if (val_cells > 0 &&
        (!(result.best_epoch >= 0) || val < result.best_val_nll)) {
      result.best_val_nll = val;
      result.best_epoch = epoch;
      best_params = model.params;
    }
  }

  if (result.best_epoch >= 0) model.params = std::move(best_params);
  result.model = std::move(model);
  return result;
}

}  // namespace

TrainResult train_armdn(const Dataset& train, const TrainConfig& cfg) {
  cfg.validate();
  train.validate();
  const FeatureSchema schema = fit_schema(train);
  ArmdnConfig arch = cfg.arch;
  arch.fill_vocab_sizes(schema);
  arch.validate();
  Rng init_rng = Rng(cfg.seed).fork("init");
  ArmdnModel model = ArmdnModel::init(arch, init_rng);
  const Prepared prep = prepare(train, schema, cfg);
  return optimize(std::move(model), schema, prep, cfg);
}

TrainResult finetune_armdn(const ArmdnModel& model,
                           const FeatureSchema& schema, const Dataset& subset,
                           const TrainConfig& cfg) {
  cfg.validate();
  subset.validate();
  if (subset.empty())
    fail(ErrorCode::data, "cannot fine-tune on an empty dataset");
  ArmdnConfig expected = model.cfg;
  expected.fill_vocab_sizes(schema);
  if (expected.vocab_product != model.cfg.vocab_product ||
      expected.vocab_event != model.cfg.vocab_event ||
      expected.vocab_tier != model.cfg.vocab_tier)
    fail(ErrorCode::schema_mismatch,
         "schema vocabularies do not match the model's embedding tables");
  const Prepared prep = prepare(subset, schema, cfg);
  return optimize(model, schema, prep, cfg);
}

double mean_nll(const ArmdnModel& model, const FeatureSchema& schema,
                const Dataset& ds, int tail_weeks, int threads) {
  if (threads < 1) fail(ErrorCode::invalid_argument, "threads must be >= 1");
  if (tail_weeks < 0)
    fail(ErrorCode::invalid_argument, "tail_weeks must be >= 0");
  ds.validate();
  std::vector<double> sums(threads, 0.0);
  std::vector<int64_t> cells(threads, 0);
  parallel_for(threads, ds.size(), [&](size_t b, size_t e, int th) {
    for (size_t i = b; i < e; ++i) {
      const EncodedSeries s = encode_series(ds.instances[i], schema);
      const size_t len = s.weeks.size();
      const size_t begin =
          tail_weeks == 0 || static_cast<size_t>(tail_weeks) >= len
              ? 0
              : len - tail_weeks;
      const LossStats st = armdn_nll(model, s, begin, len, nullptr);
      sums[th] += st.nll_sum;
      cells[th] += st.cells;
    }
  });
  double sum = 0.0;
  int64_t n = 0;
  for (int th = 0; th < threads; ++th) {
    sum += sums[th];
    n += cells[th];
  }
  if (n == 0) fail(ErrorCode::data, "no cells to evaluate");
  return sum / static_cast<double>(n);
}

}  // namespace demandcast
