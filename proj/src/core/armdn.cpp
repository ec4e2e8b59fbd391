#include "core/armdn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace demandcast {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

// out = W x + b, W row-major [rows x cols]
void matvec(const double* W, const double* x, const double* b, int rows,
            int cols, double* out) {
  for (int r = 0; r < rows; ++r) {
    const double* w = W + static_cast<size_t>(r) * cols;
    double acc = b ? b[r] : 0.0;
    for (int c = 0; c < cols; ++c) acc += w[c] * x[c];
    out[r] = acc;
  }
}

// dx += W^T dy
void matvec_t_acc(const double* W, const double* dy, int rows, int cols,
                  double* dx) {
  for (int r = 0; r < rows; ++r) {
    const double* w = W + static_cast<size_t>(r) * cols;
    const double d = dy[r];
    if (d == 0.0) continue;
    for (int c = 0; c < cols; ++c) dx[c] += w[c] * d;
  }
}

// dW += dy x^T, db += dy
void outer_acc(const double* dy, const double* x, int rows, int cols,
               double* dW, double* db) {
  for (int r = 0; r < rows; ++r) {
    const double d = dy[r];
    db[r] += d;
    if (d == 0.0) continue;
    double* w = dW + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) w[c] += d * x[c];
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
double elu_grad(double pre) { return pre > 0.0 ? 1.0 : std::exp(pre); }

double logsumexp(const double* v, int n) {
  double m = v[0];
  for (int i = 1; i < n; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;  // all -inf (or a nan propagates)
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

}  // namespace

// ---------------------------------------------------------------------------

void ArmdnConfig::validate() const {
  if (embed_dim < 1 || assoc_width < 1 || hidden < 1 || mixtures < 1)
    fail(ErrorCode::invalid_argument,
         "embed_dim, assoc_width, hidden and mixtures must be >= 1");
  if (vocab_product < 1 || vocab_event < 1 || vocab_tier < 1)
    fail(ErrorCode::invalid_argument,
         "vocabulary sizes not set (call fill_vocab_sizes)");
  if (!use_lstm && hidden != assoc_width)
    fail(ErrorCode::invalid_argument,
         "without the recurrent cell the head reads the associative "
         "activation, so hidden must equal assoc_width");
}

void ArmdnConfig::fill_vocab_sizes(const FeatureSchema& schema) {
  vocab_product = schema.product_id.size();
  vocab_event = schema.event_type.size();
  vocab_tier = schema.product_tier.size();
}

ParamLayout layout_of(const ArmdnConfig& cfg) {
  cfg.validate();
  const size_t E = cfg.embed_dim, A = cfg.assoc_width, H = cfg.hidden;
  const size_t K = cfg.mixtures, F = cfg.input_width(), Hh = cfg.head_width();
  ParamLayout L{};
  size_t off = 0;
  L.emb[0] = off; off += static_cast<size_t>(cfg.vocab_product) * E;
  L.emb[1] = off; off += static_cast<size_t>(cfg.vocab_event) * E;
  L.emb[2] = off; off += static_cast<size_t>(cfg.vocab_tier) * E;
  L.w_fc = off; off += A * F;
  L.b_fc = off; off += A;
  L.w_lstm = off; off += cfg.use_lstm ? 4 * H * (1 + A + H) : 0;
  L.b_lstm = off; off += cfg.use_lstm ? 4 * H : 0;
  L.w_p = off; off += K * Hh;
  L.b_p = off; off += K;
  L.w_mu = off; off += K * Hh;
  L.b_mu = off; off += K;
  L.w_s = off; off += K * Hh;
  L.b_s = off; off += K;
  L.total = off;
  return L;
}

ArmdnModel ArmdnModel::init(const ArmdnConfig& cfg, Rng& rng) {
  const ParamLayout L = layout_of(cfg);
  ArmdnModel m;
  m.cfg = cfg;
  m.params.assign(L.total, 0.0);

  auto fill_uniform = [&](size_t off, size_t n, double r) {
    for (size_t i = 0; i < n; ++i) m.params[off + i] = rng.uniform(-r, r);
  };
  auto glorot = [&](size_t off, int rows, int cols) {
    fill_uniform(off, static_cast<size_t>(rows) * cols,
                 std::sqrt(6.0 / (rows + cols)));
  };

  const int E = cfg.embed_dim, A = cfg.assoc_width, H = cfg.hidden;
  const int K = cfg.mixtures, F = cfg.input_width(), Hh = cfg.head_width();
  fill_uniform(L.emb[0], static_cast<size_t>(cfg.vocab_product) * E, 0.05);
  fill_uniform(L.emb[1], static_cast<size_t>(cfg.vocab_event) * E, 0.05);
  fill_uniform(L.emb[2], static_cast<size_t>(cfg.vocab_tier) * E, 0.05);
  glorot(L.w_fc, A, F);
  if (cfg.use_lstm) {
    glorot(L.w_lstm, 4 * H, 1 + A + H);
    for (int i = 0; i < H; ++i) m.params[L.b_lstm + H + i] = 1.0;  // forget
  }
  glorot(L.w_p, K, Hh);
  glorot(L.w_mu, K, Hh);
  glorot(L.w_s, K, Hh);
  for (int k = 0; k < K; ++k)
    m.params[L.b_mu + k] = K == 1 ? 0.0 : -1.0 + 2.0 * k / (K - 1.0);
  return m;
}

std::string ArmdnModel::to_json() const {
  ordered_json j;
  j["type"] = "armdn";
  j["version"] = 1;
  ordered_json c;
  c["embed_dim"] = cfg.embed_dim;
  c["assoc_width"] = cfg.assoc_width;
  c["hidden"] = cfg.hidden;
  c["mixtures"] = cfg.mixtures;
  c["use_elu"] = cfg.use_elu;
  c["use_lstm"] = cfg.use_lstm;
  c["vocab_product"] = cfg.vocab_product;
  c["vocab_event"] = cfg.vocab_event;
  c["vocab_tier"] = cfg.vocab_tier;
  j["config"] = std::move(c);
  std::string blob;
  blob.reserve(params.size() * 12);
  for (size_t i = 0; i < params.size(); ++i) {
    if (i) blob.push_back(' ');
    blob += format_double(params[i]);
  }
  j["params"] = std::move(blob);
  return j.dump(1);
}

ArmdnModel ArmdnModel::from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("model json: ") + e.what());
  }
  if (!j.contains("type") || j["type"] != "armdn")
    fail(ErrorCode::schema_mismatch, "not a mixture-density model file");
  if (j.at("version").get<int>() != 1)
    fail(ErrorCode::schema_mismatch, "unsupported model version");
  ArmdnModel m;
  const auto& c = j.at("config");
  m.cfg.embed_dim = c.at("embed_dim").get<int>();
  m.cfg.assoc_width = c.at("assoc_width").get<int>();
  m.cfg.hidden = c.at("hidden").get<int>();
  m.cfg.mixtures = c.at("mixtures").get<int>();
  m.cfg.use_elu = c.at("use_elu").get<bool>();
  m.cfg.use_lstm = c.at("use_lstm").get<bool>();
  m.cfg.vocab_product = c.at("vocab_product").get<int>();
  m.cfg.vocab_event = c.at("vocab_event").get<int>();
  m.cfg.vocab_tier = c.at("vocab_tier").get<int>();
  const ParamLayout L = layout_of(m.cfg);
  const std::string blob = j.at("params").get<std::string>();
  m.params.reserve(L.total);
  const char* p = blob.data();
  const char* end = p + blob.size();
  while (p < end) {
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc())
      fail(ErrorCode::parse, "model parameter blob is corrupt");
    m.params.push_back(v);
    p = next;
    if (p < end && *p == ' ') ++p;
  }
  if (m.params.size() != L.total)
    fail(ErrorCode::schema_mismatch,
         "model has " + std::to_string(m.params.size()) + " parameters, " +
             "layout wants " + std::to_string(L.total));
  return m;
}

// ---------------------------------------------------------------------------

double MixtureParams::mean() const {
  double m = 0.0;
  for (size_t k = 0; k < p.size(); ++k) m += p[k] * mu[k];
  return m;
}

double MixtureParams::log_density(double y) const {
  std::vector<double> terms(p.size());
  for (size_t k = 0; k < p.size(); ++k) {
    const double z = (y - mu[k]) / sigma[k];
    terms[k] = (p[k] > 0.0 ? std::log(p[k])
                           : -std::numeric_limits<double>::infinity()) -
               0.5 * kLog2Pi - std::log(sigma[k]) - 0.5 * z * z;
  }
  return logsumexp(terms.data(), static_cast<int>(terms.size()));
}

// ---------------------------------------------------------------------------
// Shared forward machinery. The cache holds everything the backward pass
// needs, laid out per step.

namespace {

struct ForwardCache {
  int T = 0;
  std::vector<double> x;        // T x F
  std::vector<double> a;        // T x A   pre-activation
  std::vector<double> ffd;      // T x A   activation after dropout
  std::vector<double> dscale;   // T x A   dropout keep multiplier (1/keep or 0)
  std::vector<double> gi, gf, gg, go;  // T x H gate activations
  std::vector<double> c, tanh_c;       // T x H
  std::vector<double> h;        // T x Hh
  std::vector<double> log_p;    // T x K
  std::vector<double> p;        // T x K
  std::vector<double> mu;       // T x K
  std::vector<double> sigma;    // T x K
  std::vector<uint8_t> clamped; // T x K
  std::vector<double> ll;       // T      per-step log-likelihood
  std::vector<double> y_prev;   // T      autoregressive input used
};

void check_week(const ArmdnConfig& cfg, const EncodedWeek& w) {
  if (w.category[0] < 0 || w.category[0] >= cfg.vocab_product ||
      w.category[1] < 0 || w.category[1] >= cfg.vocab_event ||
      w.category[2] < 0 || w.category[2] >= cfg.vocab_tier)
    fail(ErrorCode::schema_mismatch,
         "categorical index outside the model's embedding tables (series "
         "encoded with a different schema?)");
}

void assemble_input(const ArmdnConfig& cfg, const double* params,
                    const ParamLayout& L, const EncodedWeek& w, double* x) {
  const int E = cfg.embed_dim;
  check_week(cfg, w);
  for (int j = 0; j < kNumCategorical; ++j) {
    const double* row =
        params + L.emb[j] + static_cast<size_t>(w.category[j]) * E;
    std::copy(row, row + E, x + j * E);
  }
  double* n = x + 3 * E;
  std::copy(w.numeric.begin(), w.numeric.end(), n);
  std::copy(w.binary.begin(), w.binary.end(), n + kNumNumeric);
}

void head_forward(const ArmdnConfig& cfg, const double* params,
                  const ParamLayout& L, const double* h, double* log_p,
                  double* p, double* mu, double* sigma, uint8_t* clamped) {
  const int K = cfg.mixtures, Hh = cfg.head_width();
  std::vector<double> logits(K), s(K);
  matvec(params + L.w_p, h, params + L.b_p, K, Hh, logits.data());
  matvec(params + L.w_mu, h, params + L.b_mu, K, Hh, mu);
  matvec(params + L.w_s, h, params + L.b_s, K, Hh, s.data());
  const double lse = logsumexp(logits.data(), K);
  for (int k = 0; k < K; ++k) {
    log_p[k] = logits[k] - lse;
    p[k] = std::exp(log_p[k]);
    const double sg = std::exp(s[k]);
    if (sg < kSigmaFloor) {
      sigma[k] = kSigmaFloor;
      clamped[k] = 1;
    } else if (sg > kSigmaCeil) {
      sigma[k] = kSigmaCeil;
      clamped[k] = 1;
    } else {
      sigma[k] = sg;
      clamped[k] = 0;
    }
  }
}

double step_loglik(const double* log_p, const double* mu, const double* sigma,
                   int K, double y, std::vector<double>& scratch) {
  scratch.resize(K);
  for (int k = 0; k < K; ++k) {
    const double z = (y - mu[k]) / sigma[k];
    scratch[k] = log_p[k] - 0.5 * kLog2Pi - std::log(sigma[k]) - 0.5 * z * z;
  }
  return logsumexp(scratch.data(), K);
}

// Runs the network through weeks [0, t_end) with teacher forcing, filling
// the cache. Dropout masks are drawn for every step (whether or not the
// step carries loss) so the draw sequence is independent of masking.
void forward_pass(const ArmdnModel& m, const EncodedSeries& s, size_t t_end,
                  const DropoutPlan& plan, ForwardCache& cache) {
  const ArmdnConfig& cfg = m.cfg;
  const ParamLayout L = layout_of(cfg);
  const int A = cfg.assoc_width, H = cfg.hidden, K = cfg.mixtures;
  const int F = cfg.input_width(), Hh = cfg.head_width();
  const int T = static_cast<int>(t_end);
  const double* P = m.params.data();

  cache.T = T;
  cache.x.assign(static_cast<size_t>(T) * F, 0.0);
  cache.a.assign(static_cast<size_t>(T) * A, 0.0);
  cache.ffd.assign(static_cast<size_t>(T) * A, 0.0);
  cache.dscale.assign(static_cast<size_t>(T) * A, 1.0);
  if (cfg.use_lstm) {
    cache.gi.assign(static_cast<size_t>(T) * H, 0.0);
    cache.gf.assign(static_cast<size_t>(T) * H, 0.0);
    cache.gg.assign(static_cast<size_t>(T) * H, 0.0);
    cache.go.assign(static_cast<size_t>(T) * H, 0.0);
    cache.c.assign(static_cast<size_t>(T) * H, 0.0);
    cache.tanh_c.assign(static_cast<size_t>(T) * H, 0.0);
  }
  cache.h.assign(static_cast<size_t>(T) * Hh, 0.0);
  cache.log_p.assign(static_cast<size_t>(T) * K, 0.0);
  cache.p.assign(static_cast<size_t>(T) * K, 0.0);
  cache.mu.assign(static_cast<size_t>(T) * K, 0.0);
  cache.sigma.assign(static_cast<size_t>(T) * K, 0.0);
  cache.clamped.assign(static_cast<size_t>(T) * K, 0);
  cache.ll.assign(T, 0.0);
  cache.y_prev.assign(T, 0.0);

  Rng drop_rng(0);
  const bool dropout = plan.rate > 0.0 && plan.base != nullptr;
  if (dropout) drop_rng = plan.base->fork("dropout", plan.series_key);
  const double keep = 1.0 - plan.rate;

  std::vector<double> z(1 + A + H), pre(4 * H), scratch;
  std::vector<double> h_prev(Hh, 0.0), c_prev(H, 0.0);

  for (int t = 0; t < T; ++t) {
    double* x = cache.x.data() + static_cast<size_t>(t) * F;
    double* a = cache.a.data() + static_cast<size_t>(t) * A;
    double* ffd = cache.ffd.data() + static_cast<size_t>(t) * A;
    double* dscale = cache.dscale.data() + static_cast<size_t>(t) * A;
    double* h = cache.h.data() + static_cast<size_t>(t) * Hh;

    assemble_input(cfg, P, L, s.weeks[t], x);
    matvec(P + L.w_fc, x, P + L.b_fc, A, F, a);
    for (int i = 0; i < A; ++i) ffd[i] = cfg.use_elu ? elu(a[i]) : a[i];
    if (dropout) {
      for (int i = 0; i < A; ++i) {
        const bool keep_unit = drop_rng.uniform01() >= plan.rate;
        dscale[i] = keep_unit ? 1.0 / keep : 0.0;
        ffd[i] *= dscale[i];
      }
    }

    const double y_prev = t == 0 ? 0.0 : s.y[t - 1];
    cache.y_prev[t] = y_prev;

    if (cfg.use_lstm) {
      double* gi = cache.gi.data() + static_cast<size_t>(t) * H;
      double* gf = cache.gf.data() + static_cast<size_t>(t) * H;
      double* gg = cache.gg.data() + static_cast<size_t>(t) * H;
      double* go = cache.go.data() + static_cast<size_t>(t) * H;
      double* c = cache.c.data() + static_cast<size_t>(t) * H;
      double* tc = cache.tanh_c.data() + static_cast<size_t>(t) * H;

      z[0] = y_prev;
      std::copy(ffd, ffd + A, z.begin() + 1);
      std::copy(h_prev.begin(), h_prev.end(), z.begin() + 1 + A);
      matvec(P + L.w_lstm, z.data(), P + L.b_lstm, 4 * H, 1 + A + H,
             pre.data());
      for (int i = 0; i < H; ++i) {
        gi[i] = sigmoid(pre[i]);
        gf[i] = sigmoid(pre[H + i]);
        gg[i] = std::tanh(pre[2 * H + i]);
        go[i] = sigmoid(pre[3 * H + i]);
        c[i] = gf[i] * c_prev[i] + gi[i] * gg[i];
        tc[i] = std::tanh(c[i]);
        h[i] = go[i] * tc[i];
      }
      std::copy(c, c + H, c_prev.begin());
    } else {
      std::copy(ffd, ffd + A, h);
    }
    std::copy(h, h + Hh, h_prev.begin());

    head_forward(cfg, P, L, h,
                 cache.log_p.data() + static_cast<size_t>(t) * K,
                 cache.p.data() + static_cast<size_t>(t) * K,
                 cache.mu.data() + static_cast<size_t>(t) * K,
                 cache.sigma.data() + static_cast<size_t>(t) * K,
                 cache.clamped.data() + static_cast<size_t>(t) * K);
    cache.ll[t] = step_loglik(
        cache.log_p.data() + static_cast<size_t>(t) * K,
        cache.mu.data() + static_cast<size_t>(t) * K,
        cache.sigma.data() + static_cast<size_t>(t) * K, K, s.y[t], scratch);
  }
}

bool cell_counts(size_t t, size_t loss_begin, size_t loss_end,
                 const std::vector<uint8_t>* mask) {
  if (t < loss_begin || t >= loss_end) return false;
  return mask == nullptr || (*mask)[t] != 0;
}

void validate_loss_args(const EncodedSeries& s, size_t loss_end,
                        const std::vector<uint8_t>* mask) {
  if (loss_end > s.weeks.size() || s.y.size() != s.weeks.size())
    fail(ErrorCode::invalid_argument, "loss range outside encoded series");
  if (mask && mask->size() != s.weeks.size())
    fail(ErrorCode::invalid_argument, "mask length mismatch");
}

}  // namespace

LossStats armdn_nll(const ArmdnModel& m, const EncodedSeries& s,
                    size_t loss_begin, size_t loss_end,
                    const std::vector<uint8_t>* mask) {
  validate_loss_args(s, loss_end, mask);
  LossStats stats;
  if (loss_begin >= loss_end) return stats;
  ForwardCache cache;
  forward_pass(m, s, loss_end, DropoutPlan{}, cache);
  for (size_t t = loss_begin; t < loss_end; ++t) {
    if (!cell_counts(t, loss_begin, loss_end, mask)) continue;
    stats.nll_sum -= cache.ll[t];
    ++stats.cells;
  }
  return stats;
}

LossStats armdn_backward(const ArmdnModel& m, const EncodedSeries& s,
                         size_t loss_begin, size_t loss_end,
                         const std::vector<uint8_t>* mask,
                         const DropoutPlan& plan, std::vector<double>& grad) {
  validate_loss_args(s, loss_end, mask);
  const ArmdnConfig& cfg = m.cfg;
  const ParamLayout L = layout_of(cfg);
  if (grad.size() != L.total)
    fail(ErrorCode::invalid_argument, "gradient buffer has wrong size");
  LossStats stats;
  if (loss_begin >= loss_end) return stats;

  ForwardCache cache;
  forward_pass(m, s, loss_end, plan, cache);

  const int A = cfg.assoc_width, H = cfg.hidden, K = cfg.mixtures;
  const int F = cfg.input_width(), Hh = cfg.head_width(), E = cfg.embed_dim;
  const int T = cache.T;
  const double* P = m.params.data();
  double* G = grad.data();

  std::vector<double> dh(Hh, 0.0), dc(H, 0.0);
  std::vector<double> dlogit(K), dmu(K), ds(K);
  std::vector<double> dffd(A), da(A), dx(F);
  std::vector<double> dpre(4 * H), dz(1 + A + H), z(1 + A + H);

  for (int t = T - 1; t >= 0; --t) {
    const double* h = cache.h.data() + static_cast<size_t>(t) * Hh;

    if (cell_counts(t, loss_begin, loss_end, mask)) {
      const double* log_p = cache.log_p.data() + static_cast<size_t>(t) * K;
      const double* p = cache.p.data() + static_cast<size_t>(t) * K;
      const double* mu = cache.mu.data() + static_cast<size_t>(t) * K;
      const double* sg = cache.sigma.data() + static_cast<size_t>(t) * K;
      const uint8_t* cl = cache.clamped.data() + static_cast<size_t>(t) * K;
      const double y = s.y[t];
      const double ll = cache.ll[t];
      stats.nll_sum -= ll;
      ++stats.cells;

      for (int k = 0; k < K; ++k) {
        const double zk = (y - mu[k]) / sg[k];
        const double log_nk = -0.5 * kLog2Pi - std::log(sg[k]) - 0.5 * zk * zk;
        const double r = std::exp(log_p[k] + log_nk - ll);
        dlogit[k] = p[k] - r;
        dmu[k] = -r * zk / sg[k];
        ds[k] = cl[k] ? 0.0 : -r * (zk * zk - 1.0);
      }
      outer_acc(dlogit.data(), h, K, Hh, G + L.w_p, G + L.b_p);
      outer_acc(dmu.data(), h, K, Hh, G + L.w_mu, G + L.b_mu);
      outer_acc(ds.data(), h, K, Hh, G + L.w_s, G + L.b_s);
      matvec_t_acc(P + L.w_p, dlogit.data(), K, Hh, dh.data());
      matvec_t_acc(P + L.w_mu, dmu.data(), K, Hh, dh.data());
      matvec_t_acc(P + L.w_s, ds.data(), K, Hh, dh.data());
    }

    if (cfg.use_lstm) {
      const double* gi = cache.gi.data() + static_cast<size_t>(t) * H;
      const double* gf = cache.gf.data() + static_cast<size_t>(t) * H;
      const double* gg = cache.gg.data() + static_cast<size_t>(t) * H;
      const double* go = cache.go.data() + static_cast<size_t>(t) * H;
      const double* tc = cache.tanh_c.data() + static_cast<size_t>(t) * H;
      const double* c_prev =
          t == 0 ? nullptr : cache.c.data() + static_cast<size_t>(t - 1) * H;
      const double* h_prev =
          t == 0 ? nullptr : cache.h.data() + static_cast<size_t>(t - 1) * Hh;
      const double* ffd = cache.ffd.data() + static_cast<size_t>(t) * A;

      for (int i = 0; i < H; ++i) {
        const double dgo = dh[i] * tc[i];
        dpre[3 * H + i] = dgo * go[i] * (1.0 - go[i]);
        const double dci = dc[i] + dh[i] * go[i] * (1.0 - tc[i] * tc[i]);
        const double cp = c_prev ? c_prev[i] : 0.0;
        dpre[i] = dci * gg[i] * gi[i] * (1.0 - gi[i]);
        dpre[H + i] = dci * cp * gf[i] * (1.0 - gf[i]);
        dpre[2 * H + i] = dci * gi[i] * (1.0 - gg[i] * gg[i]);
        dc[i] = dci * gf[i];  // carries to step t-1
      }

      z[0] = cache.y_prev[t];
      std::copy(ffd, ffd + A, z.begin() + 1);
      if (h_prev)
        std::copy(h_prev, h_prev + H, z.begin() + 1 + A);
      else
        std::fill(z.begin() + 1 + A, z.end(), 0.0);
      outer_acc(dpre.data(), z.data(), 4 * H, 1 + A + H, G + L.w_lstm,
                G + L.b_lstm);
      std::fill(dz.begin(), dz.end(), 0.0);
      matvec_t_acc(P + L.w_lstm, dpre.data(), 4 * H, 1 + A + H, dz.data());
      // dz[0] is the teacher-forced input: data, no parameter below it.
      std::copy(dz.begin() + 1, dz.begin() + 1 + A, dffd.begin());
      std::copy(dz.begin() + 1 + A, dz.end(), dh.begin());
    } else {
      std::copy(dh.begin(), dh.end(), dffd.begin());
      std::fill(dh.begin(), dh.end(), 0.0);
    }

    const double* a = cache.a.data() + static_cast<size_t>(t) * A;
    const double* dsc = cache.dscale.data() + static_cast<size_t>(t) * A;
    for (int i = 0; i < A; ++i)
      da[i] = dffd[i] * dsc[i] * (cfg.use_elu ? elu_grad(a[i]) : 1.0);
    const double* x = cache.x.data() + static_cast<size_t>(t) * F;
    outer_acc(da.data(), x, A, F, G + L.w_fc, G + L.b_fc);
    std::fill(dx.begin(), dx.end(), 0.0);
    matvec_t_acc(P + L.w_fc, da.data(), A, F, dx.data());
    for (int j = 0; j < kNumCategorical; ++j) {
      const int idx = s.weeks[t].category[j];
      double* row = G + L.emb[j] + static_cast<size_t>(idx) * E;
      for (int e = 0; e < E; ++e) row[e] += dx[j * E + e];
    }
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Inference paths: no dropout, no caches.

namespace {

struct StepState {
  std::vector<double> h, c;
};

MixtureParams run_step(const ArmdnModel& m, const ParamLayout& L,
                       const EncodedWeek& week, double y_prev,
                       StepState& st) {
  const ArmdnConfig& cfg = m.cfg;
  const int A = cfg.assoc_width, H = cfg.hidden, K = cfg.mixtures;
  const int F = cfg.input_width(), Hh = cfg.head_width();
  const double* P = m.params.data();

  std::vector<double> x(F), a(A);
  assemble_input(cfg, P, L, week, x.data());
  matvec(P + L.w_fc, x.data(), P + L.b_fc, A, F, a.data());
  for (int i = 0; i < A; ++i) a[i] = cfg.use_elu ? elu(a[i]) : a[i];

  std::vector<double> h_new(Hh);
  if (cfg.use_lstm) {
    std::vector<double> z(1 + A + H), pre(4 * H);
    z[0] = y_prev;
    std::copy(a.begin(), a.end(), z.begin() + 1);
    std::copy(st.h.begin(), st.h.end(), z.begin() + 1 + A);
    matvec(P + L.w_lstm, z.data(), P + L.b_lstm, 4 * H, 1 + A + H,
           pre.data());
    for (int i = 0; i < H; ++i) {
      const double gi = sigmoid(pre[i]);
      const double gf = sigmoid(pre[H + i]);
      const double gg = std::tanh(pre[2 * H + i]);
      const double go = sigmoid(pre[3 * H + i]);
      st.c[i] = gf * st.c[i] + gi * gg;
      h_new[i] = go * std::tanh(st.c[i]);
    }
  } else {
    h_new = a;
  }
  st.h = h_new;

  MixtureParams mix;
  mix.p.resize(K);
  mix.mu.resize(K);
  mix.sigma.resize(K);
  std::vector<double> log_p(K);
  std::vector<uint8_t> clamped(K);
  head_forward(cfg, P, L, h_new.data(), log_p.data(), mix.p.data(),
               mix.mu.data(), mix.sigma.data(), clamped.data());
  return mix;
}

}  // namespace

std::vector<MixtureParams> armdn_predictive(const ArmdnModel& m,
                                            const EncodedSeries& s) {
  const ParamLayout L = layout_of(m.cfg);
  StepState st{std::vector<double>(m.cfg.head_width(), 0.0),
               std::vector<double>(m.cfg.hidden, 0.0)};
  std::vector<MixtureParams> out;
  out.reserve(s.weeks.size());
  for (size_t t = 0; t < s.weeks.size(); ++t) {
    const double y_prev = t == 0 ? 0.0 : s.y[t - 1];
    out.push_back(run_step(m, L, s.weeks[t], y_prev, st));
  }
  return out;
}

std::vector<ForecastStep> armdn_forecast(const ArmdnModel& m,
                                         const SeriesInstance& s,
                                         size_t history_len, int horizon,
                                         const FeatureSchema& schema) {
  if (history_len < 1)
    fail(ErrorCode::invalid_argument,
         "forecast needs at least one week of history");
  if (horizon < 1) fail(ErrorCode::invalid_argument, "horizon must be >= 1");
  if (history_len + static_cast<size_t>(horizon) > s.length())
    fail(ErrorCode::invalid_argument,
         "series " + s.sku_id + " lacks feature rows for the horizon");

  const ParamLayout L = layout_of(m.cfg);
  const DemandTransform& tr = schema.transform_for(s.vertical_id);
  LagState lag = init_lag_state(s, schema.avg_discount_for(s.vertical_id));
  StepState st{std::vector<double>(m.cfg.head_width(), 0.0),
               std::vector<double>(m.cfg.hidden, 0.0)};

  double y_prev = 0.0;
  for (size_t t = 0; t < history_len; ++t) {
    const EncodedWeek w = encode_week(s, t, lag, schema);
    run_step(m, L, w, y_prev, st);
    y_prev = tr.apply(s.demand[t]);
    advance_lag_state(lag, s.demand[t], s.features[t]);
  }

  std::vector<ForecastStep> out;
  out.reserve(horizon);
  for (int j = 0; j < horizon; ++j) {
    const size_t t = history_len + j;
    const EncodedWeek w = encode_week(s, t, lag, schema);
    ForecastStep step;
    step.mix = run_step(m, L, w, y_prev, st);
    step.point_transformed = step.mix.mean();
    step.point_units = tr.invert(step.point_transformed);
    out.push_back(step);
    y_prev = step.point_transformed;
    advance_lag_state(lag, step.point_units, s.features[t]);
  }
  return out;
}

}  // namespace demandcast
