#pragma once

// Autoregressive mixture-density network over weekly series.
//
// Per week: the three categorical ids pass through embedding tables, are
// concatenated with the numeric and binary features and fed to a fully
// connected associative layer (ELU). The activation, concatenated with the
// previous week's (transformed) demand, drives an LSTM cell whose hidden
// state parameterizes a K-component Gaussian mixture over this week's
// demand: softmax mixing weights, linear means, and exponential scales
// clamped to [1e-5, 1e10].
//
// Training uses teacher forcing (the previous actual demand is the
// autoregressive input); forecasting feeds back the predicted mixture mean.
// Forward, backward (through time) and the loss are hand-written; gradients
// are exact up to the scale clamp, whose saturation zeroes the local
// derivative.

#include <cstdint>
#include <string>
#include <vector>

#include "core/features.hpp"

namespace demandcast {

constexpr double kSigmaFloor = 1e-5;
constexpr double kSigmaCeil = 1e10;

struct ArmdnConfig {
  int embed_dim = 30;
  int assoc_width = 50;
  int hidden = 50;
  int mixtures = 10;
  bool use_elu = true;   // off: associative layer stays linear
  bool use_lstm = true;  // off: the associative activation is the state
  int vocab_product = 0;  // vocabulary sizes including the reserved OOV slot
  int vocab_event = 0;
  int vocab_tier = 0;

  // Width of the per-week input to the associative layer.
  int input_width() const {
    return 3 * embed_dim + kNumNumeric + kNumBinary;
  }
  // Width of the state the mixture head reads.
  int head_width() const { return use_lstm ? hidden : assoc_width; }

  void validate() const;
  void fill_vocab_sizes(const FeatureSchema& schema);
};

// Offsets into the flat parameter vector. Gate order inside the LSTM weight
// block is input, forget, cell, output.
struct ParamLayout {
  size_t emb[3];
  size_t w_fc, b_fc;
  size_t w_lstm, b_lstm;
  size_t w_p, b_p, w_mu, b_mu, w_s, b_s;
  size_t total;
};

ParamLayout layout_of(const ArmdnConfig& cfg);

struct ArmdnModel {
  ArmdnConfig cfg;
  std::vector<double> params;

  // Glorot-uniform weights, zero biases except the forget gate's (1.0) and
  // the mean biases (spread over [-1, 1] to break mixture symmetry).
  static ArmdnModel init(const ArmdnConfig& cfg, Rng& rng);

  std::string to_json() const;
  static ArmdnModel from_json(const std::string& text);
  uint64_t hash() const { return fnv1a64(to_json()); }
};

// ---------------------------------------------------------------------------

struct MixtureParams {
  std::vector<double> p;      // mixing weights, sum to 1
  std::vector<double> mu;     // component means (transformed demand scale)
  std::vector<double> sigma;  // component scales, within [1e-5, 1e10]

  double mean() const;  // mixture mean
  double log_density(double y) const;
};

// Per-step dropout masks for the associative activation. Sampling is keyed
// off a stream forked per series so results do not depend on thread count.
struct DropoutPlan {
  double rate = 0.0;
  uint64_t series_key = 0;  // fork index; unused when rate == 0
  const Rng* base = nullptr;
};

struct LossStats {
  double nll_sum = 0.0;   // sum over unmasked cells
  int64_t cells = 0;      // unmasked cell count
};

// Teacher-forced negative log-likelihood summed over weeks in
// [loss_begin, loss_end). The recurrence always starts at the series head,
// so a tail range still sees a fully warmed state. `mask` (optional,
// aligned with the series) zeroes a cell's contribution entirely; the
// recurrence still runs through masked cells.
LossStats armdn_nll(const ArmdnModel& m, const EncodedSeries& s,
                    size_t loss_begin, size_t loss_end,
                    const std::vector<uint8_t>* mask);

// Same pass plus exact backpropagation through time (masked or out-of-range
// cells contribute exactly zero gradient; state gradients still flow back
// to the series head). Gradient of the NLL sum is accumulated (+=) into
// `grad`, which must have layout_of(m.cfg).total entries. Dropout, when
// plan.rate > 0, is applied to the associative activation with inverted
// scaling.
LossStats armdn_backward(const ArmdnModel& m, const EncodedSeries& s,
                         size_t loss_begin, size_t loss_end,
                         const std::vector<uint8_t>* mask,
                         const DropoutPlan& plan, std::vector<double>& grad);

// Per-step mixtures under teacher forcing (no dropout); mixtures[t] is the
// one-step-ahead predictive distribution for week t.
std::vector<MixtureParams> armdn_predictive(const ArmdnModel& m,
                                            const EncodedSeries& s);

struct ForecastStep {
  MixtureParams mix;
  double point_transformed = 0.0;  // mixture mean on the model scale
  double point_units = 0.0;        // inverse-transformed, clamped at 0
};

// Multi-step forecast: warm up on the first `history_len` weeks with actual
// demand, then roll `horizon` steps feeding back the predicted mean. The
// series must carry feature rows for the full history + horizon range;
// demand beyond the history is ignored.
std::vector<ForecastStep> armdn_forecast(const ArmdnModel& m,
                                         const SeriesInstance& s,
                                         size_t history_len, int horizon,
                                         const FeatureSchema& schema);

}  // namespace demandcast
