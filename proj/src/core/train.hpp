#pragma once

// Gradient training for the mixture-density network.
//
// Minibatch Adam on the teacher-forced negative log-likelihood. Series are
// shuffled each epoch and split into batches of up to batch_size; each batch
// gradient is the mean over its unmasked cells, clipped in global norm. The
// learning rate follows a staircase decay. Each series keeps its last
// val_weeks weeks as a validation slice (series at most twice that long
// contribute training cells only); the returned model is the epoch snapshot
// with the best validation likelihood.
//
// Work inside a batch is distributed over a fixed thread-count partition and
// merged in thread order, so a given (config, seed, threads) triple always
// produces the same parameters bit for bit.

#include <cstdint>
#include <string>
#include <vector>

#include "core/armdn.hpp"

namespace demandcast {

struct TrainConfig {
  int epochs = 60;
  double lr = 0.01;
  double lr_decay = 0.96;          // staircase factor
  int64_t lr_decay_steps = 1000;   // optimizer steps per stair
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 5.0;          // global gradient norm ceiling
  double dropout = 0.5;            // on the associative activation
  int batch_size = 512;            // series per batch
  int val_weeks = 4;               // per-series validation tail
  uint64_t seed = 0;
  int threads = 1;
  ArmdnConfig arch;                // vocab sizes are filled from the schema

  void validate() const;
  KvConfig to_kv() const;
  static TrainConfig from_kv(const KvConfig& kv);
};

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_nll = 0.0;  // mean over the epoch's batch cells
  double val_nll = 0.0;    // NaN when no series is long enough to validate
  double wall_ms = 0.0;
};

struct TrainResult {
  ArmdnModel model;
  FeatureSchema schema;
  std::vector<EpochLog> log;
  double best_val_nll = 0.0;  // NaN when validation never ran
  int best_epoch = -1;
};

// Fits the feature schema on `train`, initializes the network from the seed
// and optimizes. Throws ErrorCode::diverged after three consecutive batches
// with non-finite loss or gradient.
TrainResult train_armdn(const Dataset& train, const TrainConfig& cfg);

// Continues from an existing model on a (usually per-vertical) subset with a
// fresh optimizer. The schema must be the one the model was trained with;
// architecture fields in cfg.arch are ignored.
TrainResult finetune_armdn(const ArmdnModel& model,
                           const FeatureSchema& schema, const Dataset& subset,
                           const TrainConfig& cfg);

// Mean teacher-forced NLL per cell over weeks [loss_begin(s), len) of every
// series, where loss_begin is `tail_weeks` from the end (0 = whole series).
// Used for held-out evaluation; deterministic for a fixed thread count.
double mean_nll(const ArmdnModel& model, const FeatureSchema& schema,
                const Dataset& ds, int tail_weeks, int threads);

}  // namespace demandcast
