#pragma once

// Single-file model artifact: the fitted feature schema plus either the
// network parameters or the rule committee, tagged with the training seed.
// Serialization is deterministic, so equal checkpoints hash equal and a
// rerun of the same training run reproduces the file byte for byte.

#include <cstdint>
#include <string>

#include "core/armdn.hpp"
#include "core/cubist.hpp"

namespace demandcast {

struct Checkpoint {
  std::string kind;  // "armdn" | "cubist"
  uint64_t seed = 0;
  FeatureSchema schema;
  ArmdnModel armdn;    // populated when kind == "armdn"
  CubistModel cubist;  // populated when kind == "cubist"

  std::string to_json() const;
  static Checkpoint from_json(const std::string& text);
  uint64_t hash() const { return fnv1a64(to_json()); }
};

Checkpoint make_armdn_checkpoint(ArmdnModel model, FeatureSchema schema,
                                 uint64_t seed);
Checkpoint make_cubist_checkpoint(CubistModel model, FeatureSchema schema,
                                  uint64_t seed);

void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace demandcast
