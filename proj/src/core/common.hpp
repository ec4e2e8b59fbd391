#pragma once

// Shared plumbing for the demandcast core: typed errors, a deterministic RNG
// (portable across platforms, unlike std::*_distribution), hashing, quantiles,
// round-trip-exact number formatting and the flat key=value config format.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace demandcast {

enum class ErrorCode {
  invalid_argument,
  io,
  parse,
  data,
  diverged,
  schema_mismatch,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

// ---------------------------------------------------------------------------
// Hashing (FNV-1a, 64-bit). Used for config/artifact fingerprints, not crypto.

inline uint64_t fnv1a64(const void* data, size_t n,
                        uint64_t h = 14695981039346656037ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline uint64_t fnv1a64(std::string_view s,
                        uint64_t h = 14695981039346656037ull) {
  return fnv1a64(s.data(), s.size(), h);
}

std::string hash_hex(uint64_t h);
uint64_t hash_file(const std::string& path);

// ---------------------------------------------------------------------------
// Deterministic RNG. mt19937_64 has a standard-specified sequence; the
// distributions below are hand-rolled because std::uniform_real_distribution
// and friends are implementation-defined and would break cross-toolchain
// reproducibility of generated datasets.

class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();
  // [0, 1)
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // [0, n), unbiased
  uint64_t uniform_int(uint64_t n);
  // standard normal via Box-Muller, spare value cached
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Independent child stream derived from the seed (not the engine state), so
  // fork order does not interact with draw order.
  Rng fork(std::string_view stream) const;
  Rng fork(std::string_view stream, uint64_t index) const;

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Quantile with linear interpolation between order statistics (the common
// "type 7" rule). `sorted` must be ascending and non-empty.
double quantile_sorted(const std::vector<double>& sorted, double q);

// Shortest decimal string that round-trips to the exact same double.
std::string format_double(double v);

// Splits `total` units across weights by the largest-remainder rule: floor
// allocations first, remaining units to the largest fractional parts (ties to
// the lowest index). Allocations sum to `total` exactly.
std::vector<int64_t> apportion_largest_remainder(
    int64_t total, const std::vector<double>& weights);

// ---------------------------------------------------------------------------
// Flat key=value config text: one `key = value` per line, '#' comments,
// blank lines ignored. Typed getters record which keys were consumed so a
// consumer can reject typos with fail_on_unconsumed().

class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig parse(const std::string& text);
  static KvConfig load(const std::string& path);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& def) const;
  std::string require_string(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t def) const;
  double get_double(const std::string& key, double def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<int64_t> get_int_list(const std::string& key,
                                    std::vector<int64_t> def) const;

  void set(const std::string& key, const std::string& value);
  void set_int(const std::string& key, int64_t value);
  void set_double(const std::string& key, double value);
  void set_bool(const std::string& key, bool value);
  void set_int_list(const std::string& key, const std::vector<int64_t>& v);

  // Canonical dump: keys sorted, `key = value` lines. Stable for hashing.
  std::string dump() const;
  uint64_t hash() const { return fnv1a64(dump()); }

  // Throws invalid_argument naming any key that no getter touched.
  void fail_on_unconsumed() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> consumed_;

  const std::string* find(const std::string& key) const;
};

// ---------------------------------------------------------------------------
// Static-partition parallel loop. Work item ranges are contiguous and the
// assignment depends only on (n_items, n_threads), so per-thread partial
// results can be merged in thread order for deterministic reductions.
void parallel_for(int n_threads, size_t n_items,
                  const std::function<void(size_t begin, size_t end,
                                           int thread_index)>& fn);

double now_ms();

// Whole-file text IO; both throw ErrorCode::io with the path in the message.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace demandcast
