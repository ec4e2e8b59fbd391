#include "core/common.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace demandcast {

std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open file for hashing: " + path);
  uint64_t h = 14695981039346656037ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
  }
  return h;
}

// ---------------------------------------------------------------------------

Rng::Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform01() {
  // 53 random mantissa bits -> [0, 1)
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::uniform_int(uint64_t n) {
  if (n == 0) fail(ErrorCode::invalid_argument, "uniform_int(0)");
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform01();
  } while (u1 <= 0.0);
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Rng Rng::fork(std::string_view stream) const {
  return Rng(fnv1a64(stream, seed_ ^ 0x9e3779b97f4a7c15ull));
}

Rng Rng::fork(std::string_view stream, uint64_t index) const {
  uint64_t h = fnv1a64(stream, seed_ ^ 0x9e3779b97f4a7c15ull);
  return Rng(fnv1a64(&index, sizeof(index), h));
}

// ---------------------------------------------------------------------------

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) fail(ErrorCode::invalid_argument, "quantile of empty set");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<int64_t> apportion_largest_remainder(
    int64_t total, const std::vector<double>& weights) {
  if (weights.empty())
    fail(ErrorCode::invalid_argument, "apportion: no weights");
  if (total < 0) fail(ErrorCode::invalid_argument, "apportion: negative total");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) fail(ErrorCode::invalid_argument, "apportion: negative weight");
    wsum += w;
  }
  std::vector<int64_t> alloc(weights.size(), 0);
  if (total == 0) return alloc;
  if (wsum <= 0.0) {
    alloc[0] = total;  // degenerate: everything to the first bucket
    return alloc;
  }
  std::vector<std::pair<double, size_t>> remainders;
  remainders.reserve(weights.size());
  int64_t assigned = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / wsum;
    alloc[i] = static_cast<int64_t>(std::floor(exact));
    assigned += alloc[i];
    remainders.push_back({exact - std::floor(exact), i});
  }
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  int64_t leftover = total - assigned;
  for (size_t i = 0; leftover > 0; i = (i + 1) % remainders.size()) {
    alloc[remainders[i].second] += 1;
    --leftover;
  }
  return alloc;
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

KvConfig KvConfig::parse(const std::string& text) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::parse,
           "config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty())
      fail(ErrorCode::parse,
           "config line " + std::to_string(lineno) + ": empty key");
    cfg.kv_[key] = value;
  }
  return cfg;
}

KvConfig KvConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::string* KvConfig::find(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return nullptr;
  consumed_.insert(key);
  return &it->second;
}

bool KvConfig::has(const std::string& key) const {
  return kv_.count(key) != 0;
}

std::string KvConfig::get_string(const std::string& key,
                                 const std::string& def) const {
  const std::string* v = find(key);
  return v ? *v : def;
}

std::string KvConfig::require_string(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) fail(ErrorCode::invalid_argument, "missing config key: " + key);
  return *v;
}

int64_t KvConfig::get_int(const std::string& key, int64_t def) const {
  const std::string* v = find(key);
  if (!v) return def;
  int64_t out = 0;
  auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (res.ec != std::errc() || res.ptr != v->data() + v->size())
    fail(ErrorCode::parse, "config key " + key + ": not an integer: " + *v);
  return out;
}

double KvConfig::get_double(const std::string& key, double def) const {
  const std::string* v = find(key);
  if (!v) return def;
  try {
    size_t pos = 0;
    double out = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    fail(ErrorCode::parse, "config key " + key + ": not a number: " + *v);
  }
}

bool KvConfig::get_bool(const std::string& key, bool def) const {
  const std::string* v = find(key);
  if (!v) return def;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  fail(ErrorCode::parse, "config key " + key + ": not a boolean: " + *v);
}

std::vector<int64_t> KvConfig::get_int_list(const std::string& key,
                                            std::vector<int64_t> def) const {
  const std::string* v = find(key);
  if (!v) return def;
  std::vector<int64_t> out;
  if (trim(*v).empty()) return out;
  std::istringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string t = trim(item);
    int64_t x = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
      fail(ErrorCode::parse, "config key " + key + ": bad list entry: " + item);
    out.push_back(x);
  }
  return out;
}

void KvConfig::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}
void KvConfig::set_int(const std::string& key, int64_t value) {
  kv_[key] = std::to_string(value);
}
void KvConfig::set_double(const std::string& key, double value) {
  kv_[key] = format_double(value);
}
void KvConfig::set_bool(const std::string& key, bool value) {
  kv_[key] = value ? "true" : "false";
}
void KvConfig::set_int_list(const std::string& key,
                            const std::vector<int64_t>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  kv_[key] = s;
}

std::string KvConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : kv_) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

void KvConfig::fail_on_unconsumed() const {
  std::string unknown;
  for (const auto& [k, v] : kv_) {
    (void)v;
    if (!consumed_.count(k)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += k;
    }
  }
  if (!unknown.empty())
    fail(ErrorCode::invalid_argument, "unknown config key(s): " + unknown);
}

// ---------------------------------------------------------------------------

void parallel_for(int n_threads, size_t n_items,
                  const std::function<void(size_t, size_t, int)>& fn) {
  if (n_items == 0) return;
  if (n_threads < 1) n_threads = 1;
  const size_t threads =
      std::min<size_t>(static_cast<size_t>(n_threads), n_items);
  if (threads == 1) {
    fn(0, n_items, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const size_t chunk = (n_items + threads - 1) / threads;
  for (size_t t = 0; t < threads; ++t) {
    const size_t begin = t * chunk;
    const size_t end = std::min(n_items, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(fn, begin, end, static_cast<int>(t));
  }
  for (auto& th : pool) th.join();
}

double now_ms() {
  using namespace std::chrono;
  return static_cast<double>(
             duration_cast<microseconds>(steady_clock::now().time_since_epoch())
                 .count()) /
         1000.0;
}

std::string read_text_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::io, "cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << file.rdbuf();
  if (file.bad()) fail(ErrorCode::io, "read from '" + path + "' failed");
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  file << content;
  file.flush();
  if (!file) fail(ErrorCode::io, "write to '" + path + "' failed");
}

}  // namespace demandcast
