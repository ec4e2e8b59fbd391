#include "core/cubist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <utility>

#include "json.hpp"

namespace demandcast {

using ordered_json = nlohmann::ordered_json;

void CubistConfig::validate() const {
  if (committee_size < 1)
    fail(ErrorCode::invalid_argument, "committee_size must be >= 1");
  if (neighbors < 1) fail(ErrorCode::invalid_argument, "neighbors must be >= 1");
  if (min_leaf < 1) fail(ErrorCode::invalid_argument, "min_leaf must be >= 1");
  if (!(smoothing >= 0.0))
    fail(ErrorCode::invalid_argument, "smoothing must be >= 0");
  if (!(sd_stop_fraction >= 0.0 && sd_stop_fraction < 1.0))
    fail(ErrorCode::invalid_argument, "sd_stop_fraction must be in [0, 1)");
  if (!(ridge >= 0.0)) fail(ErrorCode::invalid_argument, "ridge must be >= 0");
}

KvConfig CubistConfig::to_kv() const {
  KvConfig kv;
  kv.set_int("committee_size", committee_size);
  kv.set_int("neighbors", neighbors);
  kv.set_int("min_leaf", min_leaf);
  kv.set_double("smoothing", smoothing);
  kv.set_double("sd_stop_fraction", sd_stop_fraction);
  kv.set_double("ridge", ridge);
  kv.set_bool("neighbor_adjust", neighbor_adjust);
  return kv;
}

CubistConfig CubistConfig::from_kv(const KvConfig& kv) {
  CubistConfig c;
  c.committee_size =
      static_cast<int>(kv.get_int("committee_size", c.committee_size));
  c.neighbors = static_cast<int>(kv.get_int("neighbors", c.neighbors));
  c.min_leaf = static_cast<int>(kv.get_int("min_leaf", c.min_leaf));
  c.smoothing = kv.get_double("smoothing", c.smoothing);
  c.sd_stop_fraction = kv.get_double("sd_stop_fraction", c.sd_stop_fraction);
  c.ridge = kv.get_double("ridge", c.ridge);
  c.neighbor_adjust = kv.get_bool("neighbor_adjust", c.neighbor_adjust);
  c.validate();
  return c;
}

void CubistSamples::validate() const {
  if (rows.size() != targets.size() * static_cast<size_t>(kCubistCols))
    fail(ErrorCode::invalid_argument,
         "sample matrix is not " + std::to_string(kCubistCols) +
             " columns wide");
  for (double v : rows)
    if (!std::isfinite(v))
      fail(ErrorCode::data, "sample matrix contains a non-finite value");
  for (double t : targets)
    if (!std::isfinite(t))
      fail(ErrorCode::data, "sample targets contain a non-finite value");
}

// ---------------------------------------------------------------------------

double LinearModel::eval(const double* row) const {
  double acc = intercept;
  for (size_t i = 0; i < features.size(); ++i)
    acc += coef[i] * row[features[i]];
  return acc;
}

namespace {

// Least squares over the listed columns via the normal equations, Gaussian
// elimination with partial pivoting. The ridge term lands on the feature
// diagonal only, so with no features the intercept is the exact mean.
LinearModel fit_linear(const CubistSamples& s, const std::vector<double>& y,
                       const int* idx, size_t n, std::vector<int> feats,
                       double ridge) {
  const size_t m = feats.size();
  const size_t d = m + 1;
  std::vector<double> a(d * d, 0.0);
  std::vector<double> b(d, 0.0);
  for (size_t r = 0; r < n; ++r) {
    const double* row = s.row(static_cast<size_t>(idx[r]));
    const double t = y[static_cast<size_t>(idx[r])];
    a[0] += 1.0;
    b[0] += t;
    for (size_t i = 0; i < m; ++i) {
      const double xi = row[feats[i]];
      a[(i + 1) * d] += xi;  // symmetric fill-in below
      b[i + 1] += xi * t;
      for (size_t j = 0; j <= i; ++j) a[(i + 1) * d + (j + 1)] += xi * row[feats[j]];
    }
  }
  for (size_t i = 0; i < d; ++i)
    for (size_t j = i + 1; j < d; ++j) a[i * d + j] = a[j * d + i];
  for (size_t i = 1; i < d; ++i) a[i * d + i] += ridge;

  // Elimination; on a vanishing pivot fall back to the intercept-only model.
  std::vector<size_t> perm(d);
  for (size_t i = 0; i < d; ++i) perm[i] = i;
  bool ok = true;
  for (size_t col = 0; col < d && ok; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < d; ++r)
      if (std::abs(a[perm[r] * d + col]) > std::abs(a[perm[piv] * d + col]))
        piv = r;
    std::swap(perm[col], perm[piv]);
    const double p = a[perm[col] * d + col];
    if (std::abs(p) < 1e-300) {
      ok = false;
      break;
    }
    for (size_t r = col + 1; r < d; ++r) {
      const double f = a[perm[r] * d + col] / p;
      if (f == 0.0) continue;
      for (size_t c = col; c < d; ++c) a[perm[r] * d + c] -= f * a[perm[col] * d + c];
      b[perm[r]] -= f * b[perm[col]];
    }
  }

  LinearModel model;
  if (!ok) {
    model.intercept = n ? b[0] / static_cast<double>(n) : 0.0;
    return model;
  }
  std::vector<double> beta(d, 0.0);
  for (size_t col = d; col-- > 0;) {
    double acc = b[perm[col]];
    for (size_t c = col + 1; c < d; ++c) acc -= a[perm[col] * d + c] * beta[c];
    beta[col] = acc / a[perm[col] * d + col];
  }
  model.intercept = beta[0];
  model.features = std::move(feats);
  model.coef.assign(beta.begin() + 1, beta.end());
  return model;
}

struct SdStats {
  double mean = 0.0;
  double sd = 0.0;
};

SdStats target_stats(const std::vector<double>& y, const int* idx, size_t n) {
  SdStats st;
  for (size_t i = 0; i < n; ++i) st.mean += y[static_cast<size_t>(idx[i])];
  st.mean /= static_cast<double>(n);
  double ss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double c = y[static_cast<size_t>(idx[i])] - st.mean;
    ss += c * c;
  }
  st.sd = std::sqrt(std::max(0.0, ss / static_cast<double>(n)));
  return st;
}

struct TreeBuilder {
  const CubistSamples& s;
  const std::vector<double>& y;
  const CubistConfig& cfg;
  double sd_floor = 0.0;
  std::vector<int> idx;
  std::vector<TreeNode> nodes;
  std::vector<std::pair<double, double>> scratch;  // (feature value, target)

  int build(size_t begin, size_t end, std::vector<int>& path) {
    const size_t n = end - begin;
    const SdStats st = target_stats(y, idx.data() + begin, n);

    TreeNode node;
    node.n_samples = static_cast<int64_t>(n);
    {
      std::vector<int> feats(path);
      std::sort(feats.begin(), feats.end());
      feats.erase(std::unique(feats.begin(), feats.end()), feats.end());
      node.model =
          fit_linear(s, y, idx.data() + begin, n, std::move(feats), cfg.ridge);
    }
    double rss = 0.0;
    for (size_t i = begin; i < end; ++i) {
      const size_t r = static_cast<size_t>(idx[i]);
      const double e = y[r] - node.model.eval(s.row(r));
      rss += e * e;
    }
    node.residual_sd = std::sqrt(std::max(0.0, rss / static_cast<double>(n)));

    const int id = static_cast<int>(nodes.size());
    nodes.push_back(std::move(node));
    if (n < 2 * static_cast<size_t>(cfg.min_leaf) || st.sd < sd_floor)
      return id;

    // Exhaustive split search: best standard-deviation reduction, ties going
    // to the lowest feature and then the lowest threshold.
    int best_f = -1;
    double best_thr = 0.0;
    double best_gain = 0.0;
    size_t best_left = 0;
    for (int f = 0; f < kCubistCols; ++f) {
      scratch.clear();
      double total_s = 0.0, total_ss = 0.0;
      for (size_t i = begin; i < end; ++i) {
        const size_t r = static_cast<size_t>(idx[i]);
        const double c = y[r] - st.mean;  // centered for stable prefix sums
        scratch.emplace_back(s.row(r)[f], c);
        total_s += c;
        total_ss += c * c;
      }
      std::sort(scratch.begin(), scratch.end());
      double left_s = 0.0, left_ss = 0.0;
      for (size_t p = 1; p < n; ++p) {
        left_s += scratch[p - 1].second;
        left_ss += scratch[p - 1].second * scratch[p - 1].second;
        if (scratch[p - 1].first >= scratch[p].first) continue;
        if (p < static_cast<size_t>(cfg.min_leaf) ||
            n - p < static_cast<size_t>(cfg.min_leaf))
          continue;
        const double nl = static_cast<double>(p);
        const double nr = static_cast<double>(n - p);
        const double sdl =
            std::sqrt(std::max(0.0, left_ss / nl - (left_s / nl) * (left_s / nl)));
        const double rs = total_s - left_s;
        const double sdr = std::sqrt(
            std::max(0.0, (total_ss - left_ss) / nr - (rs / nr) * (rs / nr)));
        const double gain = st.sd - (nl * sdl + nr * sdr) / static_cast<double>(n);
        if (gain > best_gain) {
          best_gain = gain;
          best_f = f;
          // The midpoint of two adjacent doubles can round up to the right
          // value; fall back to the left value so `<= threshold` keeps
          // exactly p rows on the left.
          double thr = (scratch[p - 1].first + scratch[p].first) / 2.0;
          if (!(thr < scratch[p].first)) thr = scratch[p - 1].first;
          best_thr = thr;
          best_left = p;
        }
      }
    }
    if (best_f < 0) return id;

    std::stable_partition(idx.begin() + begin, idx.begin() + end,
                          [&](int r) {
                            return s.row(static_cast<size_t>(r))[best_f] <=
                                   best_thr;
                          });
    path.push_back(best_f);
    const int left = build(begin, begin + best_left, path);
    const int right = build(begin + best_left, end, path);
    path.pop_back();
    nodes[id].split_feature = best_f;
    nodes[id].split_threshold = best_thr;
    nodes[id].left = left;
    nodes[id].right = right;
    return id;
  }
};

}  // namespace

ModelTree grow_tree(const CubistSamples& samples, const CubistConfig& cfg) {
  cfg.validate();
  samples.validate();
  if (samples.size() == 0)
    fail(ErrorCode::invalid_argument, "cannot grow a tree on zero rows");
  TreeBuilder builder{samples, samples.targets, cfg, 0.0, {}, {}, {}};
  builder.idx.resize(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) builder.idx[i] = static_cast<int>(i);
  builder.sd_floor =
      cfg.sd_stop_fraction *
      target_stats(samples.targets, builder.idx.data(), samples.size()).sd;
  std::vector<int> path;
  builder.build(0, samples.size(), path);
  ModelTree tree;
  tree.nodes = std::move(builder.nodes);
  return tree;
}

double ModelTree::predict(const double* row, double smoothing) const {
  std::vector<int> path;
  path.reserve(32);
  int id = 0;
  if (smoothing == 0.0) {
    // Skip the blending loop: (n*p)/n is not an exact no-op in floating
    // point, and c = 0 must return the leaf model exactly.
    while (!nodes[static_cast<size_t>(id)].is_leaf()) {
      const TreeNode& nd = nodes[static_cast<size_t>(id)];
      id = row[nd.split_feature] <= nd.split_threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<size_t>(id)].model.eval(row);
  }
  while (!nodes[static_cast<size_t>(id)].is_leaf()) {
    path.push_back(id);
    const TreeNode& nd = nodes[static_cast<size_t>(id)];
    id = row[nd.split_feature] <= nd.split_threshold ? nd.left : nd.right;
  }
  const TreeNode& leaf = nodes[static_cast<size_t>(id)];
  double p = leaf.model.eval(row);
  double n_child = static_cast<double>(leaf.n_samples);
  for (size_t i = path.size(); i-- > 0;) {
    const TreeNode& a = nodes[static_cast<size_t>(path[i])];
    p = (n_child * p + smoothing * a.model.eval(row)) / (n_child + smoothing);
    n_child = static_cast<double>(a.n_samples);
  }
  return p;
}

std::vector<ModelTree> grow_committee(const CubistSamples& samples,
                                      const CubistConfig& cfg,
                                      CommitteeTrace* trace) {
  cfg.validate();
  samples.validate();
  if (samples.size() == 0)
    fail(ErrorCode::invalid_argument, "cannot grow a committee on zero rows");
  std::vector<ModelTree> trees;
  trees.reserve(static_cast<size_t>(cfg.committee_size));
  // Adjustments are anchored on the raw targets and clamped to their range.
  // Chaining them on the previous round's adjusted targets instead compounds
  // each tree's smoothing bias and diverges within a few dozen rounds.
  const auto [lo_it, hi_it] =
      std::minmax_element(samples.targets.begin(), samples.targets.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  CubistSamples round = samples;
  std::vector<double> fits(samples.size());
  for (int k = 0; k < cfg.committee_size; ++k) {
    trees.push_back(grow_tree(round, cfg));
    for (size_t i = 0; i < round.size(); ++i)
      fits[i] = trees.back().predict(round.row(i), cfg.smoothing);
    if (trace) {
      trace->targets.push_back(round.targets);
      trace->fits.push_back(fits);
    }
    if (k + 1 < cfg.committee_size)
      for (size_t i = 0; i < round.size(); ++i)
        round.targets[i] =
            std::clamp(2.0 * samples.targets[i] - fits[i], lo, hi);
  }
  return trees;
}

// ---------------------------------------------------------------------------

void NeighborIndex::validate() const {
  if (rows.size() != targets.size() * static_cast<size_t>(kCubistCols))
    fail(ErrorCode::invalid_argument, "neighbor rows misaligned with targets");
  if (fitted.size() != targets.size())
    fail(ErrorCode::invalid_argument,
         "neighbor fitted values misaligned with targets");
  if (k < 1) fail(ErrorCode::invalid_argument, "neighbor k must be >= 1");
  if (static_cast<size_t>(k) > targets.size())
    fail(ErrorCode::invalid_argument,
         "neighbor k exceeds the number of training rows");
}

double neighbor_adjust(double y_hat, const double* row,
                       const NeighborIndex& index) {
  index.validate();
  const size_t n = index.size();
  std::vector<std::pair<double, size_t>> dist(n);
  for (size_t i = 0; i < n; ++i) {
    const double* r = index.rows.data() + i * static_cast<size_t>(kCubistCols);
    double d = 0.0;
    for (int c = 0; c < kCubistCols; ++c) d += std::abs(row[c] - r[c]);
    dist[i] = {d, i};
  }
  const size_t k = static_cast<size_t>(index.k);
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  double w_sum = 0.0;
  for (size_t l = 0; l < k; ++l) w_sum += 1.0 / (dist[l].first + 0.5);
  double out = 0.0;
  for (size_t l = 0; l < k; ++l) {
    const double w = 1.0 / (dist[l].first + 0.5) / w_sum;
    const size_t i = dist[l].second;
    out += w * (index.targets[i] + y_hat - index.fitted[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

double CubistModel::committee_mean(const double* row) const {
  double sum = 0.0;
  for (const ModelTree& t : trees) sum += t.predict(row, cfg.smoothing);
  return sum / static_cast<double>(trees.size());
}

double CubistModel::predict_row(const double* row) const {
  const double y_hat = committee_mean(row);
  if (!cfg.neighbor_adjust) return y_hat;
  return neighbor_adjust(y_hat, row, index);
}

// ---------------------------------------------------------------------------

namespace {

std::string join_doubles(const std::vector<double>& v) {
  std::string blob;
  blob.reserve(v.size() * 12);
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) blob.push_back(' ');
    blob += format_double(v[i]);
  }
  return blob;
}

std::vector<double> split_doubles(const std::string& blob, const char* what) {
  std::vector<double> out;
  const char* p = blob.data();
  const char* end = p + blob.size();
  while (p < end) {
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc())
      fail(ErrorCode::parse, std::string(what) + " blob is corrupt");
    out.push_back(v);
    p = next;
    if (p < end && *p == ' ') ++p;
  }
  return out;
}

ordered_json model_to_json(const LinearModel& m) {
  ordered_json j;
  j["features"] = m.features;
  j["coef"] = join_doubles(m.coef);
  j["intercept"] = m.intercept;
  return j;
}

LinearModel model_from_json(const ordered_json& j) {
  LinearModel m;
  m.features = j.at("features").get<std::vector<int>>();
  m.coef = split_doubles(j.at("coef").get<std::string>(), "coefficient");
  m.intercept = j.at("intercept").get<double>();
  if (m.coef.size() != m.features.size())
    fail(ErrorCode::schema_mismatch, "linear model features/coef misaligned");
  for (int f : m.features)
    if (f < 0 || f >= kCubistCols)
      fail(ErrorCode::schema_mismatch, "linear model feature out of range");
  return m;
}

}  // namespace

std::string CubistModel::to_json() const {
  ordered_json j;
  j["type"] = "cubist";
  j["version"] = 1;
  ordered_json c;
  c["committee_size"] = cfg.committee_size;
  c["neighbors"] = cfg.neighbors;
  c["min_leaf"] = cfg.min_leaf;
  c["smoothing"] = cfg.smoothing;
  c["sd_stop_fraction"] = cfg.sd_stop_fraction;
  c["ridge"] = cfg.ridge;
  c["neighbor_adjust"] = cfg.neighbor_adjust;
  j["config"] = std::move(c);
  ordered_json means = ordered_json::array();
  for (const std::vector<double>& m : category_means)
    means.push_back(join_doubles(m));
  j["category_means"] = std::move(means);
  ordered_json jtrees = ordered_json::array();
  for (const ModelTree& tree : trees) {
    ordered_json jnodes = ordered_json::array();
    for (const TreeNode& nd : tree.nodes) {
      ordered_json jn;
      jn["feature"] = nd.split_feature;
      jn["threshold"] = nd.split_threshold;
      jn["left"] = nd.left;
      jn["right"] = nd.right;
      jn["n"] = nd.n_samples;
      jn["residual_sd"] = nd.residual_sd;
      jn["model"] = model_to_json(nd.model);
      jnodes.push_back(std::move(jn));
    }
    ordered_json jt;
    jt["nodes"] = std::move(jnodes);
    jtrees.push_back(std::move(jt));
  }
  j["trees"] = std::move(jtrees);
  ordered_json ji;
  ji["k"] = index.k;
  ji["rows"] = join_doubles(index.rows);
  ji["targets"] = join_doubles(index.targets);
  ji["fitted"] = join_doubles(index.fitted);
  j["index"] = std::move(ji);
  return j.dump(1);
}

CubistModel CubistModel::from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("model json: ") + e.what());
  }
  if (!j.contains("type") || j["type"] != "cubist")
    fail(ErrorCode::schema_mismatch, "not a rule-based model file");
  if (j.at("version").get<int>() != 1)
    fail(ErrorCode::schema_mismatch, "unsupported model version");
  CubistModel m;
  const auto& c = j.at("config");
  m.cfg.committee_size = c.at("committee_size").get<int>();
  m.cfg.neighbors = c.at("neighbors").get<int>();
  m.cfg.min_leaf = c.at("min_leaf").get<int>();
  m.cfg.smoothing = c.at("smoothing").get<double>();
  m.cfg.sd_stop_fraction = c.at("sd_stop_fraction").get<double>();
  m.cfg.ridge = c.at("ridge").get<double>();
  m.cfg.neighbor_adjust = c.at("neighbor_adjust").get<bool>();
  m.cfg.validate();
  for (const auto& blob : j.at("category_means"))
    m.category_means.push_back(
        split_doubles(blob.get<std::string>(), "category mean"));
  if (m.category_means.size() != static_cast<size_t>(kNumCategorical))
    fail(ErrorCode::schema_mismatch, "expected one mean table per categorical");
  for (const auto& jt : j.at("trees")) {
    ModelTree tree;
    for (const auto& jn : jt.at("nodes")) {
      TreeNode nd;
      nd.split_feature = jn.at("feature").get<int>();
      nd.split_threshold = jn.at("threshold").get<double>();
      nd.left = jn.at("left").get<int>();
      nd.right = jn.at("right").get<int>();
      nd.n_samples = jn.at("n").get<int64_t>();
      nd.residual_sd = jn.at("residual_sd").get<double>();
      nd.model = model_from_json(jn.at("model"));
      tree.nodes.push_back(std::move(nd));
    }
    if (tree.nodes.empty())
      fail(ErrorCode::schema_mismatch, "tree with no nodes");
    const int count = static_cast<int>(tree.nodes.size());
    for (const TreeNode& nd : tree.nodes) {
      if (nd.is_leaf()) continue;
      if (nd.left <= 0 || nd.left >= count || nd.right <= 0 ||
          nd.right >= count || nd.split_feature >= kCubistCols)
        fail(ErrorCode::schema_mismatch, "tree node links out of range");
    }
    m.trees.push_back(std::move(tree));
  }
  if (m.trees.empty()) fail(ErrorCode::schema_mismatch, "committee is empty");
  const auto& ji = j.at("index");
  m.index.k = ji.at("k").get<int>();
  m.index.rows = split_doubles(ji.at("rows").get<std::string>(), "index row");
  m.index.targets =
      split_doubles(ji.at("targets").get<std::string>(), "index target");
  m.index.fitted =
      split_doubles(ji.at("fitted").get<std::string>(), "index fitted");
  m.index.validate();
  return m;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<double>> fit_category_means(
    const Dataset& train, const FeatureSchema& schema) {
  const std::array<int, kNumCategorical> sizes = {
      schema.product_id.size(), schema.event_type.size(),
      schema.product_tier.size()};
  std::vector<std::vector<double>> sums(kNumCategorical);
  std::vector<std::vector<int64_t>> counts(kNumCategorical);
  for (int c = 0; c < kNumCategorical; ++c) {
    sums[c].assign(static_cast<size_t>(sizes[c]), 0.0);
    counts[c].assign(static_cast<size_t>(sizes[c]), 0);
  }
  double total = 0.0;
  int64_t cells = 0;
  for (const SeriesInstance& inst : train.instances) {
    const EncodedSeries enc = encode_series(inst, schema);
    for (size_t t = 0; t < enc.weeks.size(); ++t) {
      for (int c = 0; c < kNumCategorical; ++c) {
        const int slot = enc.weeks[t].category[c];
        sums[c][static_cast<size_t>(slot)] += enc.y[t];
        ++counts[c][static_cast<size_t>(slot)];
      }
      total += enc.y[t];
      ++cells;
    }
  }
  if (cells == 0)
    fail(ErrorCode::data, "cannot fit category means on empty data");
  const double global = total / static_cast<double>(cells);
  std::vector<std::vector<double>> means(kNumCategorical);
  for (int c = 0; c < kNumCategorical; ++c) {
    means[c].resize(sums[c].size());
    for (size_t v = 0; v < sums[c].size(); ++v)
      means[c][v] = counts[c][v] > 0
                        ? sums[c][v] / static_cast<double>(counts[c][v])
                        : global;
  }
  return means;
}

void cubist_row_from_week(const EncodedWeek& w,
                          const std::vector<std::vector<double>>& means,
                          double* out) {
  for (int i = 0; i < kNumNumeric; ++i) out[i] = w.numeric[i];
  for (int i = 0; i < kNumBinary; ++i) out[kNumNumeric + i] = w.binary[i];
  for (int c = 0; c < kNumCategorical; ++c) {
    const size_t slot = static_cast<size_t>(w.category[c]);
    if (c >= static_cast<int>(means.size()) || slot >= means[c].size())
      fail(ErrorCode::schema_mismatch,
           "categorical index outside the model's mean tables");
    out[kNumNumeric + kNumBinary + c] = means[c][slot];
  }
}

CubistSamples build_samples(const Dataset& ds, const FeatureSchema& schema,
                            const std::vector<std::vector<double>>& means) {
  CubistSamples out;
  for (const SeriesInstance& inst : ds.instances) {
    const EncodedSeries enc = encode_series(inst, schema);
    for (size_t t = 0; t < enc.weeks.size(); ++t) {
      const size_t at = out.rows.size();
      out.rows.resize(at + kCubistCols);
      cubist_row_from_week(enc.weeks[t], means, out.rows.data() + at);
      out.targets.push_back(enc.y[t]);
    }
  }
  return out;
}

CubistModel train_cubist(const Dataset& train, const FeatureSchema& schema,
                         const CubistConfig& cfg, CommitteeTrace* trace) {
  cfg.validate();
  train.validate();
  if (train.empty()) fail(ErrorCode::data, "cannot train on an empty dataset");
  CubistModel m;
  m.cfg = cfg;
  m.category_means = fit_category_means(train, schema);
  CubistSamples samples = build_samples(train, schema, m.category_means);
  m.cfg.neighbors = static_cast<int>(std::min<size_t>(
      static_cast<size_t>(cfg.neighbors), samples.size()));
  m.trees = grow_committee(samples, m.cfg, trace);
  m.index.k = m.cfg.neighbors;
  m.index.fitted.resize(samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    m.index.fitted[i] = m.committee_mean(samples.row(i));
  m.index.rows = std::move(samples.rows);
  m.index.targets = std::move(samples.targets);
  return m;
}

std::vector<double> forecast_cubist(const CubistModel& m,
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

  const DemandTransform& tr = schema.transform_for(s.vertical_id);
  LagState lag = init_lag_state(s, schema.avg_discount_for(s.vertical_id));
  for (size_t t = 0; t < history_len; ++t)
    advance_lag_state(lag, s.demand[t], s.features[t]);

  std::vector<double> out;
  out.reserve(static_cast<size_t>(horizon));
  double row[kCubistCols];
  for (int j = 0; j < horizon; ++j) {
    const size_t t = history_len + static_cast<size_t>(j);
    const EncodedWeek w = encode_week(s, t, lag, schema);
    cubist_row_from_week(w, m.category_means, row);
    const double units = tr.invert(m.predict_row(row));
    out.push_back(units);
    advance_lag_state(lag, units, s.features[t]);
  }
  return out;
}

}  // namespace demandcast
