#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "core/dataset.hpp"

using namespace demandcast;
namespace fs = std::filesystem;

namespace {

std::string tmp_path(const std::string& name) {
  return (fs::temp_directory_path() / name).string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

SeriesInstance make_series(const std::string& sku, int64_t start,
                           std::vector<double> demand) {
  SeriesInstance s;
  s.sku_id = sku;
  s.region_id = "R0";
  s.vertical_id = "V0";
  s.start_week = start;
  s.features.resize(demand.size());
  for (auto& f : s.features) {
    f.listed_price = 100.0;
    f.discounted_price = 90.0;
    f.effective_price = 90.0;
  }
  s.demand = std::move(demand);
  return s;
}

// Maximum-likelihood single Gaussian: average log-likelihood per point.
double avg_loglik_normal(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var = std::max(var / n, 1e-12);
  return -0.5 * (std::log(2.0 * 3.14159265358979323846 * var) + 1.0);
}

struct TwoComponentFit {
  double avg_loglik;
  double mu1, mu2;
};

// Deterministic EM for a two-component 1-d Gaussian mixture, means seeded one
// sample standard deviation apart. Written independently of the library so it
// can act as an oracle for the generator's bimodal mode.
TwoComponentFit fit_two_gaussians(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var = std::max(var / n, 1e-12);
  const double sd = std::sqrt(var);

  double w[2] = {0.5, 0.5};
  double mu[2] = {mean - sd, mean + sd};
  double s2[2] = {var / 4.0, var / 4.0};
  double avg_ll = 0.0;
  std::vector<double> r(x.size());

  for (int iter = 0; iter < 300; ++iter) {
    double sum_r = 0.0, sum_rx = 0.0, sum_rxx = 0.0, ll = 0.0;
    double sum_q = 0.0, sum_qx = 0.0, sum_qxx = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      const double lp0 = std::log(w[0]) - 0.5 * std::log(2 * 3.14159265358979323846 * s2[0]) -
                         0.5 * (x[i] - mu[0]) * (x[i] - mu[0]) / s2[0];
      const double lp1 = std::log(w[1]) - 0.5 * std::log(2 * 3.14159265358979323846 * s2[1]) -
                         0.5 * (x[i] - mu[1]) * (x[i] - mu[1]) / s2[1];
      const double m = std::max(lp0, lp1);
      const double lse = m + std::log(std::exp(lp0 - m) + std::exp(lp1 - m));
      ll += lse;
      r[i] = std::exp(lp0 - lse);
      sum_r += r[i];
      sum_rx += r[i] * x[i];
      sum_rxx += r[i] * x[i] * x[i];
      sum_q += 1.0 - r[i];
      sum_qx += (1.0 - r[i]) * x[i];
      sum_qxx += (1.0 - r[i]) * x[i] * x[i];
    }
    avg_ll = ll / n;
    w[0] = std::max(sum_r / n, 1e-9);
    w[1] = std::max(sum_q / n, 1e-9);
    mu[0] = sum_rx / std::max(sum_r, 1e-9);
    mu[1] = sum_qx / std::max(sum_q, 1e-9);
    s2[0] = std::max(sum_rxx / std::max(sum_r, 1e-9) - mu[0] * mu[0], 1e-6);
    s2[1] = std::max(sum_qxx / std::max(sum_q, 1e-9) - mu[1] * mu[1], 1e-6);
  }
  return {avg_ll, mu[0], mu[1]};
}

// Pools per-SKU-centered log demand over non-event, in-stock weeks.
std::vector<double> centered_log_demand(const Dataset& ds) {
  std::vector<double> pooled;
  for (const auto& s : ds.instances) {
    std::vector<double> logs;
    for (size_t t = 0; t < s.length(); ++t) {
      if (s.features[t].event_type != "none") continue;
      if (s.features[t].out_of_stock_pct > 0.0) continue;
      logs.push_back(std::log1p(s.demand[t]));
    }
    if (logs.size() < 8) continue;
    const double m =
        std::accumulate(logs.begin(), logs.end(), 0.0) / logs.size();
    for (double v : logs) pooled.push_back(v - m);
  }
  return pooled;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("generator is deterministic in config and seed") {
  GeneratorConfig cfg;
  cfg.n_skus = 12;
  cfg.n_weeks = 30;
  cfg.n_regions = 2;
  cfg.seed = 77;
  const Dataset a = generate_synthetic(cfg);
  const Dataset b = generate_synthetic(cfg);
  CHECK(a == b);
  cfg.seed = 78;
  CHECK_FALSE(a == generate_synthetic(cfg));
}

TEST_CASE("generator shape and value ranges") {
  GeneratorConfig cfg;
  cfg.n_skus = 25;
  cfg.n_verticals = 3;
  cfg.n_regions = 2;
  cfg.n_weeks = 40;
  cfg.seed = 5;
  const Dataset ds = generate_synthetic(cfg);
  CHECK(ds.size() == 50);
  CHECK(ds.vertical_ids().size() == 3);
  CHECK(ds.sku_ids().size() == 25);
  for (const auto& s : ds.instances) {
    CHECK(s.start_week >= 1);
    CHECK(s.end_week() == 40);
    for (size_t t = 0; t < s.length(); ++t) {
      CHECK(s.demand[t] >= 0.0);
      CHECK(s.demand[t] == std::round(s.demand[t]));  // whole units
      const auto& f = s.features[t];
      CHECK(f.effective_price <= f.discounted_price);
      CHECK(f.discounted_price <= f.listed_price);
    }
  }
  // The event calendar is shared: a given week has one event type everywhere.
  for (int64_t w : cfg.resolved_event_weeks()) {
    std::string type;
    for (const auto& s : ds.instances) {
      if (!s.covers(w)) continue;
      const auto& f = s.features[s.index_of(w)];
      CHECK(f.event_type != "none");
      if (type.empty()) type = f.event_type;
      CHECK(f.event_type == type);
    }
  }
}

TEST_CASE("event weeks lift demand across seeds") {
  int lifted = 0;
  double ratio_sum = 0.0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    GeneratorConfig cfg;
    cfg.n_skus = 15;
    cfg.n_weeks = 30;
    cfg.seed = seed;
    const Dataset ds = generate_synthetic(cfg);
    double ev = 0.0, base = 0.0;
    size_t n_ev = 0, n_base = 0;
    for (const auto& s : ds.instances) {
      for (size_t t = 0; t < s.length(); ++t) {
        if (s.features[t].event_type != "none") {
          ev += s.demand[t];
          ++n_ev;
        } else {
          base += s.demand[t];
          ++n_base;
        }
      }
    }
    REQUIRE(n_ev > 0);
    REQUIRE(n_base > 0);
    const double ratio = (ev / n_ev) / std::max(base / n_base, 1e-9);
    ratio_sum += ratio;
    if (ratio > 1.3) ++lifted;
  }
  CHECK(lifted >= 95);
  CHECK(ratio_sum / 100.0 > 2.0);
}

TEST_CASE("bimodal mode produces two demand modes a factor of four apart") {
  GeneratorConfig cfg;
  cfg.n_skus = 60;
  cfg.n_weeks = 80;
  cfg.seed = 11;
  cfg.price_change_prob = 0.0;          // no transient price pulses
  cfg.event_weeks = {1000000};          // outside the range: no event weeks
  cfg.demand_modality = GeneratorConfig::Modality::unimodal;
  const std::vector<double> uni = centered_log_demand(generate_synthetic(cfg));
  cfg.demand_modality = GeneratorConfig::Modality::bimodal;
  const std::vector<double> bi = centered_log_demand(generate_synthetic(cfg));
  REQUIRE(uni.size() > 2000);
  REQUIRE(bi.size() > 2000);

  const double gain_uni = fit_two_gaussians(uni).avg_loglik - avg_loglik_normal(uni);
  const TwoComponentFit fit_bi = fit_two_gaussians(bi);
  const double gain_bi = fit_bi.avg_loglik - avg_loglik_normal(bi);

  CHECK(gain_bi > 0.1);
  CHECK(gain_bi > 10.0 * std::max(gain_uni, 1e-6));
  // Designed separation between the modes is a factor of 4.
  CHECK(std::abs(fit_bi.mu2 - fit_bi.mu1) ==
        doctest::Approx(std::log(4.0)).epsilon(0.25));
}

TEST_CASE("csv save/load round-trips exactly") {
  GeneratorConfig cfg;
  cfg.n_skus = 8;
  cfg.n_regions = 3;
  cfg.n_weeks = 20;
  cfg.demand_modality = GeneratorConfig::Modality::bimodal;
  cfg.seed = 9;
  const Dataset ds = generate_synthetic(cfg);

  const std::string p1 = tmp_path("demandcast_rt1.csv");
  const std::string p2 = tmp_path("demandcast_rt2.csv");
  save_csv(ds, p1);
  const Dataset loaded = load_csv(p1);
  CHECK(loaded == ds);
  save_csv(loaded, p2);
  CHECK(read_file(p1) == read_file(p2));
  fs::remove(p1);
  fs::remove(p2);
}

TEST_CASE("csv loader reports precise errors") {
  const std::string header =
      "sku_id,region_id,vertical_id,week,demand,listed_price,discounted_price,"
      "effective_price,event_type,deal_card,banner,no_cost_emi,exchange,"
      "exclusive,oos_pct,tier";
  const std::string row1 = "S1,R1,V1,1,5,100,90,80,none,0,0,0,0,0,0,T1";
  const std::string path = tmp_path("demandcast_bad.csv");
  auto write = [&](const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
  };

  write("wrong,header\n");
  CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("header mismatch"),
                       Error);

  write(header + "\nS1,R1,V1,1,5\n");
  CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("line 2"), Error);

  write(header + "\n" + row1 + "\nS1,R1,V1,2,oops,100,90,80,none,0,0,0,0,0,0,T1\n");
  CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("bad number"), Error);

  write(header + "\nS1,R1,V1,3,-4,100,90,80,none,0,0,0,0,0,0,T1\n");
  CHECK_THROWS_WITH_AS(
      load_csv(path),
      doctest::Contains("negative or non-finite demand for SKU 'S1' week 3"),
      Error);

  write(header + "\n" + row1 + "\nS1,R1,V1,3,5,100,90,80,none,0,0,0,0,0,0,T1\n");
  CHECK_THROWS_WITH_AS(load_csv(path),
                       doctest::Contains("gap between weeks 1 and 3"), Error);

  write(header + "\n" + row1 + "\n" + row1 + "\n");
  CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("duplicate week"),
                       Error);

  write(header + "\nS1,R1,V1,1,5,100,90,95,none,0,0,0,0,0,0,T1\n");
  CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("price ordering"),
                       Error);
  fs::remove(path);
}

TEST_CASE("split_windows cuts train and test at the boundary") {
  Dataset ds;
  std::vector<double> demand(20);
  std::iota(demand.begin(), demand.end(), 1.0);  // demand == week number
  ds.instances.push_back(make_series("S1", 1, demand));

  const SplitResult sp = split_windows(ds, 16, 4);
  REQUIRE(sp.train.size() == 1);
  REQUIRE(sp.test.size() == 1);
  CHECK(sp.excluded.empty());
  CHECK(sp.train.instances[0].length() == 16);
  CHECK(sp.train.instances[0].end_week() == 16);
  CHECK(sp.train.instances[0].demand.back() == 16.0);
  CHECK(sp.test.instances[0].start_week == 17);
  CHECK(sp.test.instances[0].demand == std::vector<double>{17, 18, 19, 20});

  // Overlapping evaluation windows from the same source are independent.
  const SplitResult w1 = split_windows(ds, 12, 4);
  const SplitResult w2 = split_windows(ds, 14, 4);
  CHECK(w1.test.instances[0].demand == std::vector<double>{13, 14, 15, 16});
  CHECK(w2.test.instances[0].demand == std::vector<double>{15, 16, 17, 18});
}

TEST_CASE("split_windows exclusions") {
  Dataset ds;
  ds.instances.push_back(make_series("FULL", 1, std::vector<double>(20, 1.0)));
  ds.instances.push_back(make_series("LATE", 18, std::vector<double>(3, 1.0)));
  ds.instances.push_back(make_series("SHORT", 1, std::vector<double>(18, 1.0)));

  const SplitResult sp = split_windows(ds, 16, 4);
  CHECK(sp.train.size() == 2);  // FULL and SHORT have training weeks
  CHECK(sp.test.size() == 1);   // only FULL covers weeks 17..20
  REQUIRE(sp.excluded.size() == 2);
  CHECK(sp.excluded[0] == "LATE/R0");
  CHECK(sp.excluded[1] == "SHORT/R0");

  CHECK_THROWS_AS(split_windows(ds, 0, 4), Error);
  CHECK_THROWS_AS(split_windows(ds, 16, 0), Error);
}

TEST_CASE("aggregate_national sums regions exactly") {
  GeneratorConfig cfg;
  cfg.n_skus = 10;
  cfg.n_regions = 4;
  cfg.n_weeks = 25;
  cfg.seed = 3;
  const Dataset ds = generate_synthetic(cfg);
  const Dataset nat = aggregate_national(ds);
  CHECK(nat.size() == 10);
  for (const auto& n : nat.instances) {
    CHECK(n.region_id == "NATIONAL");
    for (size_t t = 0; t < n.length(); ++t) {
      double sum = 0.0;
      for (int r = 0; r < 4; ++r) {
        const SeriesInstance* s = ds.find(n.sku_id, "R0000" + std::to_string(r));
        REQUIRE(s != nullptr);
        if (s->covers(n.week_at(t))) sum += s->demand[s->index_of(n.week_at(t))];
      }
      CHECK(n.demand[t] == sum);
    }
  }
}

TEST_CASE("generator config round-trips through kv text") {
  GeneratorConfig cfg;
  cfg.n_skus = 7;
  cfg.n_verticals = 2;
  cfg.n_regions = 3;
  cfg.n_weeks = 52;
  cfg.event_weeks = {10, 20, 30};
  cfg.event_lift_lo = 1.5;
  cfg.event_lift_hi = 2.5;
  cfg.price_change_prob = 0.12;
  cfg.demand_modality = GeneratorConfig::Modality::bimodal;
  cfg.noise_scale = 0.3;
  cfg.seed = 123;

  const GeneratorConfig back = GeneratorConfig::from_kv(cfg.to_kv());
  CHECK(back.to_kv().dump() == cfg.to_kv().dump());
  CHECK(generate_synthetic(back) == generate_synthetic(cfg));

  GeneratorConfig defaults;
  defaults.n_weeks = 40;
  CHECK(defaults.resolved_event_weeks() == std::vector<int64_t>{13, 26, 39});
  defaults.event_weeks = {5, 5, 3};
  CHECK(defaults.resolved_event_weeks() == std::vector<int64_t>{3, 5});
}

TEST_CASE("validation rejects malformed structures") {
  SeriesInstance s = make_series("S1", 1, {1.0, 2.0});
  s.features.pop_back();
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("lengths differ"),
                       Error);

  SeriesInstance neg = make_series("S1", 1, {1.0, -2.0});
  CHECK_THROWS_WITH_AS(neg.validate(), doctest::Contains("week 2"), Error);

  Dataset dup;
  dup.instances.push_back(make_series("S1", 1, {1.0}));
  dup.instances.push_back(make_series("S1", 1, {2.0}));
  CHECK_THROWS_WITH_AS(dup.validate(), doctest::Contains("duplicate series"),
                       Error);

  const SeriesInstance ok = make_series("S1", 5, {1.0, 2.0, 3.0});
  CHECK(ok.index_of(6) == 1);
  CHECK_THROWS_AS(ok.index_of(8), Error);
  CHECK_THROWS_AS(ok.index_of(4), Error);

  GeneratorConfig bad;
  bad.event_lift_lo = 0.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

}  // TEST_SUITE
