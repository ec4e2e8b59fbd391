#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "core/hierarchy.hpp"
#include "doctest.h"

using namespace demandcast;

namespace {

SeriesInstance make_series(std::string sku, std::string region,
                           std::string vertical, int64_t start,
                           std::vector<double> demand) {
  SeriesInstance s;
  s.sku_id = std::move(sku);
  s.region_id = std::move(region);
  s.vertical_id = std::move(vertical);
  s.start_week = start;
  s.features.resize(demand.size());
  s.demand = std::move(demand);
  return s;
}

SkuRatios make_ratios(std::vector<double> weights) {
  SkuRatios sr;
  sr.sku_id = "S";
  for (size_t i = 0; i < weights.size(); ++i)
    sr.regions.push_back({"R" + std::to_string(i), weights[i], 8, 0});
  return sr;
}

}  // namespace

TEST_SUITE("hierarchy") {

TEST_CASE("constant regional mix yields the observed shares") {
  Dataset ds;
  ds.instances.push_back(
      make_series("S1", "RA", "V0", 0, std::vector<double>(8, 6.0)));
  ds.instances.push_back(
      make_series("S1", "RB", "V0", 0, std::vector<double>(8, 4.0)));

  const RegionRatios rr = compute_ratios(ds, 7);
  REQUIRE(rr.skus.size() == 1);
  const SkuRatios& sr = rr.skus[0];
  CHECK(sr.sku_id == "S1");
  CHECK_FALSE(sr.zero_history);
  REQUIRE(sr.regions.size() == 2);
  CHECK(sr.regions[0].region_id == "RA");
  CHECK(sr.regions[1].region_id == "RB");
  CHECK(sr.regions[0].ratio == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(sr.regions[1].ratio == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(std::abs(sr.regions[0].ratio + sr.regions[1].ratio - 1.0) < 1e-12);
  for (const RegionShare& r : sr.regions) {
    CHECK(r.weeks_used == 8);
    CHECK(r.weeks_clipped == 0);
  }
}

TEST_CASE("dyadic shares come out exact") {
  // 3:1 every week makes every intermediate value exactly representable,
  // so the ratios are bitwise 0.75 and 0.25.
  Dataset ds;
  ds.instances.push_back(
      make_series("S1", "RA", "V0", 0, std::vector<double>(8, 3.0)));
  ds.instances.push_back(
      make_series("S1", "RB", "V0", 0, std::vector<double>(8, 1.0)));
  const RegionRatios rr = compute_ratios(ds, 7);
  REQUIRE(rr.skus.size() == 1);
  CHECK(rr.skus[0].regions[0].ratio == 0.75);
  CHECK(rr.skus[0].regions[1].ratio == 0.25);

  SUBCASE("single region gets everything") {
    Dataset one;
    one.instances.push_back(
        make_series("S1", "RA", "V0", 0, std::vector<double>(8, 5.0)));
    const RegionRatios r1 = compute_ratios(one, 7);
    REQUIRE(r1.skus[0].regions.size() == 1);
    CHECK(r1.skus[0].regions[0].ratio == 1.0);
  }
}

TEST_CASE("an outlier week is pulled back to the IQR fence") {
  // Seven weeks at 30/70, then one week where region A spikes to 90%.
  // Both regions' weekly shares have zero IQR, so the fences collapse onto
  // the repeated value and the spike week is clipped to it entirely: the
  // averaged shares are 0.3 and 0.7, not the raw means 0.375 and 0.625.
  std::vector<double> a{3, 3, 3, 3, 3, 3, 3, 27};
  std::vector<double> b{7, 7, 7, 7, 7, 7, 7, 3};
  Dataset ds;
  ds.instances.push_back(make_series("S1", "RA", "V0", 0, a));
  ds.instances.push_back(make_series("S1", "RB", "V0", 0, b));

  const RegionRatios rr = compute_ratios(ds, 7);
  const SkuRatios& sr = rr.skus[0];
  CHECK(sr.regions[0].ratio == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(sr.regions[1].ratio == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(sr.regions[0].weeks_clipped == 1);
  CHECK(sr.regions[1].weeks_clipped == 1);
  CHECK(sr.regions[0].weeks_used == 8);
}

TEST_CASE("only the trailing eight weeks matter") {
  // Weeks 0..11 split 1:1, weeks 12..19 split 3:1. Both regimes give exact
  // dyadic shares, so the as-of week pins down the window bitwise.
  std::vector<double> a(20, 1.0), b(20, 1.0);
  for (size_t t = 12; t < 20; ++t) {
    a[t] = 3.0;
    b[t] = 1.0;
  }
  Dataset ds;
  ds.instances.push_back(make_series("S1", "RA", "V0", 0, a));
  ds.instances.push_back(make_series("S1", "RB", "V0", 0, b));

  const RegionRatios late = compute_ratios(ds, 19);  // window = weeks 12..19
  CHECK(late.skus[0].regions[0].ratio == 0.75);
  CHECK(late.skus[0].regions[1].ratio == 0.25);

  const RegionRatios early = compute_ratios(ds, 11);  // window = weeks 4..11
  CHECK(early.skus[0].regions[0].ratio == 0.5);
  CHECK(early.skus[0].regions[1].ratio == 0.5);
}

TEST_CASE("young products use the weeks they have") {
  // Series start four weeks before the as-of week, so only four of the
  // eight window weeks exist.
  Dataset ds;
  ds.instances.push_back(
      make_series("S1", "RA", "V0", 4, std::vector<double>(4, 6.0)));
  ds.instances.push_back(
      make_series("S1", "RB", "V0", 4, std::vector<double>(4, 4.0)));
  const RegionRatios rr = compute_ratios(ds, 7);
  const SkuRatios& sr = rr.skus[0];
  CHECK(sr.regions[0].weeks_used == 4);
  CHECK(sr.regions[0].ratio == doctest::Approx(0.6).epsilon(1e-12));
  CHECK_FALSE(sr.zero_history);
}

TEST_CASE("weeks with zero national demand contribute no samples") {
  // Alternating dead weeks: only the four live weeks count.
  std::vector<double> a{6, 0, 6, 0, 6, 0, 6, 0};
  std::vector<double> b{4, 0, 4, 0, 4, 0, 4, 0};
  Dataset ds;
  ds.instances.push_back(make_series("S1", "RA", "V0", 0, a));
  ds.instances.push_back(make_series("S1", "RB", "V0", 0, b));
  const RegionRatios rr = compute_ratios(ds, 7);
  const SkuRatios& sr = rr.skus[0];
  CHECK(sr.regions[0].weeks_used == 4);
  CHECK(sr.regions[0].ratio == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(sr.regions[1].ratio == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("a region with no sales keeps ratio zero") {
  Dataset ds;
  ds.instances.push_back(
      make_series("S1", "RA", "V0", 0, std::vector<double>(8, 5.0)));
  ds.instances.push_back(
      make_series("S1", "RB", "V0", 0, std::vector<double>(8, 0.0)));
  const RegionRatios rr = compute_ratios(ds, 7);
  const SkuRatios& sr = rr.skus[0];
  CHECK(sr.regions[0].ratio == 1.0);
  CHECK(sr.regions[1].ratio == 0.0);
  CHECK_FALSE(sr.zero_history);
  CHECK(sr.regions[1].weeks_used == 8);
}

TEST_CASE("zero history falls back to uniform ratios") {
  SUBCASE("all-zero demand inside the window") {
    Dataset ds;
    ds.instances.push_back(
        make_series("S1", "RA", "V0", 0, std::vector<double>(8, 0.0)));
    ds.instances.push_back(
        make_series("S1", "RB", "V0", 0, std::vector<double>(8, 0.0)));
    const RegionRatios rr = compute_ratios(ds, 7);
    const SkuRatios& sr = rr.skus[0];
    CHECK(sr.zero_history);
    CHECK(sr.regions[0].ratio == 0.5);
    CHECK(sr.regions[1].ratio == 0.5);
    CHECK(sr.regions[0].weeks_used == 0);
  }
  SUBCASE("series that end before the window") {
    Dataset ds;
    ds.instances.push_back(
        make_series("S1", "RA", "V0", 0, std::vector<double>(10, 5.0)));
    ds.instances.push_back(
        make_series("S1", "RB", "V0", 0, std::vector<double>(10, 5.0)));
    const RegionRatios rr = compute_ratios(ds, 100);
    CHECK(rr.skus[0].zero_history);
    CHECK(rr.skus[0].regions[0].weeks_used == 0);
    CHECK(rr.skus[0].regions[0].ratio == 0.5);
  }
  SUBCASE("a dead SKU does not disturb an active one") {
    Dataset ds;
    ds.instances.push_back(
        make_series("S1", "RA", "V0", 0, std::vector<double>(8, 0.0)));
    ds.instances.push_back(
        make_series("S2", "RA", "V0", 0, std::vector<double>(8, 3.0)));
    ds.instances.push_back(
        make_series("S2", "RB", "V0", 0, std::vector<double>(8, 1.0)));
    const RegionRatios rr = compute_ratios(ds, 7);
    REQUIRE(rr.skus.size() == 2);
    CHECK(rr.skus[0].sku_id == "S1");
    CHECK(rr.skus[0].zero_history);
    CHECK(rr.skus[0].regions[0].ratio == 1.0);  // uniform over one region
    CHECK(rr.skus[1].sku_id == "S2");
    CHECK(rr.skus[1].regions[0].ratio == 0.75);
  }
}

TEST_CASE("uniform demand scaling leaves ratios bitwise unchanged") {
  // Integer demands times 7 stay exact, and each weekly share is the
  // correctly rounded quotient of the same rational number, so the whole
  // computation replays on identical doubles.
  Rng rng(404);
  Dataset base;
  for (int s = 0; s < 3; ++s) {
    for (int r = 0; r < 3; ++r) {
      std::vector<double> demand(12);
      for (double& d : demand)
        d = static_cast<double>(rng.uniform_int(9));  // zeros included
      base.instances.push_back(make_series("S" + std::to_string(s),
                                           "R" + std::to_string(r), "V0", 0,
                                           std::move(demand)));
    }
  }
  Dataset scaled = base;
  for (SeriesInstance& inst : scaled.instances)
    for (double& d : inst.demand) d *= 7.0;

  const RegionRatios a = compute_ratios(base, 11);
  const RegionRatios b = compute_ratios(scaled, 11);
  REQUIRE(a.skus.size() == b.skus.size());
  for (size_t i = 0; i < a.skus.size(); ++i) {
    CHECK(a.skus[i].zero_history == b.skus[i].zero_history);
    REQUIRE(a.skus[i].regions.size() == b.skus[i].regions.size());
    for (size_t j = 0; j < a.skus[i].regions.size(); ++j) {
      CHECK(a.skus[i].regions[j].ratio == b.skus[i].regions[j].ratio);
      CHECK(a.skus[i].regions[j].weeks_used == b.skus[i].regions[j].weeks_used);
      CHECK(a.skus[i].regions[j].weeks_clipped ==
            b.skus[i].regions[j].weeks_clipped);
    }
  }
}

TEST_CASE("ratios from generated data sum to one and disaggregate back") {
  GeneratorConfig gc;
  gc.n_skus = 8;
  gc.n_verticals = 2;
  gc.n_regions = 4;
  gc.n_weeks = 20;
  gc.seed = 11;
  const Dataset ds = generate_synthetic(gc);
  const RegionRatios rr = compute_ratios(ds, 19);
  CHECK(rr.skus.size() == 8);
  for (const SkuRatios& sr : rr.skus) {
    REQUIRE(sr.regions.size() == 4);
    double sum = 0.0;
    for (const RegionShare& r : sr.regions) {
      CHECK(r.ratio >= 0.0);
      sum += r.ratio;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);

    const std::vector<double> real = disaggregate_real(123.456, sr);
    const double resum = std::accumulate(real.begin(), real.end(), 0.0);
    CHECK(std::abs(resum - 123.456) < 1e-9);

    const std::vector<int64_t> units = disaggregate_integer(1000, sr);
    CHECK(std::accumulate(units.begin(), units.end(), int64_t{0}) == 1000);
    for (int64_t u : units) CHECK(u >= 0);
  }
}

TEST_CASE("disaggregation re-sums across random ratio sets") {
  Rng rng(909);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = 1 + rng.uniform_int(6);
    std::vector<double> w(n);
    double sum = 0.0;
    for (double& v : w) {
      v = rng.uniform(1e-6, 1.0);
      sum += v;
    }
    for (double& v : w) v /= sum;
    const SkuRatios sr = make_ratios(w);

    const double national = rng.uniform(0.0, 1e6);
    const std::vector<double> real = disaggregate_real(national, sr);
    REQUIRE(real.size() == n);
    const double resum = std::accumulate(real.begin(), real.end(), 0.0);
    CHECK(std::abs(resum - national) <= 1e-9 * std::max(1.0, national));
    for (double v : real) CHECK(v >= 0.0);

    const int64_t total = static_cast<int64_t>(rng.uniform_int(1000000));
    const std::vector<int64_t> units = disaggregate_integer(total, sr);
    REQUIRE(units.size() == n);
    CHECK(std::accumulate(units.begin(), units.end(), int64_t{0}) == total);
    for (int64_t u : units) CHECK(u >= 0);
  }
}

TEST_CASE("disaggregation hand cases") {
  const SkuRatios sr = make_ratios({0.6, 0.4});
  const std::vector<double> real = disaggregate_real(100.0, sr);
  CHECK(real[0] == doctest::Approx(60.0).epsilon(1e-12));
  CHECK(real[1] == doctest::Approx(40.0).epsilon(1e-12));
  const std::vector<int64_t> units = disaggregate_integer(100, sr);
  CHECK(units == std::vector<int64_t>{60, 40});

  // 7 units at 50/50: the leftover unit goes to the lowest index.
  const std::vector<int64_t> odd =
      disaggregate_integer(7, make_ratios({0.5, 0.5}));
  CHECK(odd == std::vector<int64_t>{4, 3});

  CHECK(disaggregate_integer(0, sr) == std::vector<int64_t>{0, 0});
}

TEST_CASE("csv export and lookup") {
  Dataset ds;
  ds.instances.push_back(
      make_series("A", "R", "V0", 0, std::vector<double>(8, 5.0)));
  ds.instances.push_back(
      make_series("B", "R1", "V0", 0, std::vector<double>(8, 3.0)));
  ds.instances.push_back(
      make_series("B", "R2", "V0", 0, std::vector<double>(8, 1.0)));
  const RegionRatios rr = compute_ratios(ds, 7);

  CHECK(rr.to_csv() ==
        "sku_id,region_id,ratio,weeks_used\n"
        "A,R,1,8\n"
        "B,R1,0.75,8\n"
        "B,R2,0.25,8\n");

  REQUIRE(rr.find("B") != nullptr);
  CHECK(rr.find("B")->regions[0].region_id == "R1");
  CHECK(rr.find("missing") == nullptr);
}

TEST_CASE("errors reject unusable inputs") {
  CHECK_THROWS_WITH_AS(compute_ratios(Dataset{}, 7),
                       doctest::Contains("empty"), Error);

  SkuRatios empty;
  CHECK_THROWS_WITH_AS(disaggregate_real(10.0, empty),
                       doctest::Contains("no regions"), Error);
  CHECK_THROWS_WITH_AS(disaggregate_integer(10, empty),
                       doctest::Contains("no regions"), Error);

  const SkuRatios sr = make_ratios({0.5, 0.5});
  try {
    disaggregate_integer(-1, sr);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
    CHECK(std::string(e.what()).find("negative") != std::string::npos);
  }
}

}  // TEST_SUITE
