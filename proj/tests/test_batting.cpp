#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "grouplin/batting.hpp"
#include "grouplin/io.hpp"

using namespace grouplin;
using namespace grouplin::batting;

namespace {

// A small synthetic league: ability tied to playing time, pitchers weaker.
std::vector<BattingRecord> synthetic_league(std::uint64_t seed,
                                            std::size_t players = 120) {
  Rng rng(seed);
  std::vector<BattingRecord> out;
  out.reserve(players);
  for (std::size_t i = 0; i < players; ++i) {
    BattingRecord rec;
    rec.pitcher = i % 4 == 0;
    const double p =
        rec.pitcher ? rng.uniform(0.1, 0.2) : rng.uniform(0.2, 0.35);
    rec.n1 = 11 + static_cast<long>(rng.uniform01() * 300.0 * (p + 0.2));
    rec.n2 = 11 + static_cast<long>(rng.uniform01() * 300.0 * (p + 0.2));
    long h1 = 0, h2 = 0;
    for (long t = 0; t < rec.n1; ++t) h1 += rng.uniform01() < p ? 1 : 0;
    for (long t = 0; t < rec.n2; ++t) h2 += rng.uniform01() < p ? 1 : 0;
    rec.h1 = h1;
    rec.h2 = h2;
    rec.id = "p" + std::to_string(i);
    out.push_back(rec);
  }
  return out;
}

}  // namespace

TEST_CASE("arcsine_transform evaluates the stabilizing map") {
  const auto t = arcsine_transform(0, 11);
  CHECK(t.x == doctest::Approx(std::asin(std::sqrt(0.25 / 11.5))).epsilon(1e-15));
  CHECK(t.v == 1.0 / 44.0);

  const auto full = arcsine_transform(20, 20);
  CHECK(full.x < M_PI / 2.0);  // argument stays below 1
  CHECK(full.x == doctest::Approx(std::asin(std::sqrt(20.25 / 20.5))));

  // Doubling the at-bats halves the variance exactly.
  CHECK(arcsine_transform(5, 40).v == arcsine_transform(5, 20).v / 2.0);

  CHECK_THROWS_AS(arcsine_transform(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(arcsine_transform(5, 4), std::invalid_argument);
  CHECK_THROWS_AS(arcsine_transform(-1, 4), std::invalid_argument);
}

TEST_CASE("arcsine_transform is strictly increasing in hits") {
  for (long n : {11L, 50L, 600L}) {
    double prev = -1.0;
    for (long h = 0; h <= n; h += std::max(1L, n / 17)) {
      const double x = arcsine_transform(h, n).x;
      CHECK(x > prev);
      prev = x;
    }
  }
}

TEST_CASE("filter_eligibility applies the 11 at-bat rule per phase") {
  std::vector<BattingRecord> recs{
      {"a", 3, 10, 5, 30, false},   // short first half: excluded everywhere
      {"b", 4, 11, 0, 0, false},    // estimation only
      {"c", 4, 11, 5, 11, false},   // both
  };
  const auto est = filter_eligibility(recs, Phase::estimation);
  REQUIRE(est.size() == 2);
  CHECK(est[0].id == "b");
  CHECK(est[1].id == "c");
  const auto val = filter_eligibility(recs, Phase::validation);
  REQUIRE(val.size() == 1);
  CHECK(val[0].id == "c");
}

TEST_CASE("tse charges the noise correction and normalizes the naive rule "
          "to one") {
  const auto recs = synthetic_league(5);
  const auto val = filter_eligibility(recs, Phase::validation);
  REQUIRE(!val.empty());

  std::unordered_map<std::string, double> perfect, naive_est;
  double correction = 0.0;
  for (const auto& rec : val) {
    perfect[rec.id] = arcsine_transform(rec.h2, rec.n2).x;
    naive_est[rec.id] = arcsine_transform(rec.h1, rec.n1).x;
    correction += 1.0 / (4.0 * static_cast<double>(rec.n2));
  }
  const auto perfect_result = tse(perfect, val);
  CHECK(perfect_result.tse == doctest::Approx(-correction).epsilon(1e-12));

  const auto naive_result = tse(naive_est, val);
  CHECK(naive_result.ratio == doctest::Approx(1.0).epsilon(1e-15));

  std::unordered_map<std::string, double> missing;
  CHECK_THROWS_AS(tse(missing, val), std::out_of_range);
}

TEST_CASE("hypergeometric_shuffle conserves totals for every seed") {
  const auto recs = synthetic_league(9, 40);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (const auto& rec : recs) {
      const auto s = hypergeometric_shuffle(rec, seed);
      CHECK(s.h1 + s.h2 == rec.h1 + rec.h2);
      CHECK(s.n1 == rec.n1);
      CHECK(s.n2 == rec.n2);
      CHECK(s.h1 >= 0);
      CHECK(s.h1 <= s.n1);
      CHECK(s.h2 >= 0);
      CHECK(s.h2 <= s.n2);
    }
  }
}

TEST_CASE("hypergeometric_shuffle degenerate records are fixed points") {
  BattingRecord zero{"z", 0, 30, 0, 40, false};
  CHECK(hypergeometric_shuffle(zero, 3).h1 == 0);
  BattingRecord all{"a", 30, 30, 40, 40, false};
  CHECK(hypergeometric_shuffle(all, 3).h1 == 30);
}

TEST_CASE("the hypergeometric sampler reproduces exact small-case masses") {
  // HG(total=5, marked=3, draws=2): P(0,1,2) = 1/10, 6/10, 3/10.
  Rng rng(606);
  const int reps = 100000;
  int counts[3] = {0, 0, 0};
  for (int r = 0; r < reps; ++r) {
    const long k = rng.hypergeometric(5, 3, 2);
    REQUIRE(k >= 0);
    REQUIRE(k <= 2);
    ++counts[k];
  }
  const double want[3] = {0.1, 0.6, 0.3};
  for (int k = 0; k < 3; ++k) {
    const double freq = static_cast<double>(counts[k]) / reps;
    const double se = std::sqrt(want[k] * (1.0 - want[k]) / reps);
    CHECK(std::abs(freq - want[k]) <= 3.0 * se);
  }
}

TEST_CASE("hypergeometric_shuffle matches the hypergeometric mean") {
  const BattingRecord rec{"m", 150, 300, 90, 250, false};
  const long total = rec.n1 + rec.n2;
  const long hits = rec.h1 + rec.h2;
  const double mean_want = static_cast<double>(rec.n1) *
                           static_cast<double>(hits) /
                           static_cast<double>(total);
  const double p = static_cast<double>(hits) / static_cast<double>(total);
  const double var = static_cast<double>(rec.n1) * p * (1.0 - p) *
                     static_cast<double>(total - rec.n1) /
                     static_cast<double>(total - 1);
  Rng rng(2718);
  const int reps = 100000;
  double mean = 0.0;
  for (int r = 0; r < reps; ++r) {
    mean += static_cast<double>(hypergeometric_shuffle(rec, rng).h1) / reps;
  }
  CHECK(std::abs(mean - mean_want) <= 3.0 * std::sqrt(var / reps));
}

TEST_CASE("run_table produces one row per method with per-subset cells") {
  const auto recs = synthetic_league(12);
  const std::vector<MethodSpec> methods{parse_method("naive"),
                                        parse_method("grand-mean"),
                                        parse_method("gl")};
  const std::vector<Subset> subsets{Subset::all, Subset::pitchers,
                                    Subset::non_pitchers};
  const auto report = run_table(recs, methods, subsets, 8, 99);
  REQUIRE(report.rows.size() == 3);
  REQUIRE(report.rows[0].cells.size() == 3);
  for (const auto& cell : report.rows[0].cells) {
    CHECK(cell.original == doctest::Approx(1.0).epsilon(1e-15));  // naive
    CHECK(cell.shuffled_mean == doctest::Approx(1.0).epsilon(1e-15));
  }
  // Pipeline determinism.
  const auto again = run_table(recs, methods, subsets, 8, 99);
  for (std::size_t m = 0; m < report.rows.size(); ++m) {
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      CHECK(report.rows[m].cells[s].original ==
            again.rows[m].cells[s].original);
      CHECK(report.rows[m].cells[s].shuffled_mean ==
            again.rows[m].cells[s].shuffled_mean);
    }
  }
}

TEST_CASE("run_table with zero shuffles skips the permutation analysis") {
  const auto recs = synthetic_league(21, 60);
  const std::vector<MethodSpec> methods{parse_method("gl")};
  const std::vector<Subset> subsets{Subset::all};
  const auto report = run_table(recs, methods, subsets, 0, 4);
  CHECK(report.shuffle_rounds == 0);
  CHECK(report.rows[0].cells[0].shuffled_mean == 0.0);
  CHECK(report.rows[0].cells[0].original != 0.0);
}

TEST_CASE("shrinkage methods beat the naive predictor on a shared-ability "
          "league") {
  // Everyone bats ~0.25, so pooling toward the mean must help.
  Rng rng(31);
  std::vector<BattingRecord> recs;
  for (std::size_t i = 0; i < 150; ++i) {
    BattingRecord rec;
    rec.id = "s" + std::to_string(i);
    rec.pitcher = false;
    rec.n1 = 11 + static_cast<long>(rng.uniform01() * 400);
    rec.n2 = 11 + static_cast<long>(rng.uniform01() * 400);
    const double p = 0.25;
    for (long t = 0; t < rec.n1; ++t) rec.h1 += rng.uniform01() < p ? 1 : 0;
    for (long t = 0; t < rec.n2; ++t) rec.h2 += rng.uniform01() < p ? 1 : 0;
    recs.push_back(rec);
  }
  for (const char* token : {"grand-mean", "js", "sure-m", "sure-sg", "gl"}) {
    CHECK(relative_tse(recs, parse_method(token)) < 1.0);
  }
}

TEST_CASE("read_batting_csv parses well-formed input") {
  std::istringstream in(
      "id,h1,n1,h2,n2,pitcher\n"
      "jones,30,100,25,90,0\n"
      "smith,5,40,2,20,1\n");
  const auto recs = read_batting_csv(in, "test.csv");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].id == "jones");
  CHECK(recs[0].h1 == 30);
  CHECK(recs[0].n2 == 90);
  CHECK(!recs[0].pitcher);
  CHECK(recs[1].pitcher);
}

TEST_CASE("read_batting_csv reports line-numbered errors") {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      read_batting_csv(in, "bad.csv");
      FAIL("expected a data_error");
    } catch (const data_error& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error("", "empty");
  expect_error("id,h1,n1\n", "header");
  expect_error("id,h1,n1,h2,n2,pitcher\nx,1,2\n", "bad.csv:2");
  expect_error("id,h1,n1,h2,n2,pitcher\nx,9,5,0,11,0\n", "exceed");
  expect_error("id,h1,n1,h2,n2,pitcher\nx,1,20,0,11,maybe\n", "pitcher");
  expect_error("id,h1,n1,h2,n2,pitcher\n", "no data rows");
}
