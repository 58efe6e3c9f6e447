#include <doctest.h>

#include "ccl/metric.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

using ccl::MetricSpace;

TEST_CASE("feature rows: collinear equal spacing normalizes to 1,2") {
  auto m = MetricSpace::from_feature_rows({{0, 0}, {0, 3}, {0, 6}});
  CHECK(m.size() == 3);
  CHECK(m(0, 1) == doctest::Approx(1.0));
  CHECK(m(1, 2) == doctest::Approx(1.0));
  CHECK(m(0, 2) == doctest::Approx(2.0));
  CHECK(m.delta() == doctest::Approx(2.0));
  CHECK(m.min_nonzero() == 1.0);
}

TEST_CASE("feature rows: two points") {
  auto m = MetricSpace::from_feature_rows({{0, 0}, {1, 0}});
  CHECK(m(0, 1) == 1.0);
  CHECK(m.delta() == 1.0);
}

TEST_CASE("feature rows: gaussian triangle inequality over all triples") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> rows(20, std::vector<double>(4));
  for (auto& r : rows)
    for (auto& v : r) v = g(rng);
  auto m = MetricSpace::from_feature_rows(rows);
  int triples = 0;
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = i + 1; j < 20; ++j)
      for (std::size_t k = j + 1; k < 20; ++k) {
        ++triples;
        CHECK(m(i, k) <= m(i, j) + m(j, k) + 1e-9);
        CHECK(m(i, j) <= m(i, k) + m(k, j) + 1e-9);
        CHECK(m(j, k) <= m(j, i) + m(i, k) + 1e-9);
      }
  CHECK(triples == 1140);
  CHECK(m.min_nonzero() == 1.0);
}

TEST_CASE("feature rows: duplicates allowed, errors reported") {
  auto m = MetricSpace::from_feature_rows({{1, 1}, {1, 1}, {3, 1}});
  CHECK(m(0, 1) == 0.0);
  CHECK(m(0, 2) == 1.0);
  CHECK_THROWS_AS(MetricSpace::from_feature_rows({}), ccl::MetricError);
  CHECK_THROWS_AS(MetricSpace::from_feature_rows({{0, 0}, {1}}), ccl::MetricError);
  CHECK_THROWS_AS(MetricSpace::from_feature_rows({{2, 2}, {2, 2}}), ccl::MetricError);
}

TEST_CASE("table: rejects non-metrics") {
  CHECK_THROWS_AS(MetricSpace::from_table({0, 1, 2, 0}, 2, false), ccl::MetricError);
  CHECK_THROWS_AS(MetricSpace::from_table({0, 1, 5, 1, 0, 1, 5, 1, 0}, 3, false), ccl::MetricError);
  CHECK_THROWS_AS(MetricSpace::from_table({0, 0.5, 0.5, 0}, 2, false), ccl::MetricError);
  CHECK_NOTHROW(MetricSpace::from_table({0, 2, 2, 0}, 2, false));
}

TEST_CASE("hst: spec distances") {
  auto h1 = ccl::build_hst(1, 1.0);
  CHECK(h1.leaves.size() == 2);
  CHECK(h1.leaves(0, 1) == 2.0);

  auto h2 = ccl::build_hst(2, 1.0);
  CHECK(h2.leaves(0, 1) == 2.0);
  CHECK(h2.leaves(2, 3) == 2.0);
  CHECK(h2.leaves(0, 2) == 10.0);
  CHECK(h2.leaves(1, 3) == 10.0);

  auto h3 = ccl::build_hst(3, 2.0);
  CHECK(h3.leaves.delta() == 146.0);
  CHECK_THROWS_AS(ccl::build_hst(0, 2.0), ccl::MetricError);
}

TEST_CASE("hst: lca distance formula and node coordinates") {
  for (int h = 1; h <= 5; ++h) {
    for (double c : {1.0, 1.5, 2.0}) {
      auto t = ccl::build_hst(h, c);
      const std::size_t n = t.num_leaves();
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          int lca = 0;
          while ((a >> lca) != (b >> lca)) ++lca;
          double want = 0.0;
          for (int k = 0; k < lca; ++k) want += 2.0 * std::pow(4.0 * c, k);
          CHECK(t.leaves(a, b) == doctest::Approx(want));
          CHECK(t.nodes(a, b) == t.leaves(a, b));
        }
      // leaf to ancestor
      for (int level = 0; level <= h; ++level) {
        double up = 0.0;
        for (int k = 0; k < level; ++k) up += std::pow(4.0 * c, k);
        CHECK(t.nodes(0, t.node_index(level, 0)) == doctest::Approx(up));
        auto [lo, hi] = t.leaf_range(level, 0);
        CHECK(lo == 0);
        CHECK(hi == (std::size_t{1} << level));
      }
      CHECK(t.nodes.size() == 2 * n - 1);
    }
  }
}

TEST_CASE("ball queries") {
  auto m = MetricSpace::from_table({0, 1, 2, 1, 0, 1, 2, 1, 0}, 3, false);
  CHECK(m.ball(1, 1.0) == std::vector<std::size_t>{0, 1, 2});
  CHECK(m.ball(1, 0.0) == std::vector<std::size_t>{1});
  auto d = MetricSpace::from_feature_rows({{0}, {0}, {1}});
  CHECK(d.ball(0, 0.0) == std::vector<std::size_t>{0, 1});
  std::vector<std::size_t> uni{0, 2};
  CHECK(d.ball(0, 0.0, uni) == std::vector<std::size_t>{0});

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 10);
  std::vector<std::vector<double>> rows(20, std::vector<double>(3));
  for (auto& r : rows)
    for (auto& v : r) v = u(rng);
  auto r20 = MetricSpace::from_feature_rows(rows);
  CHECK(r20.ball(5, r20.delta()).size() == 20);
}

TEST_CASE("csv ingestion: header detection and non-numeric columns") {
  const std::string path = "ccl_test_ingest.csv";
  {
    std::ofstream f(path);
    f << "a,name,b\n1,x,2\n3,y,4\n\n5,\"z,w\",6\n";
  }
  auto d = ccl::read_numeric_csv(path);
  CHECK(d.had_header);
  REQUIRE(d.rows.size() == 3);
  CHECK(d.rows[2] == std::vector<double>{5, 6});
  REQUIRE(d.warnings.size() == 1);
  CHECK(d.warnings[0] == "dropping non-numeric column name");
  {
    std::ofstream f(path);
    f << "1.5,2\n-3,4e1\n";
  }
  auto e = ccl::read_numeric_csv(path);
  CHECK_FALSE(e.had_header);
  CHECK(e.rows[1] == std::vector<double>{-3, 40});
  std::remove(path.c_str());
  CHECK_THROWS_AS(ccl::read_numeric_csv("does/not/exist.csv"), ccl::MetricError);
}
