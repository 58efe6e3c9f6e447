#include <doctest.h>

#include "ccl/lower_bounds.hpp"

#include <sstream>

using namespace ccl;

TEST_CASE("k-center adversary requests") {
  const Hst hst = build_hst(3, 1.0);
  HstAdversary adv(Problem::kKCenter, hst);
  const std::vector<double> uniform(8, 0.125);
  auto r = adv.next(uniform);
  CHECK(r.t == 0);
  CHECK(r.clients == std::vector<std::size_t>{0, 7});
  CHECK(r.removed.empty());
  // equal halves descend right, so uniform mass walks the rightmost path
  r = adv.next(uniform);
  CHECK(r.clients == std::vector<std::size_t>{4, 7});
  CHECK(r.removed == std::vector<std::size_t>{0, 7});
  r = adv.next(uniform);
  CHECK(r.clients == std::vector<std::size_t>{6, 7});
  r = adv.next(uniform);
  CHECK(r.t == 3);
  CHECK(r.clients == std::vector<std::size_t>{7});
  CHECK(adv.final_leaf() == 7);
  r = adv.next(uniform);
  CHECK(r.teardown);
  CHECK(r.clients.empty());
  r = adv.next(uniform);
  CHECK(r.phase == 1);
  CHECK(r.clients == std::vector<std::size_t>{0, 7});
}

TEST_CASE("adversary descends into the lighter child") {
  const Hst hst = build_hst(3, 1.0);
  HstAdversary adv(Problem::kKCenter, hst);
  std::vector<double> mass(8, 0.0);
  adv.next(mass);
  mass[7] = 1.0;  // right subtree heavier
  const auto r = adv.next(mass);
  CHECK(r.clients == std::vector<std::size_t>{0, 3});
}

TEST_CASE("facility adversary requests") {
  const Hst hst = build_hst(3, 1.0);
  HstAdversary adv(Problem::kFacility, hst);
  CHECK(adv.opening_cost() == 16.0);
  const std::vector<double> uniform(8, 0.125);
  auto r = adv.next(uniform);
  REQUIRE(r.clients.size() == 1);
  CHECK(r.clients[0] == hst.node_index(3, 0));
  CHECK(r.mult == std::vector<double>{1.0});
  adv.next(uniform);
  r = adv.next(uniform);
  CHECK(r.t == 2);
  CHECK(r.mult == std::vector<double>{16.0});
  CHECK(r.clients[0] == hst.node_index(1, 3));
}

TEST_CASE("k-center lower bound: h=6, c=2") {
  const auto rep = run_adversary(Problem::kKCenter, 6, 2.0, 5, 1.5, 0.125);
  REQUIRE(rep.phases.size() == 5);
  CHECK(rep.min_movement() >= 1.25);
  for (const auto& p : rep.phases) {
    CHECK(p.comparator_recourse == 1.0);
    CHECK(p.ratio >= 1.25);
  }
  CHECK(rep.opt_checks == 30);
  CHECK(rep.opt_failures == 0);
  CHECK(rep.comparator_failures == 0);
  CHECK(rep.canary_failures == 0);
  CHECK(rep.rounding_violations == 0);
  CHECK(rep.conflict_failures == 0);
}

TEST_CASE("facility lower bound: h=5, c=2") {
  const auto rep = run_adversary(Problem::kFacility, 5, 2.0, 3, 1.5, 0.125);
  CHECK(rep.min_movement() >= 1.0);
  CHECK(rep.comparator_failures == 0);
  CHECK(rep.canary_failures == 0);
  CHECK(rep.rounding_violations == 0);
}

TEST_CASE("k-median lower bound: h=6, c=2") {
  const auto rep = run_adversary(Problem::kKMedian, 6, 2.0, 3, 1.5, 0.125);
  CHECK(rep.min_movement() >= 1.25);
  CHECK(rep.opt_failures == 0);
  CHECK(rep.comparator_failures == 0);
  CHECK(rep.rounding_violations == 0);
}

TEST_CASE("movement per phase grows with the height") {
  double last = 0.0;
  for (int h : {4, 6, 8}) {
    const auto rep = run_adversary(Problem::kKCenter, h, 2.0, 2, 1.5, 0.125);
    CHECK(rep.min_movement() >= (h - 1) / 4.0);
    CHECK(rep.mean_movement() > last);
    last = rep.mean_movement();
  }
}

TEST_CASE("adversary preconditions and report") {
  CHECK_THROWS_AS(run_adversary(Problem::kKCenter, 4, 1.5, 1, 1.5, 0.125), std::invalid_argument);
  const auto rep = run_adversary(Problem::kKCenter, 3, 2.0, 2, 1.5, 0.125);
  std::ostringstream os;
  write_adversary_csv(os, rep);
  const std::string s = os.str();
  CHECK(s.rfind("phase,measured_movement,comparator_recourse,ratio,h,c\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 3);
}
