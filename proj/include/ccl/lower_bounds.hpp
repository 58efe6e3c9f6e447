#pragma once

#include "ccl/fractional.hpp"
#include "ccl/metric.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ccl {

/// Requests of one adversary round. Client points index the metric the
/// problem runs on: HST leaves for k-center and k-median, all HST nodes for
/// facility location.
struct AdversaryRound {
  std::size_t phase = 0;
  std::size_t t = 0;  // round within the phase; t = height is the final leaf
  int level = 0;      // level of the current node
  std::size_t pos = 0;
  std::vector<std::size_t> clients;
  std::vector<double> mult;
  std::vector<std::size_t> removed;  // clients of the previous round
  bool teardown = false;             // every client removed, phase restarts next
};

/// Adaptive request generator on a (4c)-HST. Each round it descends into
/// the child subtree holding less fractional mass (ties go right).
class HstAdversary {
 public:
  HstAdversary(Problem problem, const Hst& hst);

  /// Next round given the maintainer's mass per leaf after the last round.
  AdversaryRound next(std::span<const double> leaf_mass);

  const Hst& hst() const noexcept { return *hst_; }
  Problem problem() const noexcept { return problem_; }
  /// Metric the maintainer runs on and its facilities.
  const MetricSpace& metric() const noexcept;
  Facilities facilities() const;
  /// Uniform opening cost (4c)^(h-1) for facility location, 0 otherwise.
  double opening_cost() const;
  /// Final leaf of the phase, valid once round t = height was emitted.
  std::size_t final_leaf() const noexcept { return pos_; }

 private:
  std::vector<std::size_t> clients_at(int level, std::size_t pos) const;

  Problem problem_;
  const Hst* hst_;
  std::size_t phase_ = 0;
  std::size_t t_ = 0;
  int level_ = 0;
  std::size_t pos_ = 0;
  std::vector<std::size_t> last_;
};

struct PhaseReport {
  std::size_t phase = 0;
  double movement = 0.0;
  double comparator_recourse = 1.0;
  double ratio = 0.0;
  int h = 0;
  double c = 0.0;
};

struct AdversaryReport {
  Problem problem = Problem::kKCenter;
  int h = 0;
  double c = 0.0;
  double beta = 0.0;
  double eps = 0.0;
  std::vector<PhaseReport> phases;
  std::size_t rounds = 0;
  std::size_t opt_checks = 0;
  std::size_t opt_failures = 0;         // exact optimum or comparator-cost mismatch
  std::size_t comparator_failures = 0;  // comparator above its stated cost
  std::size_t canary_triggers = 0;      // subtree mass <= 1/2 seen
  std::size_t canary_failures = 0;      // triggered without the cost exceeding c * opt
  std::size_t rounding_violations = 0;
  std::size_t conflict_checks = 0;
  std::size_t conflict_failures = 0;
  std::vector<std::string> notes;

  double min_movement() const;
  double mean_movement() const;
};

/// Drives a projection maintainer with parameters (beta, eps) against the
/// adversary for `phases` phases, rounding alongside with every assertion
/// recorded. Requires beta (1 + eps) < c.
AdversaryReport run_adversary(Problem problem, int height, double c, std::size_t phases, double beta, double eps);

inline constexpr const char* kAdversaryHeader = "phase,measured_movement,comparator_recourse,ratio,h,c";
void write_adversary_csv(std::ostream& os, const AdversaryReport& r);

}  // namespace ccl
