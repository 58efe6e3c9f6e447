#pragma once

#include "ccl/rounding.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ccl {

struct KCenterParams {
  double alpha = 3.0 + 2.0 * std::sqrt(2.0);
  double delta = std::sqrt(2.0);
  double eta = 1.0 / std::log2(2.0 + std::sqrt(2.0));
  double eps = 0.25;  // balls below mass 1 - eps are dropped

  /// Ratio a conflicting ball's radius must exceed: alpha - delta - 1.
  double conflict_ratio() const noexcept { return alpha - delta - 1.0; }
};

/// Largest k-center objective: max over clients of the distance to the
/// nearest center (0 without clients, infinity without centers).
double kcenter_objective(const MetricSpace& m, std::span<const std::size_t> clients,
                         std::span<const std::size_t> centers);

/// Online k-center rounding: well-separated balls of radius D^t around
/// chosen centers, each holding fractional mass at least 1 - eps.
class KCenterRounding {
 public:
  /// Every point is a candidate center; x is indexed by point.
  KCenterRounding(const MetricSpace& m, std::size_t k, KCenterParams params = {}, bool strict = true);

  /// One step with fractional solution x and radius D = min(beta*OPT, Delta).
  RoundingStep step(std::size_t t, std::span<const std::size_t> clients, std::span<const double> x, double radius);

  double potential(std::span<const double> x) const { return engine_.potential(x); }
  /// Balls in conflict with a new ball (j, D). Asserts at most one, larger
  /// than (alpha - delta - 1) * D.
  std::vector<std::size_t> check_onedrop(std::size_t client, double radius);

  /// Centers (point indices, sorted).
  std::vector<std::size_t> centers() const { return engine_.open_facilities(); }
  std::size_t num_centers() const noexcept { return engine_.balls().size(); }
  /// Loop guard for a step with `num_clients` clients.
  std::size_t guard(std::size_t num_clients) const;
  /// (1 + 2 eps)(1 + eps) k.
  double center_bound() const noexcept;

  const BallRounding& engine() const noexcept { return engine_; }
  BallRounding& engine() noexcept { return engine_; }
  const KCenterParams& params() const noexcept { return params_; }
  std::size_t k() const noexcept { return k_; }

 private:
  KCenterParams params_;
  std::size_t k_;
  BallRounding engine_;
};

/// Run-level recourse accounting, from the per-event inequalities summed
/// over a run.
struct RecourseBounds {
  double drops = 0.0;
  double potential_bound = 0.0;  // move credit minus the final potential
  double movement_bound = 0.0;   // explicit constant times the movement
  double recourse = 0.0;
  double recourse_bound = 0.0;   // 2 * drops + final centers
  bool holds() const noexcept {
    return drops <= potential_bound + kSlackTol && drops <= movement_bound + kSlackTol &&
           recourse <= recourse_bound + kSlackTol;
  }
};

/// Checks drops <= move credit - final potential, drops <= the movement
/// bound `movement_bound` and recourse <= 2 drops + |S_T|.
RecourseBounds recourse_bounds(const BallRounding& engine, std::span<const double> final_x, double movement_bound,
                               double total_recourse);

}  // namespace ccl
