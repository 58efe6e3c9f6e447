#pragma once

#include "ccl/fractional.hpp"
#include "ccl/metric.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccl {

/// Radius floor inside the logarithmic potential term. Balls of radius below
/// 1 only contain points at distance 0, so any floor under the smallest
/// radius a conflicting ball can have keeps the accounting intact.
inline constexpr double kRadiusFloor = 1.0 / 16.0;

/// Slack allowed on every per-event potential inequality.
inline constexpr double kSlackTol = 1e-9;

class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EventKind { kAdd, kDrop };
enum class DropReason { kNone, kLowMass, kSeparation };

const char* to_string(DropReason r);

struct RoundingEvent {
  std::size_t t = 0;
  EventKind kind = EventKind::kAdd;
  DropReason reason = DropReason::kNone;
  std::size_t client = 0;    // point at the ball center
  std::size_t facility = 0;  // facility position opened or closed
  double radius = 0.0;
};

struct Ball {
  std::size_t client = 0;
  std::size_t facility = 0;
  double radius = 0.0;
  std::size_t birth = 0;
  double birth_mass = 0.0;
  std::vector<std::size_t> members;  // facility positions within radius
};

/// Constants of one ball-rounding scheme.
struct BallRule {
  double alpha = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  double keep_mass = 0.0;       // balls whose mass falls below are dropped
  double birth_mass = 0.0;      // mass guaranteed when a ball is created
  double target = 0.0;          // deficit target in the potential
  double coef = 0.0;            // deficit coefficient in the potential
  double conflict_ratio = 0.0;  // a conflicting ball is larger by this factor
  double top = 1.0;             // radius reference of the log term (Delta)
  bool open_center = false;     // the center itself is the opened facility
};

/// Running account of the potential argument and of every assertion.
struct RoundingAudit {
  std::size_t low_mass_drops = 0;
  std::size_t separation_drops = 0;
  std::size_t adds = 0;
  std::size_t events = 0;
  std::size_t conflict_checks = 0;
  std::size_t conflict_failures = 0;
  std::size_t max_conflicts = 0;
  double min_conflict_ratio = std::numeric_limits<double>::infinity();
  double min_slack = std::numeric_limits<double>::infinity();
  double move_credit = 0.0;  // sum of the right-hand sides of move events
  std::size_t invariant_checks = 0;
  std::vector<std::string> violations;

  std::size_t drops() const noexcept { return low_mass_drops + separation_drops; }
};

struct RoundingStep {
  std::vector<RoundingEvent> events;
  std::size_t recourse = 0;  // |S^t (+) S^(t-1)|
  std::size_t iterations = 0;
};

/// Inputs of one rounding step. Clients are point indices; `cover[j]` is the
/// coverage radius and `birth_radius[j]` the radius a new ball around
/// clients[j] would get.
struct RoundingInput {
  std::size_t t = 0;
  std::span<const std::size_t> clients;
  std::span<const double> x;  // by facility position
  std::span<const double> cover;
  std::span<const double> birth_radius;
  std::size_t guard = 0;
};

/// Shared engine of the ball-based rounding schemes: low-mass drops, then
/// repeated covering of the lowest-index uncovered client with a new ball
/// that evicts every ball too close to it. Every event is checked against
/// the potential inequality it must satisfy.
class BallRounding {
 public:
  BallRounding(const MetricSpace& m, Facilities f, BallRule rule, bool strict = true);

  RoundingStep step(const RoundingInput& in);

  /// Potential of the current balls under `x`.
  double potential(std::span<const double> x) const;
  double mass(const Ball& b, std::span<const double> x) const;
  /// Balls (as indices into balls()) in conflict with a new ball of radius
  /// `radius` at point `client`.
  std::vector<std::size_t> conflicts(std::size_t client, double radius) const;
  /// Violated invariants after a step (empty when all hold).
  std::vector<std::string> check_invariants(const RoundingInput& in) const;

  const std::vector<Ball>& balls() const noexcept { return balls_; }
  /// Opened facility positions (sorted, one entry per ball).
  std::vector<std::size_t> open_facilities() const;
  const RoundingAudit& audit() const noexcept { return audit_; }
  const BallRule& rule() const noexcept { return rule_; }
  const MetricSpace& metric() const noexcept { return *metric_; }
  const Facilities& facilities() const noexcept { return fac_; }
  /// log2(top / floor): the largest value of a log term.
  double log_span() const noexcept;
  std::string dump() const;
  /// Records a violation found by a caller; throws in strict mode.
  void flag(const std::string& what) { fail(what); }

 private:
  std::vector<std::size_t> members(std::size_t client, double radius) const;
  std::size_t choose_facility(std::size_t client, const std::vector<std::size_t>& members) const;
  double distance_to_open(std::size_t client) const;
  void record_slack(double slack, std::size_t t, const char* what);
  void fail(const std::string& what);

  const MetricSpace* metric_;
  Facilities fac_;
  BallRule rule_;
  bool strict_;
  std::vector<Ball> balls_;
  std::vector<double> prev_x_;
  RoundingAudit audit_;
};

}  // namespace ccl
