#pragma once

#include "ccl/body.hpp"
#include "ccl/metric.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ccl {

enum class Problem { kKCenter, kFacility, kKMedian };

const char* to_string(Problem p);
/// Parses "kcenter", "facility" or "kmedian"; throws std::invalid_argument.
Problem parse_problem(const std::string& s);

/// Candidate facility locations with opening costs (all zero outside
/// facility location).
struct Facilities {
  std::vector<std::size_t> points;
  std::vector<double> cost;

  std::size_t size() const noexcept { return points.size(); }
  /// Every point of the metric, with a uniform opening cost.
  static Facilities all(const MetricSpace& m, double uniform_cost = 0.0);
};

/// Client multiplicities: empty means every client counts once.
using Multiplicity = std::span<const double>;

/// Smallest radius D such that {sum_{i in F, d_ij <= D} x_i >= 1 for all
/// clients j, sum x <= k, x >= 0} is feasible. `hint` is a radius to probe
/// first (the previous optimum) and may be negative.
double opt_kcenter(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                   std::size_t k, double hint = -1.0);

/// Fractional facility location optimum.
double opt_facility(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                    Multiplicity mult = {});

/// Fractional k-median optimum.
double opt_kmedian(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                   std::size_t k, Multiplicity mult = {});

/// k-center body over x indexed by facility position, balls of radius D.
Body build_body_kcenter(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                        std::size_t k, double radius);

/// Variable layout of the facility-location and k-median bodies: x_i for
/// i < |F|, then y for client position j and facility position i at
/// |F| + j*|F| + i.
inline std::size_t y_index(std::size_t num_facilities, std::size_t client_pos, std::size_t facility_pos) {
  return num_facilities + client_pos * num_facilities + facility_pos;
}

Body build_body_facility(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                         double beta, double opt, Multiplicity mult = {});

Body build_body_kmedian(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                        std::size_t k, double beta, double opt, Multiplicity mult = {});

struct ModelParams {
  Problem problem = Problem::kKCenter;
  std::size_t k = 1;
  double beta = 1.5;
  double eps = 0.25;
};

struct StepReport {
  double opt = 0.0;
  double radius = 0.0;  // D^t = min(beta*opt, delta) for k-center, 0 otherwise
  double movement = 0.0;
};

/// Advances the fractional solution through a sequence of client sets by
/// recomputing the optimum, rebuilding the body and projecting.
class FractionalMaintainer {
 public:
  FractionalMaintainer(const MetricSpace& m, Facilities f, ModelParams params);

  /// Clients are point indices; a point appears at most once. Assignment
  /// rows of clients present in consecutive steps carry over.
  StepReport step(std::span<const std::size_t> clients, Multiplicity mult = {});

  const MetricSpace& metric() const noexcept { return *metric_; }
  const Facilities& facilities() const noexcept { return fac_; }
  const ModelParams& params() const noexcept { return params_; }
  const std::vector<std::size_t>& clients() const noexcept { return clients_; }
  const std::vector<double>& multiplicity() const noexcept { return mult_; }

  /// Facility openings, indexed by facility position.
  std::span<const double> x() const noexcept { return {state_.x.data(), fac_.size()}; }
  /// Assignment row of the client at position `client_pos` (empty for k-center).
  std::span<const double> y(std::size_t client_pos) const;
  const std::vector<double>& raw_state() const noexcept { return state_.x; }
  const Body& body() const noexcept { return body_; }
  double cumulative_movement() const noexcept { return state_.cumulative_movement; }
  double opt() const noexcept { return last_.opt; }
  double radius() const noexcept { return last_.radius; }
  /// Fractional objective of the current point (facility location / k-median).
  double fractional_cost() const;

 private:
  const MetricSpace* metric_;
  Facilities fac_;
  ModelParams params_;
  std::vector<std::size_t> clients_;
  std::vector<double> mult_;
  FractionalState state_;
  Body body_;
  StepReport last_;
};

}  // namespace ccl
