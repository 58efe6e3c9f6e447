#pragma once

#include "ccl/fractional.hpp"
#include "ccl/rounding.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ccl {

struct FacilityParams {
  double alpha = 11.0;
  double delta = 2.0;
  double gamma = 10.0 / 9.0;
  double eta = 1.0 / std::log2((11.0 - (10.0 / 9.0) * 3.0) / (2.0 * 10.0 / 9.0));

  /// (alpha - gamma (1 + delta)) / (2 gamma) = 2^(1/eta).
  double conflict_ratio() const noexcept { return (alpha - gamma * (1.0 + delta)) / (2.0 * gamma); }
};

/// R_j = sum_i d_ij y_ij for the client at point `client`, with y indexed by
/// facility position.
double fractional_service_cost(const MetricSpace& m, const Facilities& f, std::size_t client,
                               std::span<const double> y);

/// Service costs of every current client of a facility-location or
/// k-median maintainer, in client order.
std::vector<double> service_costs(const FractionalMaintainer& fm);

/// sum_j mult_j min_{i open} d_ij, plus the opening cost of every open
/// position when `with_opening`.
double facility_objective(const MetricSpace& m, const Facilities& f, std::span<const std::size_t> clients,
                          Multiplicity mult, std::span<const std::size_t> open, bool with_opening);

/// Integral cost split against the fractional cost.
struct Decomposition {
  double service = 0.0;
  double service_bound = 0.0;  // alpha * sum_j mult_j R_j
  double opening = 0.0;
  double opening_bound = 0.0;  // alpha * sum_i f_i x_i
  bool holds() const noexcept {
    return service <= service_bound + 1e-6 && opening <= opening_bound + 1e-6;
  }
};

/// Online facility-location rounding: active clients with disjoint balls of
/// radius gamma R_j, each opening its cheapest in-ball facility.
class FacilityRounding {
 public:
  FacilityRounding(const MetricSpace& m, Facilities f, FacilityParams params = {}, bool strict = true);

  /// One step. `service[j]` is R_j of clients[j]; x is indexed by facility
  /// position. Multiplicities weight the decomposition check.
  RoundingStep step(std::size_t t, std::span<const std::size_t> clients, std::span<const double> x,
                    std::span<const double> service, Multiplicity mult = {});

  double potential(std::span<const double> x) const { return engine_.potential(x); }
  /// Active clients in conflict with activating `client` at radius r. Asserts
  /// at most one, with radius above 2^(1/eta) r.
  std::vector<std::size_t> check_onedrop(std::size_t client, double radius);
  Decomposition decomposition(std::span<const std::size_t> clients, std::span<const double> x,
                              std::span<const double> service, Multiplicity mult = {}) const;

  /// Open facility positions (sorted).
  std::vector<std::size_t> open() const { return engine_.open_facilities(); }
  std::size_t num_open() const noexcept { return engine_.balls().size(); }
  /// Birth radius min(gamma R, Delta).
  double birth_radius(double service_cost) const;
  std::size_t guard(std::size_t num_clients, std::span<const double> x) const;

  const BallRounding& engine() const noexcept { return engine_; }
  BallRounding& engine() noexcept { return engine_; }
  const FacilityParams& params() const noexcept { return params_; }

 private:
  FacilityParams params_;
  BallRounding engine_;
};

/// k-median rounding: facility rounding with zero opening costs, plus the
/// center-count bound alpha (1 + eps) k.
class KMedianRounding {
 public:
  KMedianRounding(const MetricSpace& m, Facilities f, std::size_t k, double eps, FacilityParams params = {},
                  bool strict = true);

  RoundingStep step(std::size_t t, std::span<const std::size_t> clients, std::span<const double> x,
                    std::span<const double> service, Multiplicity mult = {});

  double center_bound() const noexcept { return inner_.params().alpha * (1.0 + eps_) * static_cast<double>(k_); }
  std::vector<std::size_t> open() const { return inner_.open(); }
  std::size_t num_open() const noexcept { return inner_.num_open(); }
  const FacilityRounding& inner() const noexcept { return inner_; }
  FacilityRounding& inner() noexcept { return inner_; }
  const BallRounding& engine() const noexcept { return inner_.engine(); }

 private:
  static Facilities zero_cost(Facilities f);

  std::size_t k_;
  double eps_;
  FacilityRounding inner_;
};

}  // namespace ccl
