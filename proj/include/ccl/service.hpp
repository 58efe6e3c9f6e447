#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ccl {

/// Cheapest fractional service of one client: min sum_k cost_k y_k subject to
/// sum_k y_k = 1 and 0 <= y_k <= cap_k, filled in increasing cost order.
struct ServiceFill {
  double cost = 0.0;
  double mass = 0.0;   // min(1, sum cap)
  double alpha = 0.0;  // cost of the last slot used (the dual price of the unit row)
};

/// `order` lists slot positions by increasing cost (ties by position). When
/// `y` is non-empty it receives the filled amounts.
ServiceFill fill_service(std::span<const std::size_t> order, std::span<const double> cost,
                         std::span<const double> cap, std::span<double> y = {});

/// Slot positions sorted by (cost, position).
std::vector<std::size_t> service_order(std::span<const double> cost);

/// Lower bound on the service cost as a function of the capacities, exact at
/// every point where `alpha` is the fill price:
///   serve(cap) >= alpha - sum_k (alpha - cost_k)^+ cap_k.
/// Returns the coefficients (alpha - cost_k)^+.
std::vector<double> service_cut(std::span<const double> cost, double alpha);

/// min sum_i open_cost_i x_i + sum_j weight_j serve_j(x)
/// s.t. sum_i x_i >= 1, sum_i x_i <= budget (when set), x >= 0,
/// where serve_j uses costs service[j] and capacities x.
struct ServiceLp {
  std::vector<double> open_cost;
  std::vector<std::vector<double>> service;
  std::vector<double> weight;
  std::optional<double> budget;
};

struct ServiceSolution {
  double value = 0.0;
  std::vector<double> x;
  std::size_t rounds = 0;
  std::size_t cuts = 0;
};

/// Exact solve by row generation on the epigraph of each serve_j.
ServiceSolution solve_service_lp(const ServiceLp& problem);

}  // namespace ccl
