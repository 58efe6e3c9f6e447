#include "ccl/service.hpp"

#include "ccl/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace ccl {

namespace {

constexpr double kCutTol = 1e-12;
constexpr double kGapTol = 1e-11;
constexpr std::size_t kMaxRounds = 100000;

}  // namespace

ServiceFill fill_service(std::span<const std::size_t> order, std::span<const double> cost,
                         std::span<const double> cap, std::span<double> y) {
  ServiceFill f;
  if (!y.empty()) std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t k : order) {
    const double room = 1.0 - f.mass;
    if (room <= 0.0) break;
    const double take = std::min(std::max(cap[k], 0.0), room);
    if (take <= 0.0) continue;
    f.cost += take * cost[k];
    f.mass += take;
    f.alpha = cost[k];
    if (!y.empty()) y[k] = take;
  }
  return f;
}

std::vector<std::size_t> service_order(std::span<const double> cost) {
  std::vector<std::size_t> order(cost.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cost[a] < cost[b]; });
  return order;
}

std::vector<double> service_cut(std::span<const double> cost, double alpha) {
  std::vector<double> beta(cost.size());
  for (std::size_t k = 0; k < cost.size(); ++k) beta[k] = std::max(alpha - cost[k], 0.0);
  return beta;
}

ServiceSolution solve_service_lp(const ServiceLp& p) {
  const std::size_t nf = p.open_cost.size();
  const std::size_t nc = p.service.size();
  if (nf == 0) throw std::invalid_argument("solve_service_lp: no facilities");
  if (p.weight.size() != nc) throw std::invalid_argument("solve_service_lp: weight size mismatch");
  for (const auto& row : p.service) {
    if (row.size() != nf) throw std::invalid_argument("solve_service_lp: service row size mismatch");
  }
  if (p.budget && *p.budget < 1.0) throw std::invalid_argument("solve_service_lp: budget below one");

  lp::Simplex lp;
  const std::size_t mass_row = lp.add_row(lp::Sense::kGreaterEqual, 1.0);
  long budget_row = -1;
  if (p.budget) budget_row = static_cast<long>(lp.add_row(lp::Sense::kLessEqual, *p.budget));
  for (std::size_t i = 0; i < nf; ++i) {
    std::vector<lp::Term> col{{mass_row, 1.0}};
    if (budget_row >= 0) col.push_back({static_cast<std::size_t>(budget_row), 1.0});
    lp.add_column(p.open_cost[i], col);
  }
  std::vector<long> theta(nc, -1);
  std::vector<std::vector<std::size_t>> order(nc);
  for (std::size_t j = 0; j < nc; ++j) {
    if (!(p.weight[j] > 0.0)) continue;
    theta[j] = static_cast<long>(lp.add_column(p.weight[j], std::vector<lp::Term>{}));
    order[j] = service_order(p.service[j]);
  }

  ServiceSolution sol;
  std::set<std::pair<std::size_t, double>> seen;
  auto add_cut = [&](std::size_t j, double alpha) {
    if (!seen.insert({j, alpha}).second) return false;
    const auto beta = service_cut(p.service[j], alpha);
    std::vector<lp::Term> row{{static_cast<std::size_t>(theta[j]), 1.0}};
    for (std::size_t i = 0; i < nf; ++i) {
      if (beta[i] > 0.0) row.push_back({i, beta[i]});
    }
    lp.add_row(lp::Sense::kGreaterEqual, alpha, row);
    ++sol.cuts;
    return true;
  };

  // Seed cuts: the nearest-slot floor and the fill of a uniform spread.
  const double spread = std::min(p.budget.value_or(1.0), static_cast<double>(nf)) / static_cast<double>(nf);
  std::vector<double> uniform(nf, spread);
  for (std::size_t j = 0; j < nc; ++j) {
    if (theta[j] < 0) continue;
    add_cut(j, p.service[j][order[j].front()]);
    add_cut(j, fill_service(order[j], p.service[j], uniform).alpha);
  }

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> x(nf);
  for (sol.rounds = 1; sol.rounds <= kMaxRounds; ++sol.rounds) {
    const lp::Status st = lp.solve();
    if (st != lp::Status::kOptimal) {
      throw std::runtime_error(std::string("solve_service_lp: master LP ended ") + lp::to_string(st));
    }
    const double lower = lp.objective();
    for (std::size_t i = 0; i < nf; ++i) x[i] = lp.value(i);
    double value = 0.0;
    for (std::size_t i = 0; i < nf; ++i) value += p.open_cost[i] * x[i];
    std::vector<std::pair<std::size_t, double>> cuts;
    for (std::size_t j = 0; j < nc; ++j) {
      if (theta[j] < 0) continue;
      const ServiceFill f = fill_service(order[j], p.service[j], x);
      value += p.weight[j] * f.cost;
      const double th = lp.value(static_cast<std::size_t>(theta[j]));
      if (f.cost - th > kCutTol * (1.0 + f.cost)) cuts.push_back({j, f.alpha});
    }
    if (value < best) {
      best = value;
      sol.x = x;
    }
    if (best - lower <= kGapTol * (1.0 + std::abs(best))) break;
    bool added = false;
    for (const auto& [j, alpha] : cuts) added = add_cut(j, alpha) || added;
    if (!added) break;
  }
  sol.value = best;
  return sol;
}

}  // namespace ccl
