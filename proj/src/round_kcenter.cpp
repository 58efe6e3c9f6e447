#include "ccl/round_kcenter.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace ccl {

namespace {

Facilities every_point(const MetricSpace& m) { return Facilities::all(m, 0.0); }

BallRule kcenter_rule(const MetricSpace& m, const KCenterParams& p) {
  if (!(p.eps > 0.0 && p.eps <= 0.5)) throw std::invalid_argument("KCenterRounding: eps must lie in (0, 1/2]");
  BallRule r;
  r.alpha = p.alpha;
  r.delta = p.delta;
  r.eta = p.eta;
  r.keep_mass = 1.0 - p.eps;
  r.birth_mass = 1.0;
  r.target = 1.0;
  r.top = std::max(1.0, m.delta());
  r.conflict_ratio = p.conflict_ratio();
  r.open_center = true;
  const double span = std::log2(r.top / kRadiusFloor);
  r.coef = (1.0 + p.eta * span) / p.eps;
  return r;
}

}  // namespace

double kcenter_objective(const MetricSpace& m, std::span<const std::size_t> clients,
                         std::span<const std::size_t> centers) {
  double worst = 0.0;
  for (std::size_t j : clients) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i : centers) d = std::min(d, m(i, j));
    worst = std::max(worst, d);
  }
  return worst;
}

KCenterRounding::KCenterRounding(const MetricSpace& m, std::size_t k, KCenterParams params, bool strict)
    : params_(params), k_(k), engine_(m, every_point(m), kcenter_rule(m, params), strict) {
  if (k == 0) throw std::invalid_argument("KCenterRounding: k must be positive");
}

double KCenterRounding::center_bound() const noexcept {
  return (1.0 + 2.0 * params_.eps) * (1.0 + params_.eps) * static_cast<double>(k_);
}

std::size_t KCenterRounding::guard(std::size_t num_clients) const {
  const double kd = static_cast<double>(k_);
  const double span = engine_.log_span() / std::min(1.0, params_.eta);
  return static_cast<std::size_t>(std::ceil((1.0 + params_.eps) * kd) + 4.0 * kd * std::ceil(span)) + num_clients;
}

RoundingStep KCenterRounding::step(std::size_t t, std::span<const std::size_t> clients, std::span<const double> x,
                                   double radius) {
  if (radius < 0.0) throw std::invalid_argument("KCenterRounding::step: negative radius");
  const std::vector<double> cover(clients.size(), params_.alpha * radius);
  const std::vector<double> birth(clients.size(), radius);
  RoundingInput in{t, clients, x, cover, birth, guard(clients.size())};
  RoundingStep out = engine_.step(in);
  if (static_cast<double>(num_centers()) > center_bound() + kTol) {
    engine_.flag("center count " + std::to_string(num_centers()) + " exceeds (1+2eps)(1+eps)k at t=" +
                 std::to_string(t));
  }
  return out;
}

std::vector<std::size_t> KCenterRounding::check_onedrop(std::size_t client, double radius) {
  const auto conf = engine_.conflicts(client, radius);
  bool ok = conf.size() <= 1;
  for (std::size_t c : conf) {
    if (!(engine_.balls()[c].radius > params_.conflict_ratio() * radius - kTol)) ok = false;
  }
  if (!ok) engine_.flag("single-conflict check failed for client " + std::to_string(client));
  return conf;
}

RecourseBounds recourse_bounds(const BallRounding& engine, std::span<const double> final_x, double movement_bound,
                               double total_recourse) {
  RecourseBounds b;
  const auto& a = engine.audit();
  b.drops = static_cast<double>(a.drops());
  b.potential_bound = a.move_credit - engine.potential(final_x);
  b.movement_bound = movement_bound;
  b.recourse = total_recourse;
  b.recourse_bound = 2.0 * b.drops + static_cast<double>(engine.balls().size());
  return b;
}

}  // namespace ccl
