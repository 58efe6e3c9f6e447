#include "ccl/round_facility.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace ccl {

namespace {

BallRule facility_rule(const MetricSpace& m, const FacilityParams& p) {
  BallRule r;
  r.alpha = p.alpha;
  r.delta = p.delta;
  r.eta = p.eta;
  r.keep_mass = 1.0 / p.alpha;
  r.birth_mass = 1.0 - 1.0 / p.gamma;
  r.target = 1.0 - 1.0 / p.gamma;
  r.top = std::max(1.0, m.delta());
  r.conflict_ratio = p.conflict_ratio();
  r.open_center = false;
  const double span = std::log2(r.top / kRadiusFloor);
  const double gap = 1.0 - 1.0 / p.gamma - 1.0 / p.alpha;
  if (!(gap > 0.0)) throw std::invalid_argument("FacilityRounding: 1 - 1/gamma - 1/alpha must be positive");
  r.coef = (1.0 + p.eta * span) / gap;
  return r;
}

double weight(Multiplicity mult, std::size_t j) { return mult.empty() ? 1.0 : mult[j]; }

}  // namespace

double fractional_service_cost(const MetricSpace& m, const Facilities& f, std::size_t client,
                               std::span<const double> y) {
  if (y.size() != f.size()) throw std::invalid_argument("fractional_service_cost: y size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += m(client, f.points[i]) * y[i];
  return s;
}

std::vector<double> service_costs(const FractionalMaintainer& fm) {
  std::vector<double> out;
  out.reserve(fm.clients().size());
  for (std::size_t j = 0; j < fm.clients().size(); ++j) {
    out.push_back(fractional_service_cost(fm.metric(), fm.facilities(), fm.clients()[j], fm.y(j)));
  }
  return out;
}

double facility_objective(const MetricSpace& m, const Facilities& f, std::span<const std::size_t> clients,
                          Multiplicity mult, std::span<const std::size_t> open, bool with_opening) {
  double total = 0.0;
  for (std::size_t j = 0; j < clients.size(); ++j) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i : open) d = std::min(d, m(clients[j], f.points[i]));
    total += weight(mult, j) * d;
  }
  if (with_opening) {
    for (std::size_t i : open) total += f.cost[i];
  }
  return total;
}

FacilityRounding::FacilityRounding(const MetricSpace& m, Facilities f, FacilityParams params, bool strict)
    : params_(params), engine_(m, std::move(f), facility_rule(m, params), strict) {}

double FacilityRounding::birth_radius(double service_cost) const {
  return std::min(params_.gamma * service_cost, engine_.rule().top);
}

std::size_t FacilityRounding::guard(std::size_t num_clients, std::span<const double> x) const {
  // Balls are disjoint with mass >= 1/alpha, so at most alpha * sum x + 1
  // exist at a time; each removal is paid by potential.
  const double cap = params_.alpha * std::accumulate(x.begin(), x.end(), 0.0) + 1.0;
  const double before = static_cast<double>(engine_.balls().size());
  const double per_ball = engine_.rule().coef * engine_.rule().target + params_.eta * engine_.log_span();
  return static_cast<std::size_t>(std::ceil(before * per_ball + 2.0 * cap * (1.0 + per_ball))) + num_clients + 1;
}

RoundingStep FacilityRounding::step(std::size_t t, std::span<const std::size_t> clients, std::span<const double> x,
                                    std::span<const double> service, Multiplicity mult) {
  if (service.size() != clients.size()) throw std::invalid_argument("FacilityRounding::step: service size mismatch");
  std::vector<double> cover(clients.size()), birth(clients.size());
  for (std::size_t j = 0; j < clients.size(); ++j) {
    if (service[j] < -kTol) throw std::invalid_argument("FacilityRounding::step: negative service cost");
    const double r = std::max(0.0, service[j]);
    cover[j] = params_.alpha * r;
    birth[j] = birth_radius(r);
  }
  RoundingInput in{t, clients, x, cover, birth, guard(clients.size(), x)};
  RoundingStep out = engine_.step(in);
  const Decomposition d = decomposition(clients, x, service, mult);
  if (!d.holds()) {
    engine_.flag("cost decomposition failed at t=" + std::to_string(t) + ": service " + std::to_string(d.service) +
                 " vs " + std::to_string(d.service_bound) + ", opening " + std::to_string(d.opening) + " vs " +
                 std::to_string(d.opening_bound));
  }
  return out;
}

Decomposition FacilityRounding::decomposition(std::span<const std::size_t> clients, std::span<const double> x,
                                              std::span<const double> service, Multiplicity mult) const {
  const Facilities& f = engine_.facilities();
  const auto opened = open();
  Decomposition d;
  d.service = facility_objective(engine_.metric(), f, clients, mult, opened, false);
  for (std::size_t j = 0; j < clients.size(); ++j) d.service_bound += params_.alpha * weight(mult, j) * service[j];
  for (std::size_t i : opened) d.opening += f.cost[i];
  for (std::size_t i = 0; i < f.size(); ++i) d.opening_bound += params_.alpha * f.cost[i] * x[i];
  return d;
}

std::vector<std::size_t> FacilityRounding::check_onedrop(std::size_t client, double radius) {
  const auto conf = engine_.conflicts(client, radius);
  bool ok = conf.size() <= 1;
  for (std::size_t c : conf) {
    if (!(engine_.balls()[c].radius > params_.conflict_ratio() * radius - kTol)) ok = false;
  }
  if (!ok) engine_.flag("single-conflict check failed for client " + std::to_string(client));
  return conf;
}

Facilities KMedianRounding::zero_cost(Facilities f) {
  std::fill(f.cost.begin(), f.cost.end(), 0.0);
  return f;
}

KMedianRounding::KMedianRounding(const MetricSpace& m, Facilities f, std::size_t k, double eps, FacilityParams params,
                                 bool strict)
    : k_(k), eps_(eps), inner_(m, zero_cost(std::move(f)), params, strict) {
  if (k == 0) throw std::invalid_argument("KMedianRounding: k must be positive");
}

RoundingStep KMedianRounding::step(std::size_t t, std::span<const std::size_t> clients, std::span<const double> x,
                                   std::span<const double> service, Multiplicity mult) {
  RoundingStep out = inner_.step(t, clients, x, service, mult);
  if (static_cast<double>(num_open()) > center_bound() + kTol) {
    inner_.engine().flag("center count " + std::to_string(num_open()) + " exceeds alpha(1+eps)k at t=" +
                         std::to_string(t));
  }
  return out;
}

}  // namespace ccl
