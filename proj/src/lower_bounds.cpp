#include "ccl/lower_bounds.hpp"

#include "ccl/round_facility.hpp"
#include "ccl/round_kcenter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>

namespace ccl {

namespace {

constexpr double kRelTol = 1e-9;

bool close(double a, double b) { return std::abs(a - b) <= kRelTol * (1.0 + std::max(std::abs(a), std::abs(b))); }

double leaf_mass_in(std::span<const double> mass, const Hst& hst, int level, std::size_t pos) {
  const auto [first, last] = hst.leaf_range(level, pos);
  double s = 0.0;
  for (std::size_t q = first; q < last; ++q) s += mass[q];
  return s;
}

/// Fractional k-center cost of x: the largest radius any client needs to
/// collect unit mass.
double kcenter_fractional_cost(const MetricSpace& m, std::span<const std::size_t> clients, std::span<const double> x) {
  double worst = 0.0;
  for (std::size_t j : clients) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m(j, a) < m(j, b); });
    double mass = 0.0, need = std::numeric_limits<double>::infinity();
    for (std::size_t i : order) {
      mass += x[i];
      if (mass >= 1.0 - kTol) {
        need = m(j, i);
        break;
      }
    }
    worst = std::max(worst, need);
  }
  return worst;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

HstAdversary::HstAdversary(Problem problem, const Hst& hst) : problem_(problem), hst_(&hst) {}

const MetricSpace& HstAdversary::metric() const noexcept {
  return problem_ == Problem::kFacility ? hst_->nodes : hst_->leaves;
}

double HstAdversary::opening_cost() const {
  return problem_ == Problem::kFacility ? std::pow(4.0 * hst_->c, hst_->height - 1) : 0.0;
}

Facilities HstAdversary::facilities() const {
  Facilities f;
  f.points.resize(hst_->num_leaves());
  std::iota(f.points.begin(), f.points.end(), 0);
  f.cost.assign(f.points.size(), opening_cost());
  return f;
}

std::vector<std::size_t> HstAdversary::clients_at(int level, std::size_t pos) const {
  if (problem_ == Problem::kFacility) return {hst_->node_index(level, pos)};
  const auto [first, last] = hst_->leaf_range(level, pos);
  if (last - first == 1) return {first};
  return {first, last - 1};
}

AdversaryRound HstAdversary::next(std::span<const double> leaf_mass) {
  if (leaf_mass.size() != hst_->num_leaves()) throw std::invalid_argument("HstAdversary::next: one mass per leaf");
  const auto h = static_cast<std::size_t>(hst_->height);
  AdversaryRound r;
  r.phase = phase_;
  r.t = t_;
  r.removed = last_;
  if (t_ == h + 1) {
    r.teardown = true;
    r.level = level_;
    r.pos = pos_;
    last_.clear();
    t_ = 0;
    ++phase_;
    return r;
  }
  if (t_ == 0) {
    level_ = hst_->height;
    pos_ = 0;
  } else {
    const std::size_t left = 2 * pos_, right = left + 1;
    const double ml = leaf_mass_in(leaf_mass, *hst_, level_ - 1, left);
    const double mr = leaf_mass_in(leaf_mass, *hst_, level_ - 1, right);
    --level_;
    pos_ = ml >= mr ? right : left;
  }
  r.level = level_;
  r.pos = pos_;
  r.clients = clients_at(level_, pos_);
  const double per = problem_ == Problem::kFacility ? std::pow(4.0 * hst_->c, static_cast<double>(t_)) : 1.0;
  r.mult.assign(r.clients.size(), per);
  last_ = r.clients;
  ++t_;
  return r;
}

double AdversaryReport::min_movement() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : phases) m = std::min(m, p.movement);
  return phases.empty() ? 0.0 : m;
}

double AdversaryReport::mean_movement() const {
  double s = 0.0;
  for (const auto& p : phases) s += p.movement;
  return phases.empty() ? 0.0 : s / static_cast<double>(phases.size());
}

AdversaryReport run_adversary(Problem problem, int height, double c, std::size_t phases, double beta, double eps) {
  if (!(beta * (1.0 + eps) < c)) throw std::invalid_argument("run_adversary: needs beta (1 + eps) < c");
  const Hst hst = build_hst(height, c);
  HstAdversary adv(problem, hst);
  const MetricSpace& m = adv.metric();
  const Facilities f = adv.facilities();
  FractionalMaintainer fm(m, f, {problem, 1, beta, eps});

  std::optional<KCenterRounding> kc;
  std::optional<FacilityRounding> fl;
  std::optional<KMedianRounding> km;
  if (problem == Problem::kKCenter) kc.emplace(m, 1, KCenterParams{.eps = std::min(eps, 0.5)}, false);
  if (problem == Problem::kFacility) fl.emplace(m, f, FacilityParams{}, false);
  if (problem == Problem::kKMedian) km.emplace(m, f, 1, eps, FacilityParams{}, false);

  AdversaryReport rep;
  rep.problem = problem;
  rep.h = height;
  rep.c = c;
  rep.beta = beta;
  rep.eps = eps;
  std::vector<double> mass(hst.num_leaves(), 0.0);
  std::vector<AdversaryRound> rounds;
  std::vector<double> opts;
  double phase_start = 0.0;
  const double big = 4.0 * c;

  while (rep.phases.size() < phases) {
    AdversaryRound r = adv.next(mass);
    ++rep.rounds;
    const StepReport sr = fm.step(r.clients, r.mult);
    if (kc) kc->step(rep.rounds, r.clients, fm.x(), fm.radius());
    if (fl) fl->step(rep.rounds, r.clients, fm.x(), service_costs(fm), r.mult);
    if (km) km->step(rep.rounds, r.clients, fm.x(), service_costs(fm), r.mult);
    std::copy(fm.x().begin(), fm.x().end(), mass.begin());

    if (!r.teardown && r.t < static_cast<std::size_t>(height)) {
      // Exact optimum of the two extreme leaves of the current subtree.
      if (problem != Problem::kFacility) {
        ++rep.opt_checks;
        const double expect = hst.leaf_distance_at_lca(r.level);
        if (!close(sr.opt, expect)) {
          ++rep.opt_failures;
          rep.notes.push_back("round " + std::to_string(rep.rounds) + ": optimum " + fmt(sr.opt) + " expected " +
                              fmt(expect));
        }
      }
      const double sub = leaf_mass_in(mass, hst, r.level, r.pos);
      if (sub <= 0.5) {
        ++rep.canary_triggers;
        const double cost =
            problem == Problem::kKCenter ? kcenter_fractional_cost(m, r.clients, fm.x()) : fm.fractional_cost();
        if (!(cost > c * sr.opt)) ++rep.canary_failures;
      }
    }
    if (!r.teardown) {
      rounds.push_back(r);
      opts.push_back(sr.opt);
      continue;
    }

    // Comparator: one center or facility on the final leaf for the whole phase.
    const std::size_t v = adv.final_leaf();
    for (std::size_t i = 0; i < rounds.size(); ++i) {
      const AdversaryRound& q = rounds[i];
      double cost = 0.0;
      for (std::size_t j = 0; j < q.clients.size(); ++j) {
        const double d = m(q.clients[j], v);
        cost = problem == Problem::kKCenter ? std::max(cost, d) : cost + q.mult[j] * d;
      }
      if (problem == Problem::kFacility) cost += adv.opening_cost();
      double limit = opts[i];
      if (problem == Problem::kKMedian) limit = 2.0 * opts[i];
      if (problem == Problem::kFacility) limit = 3.0 * std::pow(big, height - 1);
      if (cost > limit + kRelTol * (1.0 + limit) || opts[i] > cost + kRelTol * (1.0 + cost)) {
        ++rep.comparator_failures;
        rep.notes.push_back("phase " + std::to_string(r.phase) + " round " + std::to_string(q.t) + ": comparator cost " +
                            fmt(cost) + " against limit " + fmt(limit) + " and optimum " + fmt(opts[i]));
      }
    }
    rounds.clear();
    opts.clear();
    PhaseReport p;
    p.phase = r.phase;
    p.movement = fm.cumulative_movement() - phase_start;
    p.comparator_recourse = 1.0;
    p.ratio = p.movement / p.comparator_recourse;
    p.h = height;
    p.c = c;
    rep.phases.push_back(p);
    phase_start = fm.cumulative_movement();
  }

  const BallRounding& e = kc ? kc->engine() : fl ? fl->engine() : km->engine();
  rep.rounding_violations = e.audit().violations.size();
  rep.conflict_checks = e.audit().conflict_checks;
  rep.conflict_failures = e.audit().conflict_failures;
  for (const auto& v : e.audit().violations) rep.notes.push_back(v);
  return rep;
}

void write_adversary_csv(std::ostream& os, const AdversaryReport& r) {
  os << kAdversaryHeader << '\n';
  for (const auto& p : r.phases) {
    os << p.phase << ',' << fmt(p.movement) << ',' << fmt(p.comparator_recourse) << ',' << fmt(p.ratio) << ',' << p.h
       << ',' << fmt(p.c) << '\n';
  }
}

}  // namespace ccl
