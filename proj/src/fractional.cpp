#include "ccl/fractional.hpp"

#include "ccl/service.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace ccl {

namespace {

constexpr double kBudgetTol = 1e-9;
// Nonzero distances are at least 1, so a positive optimum far below this is
// solver noise around an exact 0.
constexpr double kZeroOpt = 1e-9;

double mult_at(Multiplicity mult, std::size_t j) { return mult.empty() ? 1.0 : mult[j]; }

void check_inputs(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                  Multiplicity mult) {
  if (f.points.empty()) throw std::invalid_argument("facility set is empty");
  if (f.cost.size() != f.points.size()) throw std::invalid_argument("facility cost vector size mismatch");
  for (std::size_t p : f.points) {
    if (p >= m.size()) throw std::invalid_argument("facility index out of range");
  }
  for (std::size_t c : clients) {
    if (c >= m.size()) throw std::invalid_argument("client index out of range");
  }
  if (!mult.empty() && mult.size() != clients.size()) throw std::invalid_argument("multiplicity size mismatch");
}

// Facility positions within `radius` of client point j.
std::vector<std::size_t> ball_positions(const MetricSpace& m, std::size_t j, const Facilities& f, double radius) {
  std::vector<std::size_t> out;
  const auto row = m.row(j);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (row[f.points[i]] <= radius + kTol) out.push_back(i);
  }
  return out;
}

enum class Verdict { kFeasible, kInfeasible, kUnknown };

// Cheap certificates before solving the covering LP.
Verdict quick_kcenter_check(const MetricSpace& m, std::span<const std::size_t> clients,
                            const std::vector<std::vector<std::size_t>>& balls, std::size_t k, double radius) {
  for (const auto& b : balls) {
    if (b.empty()) return Verdict::kInfeasible;
  }
  // Clients more than 2D apart have disjoint balls, each needing mass 1.
  std::vector<std::size_t> packed;
  for (std::size_t j : clients) {
    bool far = true;
    for (std::size_t q : packed) {
      if (m(j, q) <= 2.0 * radius + 2.0 * kTol) {
        far = false;
        break;
      }
    }
    if (far) {
      packed.push_back(j);
      if (packed.size() > k) return Verdict::kInfeasible;
    }
  }
  // Greedy integral cover.
  std::vector<bool> covered(balls.size(), false);
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_fac;
  for (std::size_t j = 0; j < balls.size(); ++j) {
    for (std::size_t i : balls[j]) by_fac[i].push_back(j);
  }
  std::size_t remaining = balls.size(), used = 0;
  while (remaining > 0 && used <= k) {
    std::size_t best = 0, best_gain = 0;
    for (const auto& [i, js] : by_fac) {
      std::size_t gain = 0;
      for (std::size_t j : js) gain += !covered[j];
      if (gain > best_gain || (gain == best_gain && gain > 0 && i < best)) {
        best_gain = gain;
        best = i;
      }
    }
    for (std::size_t j : by_fac[best]) {
      if (!covered[j]) {
        covered[j] = true;
        --remaining;
      }
    }
    ++used;
  }
  if (remaining == 0 && used <= k) return Verdict::kFeasible;
  return Verdict::kUnknown;
}

bool kcenter_feasible(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                      std::size_t k, double radius) {
  std::vector<std::vector<std::size_t>> balls;
  balls.reserve(clients.size());
  for (std::size_t j : clients) balls.push_back(ball_positions(m, j, f, radius));
  const Verdict v = quick_kcenter_check(m, clients, balls, k, radius);
  if (v != Verdict::kUnknown) return v == Verdict::kFeasible;

  lp::Simplex s;
  std::vector<std::vector<Term>> cols(f.size());
  for (std::size_t r = 0; r < balls.size(); ++r) {
    s.add_row(lp::Sense::kGreaterEqual, 1.0);
    for (std::size_t i : balls[r]) cols[i].push_back({r, 1.0});
  }
  for (auto& c : cols) {
    if (!c.empty()) s.add_column(1.0, c);
  }
  const lp::Status st = s.solve();
  if (st != lp::Status::kOptimal) throw lp::LpError(std::string("opt_kcenter: covering LP ended ") + lp::to_string(st));
  return s.objective() <= static_cast<double>(k) + kBudgetTol;
}

// Shared LP for facility location (k == 0) and k-median (k > 0, zero costs).
double opt_assignment_lp(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                         std::size_t k, bool with_opening, Multiplicity mult) {
  if (clients.empty()) return 0.0;
  ServiceLp p;
  p.open_cost.assign(f.size(), 0.0);
  if (with_opening) p.open_cost = f.cost;
  if (k > 0) p.budget = static_cast<double>(std::min(k, f.size()));
  for (std::size_t j = 0; j < clients.size(); ++j) {
    const auto row = m.row(clients[j]);
    std::vector<double> d(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) d[i] = row[f.points[i]];
    p.service.push_back(std::move(d));
    p.weight.push_back(mult_at(mult, j));
  }
  const double value = solve_service_lp(p).value;
  return value < kZeroOpt ? 0.0 : value;
}

void add_assignment_rows(Body& b, const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f) {
  const std::size_t nf = f.size();
  b.num_vars = nf + clients.size() * nf;
  b.weights.assign(b.num_vars, 0.0);
  std::fill(b.weights.begin(), b.weights.begin() + static_cast<long>(nf), 1.0);
  for (std::size_t j = 0; j < clients.size(); ++j) {
    std::vector<Term> row;
    row.reserve(nf);
    for (std::size_t i = 0; i < nf; ++i) {
      row.push_back({y_index(nf, j, i), 1.0});
      b.coupling.push_back({y_index(nf, j, i), i});
    }
    b.covering.push_back(std::move(row));
  }
  (void)m;
}

// Cost row sum f_i x_i + sum mult_j d_ij y_ij, scaled to rhs 1 (or rhs 0 when opt is 0).
void add_cost_row(Body& b, const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                  bool with_opening, double beta, double opt, Multiplicity mult) {
  const std::size_t nf = f.size();
  const double scale = opt > 0.0 ? 1.0 / (beta * opt) : 1.0;
  std::vector<Term> row;
  if (with_opening) {
    for (std::size_t i = 0; i < nf; ++i) {
      if (f.cost[i] > 0.0) row.push_back({i, f.cost[i] * scale});
    }
  }
  for (std::size_t j = 0; j < clients.size(); ++j) {
    const auto dist = m.row(clients[j]);
    for (std::size_t i = 0; i < nf; ++i) {
      const double d = dist[f.points[i]];
      if (d > 0.0) row.push_back({y_index(nf, j, i), mult_at(mult, j) * d * scale});
    }
  }
  if (row.empty()) return;
  b.packing.push_back(std::move(row));
  b.packing_rhs.push_back(opt > 0.0 ? 1.0 : 0.0);
}

void add_budget_row(Body& b, std::size_t nf, std::size_t k) {
  std::vector<Term> row;
  for (std::size_t i = 0; i < nf; ++i) row.push_back({i, 1.0 / static_cast<double>(k)});
  b.packing.push_back(std::move(row));
  b.packing_rhs.push_back(1.0);
}

}  // namespace

const char* to_string(Problem p) {
  switch (p) {
    case Problem::kKCenter: return "kcenter";
    case Problem::kFacility: return "facility";
    case Problem::kKMedian: return "kmedian";
  }
  return "?";
}

Problem parse_problem(const std::string& s) {
  if (s == "kcenter") return Problem::kKCenter;
  if (s == "facility") return Problem::kFacility;
  if (s == "kmedian") return Problem::kKMedian;
  throw std::invalid_argument("unknown problem '" + s + "' (expected kcenter, facility or kmedian)");
}

Facilities Facilities::all(const MetricSpace& m, double uniform_cost) {
  Facilities f;
  f.points.resize(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) f.points[i] = i;
  f.cost.assign(m.size(), uniform_cost);
  return f;
}

double opt_kcenter(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                   std::size_t k, double hint) {
  check_inputs(m, clients, f, {});
  if (k == 0) throw std::invalid_argument("opt_kcenter: k must be at least 1");
  if (clients.empty()) return 0.0;
  std::vector<double> radii{0.0};
  radii.reserve(clients.size() * f.size() + 1);
  for (std::size_t j : clients) {
    const auto row = m.row(j);
    for (std::size_t p : f.points) radii.push_back(row[p]);
  }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  std::size_t lo = 0, hi = radii.size() - 1;  // hi is feasible: one facility covers everything
  auto feasible = [&](std::size_t idx) { return kcenter_feasible(m, clients, f, k, radii[idx]); };
  if (hint >= 0.0) {
    std::size_t idx = static_cast<std::size_t>(std::lower_bound(radii.begin(), radii.end(), hint - 1e-12) - radii.begin());
    idx = std::min(idx, hi);
    if (feasible(idx)) {
      hi = idx;
      if (idx == 0 || !feasible(idx - 1)) return radii[idx];
      hi = idx - 1;
    } else {
      lo = idx + 1;
    }
  }
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (feasible(mid)) hi = mid;
    else lo = mid + 1;
  }
  return radii[lo];
}

double opt_facility(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                    Multiplicity mult) {
  check_inputs(m, clients, f, mult);
  return opt_assignment_lp(m, clients, f, 0, true, mult);
}

double opt_kmedian(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                   std::size_t k, Multiplicity mult) {
  check_inputs(m, clients, f, mult);
  if (k == 0) throw std::invalid_argument("opt_kmedian: k must be at least 1");
  return opt_assignment_lp(m, clients, f, k, false, mult);
}

Body build_body_kcenter(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                        std::size_t k, double radius) {
  check_inputs(m, clients, f, {});
  if (k == 0) throw std::invalid_argument("build_body_kcenter: k must be at least 1");
  Body b;
  b.num_vars = f.size();
  b.weights.assign(f.size(), 1.0);
  for (std::size_t j : clients) {
    std::vector<Term> row;
    for (std::size_t i : ball_positions(m, j, f, radius)) row.push_back({i, 1.0});
    b.covering.push_back(std::move(row));
  }
  add_budget_row(b, f.size(), k);
  return b;
}

Body build_body_facility(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                         double beta, double opt, Multiplicity mult) {
  check_inputs(m, clients, f, mult);
  Body b;
  add_assignment_rows(b, m, clients, f);
  // Without clients the optimum is 0, so the row forces paid openings to 0.
  add_cost_row(b, m, clients, f, true, beta, clients.empty() ? 0.0 : opt, mult);
  return b;
}

Body build_body_kmedian(const MetricSpace& m, std::span<const std::size_t> clients, const Facilities& f,
                        std::size_t k, double beta, double opt, Multiplicity mult) {
  check_inputs(m, clients, f, mult);
  if (k == 0) throw std::invalid_argument("build_body_kmedian: k must be at least 1");
  Body b;
  add_assignment_rows(b, m, clients, f);
  add_budget_row(b, f.size(), k);
  if (!clients.empty()) add_cost_row(b, m, clients, f, false, beta, opt, mult);
  return b;
}

FractionalMaintainer::FractionalMaintainer(const MetricSpace& m, Facilities f, ModelParams params)
    : metric_(&m), fac_(std::move(f)), params_(params) {
  check_inputs(m, {}, fac_, {});
  if (params_.k == 0) throw std::invalid_argument("k must be at least 1");
  if (!(params_.beta >= 1.0)) throw std::invalid_argument("beta must be at least 1");
  if (!(params_.eps > 0.0 && params_.eps <= 1.0)) throw std::invalid_argument("eps must lie in (0,1]");
  state_.x.assign(fac_.size(), 0.0);
  body_.num_vars = fac_.size();
  body_.weights.assign(fac_.size(), 1.0);
}

std::span<const double> FractionalMaintainer::y(std::size_t client_pos) const {
  if (params_.problem == Problem::kKCenter) return {};
  const std::size_t nf = fac_.size();
  return {state_.x.data() + y_index(nf, client_pos, 0), nf};
}

double FractionalMaintainer::fractional_cost() const {
  if (params_.problem == Problem::kKCenter) return 0.0;
  const std::size_t nf = fac_.size();
  double s = 0.0;
  if (params_.problem == Problem::kFacility) {
    for (std::size_t i = 0; i < nf; ++i) s += fac_.cost[i] * state_.x[i];
  }
  for (std::size_t j = 0; j < clients_.size(); ++j) {
    const auto dist = metric_->row(clients_[j]);
    const auto yj = y(j);
    double r = 0.0;
    for (std::size_t i = 0; i < nf; ++i) r += dist[fac_.points[i]] * yj[i];
    s += mult_[j] * r;
  }
  return s;
}

StepReport FractionalMaintainer::step(std::span<const std::size_t> clients, Multiplicity mult) {
  check_inputs(*metric_, clients, fac_, mult);
  {
    std::vector<std::size_t> sorted(clients.begin(), clients.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("step: a point appears twice in the client set");
    }
  }
  const std::size_t nf = fac_.size();
  StepReport rep;
  FractionalState prev;
  prev.cumulative_movement = state_.cumulative_movement;
  std::vector<double> new_mult(clients.size());
  for (std::size_t j = 0; j < clients.size(); ++j) new_mult[j] = mult_at(mult, j);

  if (params_.problem == Problem::kKCenter) {
    rep.opt = opt_kcenter(*metric_, clients, fac_, params_.k, clients_.empty() ? -1.0 : last_.opt);
    rep.radius = std::min(params_.beta * rep.opt, metric_->delta());
    body_ = build_body_kcenter(*metric_, clients, fac_, params_.k, rep.radius);
    prev.x.assign(state_.x.begin(), state_.x.begin() + static_cast<long>(nf));
  } else {
    if (params_.problem == Problem::kFacility) {
      rep.opt = opt_facility(*metric_, clients, fac_, new_mult);
      body_ = build_body_facility(*metric_, clients, fac_, params_.beta, rep.opt, new_mult);
    } else {
      rep.opt = opt_kmedian(*metric_, clients, fac_, params_.k, new_mult);
      body_ = build_body_kmedian(*metric_, clients, fac_, params_.k, params_.beta, rep.opt, new_mult);
    }
    prev.x.assign(nf + clients.size() * nf, 0.0);
    std::copy(state_.x.begin(), state_.x.begin() + static_cast<long>(nf), prev.x.begin());
    std::unordered_map<std::size_t, std::size_t> old_pos;
    for (std::size_t j = 0; j < clients_.size(); ++j) old_pos[clients_[j]] = j;
    for (std::size_t j = 0; j < clients.size(); ++j) {
      const auto it = old_pos.find(clients[j]);
      if (it == old_pos.end()) continue;
      const auto old = y(it->second);
      std::copy(old.begin(), old.end(), prev.x.begin() + static_cast<long>(y_index(nf, j, 0)));
    }
  }

  ProjectResult res = project(prev, body_, params_.eps);
  if (!body_.contains(res.state.x, params_.eps, 1e-9)) {
    throw BodyError("fractional step: projected point violates the body beyond 1e-9");
  }
  rep.movement = res.movement;
  state_ = std::move(res.state);
  clients_.assign(clients.begin(), clients.end());
  mult_ = std::move(new_mult);
  last_ = rep;
  return rep;
}

}  // namespace ccl
