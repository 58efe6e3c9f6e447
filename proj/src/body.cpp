#include "ccl/body.hpp"

#include "ccl/service.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>

namespace ccl {

namespace {

constexpr double kPriceTol = 1e-9;
constexpr double kResultTol = 1e-7;
constexpr double kCutTol = 1e-12;

double row_value(const std::vector<Term>& row, const std::vector<double>& x) {
  double s = 0.0;
  for (const Term& t : row) s += t.coef * x[t.index];
  return s;
}

ProjectResult finish_projection(const FractionalState& prev, const Body& body, double eps, std::vector<double> x) {
  if (!body.contains(x, eps, kResultTol)) throw BodyError("project: solver returned a point outside the body");
  ProjectResult res;
  res.movement = weighted_movement(x, prev.x, body.weights);
  res.state.x = std::move(x);
  res.state.cumulative_movement = prev.cumulative_movement + res.movement;
  return res;
}

}  // namespace

void Body::validate() const {
  if (weights.size() != num_vars) throw BodyError("body: weight vector size mismatch");
  if (packing_rhs.size() != packing.size()) throw BodyError("body: packing rhs size mismatch");
  for (double w : weights) {
    if (!(w >= 0.0)) throw BodyError("body: negative movement weight");
  }
  auto check_row = [this](const std::vector<Term>& row) {
    for (const Term& t : row) {
      if (t.index >= num_vars) throw BodyError("body: variable index out of range");
      if (!(t.coef >= 0.0)) throw BodyError("body: negative coefficient");
    }
  };
  for (std::size_t r = 0; r < covering.size(); ++r) {
    check_row(covering[r]);
    const bool nonzero = std::any_of(covering[r].begin(), covering[r].end(), [](const Term& t) { return t.coef > 0.0; });
    if (!nonzero) throw BodyError("body: covering row " + std::to_string(r) + " is empty", r);
  }
  for (const auto& row : packing) check_row(row);
  for (double b : packing_rhs) {
    if (!(b >= 0.0)) throw BodyError("body: negative packing rhs");
  }
  for (const auto& c : coupling) {
    if (c.lower >= num_vars || c.upper >= num_vars) throw BodyError("body: coupling index out of range");
  }
}

bool Body::contains(const std::vector<double>& x, double eps, double tol) const {
  if (x.size() != num_vars) return false;
  for (double v : x) {
    if (v < -tol) return false;
  }
  for (const auto& row : covering) {
    if (row_value(row, x) < 1.0 - tol) return false;
  }
  for (std::size_t r = 0; r < packing.size(); ++r) {
    if (row_value(packing[r], x) > (1.0 + eps) * packing_rhs[r] + tol) return false;
  }
  for (const auto& c : coupling) {
    if (x[c.lower] > x[c.upper] + tol) return false;
  }
  return true;
}

double weighted_movement(const std::vector<double>& a, const std::vector<double>& b,
                         const std::vector<double>& weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) s += weights[i] * std::abs(a[i] - b[i]);
  }
  return s;
}

namespace {

// Bodies whose zero-weight variables are assignment slots: every such slot
// sits in exactly one covering row made only of slots (with coefficient 1),
// is capped by one coupling to a non-slot variable, and appears in at most
// one packing row shared by all slots (the cost row).
struct AssignmentShape {
  std::vector<std::size_t> rows;
  std::vector<bool> is_assignment_row;
  long cost_row = -1;
  std::vector<double> slot_cost;
};

std::optional<AssignmentShape> assignment_shape(const Body& body, const std::vector<bool>& lazy,
                                                const std::vector<long>& cap_of) {
  const std::size_t n = body.num_vars;
  AssignmentShape s;
  s.is_assignment_row.assign(body.covering.size(), false);
  s.slot_cost.assign(n, 0.0);
  std::vector<int> seen(n, 0);
  for (std::size_t r = 0; r < body.covering.size(); ++r) {
    bool some = false, all = true;
    for (const Term& t : body.covering[r]) {
      if (lazy[t.index]) {
        if (t.coef != 1.0) return std::nullopt;
        some = true;
        ++seen[t.index];
      } else {
        all = false;
      }
    }
    if (!some) continue;
    if (!all) return std::nullopt;
    s.rows.push_back(r);
    s.is_assignment_row[r] = true;
  }
  if (s.rows.empty()) return std::nullopt;
  for (std::size_t i = 0; i < n; ++i) {
    if (lazy[i] && (seen[i] > 1 || cap_of[i] < 0)) return std::nullopt;
  }
  for (std::size_t r = 0; r < body.packing.size(); ++r) {
    for (const Term& t : body.packing[r]) {
      if (!lazy[t.index]) continue;
      if (s.cost_row >= 0 && s.cost_row != static_cast<long>(r)) return std::nullopt;
      s.cost_row = static_cast<long>(r);
      s.slot_cost[t.index] += t.coef;
    }
  }
  return s;
}

// Projection for assignment-shaped bodies. The slots are eliminated: for
// fixed caps the cheapest slot filling of a row is a greedy fill, so the
// master LP keeps only the capped variables, one epigraph variable per
// assignment row inside the cost row, and service cuts added on demand.
ProjectResult project_assignment(const FractionalState& prev, const Body& body, double eps,
                                 const std::vector<bool>& lazy, const std::vector<long>& cap_of,
                                 const AssignmentShape& shape) {
  const std::size_t n = body.num_vars;
  const auto& w = body.weights;
  const auto& px = prev.x;

  lp::Simplex lp;
  std::vector<std::map<std::size_t, double>> var_rows(n);

  // Rows are collected first so constants of weighted variables can be folded in.
  struct Row {
    lp::Sense sense;
    double rhs;
    long covering;
  };
  std::vector<Row> rows;
  std::map<std::vector<std::size_t>, std::size_t> serve_rows;
  for (std::size_t r = 0; r < body.covering.size(); ++r) {
    if (shape.is_assignment_row[r]) {
      std::vector<std::size_t> caps;
      for (const Term& t : body.covering[r]) caps.push_back(static_cast<std::size_t>(cap_of[t.index]));
      std::sort(caps.begin(), caps.end());
      if (serve_rows.count(caps)) continue;
      serve_rows[caps] = rows.size();
      for (std::size_t u : caps) var_rows[u][rows.size()] += 1.0;
    } else {
      for (const Term& t : body.covering[r]) var_rows[t.index][rows.size()] += t.coef;
    }
    rows.push_back({lp::Sense::kGreaterEqual, 1.0, static_cast<long>(r)});
  }
  std::size_t cost_row = 0;
  for (std::size_t r = 0; r < body.packing.size(); ++r) {
    if (static_cast<long>(r) == shape.cost_row) cost_row = rows.size();
    for (const Term& t : body.packing[r]) {
      if (!lazy[t.index]) var_rows[t.index][rows.size()] += t.coef;
    }
    rows.push_back({lp::Sense::kLessEqual, (1.0 + eps) * body.packing_rhs[r], -1});
  }
  for (const auto& c : body.coupling) {
    if (lazy[c.lower]) continue;
    var_rows[c.lower][rows.size()] += 1.0;
    var_rows[c.upper][rows.size()] -= 1.0;
    rows.push_back({lp::Sense::kLessEqual, 0.0, -1});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] > 0.0 && px[i] != 0.0) {
      for (const auto& [r, a] : var_rows[i]) rows[r].rhs -= a * px[i];
    }
  }
  std::vector<long> bound_row(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] > 0.0 && px[i] > 0.0) {
      bound_row[i] = static_cast<long>(rows.size());
      rows.push_back({lp::Sense::kLessEqual, px[i], -1});
    }
  }
  for (const Row& r : rows) lp.add_row(r.sense, r.rhs);

  auto terms_of = [](const std::map<std::size_t, double>& m) {
    std::vector<Term> out;
    for (const auto& [r, a] : m) {
      if (a != 0.0) out.push_back({r, a});
    }
    return out;
  };
  std::vector<long> col_p(n, -1), col_q(n, -1), col_z(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (lazy[i]) continue;
    if (w[i] > 0.0) {
      auto t = terms_of(var_rows[i]);
      col_p[i] = static_cast<long>(lp.add_column(w[i], t));
      if (bound_row[i] >= 0) {
        for (Term& x : t) x.coef = -x.coef;
        t.push_back({static_cast<std::size_t>(bound_row[i]), 1.0});
        col_q[i] = static_cast<long>(lp.add_column(w[i], t));
      }
    } else {
      col_z[i] = static_cast<long>(lp.add_column(0.0, terms_of(var_rows[i])));
    }
  }

  // Per assignment row: slots in cost order and the epigraph column.
  const bool priced = shape.cost_row >= 0;
  const std::size_t na = shape.rows.size();
  std::vector<std::vector<std::size_t>> slots(na), order(na);
  std::vector<std::vector<double>> cost(na);
  std::vector<long> theta(na, -1);
  for (std::size_t a = 0; a < na; ++a) {
    for (const Term& t : body.covering[shape.rows[a]]) {
      slots[a].push_back(t.index);
      cost[a].push_back(shape.slot_cost[t.index]);
    }
    order[a] = service_order(cost[a]);
    if (priced) theta[a] = static_cast<long>(lp.add_column(0.0, std::vector<Term>{{cost_row, 1.0}}));
  }

  auto cap_values = [&](std::size_t a, const std::vector<double>& x) {
    std::vector<double> cap(slots[a].size());
    for (std::size_t k = 0; k < cap.size(); ++k) cap[k] = x[static_cast<std::size_t>(cap_of[slots[a][k]])];
    return cap;
  };
  // theta_a + sum_k beta_k X_cap(k) >= alpha, with X = prev + p - q or X = z.
  std::set<std::pair<std::size_t, double>> seen;
  auto add_cut = [&](std::size_t a, double alpha) {
    if (!seen.insert({a, alpha}).second) return false;
    const auto beta = service_cut(cost[a], alpha);
    std::map<std::size_t, double> coef;
    coef[static_cast<std::size_t>(theta[a])] += 1.0;
    double b = alpha;
    for (std::size_t k = 0; k < beta.size(); ++k) {
      if (beta[k] <= 0.0) continue;
      const auto u = static_cast<std::size_t>(cap_of[slots[a][k]]);
      if (w[u] > 0.0) {
        b -= beta[k] * px[u];
        coef[static_cast<std::size_t>(col_p[u])] += beta[k];
        if (col_q[u] >= 0) coef[static_cast<std::size_t>(col_q[u])] -= beta[k];
      } else {
        coef[static_cast<std::size_t>(col_z[u])] += beta[k];
      }
    }
    lp.add_row(lp::Sense::kGreaterEqual, b, terms_of(coef));
    return true;
  };

  auto read_x = [&]() {
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (lazy[i]) continue;
      double v;
      if (w[i] > 0.0) {
        v = px[i] + lp.value(static_cast<std::size_t>(col_p[i]));
        if (col_q[i] >= 0) v -= lp.value(static_cast<std::size_t>(col_q[i]));
      } else {
        v = lp.value(static_cast<std::size_t>(col_z[i]));
      }
      x[i] = std::max(v, 0.0);
    }
    return x;
  };

  if (priced) {
    for (std::size_t a = 0; a < na; ++a) {
      const ServiceFill f = fill_service(order[a], cost[a], cap_values(a, px));
      if (f.mass > 0.0) add_cut(a, f.alpha);
    }
  }
  std::vector<double> x;
  for (;;) {
    const lp::Status st = lp.solve();
    if (st == lp::Status::kInfeasible) {
      for (std::size_t r : lp.infeasible_rows()) {
        if (r < rows.size() && rows[r].covering >= 0) {
          const auto c = static_cast<std::size_t>(rows[r].covering);
          throw BodyError("project: covering row " + std::to_string(c) +
                              " cannot be satisfied within the relaxed packing caps",
                          c);
        }
      }
      throw BodyError("project: relaxed body is empty");
    }
    if (st != lp::Status::kOptimal) throw BodyError(std::string("project: LP ended with status ") + lp::to_string(st));
    x = read_x();
    if (!priced) break;
    bool added = false;
    for (std::size_t a = 0; a < na; ++a) {
      const ServiceFill f = fill_service(order[a], cost[a], cap_values(a, x));
      const double th = lp.value(static_cast<std::size_t>(theta[a]));
      if (f.cost - th > kCutTol * (1.0 + f.cost)) added = add_cut(a, f.alpha) || added;
    }
    if (!added) break;
  }
  for (std::size_t a = 0; a < na; ++a) {
    std::vector<double> y(slots[a].size());
    fill_service(order[a], cost[a], cap_values(a, x), y);
    for (std::size_t k = 0; k < y.size(); ++k) x[slots[a][k]] = y[k];
  }
  return finish_projection(prev, body, eps, std::move(x));
}

}  // namespace

ProjectResult project(const FractionalState& prev, const Body& body, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw BodyError("project: eps must lie in (0,1]");
  if (prev.x.size() != body.num_vars) throw BodyError("project: state size does not match body");
  body.validate();
  for (double v : prev.x) {
    if (v < 0.0) throw BodyError("project: previous state has a negative entry");
  }
  if (body.contains(prev.x, eps)) return {prev, 0.0};

  const std::size_t n = body.num_vars;
  const auto& w = body.weights;
  const auto& px = prev.x;

  // General rows over x: covering, packing, then couplings that stay fixed.
  std::vector<int> upper_count(n, 0), lower_count(n, 0);
  for (const auto& c : body.coupling) {
    ++upper_count[c.upper];
    ++lower_count[c.lower];
  }
  std::vector<bool> lazy(n, false);
  for (std::size_t i = 0; i < n; ++i) lazy[i] = w[i] == 0.0 && upper_count[i] == 0 && lower_count[i] <= 1;
  std::vector<long> companion_upper(n, -1);
  for (const auto& c : body.coupling) {
    if (lazy[c.lower]) companion_upper[c.lower] = static_cast<long>(c.upper);
  }
  if (const auto shape = assignment_shape(body, lazy, companion_upper)) {
    return project_assignment(prev, body, eps, lazy, companion_upper, *shape);
  }

  struct GeneralRow {
    lp::Sense sense;
    double rhs;
  };
  std::vector<GeneralRow> rows;
  std::vector<std::vector<Term>> var_rows(n);
  const std::size_t num_cov = body.covering.size();
  for (std::size_t r = 0; r < num_cov; ++r) {
    for (const Term& t : body.covering[r]) var_rows[t.index].push_back({rows.size(), t.coef});
    rows.push_back({lp::Sense::kGreaterEqual, 1.0});
  }
  for (std::size_t r = 0; r < body.packing.size(); ++r) {
    for (const Term& t : body.packing[r]) var_rows[t.index].push_back({rows.size(), t.coef});
    rows.push_back({lp::Sense::kLessEqual, (1.0 + eps) * body.packing_rhs[r]});
  }
  for (const auto& c : body.coupling) {
    if (lazy[c.lower]) {
      companion_upper[c.lower] = static_cast<long>(c.upper);
      continue;
    }
    var_rows[c.lower].push_back({rows.size(), 1.0});
    var_rows[c.upper].push_back({rows.size(), -1.0});
    rows.push_back({lp::Sense::kLessEqual, 0.0});
  }
  // Constant part of weighted variables moves to the right-hand side.
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] > 0.0 && px[i] != 0.0) {
      for (const Term& t : var_rows[i]) rows[t.index].rhs -= t.coef * px[i];
    }
  }
  const std::size_t first_bound_row = rows.size();
  std::vector<long> bound_row(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] > 0.0 && px[i] > 0.0) {
      bound_row[i] = static_cast<long>(rows.size());
      rows.push_back({lp::Sense::kLessEqual, px[i]});
    }
  }
  (void)first_bound_row;

  LazyLp model;
  for (const auto& r : rows) model.add_row(r.sense, r.rhs);
  std::vector<long> col_p(n, -1), col_q(n, -1), col_z(n, -1), cand(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] > 0.0) {
      col_p[i] = static_cast<long>(model.add_column(w[i], var_rows[i]));
      if (bound_row[i] >= 0) {
        std::vector<Term> q;
        for (const Term& t : var_rows[i]) q.push_back({t.index, -t.coef});
        q.push_back({static_cast<std::size_t>(bound_row[i]), 1.0});
        col_q[i] = static_cast<long>(model.add_column(w[i], std::move(q)));
      }
    } else if (!lazy[i]) {
      col_z[i] = static_cast<long>(model.add_column(0.0, var_rows[i]));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!lazy[i]) continue;
    std::vector<Term> companion;
    double rhs = 0.0;
    if (companion_upper[i] >= 0) {
      const auto u = static_cast<std::size_t>(companion_upper[i]);
      if (w[u] > 0.0) {
        companion.push_back({static_cast<std::size_t>(col_p[u]), -1.0});
        if (col_q[u] >= 0) companion.push_back({static_cast<std::size_t>(col_q[u]), 1.0});
        rhs = px[u];
      } else {
        companion.push_back({static_cast<std::size_t>(col_z[u]), -1.0});
      }
    }
    cand[i] = static_cast<long>(model.add_candidate(0.0, var_rows[i], std::move(companion), rhs));
  }

  // Seeds: previously positive lazy variables, and for every covering row
  // without other support the lazy variable whose companion upper is largest
  // in prev (ties: lightest packing weight, then lowest index).
  std::vector<double> packing_weight(n, 0.0);
  for (const auto& row : body.packing) {
    for (const Term& t : row) packing_weight[t.index] += t.coef;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (lazy[i] && px[i] > 0.0) model.activate(static_cast<std::size_t>(cand[i]));
  }
  auto upper_prev = [&](std::size_t i) {
    return companion_upper[i] >= 0 ? px[static_cast<std::size_t>(companion_upper[i])] : 1.0;
  };
  for (const auto& row : body.covering) {
    long best = -1;
    bool has_fixed = false;
    for (const Term& t : row) {
      if (t.coef <= 0.0) continue;
      if (!lazy[t.index]) {
        has_fixed = true;
        break;
      }
      if (best < 0) {
        best = static_cast<long>(t.index);
        continue;
      }
      const auto b = static_cast<std::size_t>(best);
      const double ub = upper_prev(t.index), bb = upper_prev(b);
      if (ub > bb || (ub == bb && packing_weight[t.index] < packing_weight[b])) best = static_cast<long>(t.index);
    }
    if (!has_fixed && best >= 0) model.activate(static_cast<std::size_t>(cand[static_cast<std::size_t>(best)]));
  }

  const lp::Status st = model.solve();
  if (st == lp::Status::kInfeasible) {
    for (std::size_t r : model.infeasible_rows()) {
      if (r < num_cov) {
        throw BodyError("project: covering row " + std::to_string(r) +
                            " cannot be satisfied within the relaxed packing caps",
                        r);
      }
    }
    throw BodyError("project: relaxed body is empty");
  }
  if (st != lp::Status::kOptimal) throw BodyError(std::string("project: LP ended with status ") + lp::to_string(st));

  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double v;
    if (w[i] > 0.0) {
      v = px[i] + model.column_value(static_cast<std::size_t>(col_p[i]));
      if (col_q[i] >= 0) v -= model.column_value(static_cast<std::size_t>(col_q[i]));
    } else if (lazy[i]) {
      v = model.candidate_value(static_cast<std::size_t>(cand[i]));
    } else {
      v = model.column_value(static_cast<std::size_t>(col_z[i]));
    }
    x[i] = std::max(v, 0.0);
  }
  return finish_projection(prev, body, eps, std::move(x));
}

SeparationResult check_fl_separation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw BodyError("check_fl_separation: size mismatch");
  SeparationResult res;
  for (std::size_t i = 0; i < x.size(); ++i) res.coverage += std::min(y[i], x[i]);
  res.feasible = res.coverage >= 1.0 - 1e-9;
  if (!res.feasible) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] >= y[i]) res.violated_set.push_back(i);
    }
  }
  return res;
}

RepairResult repair_y(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw BodyError("repair_y: size mismatch");
  RepairResult res;
  res.y.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    res.y[i] = std::min(y[i], x[i]);
    res.coverage += res.y[i];
  }
  res.ok = res.coverage >= 1.0 - 1e-9;
  return res;
}

std::size_t LazyLp::add_row(lp::Sense sense, double rhs) {
  if (simplex_.num_columns() > 0) throw lp::LpError("LazyLp: rows must be added before columns");
  ++num_rows_;
  return simplex_.add_row(sense, rhs);
}

std::size_t LazyLp::add_column(double cost, std::vector<Term> by_row) {
  if (!cands_.empty()) throw lp::LpError("LazyLp: fixed columns must precede candidates");
  return simplex_.add_column(cost, by_row);
}

std::size_t LazyLp::add_candidate(double cost, std::vector<Term> by_row, std::vector<Term> companion,
                                  double companion_rhs) {
  const std::size_t id = cands_.size();
  for (const Term& t : by_row) {
    if (t.index >= num_rows_) throw lp::LpError("LazyLp: candidate row out of range");
  }
  cands_.push_back({cost, std::move(by_row), std::move(companion), companion_rhs, -1});
  return id;
}

void LazyLp::activate(std::size_t candidate) {
  Candidate& c = cands_.at(candidate);
  if (c.column >= 0) return;
  const std::size_t col = simplex_.add_column(c.cost, c.by_row);
  c.column = static_cast<long>(col);
  ++active_count_;
  if (!c.companion.empty()) {
    std::vector<Term> row = c.companion;
    row.push_back({col, 1.0});
    simplex_.add_row(lp::Sense::kLessEqual, c.companion_rhs, row);
  }
}

bool LazyLp::admit_improving(bool phase_one) {
  // A candidate whose companion row has slack improves on its own when its
  // reduced cost is negative. A candidate whose companion binds can only grow
  // together with a loosening column (the companion term with negative
  // coefficient); such candidates are grouped by that column and admitted
  // when their combined gain beats the column's reduced cost.
  const std::vector<double> duals = simplex_.duals();
  std::vector<std::pair<double, std::size_t>> best(num_rows_ + 1, {-kPriceTol, cands_.size()});
  struct Group {
    double gain = 0.0;
    double unit_cost = 0.0;
    std::vector<std::pair<double, std::size_t>> members;
  };
  std::map<std::size_t, Group> groups;
  for (std::size_t id = 0; id < cands_.size(); ++id) {
    const Candidate& c = cands_[id];
    if (c.column >= 0) continue;
    double rc = phase_one ? 0.0 : c.cost;
    for (const Term& t : c.by_row) rc -= duals[t.index] * t.coef;
    if (rc >= -kPriceTol) continue;
    double slack = c.companion_rhs;
    const Term* loosen = nullptr;
    for (const Term& t : c.companion) {
      slack -= t.coef * simplex_.value(t.index);
      if (t.coef < 0.0 && loosen == nullptr) loosen = &t;
    }
    if (c.companion.empty() || slack > kPriceTol) {
      const std::size_t key = c.by_row.empty() ? num_rows_ : c.by_row.front().index;
      if (rc < best[key].first) best[key] = {rc, id};
      continue;
    }
    if (loosen == nullptr) continue;
    Group& g = groups[loosen->index];
    g.unit_cost = simplex_.column_reduced_cost(loosen->index) / -loosen->coef;
    g.gain -= rc;
    g.members.push_back({rc, id});
  }
  bool added = false;
  for (const auto& b : best) {
    if (b.second < cands_.size()) {
      activate(b.second);
      added = true;
    }
  }
  for (auto& [col, g] : groups) {
    if (g.gain <= g.unit_cost + kPriceTol) continue;
    std::sort(g.members.begin(), g.members.end());
    double acc = 0.0;
    for (const auto& [rc, id] : g.members) {
      activate(id);
      added = true;
      acc -= rc;
      if (acc > g.unit_cost + kPriceTol) break;
    }
  }
  return added;
}

double LazyLp::candidate_value(std::size_t candidate) const {
  const Candidate& c = cands_.at(candidate);
  return c.column >= 0 ? simplex_.value(static_cast<std::size_t>(c.column)) : 0.0;
}

lp::Status LazyLp::solve() {
  infeasible_.clear();
  for (;;) {
    const lp::Status st = simplex_.solve();
    if (st == lp::Status::kInfeasible) {
      // Phase-one prices: admit candidates that can reduce the infeasibility.
      if (!admit_improving(true)) {
        for (std::size_t r : simplex_.infeasible_rows()) {
          if (r < num_rows_) infeasible_.push_back(r);
        }
        return st;
      }
      continue;
    }
    if (st != lp::Status::kOptimal) return st;

    if (!admit_improving(false)) return st;
  }
}

}  // namespace ccl
