#include "ccl/lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <limits>

namespace ccl::lp {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kOptTol = 1e-9;
constexpr double kFeasTol = 1e-9;
constexpr double kPhaseOneTol = 1e-8;
constexpr double kRefactorFeasTol = 1e-7;
constexpr double kDropTol = 1e-13;
constexpr std::size_t kDegenerateStreak = 50;
constexpr double kPerturb = 1e-7;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct NumericalBreakdown {};

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::kUnsolved: return "unsolved";
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kIterationLimit: return "iteration-limit";
  }
  return "?";
}

std::size_t Simplex::add_row(Sense sense, double rhs) { return add_row(sense, rhs, {}); }

std::size_t Simplex::add_row(Sense sense, double rhs, std::span<const Term> by_column) {
  const std::size_t r = rows_.size();
  rows_.push_back({sense, rhs});
  for (const Term& t : by_column) {
    if (t.index >= cols_.size()) throw LpError("add_row: column index out of range");
    if (t.coef != 0.0) cols_[t.index].entries.push_back({r, t.coef});
  }
  status_ = Status::kUnsolved;
  if (!built_ || need_cold_ || sense == Sense::kEqual) {
    need_cold_ = true;
    return r;
  }
  append_row_to_tableau(r);
  return r;
}

std::size_t Simplex::add_column(double cost, std::span<const Term> by_row) {
  const std::size_t j = cols_.size();
  Column col{cost, {}};
  for (const Term& t : by_row) {
    if (t.index >= rows_.size()) throw LpError("add_column: row index out of range");
    if (t.coef != 0.0) col.entries.push_back(t);
  }
  cols_.push_back(std::move(col));
  status_ = Status::kUnsolved;
  if (!built_ || need_cold_) {
    need_cold_ = true;
    return j;
  }
  append_structural_to_tableau(j);
  return j;
}

void Simplex::append_structural_to_tableau(std::size_t column) {
  const std::size_t v = vars_.size();
  vars_.push_back({VarKind::kStructural, column});
  struct_var_.push_back(v);
  basic_row_.push_back(-1);
  const auto& entries = cols_[column].entries;
  for (auto& row : tab_) {
    double val = 0.0;
    for (const Term& t : entries) val += sign_[t.index] * t.coef * row[identity_var_[t.index]];
    row.push_back(std::abs(val) < kDropTol ? 0.0 : val);
  }
  double rc = cols_[column].cost;
  for (const Term& t : entries) rc += sign_[t.index] * t.coef * obj_[identity_var_[t.index]];
  obj_.push_back(rc);
}

void Simplex::append_row_to_tableau(std::size_t r) {
  const double sigma = rows_[r].sense == Sense::kLessEqual ? 1.0 : -1.0;
  sign_.push_back(sigma);
  const std::size_t v = vars_.size();
  vars_.push_back({VarKind::kSlack, r});
  for (auto& row : tab_) row.push_back(0.0);
  obj_.push_back(0.0);
  basic_row_.push_back(static_cast<long>(r));

  std::vector<double> nr(vars_.size(), 0.0);
  for (std::size_t j = 0; j < cols_.size(); ++j) {
    const auto& e = cols_[j].entries;
    if (!e.empty() && e.back().index == r) nr[struct_var_[j]] += sigma * e.back().coef;
  }
  nr[v] = 1.0;
  double rhs = sigma * rows_[r].rhs;
  for (std::size_t i = 0; i < tab_.size(); ++i) {
    const double f = nr[basis_[i]];
    if (f == 0.0) continue;
    const auto& ti = tab_[i];
    for (std::size_t k = 0; k < nr.size(); ++k) {
      if (ti[k] != 0.0) nr[k] -= f * ti[k];
    }
    nr[basis_[i]] = 0.0;
    rhs -= f * rhs_[i];
  }
  for (double& x : nr) {
    if (std::abs(x) < kDropTol) x = 0.0;
  }
  nr[v] = 1.0;
  tab_.push_back(std::move(nr));
  basis_.push_back(v);
  identity_var_.push_back(v);
  if (rhs > -kFeasTol) rhs = std::max(rhs, 0.0);
  rhs_.push_back(rhs);
}

double Simplex::internal_cost(std::size_t var, bool phase_one) const {
  const Var& v = vars_[var];
  if (phase_one) return v.kind == VarKind::kArtificial ? 1.0 : 0.0;
  return v.kind == VarKind::kStructural ? cols_[v.ref].cost : 0.0;
}

void Simplex::cold_start() {
  ++stats_.cold_starts;
  const std::size_t m = rows_.size();
  sign_.assign(m, 1.0);
  vars_.clear();
  struct_var_.clear();
  identity_var_.assign(m, kNone);
  for (std::size_t j = 0; j < cols_.size(); ++j) {
    struct_var_.push_back(vars_.size());
    vars_.push_back({VarKind::kStructural, j});
  }
  std::vector<Sense> eff(m);
  for (std::size_t i = 0; i < m; ++i) {
    Sense s = rows_[i].sense;
    if (rows_[i].rhs < 0.0) {
      sign_[i] = -1.0;
      if (s == Sense::kLessEqual) s = Sense::kGreaterEqual;
      else if (s == Sense::kGreaterEqual) s = Sense::kLessEqual;
    }
    eff[i] = s;
    if (s == Sense::kLessEqual) {
      identity_var_[i] = vars_.size();
      vars_.push_back({VarKind::kSlack, i});
    } else {
      if (s == Sense::kGreaterEqual) vars_.push_back({VarKind::kSurplus, i});
      identity_var_[i] = vars_.size();
      vars_.push_back({VarKind::kArtificial, i});
    }
  }
  const std::size_t n = vars_.size();
  tab_.assign(m, std::vector<double>(n, 0.0));
  rhs_.assign(m, 0.0);
  for (std::size_t j = 0; j < cols_.size(); ++j) {
    for (const Term& t : cols_[j].entries) tab_[t.index][struct_var_[j]] += sign_[t.index] * t.coef;
  }
  for (std::size_t k = cols_.size(); k < n; ++k) {
    const Var& v = vars_[k];
    tab_[v.ref][k] = v.kind == VarKind::kSurplus ? -1.0 : 1.0;
  }
  basis_.assign(m, 0);
  basic_row_.assign(n, -1);
  for (std::size_t i = 0; i < m; ++i) {
    rhs_[i] = sign_[i] * rows_[i].rhs;
    basis_[i] = identity_var_[i];
    basic_row_[identity_var_[i]] = static_cast<long>(i);
  }
  obj_.assign(n, 0.0);
  obj_rhs_ = 0.0;
  pivots_since_refactor_ = 0;
  shift_.clear();
  built_ = true;
  need_cold_ = false;
}

void Simplex::compute_objective_row(bool phase_one) {
  obj_phase_one_ = phase_one;
  const std::size_t n = vars_.size();
  for (std::size_t k = 0; k < n; ++k) obj_[k] = internal_cost(k, phase_one);
  obj_rhs_ = 0.0;
  for (std::size_t i = 0; i < tab_.size(); ++i) {
    const double cb = internal_cost(basis_[i], phase_one);
    if (cb == 0.0) continue;
    const auto& ti = tab_[i];
    for (std::size_t k = 0; k < n; ++k) {
      if (ti[k] != 0.0) obj_[k] -= cb * ti[k];
    }
    obj_rhs_ -= cb * rhs_[i];
  }
  for (std::size_t i = 0; i < basis_.size(); ++i) obj_[basis_[i]] = 0.0;
}

void Simplex::pivot(std::size_t r, std::size_t e) {
  auto& pr = tab_[r];
  const double p = pr[e];
  std::vector<std::size_t> nz;
  nz.reserve(64);
  for (std::size_t k = 0; k < pr.size(); ++k) {
    if (pr[k] != 0.0) {
      pr[k] /= p;
      nz.push_back(k);
    }
  }
  pr[e] = 1.0;
  rhs_[r] /= p;
  auto eliminate = [&](std::vector<double>& row, double& rhs) {
    const double f = row[e];
    if (f == 0.0) return;
    for (std::size_t k : nz) {
      double& x = row[k];
      x -= f * pr[k];
      if (std::abs(x) < kDropTol) x = 0.0;
    }
    row[e] = 0.0;
    rhs -= f * rhs_[r];
  };
  for (std::size_t i = 0; i < tab_.size(); ++i) {
    if (i == r) continue;
    eliminate(tab_[i], rhs_[i]);
    if (rhs_[i] < 0.0 && rhs_[i] > -kFeasTol) rhs_[i] = 0.0;
  }
  eliminate(obj_, obj_rhs_);
  basic_row_[basis_[r]] = -1;
  basis_[r] = e;
  basic_row_[e] = static_cast<long>(r);
  ++stats_.pivots;
  ++pivots_since_refactor_;
}

void Simplex::refactor() {
  const std::size_t m = tab_.size();
  ++stats_.refactorizations;
  pivots_since_refactor_ = 0;
  if (m == 0) return;
  auto internal_col = [this](std::size_t var, auto&& emit) {
    const Var& v = vars_[var];
    switch (v.kind) {
      case VarKind::kStructural:
        for (const Term& t : cols_[v.ref].entries) emit(t.index, sign_[t.index] * t.coef);
        break;
      case VarKind::kSlack:
      case VarKind::kArtificial: emit(v.ref, 1.0); break;
      case VarKind::kSurplus: emit(v.ref, -1.0); break;
    }
  };
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    internal_col(basis_[i], [&](std::size_t row, double a) {
      basis(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i)) += a;
    });
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
  if (!(lu.rcond() > 1e-14)) throw NumericalBreakdown{};
  const Eigen::MatrixXd inv = lu.inverse();

  const std::size_t n = vars_.size();
  for (auto& row : tab_) std::fill(row.begin(), row.end(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    internal_col(k, [&](std::size_t row, double a) {
      const double* col = inv.data() + static_cast<Eigen::Index>(row) * static_cast<Eigen::Index>(m);
      for (std::size_t r = 0; r < m; ++r) tab_[r][k] += a * col[r];
    });
  }
  for (auto& row : tab_) {
    for (double& x : row) {
      if (std::abs(x) < kDropTol) x = 0.0;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t r = 0; r < m; ++r) tab_[r][basis_[i]] = (r == i) ? 1.0 : 0.0;
  }
  Eigen::VectorXd b(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    b[static_cast<Eigen::Index>(i)] = sign_[i] * rows_[i].rhs + (i < shift_.size() ? shift_[i] : 0.0);
  }
  const Eigen::VectorXd x = inv * b;
  for (std::size_t i = 0; i < m; ++i) rhs_[i] = x[static_cast<Eigen::Index>(i)];
}

bool Simplex::primal_feasible(double tol) const {
  return std::all_of(rhs_.begin(), rhs_.end(), [tol](double v) { return v >= -tol; });
}

Status Simplex::run(bool phase_one) {
  const std::size_t m = tab_.size();
  const std::size_t refactor_every = std::max<std::size_t>(100, m);
  const std::size_t limit = 50 * (m + vars_.size()) + 10000;
  std::size_t degenerate = 0;
  bool bland = false;
  bool verified = false;
  for (std::size_t iter = 0; iter < limit; ++iter) {
    if (pivots_since_refactor_ >= refactor_every) {
      refactor();
      if (!primal_feasible(kRefactorFeasTol)) throw NumericalBreakdown{};
      compute_objective_row(phase_one);
    }
    std::size_t e = kNone;
    double best = -kOptTol;
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      if (basic_row_[k] >= 0 || vars_[k].kind == VarKind::kArtificial) continue;
      const double rc = obj_[k];
      if (rc < best) {
        e = k;
        if (bland) break;
        best = rc;
      }
    }
    if (e == kNone) {
      if (pivots_since_refactor_ > 0 && !verified && basic_residual() > kFeasTol) {
        refactor();
        if (!primal_feasible(kRefactorFeasTol)) throw NumericalBreakdown{};
        compute_objective_row(phase_one);
        verified = true;
        continue;
      }
      verified = true;
      if (!shift_.empty()) {
        if (!unperturb(phase_one)) throw NumericalBreakdown{};
        continue;
      }
      for (double& v : rhs_) v = std::max(v, 0.0);
      return Status::kOptimal;
    }
    verified = false;

    std::size_t r = kNone;
    double min_ratio = std::numeric_limits<double>::infinity();
    double best_pivot = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double a = tab_[i][e];
      double ratio;
      if (!phase_one && vars_[basis_[i]].kind == VarKind::kArtificial && std::abs(a) > kPivotTol) {
        ratio = 0.0;
      } else if (a > kPivotTol) {
        ratio = std::max(rhs_[i], 0.0) / a;
      } else {
        continue;
      }
      const double tie = 1e-12 * (1.0 + std::abs(min_ratio == std::numeric_limits<double>::infinity() ? 0.0 : min_ratio));
      if (r == kNone || ratio < min_ratio - tie) {
        r = i;
        min_ratio = ratio;
        best_pivot = std::abs(a);
      } else if (ratio <= min_ratio + tie) {
        const bool take = bland ? basis_[i] < basis_[r] : std::abs(a) > best_pivot;
        if (take) {
          r = i;
          min_ratio = std::min(min_ratio, ratio);
          best_pivot = std::abs(a);
        }
      }
    }
    if (r == kNone) return Status::kUnbounded;
    // A step counts as progress only if the objective moves beyond noise.
    const double gain = min_ratio * -obj_[e];
    if (gain <= 1e-11 * (1.0 + std::abs(obj_rhs_))) {
      if (++degenerate > kDegenerateStreak) {
        if (shift_.empty()) {
          perturb();
          degenerate = 0;
          continue;
        }
        bland = true;
      }
    } else {
      degenerate = 0;
      bland = false;
    }
    if (bland) ++stats_.bland_pivots;
    pivot(r, e);
  }
  return Status::kIterationLimit;
}

void Simplex::add_internal_col(std::size_t var, double scale, std::vector<double>& into) const {
  const Var& v = vars_[var];
  switch (v.kind) {
    case VarKind::kStructural:
      for (const Term& t : cols_[v.ref].entries) into[t.index] += scale * sign_[t.index] * t.coef;
      break;
    case VarKind::kSlack:
    case VarKind::kArtificial: into[v.ref] += scale; break;
    case VarKind::kSurplus: into[v.ref] -= scale; break;
  }
}

// Lifts every near-zero basic value by a small distinct amount, which breaks
// the ties that make degenerate pivots stall. The lift is recorded as a
// right-hand side shift so refactorization reproduces it.
void Simplex::perturb() {
  const std::size_t m = tab_.size();
  shift_.assign(m, 0.0);
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::size_t i = 0; i < m; ++i) {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 29;
    if (rhs_[i] > kPerturb) continue;
    const double lift = kPerturb * (1.0 + static_cast<double>(h % 1024) / 1024.0);
    rhs_[i] += lift;
    add_internal_col(basis_[i], lift, shift_);
  }
  ++stats_.perturbations;
}

// Removes the shift and repairs the basis with dual pivots. The reduced costs
// do not depend on the right-hand side, so the basis stays dual feasible.
bool Simplex::unperturb(bool phase_one) {
  shift_.clear();
  refactor();
  compute_objective_row(phase_one);
  if (primal_feasible(kFeasTol)) return true;
  return run_dual(phase_one) == Status::kOptimal;
}

bool Simplex::dual_feasible() const {
  if (obj_phase_one_) return false;
  for (std::size_t k = 0; k < vars_.size(); ++k) {
    if (basic_row_[k] >= 0 || vars_[k].kind == VarKind::kArtificial) continue;
    if (obj_[k] < -kOptTol) return false;
  }
  return true;
}

Status Simplex::run_dual(bool phase_one) {
  const std::size_t m = tab_.size();
  const std::size_t refactor_every = std::max<std::size_t>(100, m);
  const std::size_t limit = 50 * (m + vars_.size()) + 10000;
  for (std::size_t iter = 0; iter < limit; ++iter) {
    if (pivots_since_refactor_ >= refactor_every) {
      refactor();
      compute_objective_row(phase_one);
    }
    std::size_t r = kNone;
    double worst = -kFeasTol;
    for (std::size_t i = 0; i < m; ++i) {
      if (rhs_[i] < worst) {
        worst = rhs_[i];
        r = i;
      }
    }
    if (r == kNone) {
      for (double& v : rhs_) v = std::max(v, 0.0);
      return Status::kOptimal;
    }
    const auto& tr = tab_[r];
    std::size_t e = kNone;
    double best_ratio = std::numeric_limits<double>::infinity();
    double best_abs = 0.0;
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      if (basic_row_[k] >= 0 || vars_[k].kind == VarKind::kArtificial) continue;
      const double a = tr[k];
      if (a >= -kPivotTol) continue;
      const double ratio = std::max(obj_[k], 0.0) / -a;
      const double tie = 1e-12 * (1.0 + (e == kNone ? 0.0 : best_ratio));
      if (e == kNone || ratio < best_ratio - tie || (ratio <= best_ratio + tie && -a > best_abs)) {
        best_ratio = e == kNone ? ratio : std::min(ratio, best_ratio);
        e = k;
        best_abs = -a;
      }
    }
    if (e == kNone) return Status::kInfeasible;
    pivot(r, e);
  }
  return Status::kIterationLimit;
}

void Simplex::drive_out_artificials() {
  for (std::size_t i = 0; i < tab_.size(); ++i) {
    if (vars_[basis_[i]].kind != VarKind::kArtificial) continue;
    std::size_t best = kNone;
    double best_abs = kPivotTol;
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      if (basic_row_[k] >= 0 || vars_[k].kind == VarKind::kArtificial) continue;
      if (std::abs(tab_[i][k]) > best_abs) {
        best_abs = std::abs(tab_[i][k]);
        best = k;
      }
    }
    if (best != kNone) {
      rhs_[i] = 0.0;
      pivot(i, best);
    }
  }
}

Status Simplex::solve() {
  infeasible_rows_.clear();
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      if (!need_cold_ && built_ && !primal_feasible(kFeasTol)) {
        if (dual_feasible() && run_dual(false) == Status::kOptimal) {
          ++stats_.dual_solves;
        } else {
          need_cold_ = true;
        }
      }
      if (need_cold_ || !built_) {
        cold_start();
        const bool has_artificial = std::any_of(vars_.begin(), vars_.end(),
                                                [](const Var& v) { return v.kind == VarKind::kArtificial; });
        if (has_artificial) {
          compute_objective_row(true);
          const Status s = run(true);
          if (s != Status::kOptimal) {
            status_ = s;
            need_cold_ = true;
            return status_;
          }
          double infeas = 0.0;
          for (std::size_t i = 0; i < tab_.size(); ++i) {
            if (vars_[basis_[i]].kind == VarKind::kArtificial) infeas += rhs_[i];
          }
          if (infeas > kPhaseOneTol) {
            for (std::size_t i = 0; i < tab_.size(); ++i) {
              if (vars_[basis_[i]].kind == VarKind::kArtificial && rhs_[i] > kFeasTol) {
                infeasible_rows_.push_back(vars_[basis_[i]].ref);
              }
            }
            std::sort(infeasible_rows_.begin(), infeasible_rows_.end());
            status_ = Status::kInfeasible;
            need_cold_ = true;
            return status_;
          }
          drive_out_artificials();
        }
        compute_objective_row(false);
      }
      status_ = run(false);
      if (status_ != Status::kOptimal) need_cold_ = true;
      return status_;
    } catch (const NumericalBreakdown&) {
      need_cold_ = true;
    }
  }
  throw LpError("simplex: numerical breakdown persisted after a cold restart");
}

double Simplex::value(std::size_t column) const {
  if (column >= cols_.size()) throw LpError("value: column out of range");
  if (column >= struct_var_.size()) return 0.0;
  const long r = basic_row_[struct_var_[column]];
  return r >= 0 ? std::max(rhs_[static_cast<std::size_t>(r)], 0.0) : 0.0;
}

std::vector<double> Simplex::values() const {
  std::vector<double> out(cols_.size());
  for (std::size_t j = 0; j < cols_.size(); ++j) out[j] = value(j);
  return out;
}

double Simplex::objective() const {
  double s = 0.0;
  for (std::size_t j = 0; j < cols_.size(); ++j) s += cols_[j].cost * value(j);
  return s;
}

double Simplex::dual(std::size_t row) const {
  if (status_ != Status::kOptimal && status_ != Status::kInfeasible) throw LpError("dual: no final basis");
  const std::size_t id = identity_var_[row];
  return sign_[row] * (internal_cost(id, obj_phase_one_) - obj_[id]);
}

double Simplex::column_reduced_cost(std::size_t column) const {
  if (status_ != Status::kOptimal && status_ != Status::kInfeasible) throw LpError("column_reduced_cost: no final basis");
  return obj_[struct_var_.at(column)];
}

double Simplex::basic_residual() const {
  std::vector<double> r(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) r[i] = sign_[i] * rows_[i].rhs + (i < shift_.size() ? shift_[i] : 0.0);
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    const double v = rhs_[i];
    if (v == 0.0) continue;
    const Var& var = vars_[basis_[i]];
    switch (var.kind) {
      case VarKind::kStructural:
        for (const Term& t : cols_[var.ref].entries) r[t.index] -= sign_[t.index] * t.coef * v;
        break;
      case VarKind::kSlack:
      case VarKind::kArtificial: r[var.ref] -= v; break;
      case VarKind::kSurplus: r[var.ref] += v; break;
    }
  }
  double worst = 0.0;
  for (double x : r) worst = std::max(worst, std::abs(x));
  return worst;
}

std::vector<double> Simplex::duals() const {
  std::vector<double> out(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) out[i] = dual(i);
  return out;
}

double Simplex::reduced_cost(double cost, std::span<const Term> by_row) const {
  double rc = cost;
  for (const Term& t : by_row) rc -= dual(t.index) * t.coef;
  return rc;
}

std::vector<std::size_t> Simplex::infeasible_rows() const { return infeasible_rows_; }

}  // namespace ccl::lp
