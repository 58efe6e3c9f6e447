#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ccl::lp {

enum class Sense { kLessEqual, kGreaterEqual, kEqual };

enum class Status { kUnsolved, kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(Status s);

/// Sparse coefficient: `index` is a row when describing a column and a
/// column when describing a row.
struct Term {
  std::size_t index;
  double coef;
};

class LpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveStats {
  std::size_t pivots = 0;
  std::size_t bland_pivots = 0;
  std::size_t refactorizations = 0;
  std::size_t cold_starts = 0;
  std::size_t dual_solves = 0;
  std::size_t perturbations = 0;
};

/// Dense tableau simplex for   min c^T x  s.t.  A x {<=,>=,=} b,  x >= 0.
///
/// Entering variables are chosen by Dantzig's rule; after a streak of
/// degenerate pivots the solver switches to Bland's smallest-index rule until
/// the objective moves again, which rules out cycling. The tableau is
/// periodically rebuilt from the original data through an LU factorization
/// of the basis to keep round-off bounded.
///
/// After a solve, columns and inequality rows may be appended; the next
/// `solve()` resumes from the current basis. Appended rows that cut off the
/// current point are handled by dual simplex pivots while the basis stays
/// dual feasible. Anything else falls back to a cold two-phase solve.
class Simplex {
 public:
  std::size_t add_row(Sense sense, double rhs);
  /// Adds a row with coefficients given per existing column.
  std::size_t add_row(Sense sense, double rhs, std::span<const Term> by_column);
  /// Adds a column with coefficients given per existing row.
  std::size_t add_column(double cost, std::span<const Term> by_row);

  Status solve();

  Status status() const noexcept { return status_; }
  std::size_t num_rows() const noexcept { return rows_.size(); }
  std::size_t num_columns() const noexcept { return cols_.size(); }

  double objective() const;
  double value(std::size_t column) const;
  std::vector<double> values() const;
  /// Row dual prices: reduced cost of a column is cost - sum_i dual(i) * a_i.
  /// After kInfeasible these are the phase-one prices, under which a column
  /// with negative  -sum_i dual(i) * a_i  can reduce the infeasibility.
  double dual(std::size_t row) const;
  std::vector<double> duals() const;
  /// Reduced cost of an existing column under the objective of the last phase.
  double column_reduced_cost(std::size_t column) const;
  /// Reduced cost a column with these coefficients would have at the current basis.
  double reduced_cost(double cost, std::span<const Term> by_row) const;
  /// Rows still violated when phase one ended with status kInfeasible.
  std::vector<std::size_t> infeasible_rows() const;

  const SolveStats& stats() const noexcept { return stats_; }

 private:
  enum class VarKind { kStructural, kSlack, kSurplus, kArtificial };
  struct Var {
    VarKind kind;
    std::size_t ref;  // column index for structural, row index otherwise
  };
  struct Row {
    Sense sense;
    double rhs;
  };
  struct Column {
    double cost;
    std::vector<Term> entries;  // by row
  };

  void cold_start();
  Status run(bool phase_one);
  void pivot(std::size_t row, std::size_t col);
  void refactor();
  void compute_objective_row(bool phase_one);
  void drive_out_artificials();
  bool primal_feasible(double tol) const;
  bool dual_feasible() const;
  Status run_dual(bool phase_one);
  void perturb();
  bool unperturb(bool phase_one);
  void add_internal_col(std::size_t var, double scale, std::vector<double>& into) const;
  double basic_residual() const;
  double internal_cost(std::size_t var, bool phase_one) const;
  void append_structural_to_tableau(std::size_t column);
  void append_row_to_tableau(std::size_t row);

  std::vector<Row> rows_;
  std::vector<Column> cols_;

  // Internal state, valid while `built_`.
  bool built_ = false;
  bool need_cold_ = true;
  std::vector<double> sign_;               // per row: +1 or -1 applied to the row
  std::vector<Var> vars_;                  // tableau columns
  std::vector<std::size_t> struct_var_;    // column -> tableau column
  std::vector<std::size_t> identity_var_;  // row -> tableau column forming B^-1
  std::vector<std::vector<double>> tab_;   // constraint rows
  std::vector<double> rhs_;                // basic values
  std::vector<double> obj_;                // reduced costs
  double obj_rhs_ = 0.0;                   // minus the objective value
  bool obj_phase_one_ = false;             // which objective obj_ prices
  std::vector<std::size_t> basis_;         // row -> tableau column
  std::vector<long> basic_row_;            // tableau column -> row or -1
  std::size_t pivots_since_refactor_ = 0;
  std::vector<double> shift_;              // right-hand side perturbation, internal rows

  Status status_ = Status::kUnsolved;
  std::vector<std::size_t> infeasible_rows_;
  SolveStats stats_;
};

}  // namespace ccl::lp
