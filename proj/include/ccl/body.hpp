#pragma once

#include "ccl/lp.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccl {

using lp::Term;

class BodyError : public std::runtime_error {
 public:
  BodyError(const std::string& what, std::optional<std::size_t> covering_row = std::nullopt)
      : std::runtime_error(what), covering_row_(covering_row) {}
  /// Index of the covering row that could not be satisfied, when known.
  std::optional<std::size_t> covering_row() const noexcept { return covering_row_; }

 private:
  std::optional<std::size_t> covering_row_;
};

/// Positive body {x >= 0 : Cx >= 1, Px <= rhs} plus hard coupling rows
/// x[lower] <= x[upper]. Term indices refer to variables.
///
/// Packing right-hand sides are 1 after normalization; a right-hand side of 0
/// encodes "every variable in the support is 0". Only packing rows are relaxed
/// by (1+eps) in K^{1+eps}; covering and coupling rows are exact.
struct Body {
  struct Coupling {
    std::size_t lower;
    std::size_t upper;
  };

  std::size_t num_vars = 0;
  std::vector<std::vector<Term>> covering;
  std::vector<std::vector<Term>> packing;
  std::vector<double> packing_rhs;
  std::vector<Coupling> coupling;
  std::vector<double> weights;

  /// Throws BodyError on negative coefficients, bad indices or empty covering rows.
  void validate() const;
  /// Membership in K^{1+eps} with absolute tolerance `tol`.
  bool contains(const std::vector<double>& x, double eps, double tol = 1e-9) const;
};

struct FractionalState {
  std::vector<double> x;
  double cumulative_movement = 0.0;
};

struct ProjectResult {
  FractionalState state;
  double movement = 0.0;
};

/// Weighted-l1-minimal move of `prev` into K^{1+eps}. The returned movement
/// counts only variables with positive weight. Throws BodyError when the
/// relaxed body is empty.
ProjectResult project(const FractionalState& prev, const Body& body, double eps);

/// Weighted l1 distance over variables with positive weight.
double weighted_movement(const std::vector<double>& a, const std::vector<double>& b,
                         const std::vector<double>& weights);

struct SeparationResult {
  bool feasible = true;
  double coverage = 0.0;                 // sum_i min(y_i, x_i)
  std::vector<std::size_t> violated_set;  // {i : x_i >= y_i} when infeasible
};

/// Checks sum_{i in F'} y_i + sum_{i not in F'} x_i >= 1 for every F' by
/// testing the minimizing subset.
SeparationResult check_fl_separation(const std::vector<double>& x, const std::vector<double>& y);

struct RepairResult {
  std::vector<double> y;
  double coverage = 0.0;
  bool ok = true;
};

/// y'_i = min(y_i, x_i); `ok` is false when the repaired coverage drops below 1.
RepairResult repair_y(const std::vector<double>& x, const std::vector<double>& y);

/// min c^T z over fixed columns plus lazily priced candidate columns.
///
/// A candidate may carry a companion row  z_cand + sum(terms) <= rhs  over
/// fixed columns, which is added together with the candidate. Candidates are
/// generated by reduced-cost pricing, so the final point is optimal for the
/// problem with every candidate present.
class LazyLp {
 public:
  std::size_t add_row(lp::Sense sense, double rhs);
  std::size_t add_column(double cost, std::vector<Term> by_row);
  std::size_t add_candidate(double cost, std::vector<Term> by_row, std::vector<Term> companion = {},
                            double companion_rhs = 0.0);
  void activate(std::size_t candidate);

  /// Returns kOptimal, kInfeasible or kUnbounded.
  lp::Status solve();

  double objective() const { return simplex_.objective(); }
  double column_value(std::size_t column) const { return simplex_.value(column); }
  double candidate_value(std::size_t candidate) const;
  std::size_t num_candidates() const noexcept { return cands_.size(); }
  std::size_t num_active() const noexcept { return active_count_; }
  /// Rows still violated once no candidate can reduce the infeasibility.
  const std::vector<std::size_t>& infeasible_rows() const noexcept { return infeasible_; }

 private:
  struct Candidate {
    double cost;
    std::vector<Term> by_row;
    std::vector<Term> companion;
    double companion_rhs;
    long column = -1;
  };

  bool admit_improving(bool phase_one);

  lp::Simplex simplex_;
  std::vector<Candidate> cands_;
  std::size_t num_rows_ = 0;
  std::size_t active_count_ = 0;
  std::vector<std::size_t> infeasible_;
};

}  // namespace ccl
