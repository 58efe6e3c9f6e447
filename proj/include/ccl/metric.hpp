#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccl {

/// Absolute tolerance for ball membership and constraint comparisons.
inline constexpr double kTol = 1e-9;

/// Largest point count for which a dense distance table is built.
inline constexpr std::size_t kMaxDensePoints = 5000;

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite metric space backed by a dense symmetric distance table.
///
/// Distinct indices may sit at distance 0 (duplicate rows). Every nonzero
/// distance is at least 1; constructions that normalize make the smallest
/// nonzero distance exactly 1. `delta()` is the largest pairwise distance.
class MetricSpace {
 public:
  MetricSpace() = default;

  /// Euclidean metric over feature rows, scaled so the smallest nonzero
  /// pairwise distance is 1.
  static MetricSpace from_feature_rows(const std::vector<std::vector<double>>& rows);

  /// Metric from an explicit row-major n*n table. With `normalize` the table
  /// is divided by its smallest nonzero entry. Throws MetricError when the
  /// table is not a metric.
  static MetricSpace from_table(std::vector<double> table, std::size_t n, bool normalize);

  std::size_t size() const noexcept { return n_; }
  double delta() const noexcept { return delta_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return dist_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {dist_.data() + i * n_, n_}; }

  /// Closed ball: points of `universe` within `radius` (+kTol) of `center`.
  std::vector<std::size_t> ball(std::size_t center, double radius,
                                std::span<const std::size_t> universe) const;
  /// Closed ball over every point of the space.
  std::vector<std::size_t> ball(std::size_t center, double radius) const;

  /// Smallest nonzero pairwise distance.
  double min_nonzero() const;

  /// Checks symmetry, zero diagonal, nonnegativity, nonzero distances >= 1
  /// and the triangle inequality (exhaustive up to 200 points, sampled above).
  void validate() const;

 private:
  MetricSpace(std::vector<double> table, std::size_t n);

  std::size_t n_ = 0;
  std::vector<double> dist_;
  double delta_ = 0.0;
};

/// Uniform binary hierarchically separated tree. Leaves sit at level 0 and
/// the root at level `height`; an edge between levels i-1 and i costs
/// (4c)^(i-1).
///
/// Two metrics are exposed. `leaves` contains only the 2^h leaves (leaf q is
/// point q). `nodes` contains every tree node: points 0..2^h-1 are the leaves
/// in the same order, followed by internal nodes level by level.
struct Hst {
  int height = 0;
  double c = 1.0;
  MetricSpace leaves;
  MetricSpace nodes;

  std::size_t num_leaves() const noexcept { return std::size_t{1} << height; }
  /// Cost of an edge from level `level` to level `level + 1`.
  double edge_cost(int level) const;
  /// Distance between two leaves whose lowest common ancestor is at `level`.
  double leaf_distance_at_lca(int level) const;
  /// Point index in `nodes` of the node at `level` with position `pos`
  /// (0 <= pos < 2^(height-level)).
  std::size_t node_index(int level, std::size_t pos) const;
  /// Leaves below a node, as the half-open range [first, last).
  std::pair<std::size_t, std::size_t> leaf_range(int level, std::size_t pos) const;
};

/// Builds the (4c)-HST with 2^height leaves. Requires height >= 1, c >= 1.
Hst build_hst(int height, double c);

/// Numeric CSV ingestion result.
struct CsvData {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> warnings;
  bool had_header = false;
};

/// Reads a numeric CSV: one row per point. A first row that does not parse
/// as numbers is treated as a header; columns with any non-numeric cell are
/// dropped and reported in `warnings`.
CsvData read_numeric_csv(const std::string& path);

}  // namespace ccl
