#include "ccl/metric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace ccl {

namespace {

constexpr std::size_t kExhaustiveTriangleLimit = 200;
constexpr std::size_t kSampledTriples = 2'000'000;

bool approx_le(double a, double b) { return a <= b + kTol * std::max(1.0, std::abs(b)); }

}  // namespace

MetricSpace::MetricSpace(std::vector<double> table, std::size_t n) : n_(n), dist_(std::move(table)) {
  delta_ = dist_.empty() ? 0.0 : *std::max_element(dist_.begin(), dist_.end());
}

MetricSpace MetricSpace::from_feature_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw MetricError("from_feature_rows: empty input");
  const std::size_t dim = rows.front().size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw MetricError("from_feature_rows: row " + std::to_string(i) + " has " +
                        std::to_string(rows[i].size()) + " columns, expected " + std::to_string(dim));
    }
  }
  const std::size_t n = rows.size();
  if (n > kMaxDensePoints) {
    throw MetricError("from_feature_rows: " + std::to_string(n) + " points exceeds the dense limit of " +
                      std::to_string(kMaxDensePoints));
  }
  std::vector<double> table(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = rows[i][k] - rows[j][k];
        s += diff * diff;
      }
      table[i * n + j] = table[j * n + i] = std::sqrt(s);
    }
  }
  return from_table(std::move(table), n, true);
}

MetricSpace MetricSpace::from_table(std::vector<double> table, std::size_t n, bool normalize) {
  if (n == 0) throw MetricError("metric: empty point set");
  if (n > kMaxDensePoints) throw MetricError("metric: point count exceeds the dense limit");
  if (table.size() != n * n) throw MetricError("metric: table size does not match n*n");
  if (normalize) {
    double min_nz = std::numeric_limits<double>::infinity();
    for (double d : table) {
      if (d > 0.0) min_nz = std::min(min_nz, d);
    }
    if (!std::isfinite(min_nz)) throw MetricError("metric: need at least two distinct points to normalize");
    for (double& d : table) d /= min_nz;
    // Pin the minimum to exactly 1 despite rounding in the division.
    for (double& d : table) {
      if (d > 0.0 && std::abs(d - 1.0) < 1e-12) d = 1.0;
    }
  }
  MetricSpace m(std::move(table), n);
  m.validate();
  return m;
}

std::vector<std::size_t> MetricSpace::ball(std::size_t center, double radius,
                                           std::span<const std::size_t> universe) const {
  std::vector<std::size_t> out;
  const auto r = row(center);
  for (std::size_t p : universe) {
    if (r[p] <= radius + kTol) out.push_back(p);
  }
  return out;
}

std::vector<std::size_t> MetricSpace::ball(std::size_t center, double radius) const {
  std::vector<std::size_t> out;
  const auto r = row(center);
  for (std::size_t p = 0; p < n_; ++p) {
    if (r[p] <= radius + kTol) out.push_back(p);
  }
  return out;
}

double MetricSpace::min_nonzero() const {
  double m = std::numeric_limits<double>::infinity();
  for (double d : dist_) {
    if (d > 0.0) m = std::min(m, d);
  }
  return m;
}

void MetricSpace::validate() const {
  for (std::size_t i = 0; i < n_; ++i) {
    if ((*this)(i, i) != 0.0) throw MetricError("metric: nonzero diagonal at " + std::to_string(i));
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double d = (*this)(i, j);
      if (!std::isfinite(d) || d < 0.0) throw MetricError("metric: invalid distance");
      if (d != (*this)(j, i)) throw MetricError("metric: asymmetric table");
      if (d > 0.0 && d < 1.0 - 1e-12) throw MetricError("metric: nonzero distance below 1");
    }
  }
  auto check = [this](std::size_t i, std::size_t j, std::size_t k) {
    if (!approx_le((*this)(i, k), (*this)(i, j) + (*this)(j, k))) {
      throw MetricError("metric: triangle inequality fails for (" + std::to_string(i) + "," +
                        std::to_string(j) + "," + std::to_string(k) + ")");
    }
  };
  if (n_ <= kExhaustiveTriangleLimit) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t k = 0; k < n_; ++k) check(i, j, k);
  } else {
    std::mt19937_64 rng(0x5eed);
    std::uniform_int_distribution<std::size_t> pick(0, n_ - 1);
    for (std::size_t s = 0; s < kSampledTriples; ++s) check(pick(rng), pick(rng), pick(rng));
  }
}

double Hst::edge_cost(int level) const { return std::pow(4.0 * c, level); }

double Hst::leaf_distance_at_lca(int level) const {
  double s = 0.0;
  for (int k = 0; k < level; ++k) s += edge_cost(k);
  return 2.0 * s;
}

std::size_t Hst::node_index(int level, std::size_t pos) const {
  std::size_t offset = 0;
  for (int l = 0; l < level; ++l) offset += std::size_t{1} << (height - l);
  return offset + pos;
}

std::pair<std::size_t, std::size_t> Hst::leaf_range(int level, std::size_t pos) const {
  return {pos << level, (pos + 1) << level};
}

Hst build_hst(int height, double c) {
  if (height < 1) throw MetricError("build_hst: height must be at least 1");
  if (!(c >= 1.0)) throw MetricError("build_hst: c must be at least 1");
  if (height > 11) throw MetricError("build_hst: height too large for a dense node metric");
  Hst hst;
  hst.height = height;
  hst.c = c;

  struct Node {
    int level;
    std::size_t pos;
  };
  std::vector<Node> nodes;
  for (int level = 0; level <= height; ++level) {
    const std::size_t count = std::size_t{1} << (height - level);
    for (std::size_t p = 0; p < count; ++p) nodes.push_back({level, p});
  }
  // up[l] = distance from a level-0 node to its ancestor at level l
  std::vector<double> up(height + 1, 0.0);
  for (int l = 1; l <= height; ++l) up[l] = up[l - 1] + hst.edge_cost(l - 1);

  const std::size_t n = nodes.size();
  std::vector<double> table(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      int la = nodes[a].level, lb = nodes[b].level;
      int lca = std::max(la, lb);
      while ((nodes[a].pos >> (lca - la)) != (nodes[b].pos >> (lca - lb))) ++lca;
      const double d = (up[lca] - up[la]) + (up[lca] - up[lb]);
      table[a * n + b] = table[b * n + a] = d;
    }
  }
  const std::size_t leaves = hst.num_leaves();
  std::vector<double> leaf_table(leaves * leaves);
  for (std::size_t a = 0; a < leaves; ++a)
    for (std::size_t b = 0; b < leaves; ++b) leaf_table[a * leaves + b] = table[a * n + b];

  hst.nodes = MetricSpace::from_table(std::move(table), n, false);
  hst.leaves = MetricSpace::from_table(std::move(leaf_table), leaves, false);
  return hst;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  for (auto& c : cells) {
    const auto b = c.find_first_not_of(" \t");
    const auto e = c.find_last_not_of(" \t");
    c = (b == std::string::npos) ? std::string{} : c.substr(b, e - b + 1);
  }
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

}  // namespace

CsvData read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MetricError("cannot open dataset " + path);
  std::vector<std::vector<std::string>> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.push_back(split_csv_line(line));
  }
  CsvData data;
  if (lines.empty()) throw MetricError("dataset " + path + " is empty");

  std::vector<std::string> header;
  {
    bool all_numeric = true;
    double dummy;
    for (const auto& cell : lines.front()) all_numeric = all_numeric && parse_double(cell, dummy);
    if (!all_numeric) {
      data.had_header = true;
      header = lines.front();
      lines.erase(lines.begin());
    }
  }
  if (lines.empty()) throw MetricError("dataset " + path + " has no data rows");

  std::size_t width = 0;
  for (const auto& l : lines) width = std::max(width, l.size());
  std::vector<bool> keep(width, true);
  double dummy;
  for (const auto& l : lines) {
    for (std::size_t c = 0; c < width; ++c) {
      if (c >= l.size() || !parse_double(l[c], dummy)) keep[c] = false;
    }
  }
  for (std::size_t c = 0; c < width; ++c) {
    if (!keep[c]) {
      const std::string name = c < header.size() && !header[c].empty() ? header[c] : "#" + std::to_string(c);
      data.warnings.push_back("dropping non-numeric column " + name);
    }
  }
  if (std::none_of(keep.begin(), keep.end(), [](bool b) { return b; })) {
    throw MetricError("dataset " + path + " has no numeric columns");
  }
  for (const auto& l : lines) {
    std::vector<double> row;
    for (std::size_t c = 0; c < width; ++c) {
      if (!keep[c]) continue;
      double v = 0.0;
      parse_double(l[c], v);
      row.push_back(v);
    }
    data.rows.push_back(std::move(row));
  }
  return data;
}

}  // namespace ccl
