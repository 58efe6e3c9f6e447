#pragma once

#include "ccl/fractional.hpp"
#include "ccl/metric.hpp"
#include "ccl/rounding.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ccl {

struct StreamEvent {
  bool insert = true;
  std::size_t point = 0;
};

/// Insert the next unused point of a seeded shuffle with probability
/// p_insert, otherwise delete a uniformly chosen active client. Steps with no
/// active client always insert. Throws when the point pool runs out.
std::vector<StreamEvent> generate_stream(std::size_t num_points, std::size_t steps, double p_insert,
                                         std::uint64_t seed);

/// `count` points with `dim` standard normal coordinates.
std::vector<std::vector<double>> gaussian_points(std::size_t count, std::size_t dim, std::uint64_t seed);

struct RunConfig {
  Problem problem = Problem::kKCenter;
  std::size_t k = 4;
  double beta = 1.5;
  double eps = 0.25;
  std::size_t steps = 100;
  double p_insert = 0.9;
  std::uint64_t seed = 1;
  std::optional<double> facility_cost;  // uniform opening cost; Delta/2 when unset
  bool offline_comparator = false;
  bool strict = true;  // throw on the first violated assertion
};

struct TraceRecord {
  std::size_t t = 0;
  std::string event;
  double opt = 0.0;
  double objective = 0.0;
  double bound = 0.0;
  double movement_step = 0.0;
  double movement_cum = 0.0;
  std::size_t recourse_step = 0;
  std::size_t recourse_cum = 0;
  std::size_t num_centers = 0;
};

struct RunSummary {
  std::size_t steps = 0;
  std::size_t total_recourse = 0;
  std::size_t snapshot_recourse = 0;  // recomputed from open-set snapshots
  double max_ratio = 0.0;             // max objective / bound over steps with bound > 0
  std::size_t bound_failures = 0;
  std::size_t max_centers = 0;
  std::size_t modal_centers = 0;
  double center_bound = 0.0;
  std::size_t center_failures = 0;
  std::size_t fractional_failures = 0;  // body containment or fractional cost
  double frac_movement = 0.0;
  std::size_t adds = 0;
  std::size_t low_mass_drops = 0;
  std::size_t separation_drops = 0;
  std::size_t potential_events = 0;
  double min_slack = 0.0;
  std::size_t conflict_checks = 0;
  std::size_t conflict_failures = 0;
  std::size_t max_conflicts = 0;
  std::size_t invariant_checks = 0;
  std::size_t violations = 0;  // every recorded assertion failure
  bool recourse_bounds_ok = true;
  std::optional<double> offline_movement;
  std::string offline_note;
  double seconds = 0.0;
};

struct RunResult {
  std::vector<TraceRecord> trace;
  std::vector<std::string> events;
  std::vector<std::string> violations;
  RunSummary summary;
};

class RunFailure : public std::runtime_error {
 public:
  RunFailure(const std::string& what, std::size_t t) : std::runtime_error(what), t_(t) {}
  std::size_t step() const noexcept { return t_; }

 private:
  std::size_t t_;
};

/// Runs the full pipeline: stream, optimum, body, projection, rounding and
/// every assertion. In strict mode the first failure throws RunFailure.
RunResult run(const MetricSpace& m, const RunConfig& cfg);

/// Offline comparator: the least total weighted l1 movement of any sequence
/// of fractional points that is feasible for every step's exact body.
/// Returns nullopt (and sets `note`) when the LP exceeds the size guard.
std::optional<double> offline_movement(const MetricSpace& m, const Facilities& f, const ModelParams& params,
                                       const std::vector<std::vector<std::size_t>>& client_sets,
                                       const std::vector<double>& radius_or_opt, std::string& note);

inline constexpr const char* kTraceHeader =
    "t,event,opt_t,integral_objective,bound,frac_movement_step,frac_movement_cum,"
    "integral_recourse_step,integral_recourse_cum,num_centers";

void write_trace(std::ostream& os, const std::vector<TraceRecord>& trace);
void write_summary(std::ostream& os, const RunConfig& cfg, const RunSummary& s);
/// Writes trace.csv, events.log and summary.txt into `dir` (created if needed).
void write_outputs(const std::string& dir, const RunConfig& cfg, const RunResult& r);

}  // namespace ccl
