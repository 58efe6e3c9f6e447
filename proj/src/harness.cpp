#include "ccl/harness.hpp"

#include "ccl/round_facility.hpp"
#include "ccl/round_kcenter.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

namespace ccl {

namespace {

constexpr double kBoundTol = 1e-6;
constexpr double kOfflineCells = 4e6;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::size_t> sym_diff(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::string describe(const RoundingEvent& e) {
  std::string s = "t=" + std::to_string(e.t) + (e.kind == EventKind::kAdd ? " ADD" : " DROP");
  if (e.kind == EventKind::kDrop) s += std::string(" ") + to_string(e.reason);
  s += " client=" + std::to_string(e.client) + " facility=" + std::to_string(e.facility) + " radius=" + num(e.radius);
  return s;
}

/// The rounding scheme of one problem behind a common face.
class Rounder {
 public:
  Rounder(const MetricSpace& m, const Facilities& f, const RunConfig& cfg) : cfg_(cfg) {
    switch (cfg.problem) {
      case Problem::kKCenter:
        kc_.emplace(m, cfg.k, KCenterParams{.eps = std::min(cfg.eps, 0.5)}, cfg.strict);
        break;
      case Problem::kFacility:
        fl_.emplace(m, f, FacilityParams{}, cfg.strict);
        break;
      case Problem::kKMedian:
        km_.emplace(m, f, cfg.k, cfg.eps, FacilityParams{}, cfg.strict);
        break;
    }
  }

  RoundingStep step(std::size_t t, const FractionalMaintainer& fm) {
    if (kc_) return kc_->step(t, fm.clients(), fm.x(), fm.radius());
    const auto service = service_costs(fm);
    if (fl_) return fl_->step(t, fm.clients(), fm.x(), service);
    return km_->step(t, fm.clients(), fm.x(), service);
  }

  std::vector<std::size_t> open() const {
    if (kc_) return kc_->centers();
    if (fl_) return fl_->open();
    return km_->open();
  }

  const BallRounding& engine() const {
    if (kc_) return kc_->engine();
    if (fl_) return fl_->engine();
    return km_->engine();
  }

  double objective(const MetricSpace& m, const Facilities& f, const FractionalMaintainer& fm) const {
    const auto o = open();
    if (kc_) return kcenter_objective(m, fm.clients(), o);
    return facility_objective(m, f, fm.clients(), {}, o, fl_.has_value());
  }

  double alpha() const { return kc_ ? kc_->params().alpha : FacilityParams{}.alpha; }

  /// Center-count bound, or infinity for facility location.
  double center_bound() const {
    if (kc_) return kc_->center_bound();
    if (km_) return km_->center_bound();
    return std::numeric_limits<double>::infinity();
  }

  /// Explicit drop bounds in terms of the total fractional movement.
  std::vector<double> drop_bounds(double movement) const {
    const BallRounding& e = engine();
    const double span = e.log_span();
    const double eta = e.rule().eta;
    std::vector<double> out{e.rule().coef * movement + eta * static_cast<double>(e.balls().size()) * span};
    if (kc_) {
      const double k = static_cast<double>(cfg_.k);
      out.push_back(e.rule().coef * movement / std::min(1.0, eta) + 2.0 * k * span + (1.0 + kc_->params().eps) * k);
    }
    return out;
  }

 private:
  const RunConfig& cfg_;
  std::optional<KCenterRounding> kc_;
  std::optional<FacilityRounding> fl_;
  std::optional<KMedianRounding> km_;
};

}  // namespace

std::vector<StreamEvent> generate_stream(std::size_t num_points, std::size_t steps, double p_insert,
                                         std::uint64_t seed) {
  if (!(p_insert >= 0.0 && p_insert <= 1.0)) throw std::invalid_argument("generate_stream: p_insert outside [0,1]");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> pool(num_points);
  std::iota(pool.begin(), pool.end(), 0);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::bernoulli_distribution coin(p_insert);
  std::vector<std::size_t> active;
  std::vector<StreamEvent> out;
  std::size_t next = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    const bool insert = coin(rng) || active.empty();
    if (insert) {
      if (next == pool.size()) throw std::runtime_error("generate_stream: point pool exhausted at step " + std::to_string(t));
      active.push_back(pool[next]);
      out.push_back({true, pool[next++]});
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
      const std::size_t a = pick(rng);
      out.push_back({false, active[a]});
      active.erase(active.begin() + static_cast<long>(a));
    }
  }
  return out;
}

std::vector<std::vector<double>> gaussian_points(std::size_t count, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> rows(count, std::vector<double>(dim));
  for (auto& r : rows) {
    for (auto& v : r) v = g(rng);
  }
  return rows;
}

RunResult run(const MetricSpace& m, const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const double cost = cfg.problem == Problem::kFacility ? cfg.facility_cost.value_or(m.delta() / 2.0) : 0.0;
  const Facilities f = Facilities::all(m, cost);
  const auto stream = generate_stream(m.size(), cfg.steps, cfg.p_insert, cfg.seed);

  FractionalMaintainer fm(m, f, {cfg.problem, cfg.k, cfg.beta, cfg.eps});
  Rounder rounder(m, f, cfg);
  RunResult res;
  RunSummary& s = res.summary;
  s.center_bound = rounder.center_bound();
  auto report = [&](const std::string& what, std::size_t t) {
    res.violations.push_back("t=" + std::to_string(t) + ": " + what);
    if (cfg.strict) throw RunFailure(what, t);
  };

  std::vector<std::size_t> clients, prev_open;
  std::vector<std::vector<std::size_t>> client_sets;
  std::vector<double> scale;
  std::map<std::size_t, std::size_t> center_hist;
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const StreamEvent& ev = stream[t];
    if (ev.insert) {
      clients.push_back(ev.point);
    } else {
      clients.erase(std::find(clients.begin(), clients.end(), ev.point));
    }
    TraceRecord rec;
    rec.t = t;
    rec.event = (ev.insert ? "insert:" : "delete:") + std::to_string(ev.point);
    res.events.push_back("t=" + std::to_string(t) + (ev.insert ? " INSERT " : " DELETE ") + std::to_string(ev.point));

    RoundingStep rs;
    try {
      const StepReport fr = fm.step(clients);
      rec.opt = fr.opt;
      rec.movement_step = fr.movement;
      rec.movement_cum = fm.cumulative_movement();
      if (!fm.body().contains(fm.raw_state(), cfg.eps, kTol)) {
        ++s.fractional_failures;
        report("fractional point outside K^(1+eps)", t);
      }
      if (cfg.problem != Problem::kKCenter) {
        const double limit = (1.0 + cfg.eps) * cfg.beta * fr.opt;
        if (fm.fractional_cost() > limit + kTol * (1.0 + limit)) {
          ++s.fractional_failures;
          report("fractional cost " + num(fm.fractional_cost()) + " above (1+eps) beta OPT " + num(limit), t);
        }
      }
      client_sets.push_back(clients);
      scale.push_back(cfg.problem == Problem::kKCenter ? fr.radius : fr.opt);
      rs = rounder.step(t, fm);
    } catch (const InvariantViolation& e) {
      throw RunFailure(e.what(), t);
    }
    for (const auto& e : rs.events) res.events.push_back(describe(e));

    const auto open = rounder.open();
    rec.objective = rounder.objective(m, f, fm);
    rec.bound = rounder.alpha() * cfg.beta * rec.opt * (cfg.problem == Problem::kKCenter ? 1.0 : 1.0 + cfg.eps);
    rec.recourse_step = rs.recourse;
    s.total_recourse += rs.recourse;
    s.snapshot_recourse += sym_diff(prev_open, open).size();
    rec.recourse_cum = s.total_recourse;
    rec.num_centers = open.size();
    prev_open = open;

    if (rec.objective > rec.bound + kBoundTol) {
      ++s.bound_failures;
      report("objective " + num(rec.objective) + " above bound " + num(rec.bound), t);
    }
    if (rec.bound > 0.0) s.max_ratio = std::max(s.max_ratio, rec.objective / rec.bound);
    if (static_cast<double>(open.size()) > s.center_bound + kTol) {
      ++s.center_failures;
      report("center count " + std::to_string(open.size()) + " above " + num(s.center_bound), t);
    }
    s.max_centers = std::max(s.max_centers, open.size());
    ++center_hist[open.size()];
    res.trace.push_back(rec);
  }

  s.steps = stream.size();
  s.frac_movement = fm.cumulative_movement();
  if (s.snapshot_recourse != s.total_recourse) report("recourse cross-check mismatch", s.steps);
  std::size_t best = 0;
  for (const auto& [count, n] : center_hist) {
    if (n > best) {
      best = n;
      s.modal_centers = count;
    }
  }

  const BallRounding& e = rounder.engine();
  const auto bounds = recourse_bounds(e, fm.x(), rounder.drop_bounds(s.frac_movement).front(),
                                      static_cast<double>(s.total_recourse));
  s.recourse_bounds_ok = bounds.holds();
  for (double b : rounder.drop_bounds(s.frac_movement)) {
    if (bounds.drops > b + kSlackTol) s.recourse_bounds_ok = false;
  }
  if (!s.recourse_bounds_ok) report("run-level recourse bound violated", s.steps);

  const RoundingAudit& a = e.audit();
  s.adds = a.adds;
  s.low_mass_drops = a.low_mass_drops;
  s.separation_drops = a.separation_drops;
  s.potential_events = a.events;
  s.min_slack = a.events ? a.min_slack : 0.0;
  s.conflict_checks = a.conflict_checks;
  s.conflict_failures = a.conflict_failures;
  s.max_conflicts = a.max_conflicts;
  s.invariant_checks = a.invariant_checks;
  for (const auto& v : a.violations) res.violations.push_back(v);
  s.violations = res.violations.size();

  if (cfg.offline_comparator) {
    s.offline_movement = offline_movement(m, f, {cfg.problem, cfg.k, cfg.beta, cfg.eps}, client_sets, scale,
                                          s.offline_note);
  }
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::optional<double> offline_movement(const MetricSpace& m, const Facilities& f, const ModelParams& params,
                                       const std::vector<std::vector<std::size_t>>& client_sets,
                                       const std::vector<double>& radius_or_opt, std::string& note) {
  std::vector<Body> bodies;
  std::size_t rows = 0, cols = 0;
  for (std::size_t t = 0; t < client_sets.size(); ++t) {
    const auto& c = client_sets[t];
    switch (params.problem) {
      case Problem::kKCenter: bodies.push_back(build_body_kcenter(m, c, f, params.k, radius_or_opt[t])); break;
      case Problem::kFacility: bodies.push_back(build_body_facility(m, c, f, params.beta, radius_or_opt[t])); break;
      case Problem::kKMedian:
        bodies.push_back(build_body_kmedian(m, c, f, params.k, params.beta, radius_or_opt[t]));
        break;
    }
    const Body& b = bodies.back();
    std::size_t weighted = 0;
    for (double w : b.weights) weighted += w > 0.0;
    rows += b.covering.size() + b.packing.size() + b.coupling.size() + weighted;
    cols += b.num_vars + 2 * weighted;
  }
  if (static_cast<double>(rows) * static_cast<double>(cols) > kOfflineCells) {
    note = "skipped: " + std::to_string(rows) + " rows x " + std::to_string(cols) + " columns exceeds the size guard";
    return std::nullopt;
  }

  lp::Simplex lp;
  std::vector<std::size_t> prev_cols;  // columns of the weighted variables of the previous step
  for (const Body& b : bodies) {
    std::vector<std::size_t> col(b.num_vars);
    for (std::size_t v = 0; v < b.num_vars; ++v) col[v] = lp.add_column(0.0, std::vector<Term>{});
    auto shift = [&](const std::vector<Term>& row) {
      std::vector<Term> out;
      for (const Term& term : row) out.push_back({col[term.index], term.coef});
      return out;
    };
    for (const auto& row : b.covering) lp.add_row(lp::Sense::kGreaterEqual, 1.0, shift(row));
    for (std::size_t r = 0; r < b.packing.size(); ++r) lp.add_row(lp::Sense::kLessEqual, b.packing_rhs[r], shift(b.packing[r]));
    for (const auto& cp : b.coupling) {
      const std::vector<Term> row{{col[cp.lower], 1.0}, {col[cp.upper], -1.0}};
      lp.add_row(lp::Sense::kLessEqual, 0.0, row);
    }
    std::vector<std::size_t> now;
    for (std::size_t v = 0; v < b.num_vars; ++v) {
      if (!(b.weights[v] > 0.0)) continue;
      const std::size_t p = lp.add_column(b.weights[v], std::vector<Term>{});
      const std::size_t q = lp.add_column(b.weights[v], std::vector<Term>{});
      std::vector<Term> row{{col[v], 1.0}, {p, -1.0}, {q, 1.0}};
      if (now.size() < prev_cols.size()) row.push_back({prev_cols[now.size()], -1.0});
      lp.add_row(lp::Sense::kEqual, 0.0, row);
      now.push_back(col[v]);
    }
    prev_cols = std::move(now);
  }
  const lp::Status st = lp.solve();
  if (st != lp::Status::kOptimal) {
    note = std::string("offline LP ended ") + lp::to_string(st);
    return std::nullopt;
  }
  note = "solved";
  return lp.objective();
}

void write_trace(std::ostream& os, const std::vector<TraceRecord>& trace) {
  os << kTraceHeader << '\n';
  for (const auto& r : trace) {
    os << r.t << ',' << r.event << ',' << num(r.opt) << ',' << num(r.objective) << ',' << num(r.bound) << ','
       << num(r.movement_step) << ',' << num(r.movement_cum) << ',' << r.recourse_step << ',' << r.recourse_cum << ','
       << r.num_centers << '\n';
  }
}

void write_summary(std::ostream& os, const RunConfig& cfg, const RunSummary& s) {
  os << "problem=" << to_string(cfg.problem) << '\n'
     << "k=" << cfg.k << '\n'
     << "beta=" << num(cfg.beta) << '\n'
     << "eps=" << num(cfg.eps) << '\n'
     << "T=" << cfg.steps << '\n'
     << "p_insert=" << num(cfg.p_insert) << '\n'
     << "seed=" << cfg.seed << '\n'
     << "steps=" << s.steps << '\n'
     << "total_recourse=" << s.total_recourse << '\n'
     << "snapshot_recourse=" << s.snapshot_recourse << '\n'
     << "max_objective_bound_ratio=" << num(s.max_ratio) << '\n'
     << "bound_failures=" << s.bound_failures << '\n'
     << "max_centers=" << s.max_centers << '\n'
     << "modal_centers=" << s.modal_centers << '\n'
     << "center_bound=" << num(s.center_bound) << '\n'
     << "center_failures=" << s.center_failures << '\n'
     << "fractional_failures=" << s.fractional_failures << '\n'
     << "frac_movement=" << num(s.frac_movement) << '\n'
     << "adds=" << s.adds << '\n'
     << "low_mass_drops=" << s.low_mass_drops << '\n'
     << "separation_drops=" << s.separation_drops << '\n'
     << "potential_events=" << s.potential_events << '\n'
     << "min_potential_slack=" << num(s.min_slack) << '\n'
     << "conflict_checks=" << s.conflict_checks << '\n'
     << "conflict_failures=" << s.conflict_failures << '\n'
     << "max_conflicts=" << s.max_conflicts << '\n'
     << "invariant_checks=" << s.invariant_checks << '\n'
     << "violations=" << s.violations << '\n'
     << "recourse_bounds_ok=" << (s.recourse_bounds_ok ? 1 : 0) << '\n';
  if (cfg.offline_comparator) {
    os << "offline_movement=" << (s.offline_movement ? num(*s.offline_movement) : "NA") << '\n'
       << "offline_note=" << s.offline_note << " (EXPENSIVE)" << '\n';
  }
}

void write_outputs(const std::string& dir, const RunConfig& cfg, const RunResult& r) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  std::ofstream trace(base / "trace.csv", std::ios::binary);
  write_trace(trace, r.trace);
  std::ofstream events(base / "events.log", std::ios::binary);
  for (const auto& e : r.events) events << e << '\n';
  for (const auto& v : r.violations) events << "VIOLATION " << v << '\n';
  std::ofstream summary(base / "summary.txt", std::ios::binary);
  write_summary(summary, cfg, r.summary);
  if (!trace || !events || !summary) throw std::runtime_error("write_outputs: cannot write into " + dir);
}

}  // namespace ccl
