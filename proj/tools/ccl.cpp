#include "ccl/harness.hpp"
#include "ccl/lower_bounds.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace ccl;

namespace {

// "3", "1,4,9" or "1-20".
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      out.push_back(std::stoull(part));
    } else {
      const auto lo = std::stoull(part.substr(0, dash));
      const auto hi = std::stoull(part.substr(dash + 1));
      if (hi < lo) throw CLI::ValidationError("--seed", "empty range " + part);
      for (auto v = lo; v <= hi; ++v) out.push_back(v);
    }
  }
  if (out.empty()) throw CLI::ValidationError("--seed", "no seeds given");
  return out;
}

double parse_facility_cost(const std::string& s) {
  const std::string prefix = "uniform:";
  if (s.rfind(prefix, 0) != 0) throw CLI::ValidationError("--facility-cost", "expected uniform:VALUE");
  const double v = std::stod(s.substr(prefix.size()));
  if (!(v >= 0.0)) throw CLI::ValidationError("--facility-cost", "cost must be nonnegative");
  return v;
}

// "gaussian:COUNT:DIM"
std::pair<std::size_t, std::size_t> parse_synthetic(const std::string& s) {
  unsigned long count = 0, dim = 0;
  if (std::sscanf(s.c_str(), "gaussian:%lu:%lu", &count, &dim) != 2 || count == 0 || dim == 0) {
    throw CLI::ValidationError("--synthetic", "expected gaussian:COUNT:DIM");
  }
  return {count, dim};
}

struct RunArgs {
  std::string problem = "kcenter";
  std::string data;
  std::string synthetic = "gaussian:200:4";
  std::size_t k = 4;
  double beta = 1.5;
  double eps = 0.25;
  std::size_t steps = 100;
  double p_insert = 0.9;
  std::string seeds = "1";
  std::string out = "out";
  std::string facility_cost;
  bool offline = false;
  bool keep_going = false;
  unsigned jobs = 1;
};

int do_run(const RunArgs& a) {
  const auto seeds = parse_seeds(a.seeds);
  std::vector<std::vector<double>> rows;
  if (!a.data.empty()) {
    auto csv = read_numeric_csv(a.data);
    for (const auto& w : csv.warnings) std::cerr << "warning: " << w << "\n";
    rows = std::move(csv.rows);
  }
  RunConfig base;
  base.problem = parse_problem(a.problem);
  base.k = a.k;
  base.beta = a.beta;
  base.eps = a.eps;
  base.steps = a.steps;
  base.p_insert = a.p_insert;
  base.offline_comparator = a.offline;
  base.strict = !a.keep_going;
  if (!a.facility_cost.empty()) base.facility_cost = parse_facility_cost(a.facility_cost);
  const auto synth = parse_synthetic(a.synthetic);

  std::mutex io;
  std::atomic<std::size_t> next{0};
  std::atomic<int> failed{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      RunConfig cfg = base;
      cfg.seed = seeds[i];
      const fs::path dir = seeds.size() == 1 ? fs::path(a.out) : fs::path(a.out) / ("seed_" + std::to_string(cfg.seed));
      std::string line;
      try {
        const auto m = MetricSpace::from_feature_rows(rows.empty() ? gaussian_points(synth.first, synth.second, cfg.seed)
                                                                   : rows);
        const auto r = run(m, cfg);
        write_outputs(dir.string(), cfg, r);
        char buf[256];
        std::snprintf(buf, sizeof buf, "seed %llu: recourse %zu, max ratio %.4f, max centers %zu, violations %zu (%.1fs)",
                      static_cast<unsigned long long>(cfg.seed), r.summary.total_recourse, r.summary.max_ratio,
                      r.summary.max_centers, r.summary.violations, r.summary.seconds);
        line = buf;
        if (r.summary.violations > 0) ++failed;
      } catch (const RunFailure& e) {
        line = "seed " + std::to_string(cfg.seed) + ": FAILED at t=" + std::to_string(e.step()) + ": " + e.what();
        ++failed;
      } catch (const std::exception& e) {
        line = "seed " + std::to_string(cfg.seed) + ": error: " + e.what();
        ++failed;
      }
      std::lock_guard<std::mutex> lock(io);
      std::cout << line << "\n" << std::flush;
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(a.jobs, static_cast<unsigned>(seeds.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return failed == 0 ? 0 : 1;
}

int do_adversary(const std::string& problem, int h, double c, std::size_t phases, double beta, double eps,
                 const std::string& out) {
  const auto rep = run_adversary(parse_problem(problem), h, c, phases, beta, eps);
  fs::create_directories(out);
  std::ofstream os(fs::path(out) / "adversary.csv");
  write_adversary_csv(os, rep);
  write_adversary_csv(std::cout, rep);
  const std::size_t bad = rep.opt_failures + rep.comparator_failures + rep.canary_failures + rep.rounding_violations +
                          rep.conflict_failures;
  std::printf("min movement per phase %.4f, (h-1)/4 = %.4f, assertion failures %zu\n", rep.min_movement(),
              (h - 1) / 4.0, bad);
  for (const auto& n : rep.notes) std::cerr << n << "\n";
  return bad == 0 ? 0 : 1;
}

int do_selftest() {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "ok  " : "FAIL", name.c_str(), detail.c_str());
    if (!ok) ++failures;
  };
  for (auto p : {Problem::kKCenter, Problem::kFacility, Problem::kKMedian}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      RunConfig cfg;
      cfg.problem = p;
      cfg.k = 3;
      cfg.steps = 40;
      cfg.seed = seed;
      cfg.strict = false;
      const auto m = MetricSpace::from_feature_rows(gaussian_points(60, 3, seed));
      const auto r = run(m, cfg);
      const auto& s = r.summary;
      const bool ok = s.violations == 0 && s.total_recourse == s.snapshot_recourse && s.recourse_bounds_ok;
      report(std::string(to_string(p)) + " run seed " + std::to_string(seed), ok,
             std::to_string(s.potential_events) + " potential events, " + std::to_string(s.invariant_checks) +
                 " invariant checks, " + std::to_string(s.violations) + " violations");
    }
  }
  for (auto p : {Problem::kKCenter, Problem::kFacility, Problem::kKMedian}) {
    const int h = p == Problem::kFacility ? 4 : 5;
    const auto rep = run_adversary(p, h, 2.0, 2, 1.5, 0.125);
    const bool ok = rep.opt_failures + rep.comparator_failures + rep.canary_failures + rep.rounding_violations +
                        rep.conflict_failures ==
                    0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "h=%d, min movement per phase %.3f", h, rep.min_movement());
    report(std::string(to_string(p)) + " adversary", ok, buf);
  }
  std::printf("%s\n", failures == 0 ? "selftest passed" : "selftest FAILED");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consistent clustering under client insertions and deletions"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Run a dynamic clustering stream and write trace.csv, events.log, summary.txt");
  run_cmd->add_option("--problem", ra.problem, "kcenter, facility or kmedian")
      ->check(CLI::IsMember({"kcenter", "facility", "kmedian"}));
  run_cmd->add_option("--data", ra.data, "numeric CSV, one point per row")->check(CLI::ExistingFile);
  run_cmd->add_option("--synthetic", ra.synthetic, "gaussian:COUNT:DIM, used without --data (seeded per run)")
      ->capture_default_str();
  run_cmd->add_option("--k", ra.k, "number of centers")->check(CLI::PositiveNumber)->capture_default_str();
  run_cmd->add_option("--beta", ra.beta, "fractional approximation factor")->check(CLI::Range(1.0, 1e9))
      ->capture_default_str();
  run_cmd->add_option("--eps", ra.eps, "resource augmentation")->check(CLI::Range(1e-9, 0.5))->capture_default_str();
  run_cmd->add_option("--T", ra.steps, "number of stream steps")->capture_default_str();
  run_cmd->add_option("--p-insert", ra.p_insert, "insertion probability")->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  run_cmd->add_option("--seed", ra.seeds, "seed, list (1,2,5) or range (1-20)")->capture_default_str();
  run_cmd->add_option("--out", ra.out, "output directory (one subdirectory per seed for several seeds)")
      ->capture_default_str();
  run_cmd->add_option("--facility-cost", ra.facility_cost, "uniform:VALUE (default Delta/2)");
  run_cmd->add_flag("--offline-comparator", ra.offline, "solve the whole-horizon minimum-movement LP (small runs)");
  run_cmd->add_flag("--keep-going", ra.keep_going, "record assertion failures instead of stopping");
  run_cmd->add_option("--jobs", ra.jobs, "parallel runs")->check(CLI::PositiveNumber)->capture_default_str();

  std::string adv_problem = "kcenter", adv_out = "out";
  int height = 6;
  double c = 2.0, adv_beta = 1.5, adv_eps = 0.125;
  std::size_t phases = 5;
  auto* adv_cmd = app.add_subcommand("adversary", "Run the tree adversary against the fractional maintainer");
  adv_cmd->add_option("--problem", adv_problem)->check(CLI::IsMember({"kcenter", "facility", "kmedian"}))
      ->capture_default_str();
  adv_cmd->add_option("--height", height, "tree height")->check(CLI::Range(1, 11))->capture_default_str();
  adv_cmd->add_option("--c", c, "separation parameter")->capture_default_str();
  adv_cmd->add_option("--phases", phases)->check(CLI::PositiveNumber)->capture_default_str();
  adv_cmd->add_option("--beta", adv_beta)->capture_default_str();
  adv_cmd->add_option("--eps", adv_eps)->capture_default_str();
  adv_cmd->add_option("--out", adv_out)->capture_default_str();

  auto* self_cmd = app.add_subcommand("selftest", "Run the invariant suite on built-in instances");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return do_run(ra);
    if (*adv_cmd) return do_adversary(adv_problem, height, c, phases, adv_beta, adv_eps, adv_out);
    if (*self_cmd) return do_selftest();
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
