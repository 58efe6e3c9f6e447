#include "ccl/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <sstream>

namespace ccl {

namespace {

constexpr std::size_t kMaxRecordedViolations = 100;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

const char* to_string(DropReason r) {
  switch (r) {
    case DropReason::kNone: return "NONE";
    case DropReason::kLowMass: return "LOW_MASS";
    case DropReason::kSeparation: return "SEPARATION";
  }
  return "?";
}

BallRounding::BallRounding(const MetricSpace& m, Facilities f, BallRule rule, bool strict)
    : metric_(&m), fac_(std::move(f)), rule_(rule), strict_(strict) {
  if (fac_.cost.size() != fac_.size()) throw std::invalid_argument("BallRounding: facility cost size mismatch");
  for (std::size_t p : fac_.points) {
    if (p >= m.size()) throw std::invalid_argument("BallRounding: facility point out of range");
  }
  if (rule_.open_center) {
    if (fac_.size() != m.size()) throw std::invalid_argument("BallRounding: centers require every point as a facility");
    for (std::size_t p = 0; p < fac_.size(); ++p) {
      if (fac_.points[p] != p) throw std::invalid_argument("BallRounding: facility positions must match points");
    }
  }
  if (!(rule_.top >= 1.0)) throw std::invalid_argument("BallRounding: radius reference must be at least 1");
}

double BallRounding::log_span() const noexcept { return std::log2(rule_.top / kRadiusFloor); }

std::vector<std::size_t> BallRounding::members(std::size_t client, double radius) const {
  std::vector<std::size_t> out;
  const auto row = metric_->row(client);
  for (std::size_t p = 0; p < fac_.size(); ++p) {
    if (row[fac_.points[p]] <= radius + kTol) out.push_back(p);
  }
  return out;
}

double BallRounding::mass(const Ball& b, std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t p : b.members) s += x[p];
  return s;
}

double BallRounding::potential(std::span<const double> x) const {
  double deficit = 0.0, logs = 0.0;
  for (const Ball& b : balls_) {
    deficit += std::max(0.0, rule_.target - mass(b, x));
    const double r = std::clamp(b.radius, kRadiusFloor, rule_.top);
    logs += std::log2(rule_.top / r);
  }
  return rule_.coef * deficit - rule_.eta * logs;
}

std::vector<std::size_t> BallRounding::conflicts(std::size_t client, double radius) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < balls_.size(); ++i) {
    const Ball& b = balls_[i];
    const double reach = b.radius + radius + rule_.delta * std::min(b.radius, radius);
    if ((*metric_)(b.client, client) <= reach + 2.0 * kTol) out.push_back(i);
  }
  return out;
}

std::size_t BallRounding::choose_facility(std::size_t client, const std::vector<std::size_t>& in_ball) const {
  if (rule_.open_center) return client;
  if (in_ball.empty()) {
    throw InvariantViolation("no facility inside the ball of activating client " + std::to_string(client) + "\n" +
                             dump());
  }
  std::size_t best = in_ball.front();
  for (std::size_t p : in_ball) {
    if (fac_.cost[p] < fac_.cost[best]) best = p;
  }
  return best;
}

double BallRounding::distance_to_open(std::size_t client) const {
  double d = std::numeric_limits<double>::infinity();
  for (const Ball& b : balls_) d = std::min(d, (*metric_)(client, fac_.points[b.facility]));
  return d;
}

std::vector<std::size_t> BallRounding::open_facilities() const {
  std::vector<std::size_t> out;
  for (const Ball& b : balls_) out.push_back(b.facility);
  std::sort(out.begin(), out.end());
  return out;
}

void BallRounding::fail(const std::string& what) {
  if (audit_.violations.size() < kMaxRecordedViolations) audit_.violations.push_back(what);
  if (strict_) throw InvariantViolation(what + "\n" + dump());
}

void BallRounding::record_slack(double slack, std::size_t t, const char* what) {
  ++audit_.events;
  audit_.min_slack = std::min(audit_.min_slack, slack);
  if (slack < -kSlackTol) {
    fail(std::string("potential inequality violated at t=") + std::to_string(t) + " (" + what +
         "), slack " + fmt(slack));
  }
}

std::string BallRounding::dump() const {
  std::ostringstream os;
  os.precision(12);
  os << "balls (" << balls_.size() << "):";
  for (const Ball& b : balls_) {
    os << "\n  client=" << b.client << " facility=" << b.facility << " radius=" << b.radius << " birth=" << b.birth
       << " birth_mass=" << b.birth_mass;
  }
  return os.str();
}

RoundingStep BallRounding::step(const RoundingInput& in) {
  if (in.x.size() != fac_.size()) throw std::invalid_argument("BallRounding::step: x size mismatch");
  if (in.cover.size() != in.clients.size() || in.birth_radius.size() != in.clients.size()) {
    throw std::invalid_argument("BallRounding::step: per-client radius size mismatch");
  }
  RoundingStep out;
  const auto before = open_facilities();
  if (prev_x_.empty()) prev_x_.assign(fac_.size(), 0.0);

  // Fractional move: only the deficit terms depend on x.
  {
    double moved = 0.0;
    for (const Ball& b : balls_) {
      for (std::size_t p : b.members) moved += std::abs(in.x[p] - prev_x_[p]);
    }
    const double rhs = rule_.coef * moved;
    audit_.move_credit += rhs;
    record_slack(rhs - (potential(in.x) - potential(prev_x_)), in.t, "fractional move");
  }

  // Low-mass drops in ascending center order.
  std::vector<std::size_t> low;
  for (std::size_t i = 0; i < balls_.size(); ++i) {
    if (mass(balls_[i], in.x) < rule_.keep_mass - kTol) low.push_back(balls_[i].client);
  }
  std::sort(low.begin(), low.end());
  for (std::size_t client : low) {
    const auto it = std::find_if(balls_.begin(), balls_.end(), [&](const Ball& b) { return b.client == client; });
    const double phi0 = potential(in.x);
    out.events.push_back({in.t, EventKind::kDrop, DropReason::kLowMass, it->client, it->facility, it->radius});
    balls_.erase(it);
    ++audit_.low_mass_drops;
    record_slack(-(1.0 + potential(in.x) - phi0), in.t, "low-mass drop");
  }

  // Cover the lowest-index uncovered client until none is left.
  std::vector<std::size_t> order(in.clients.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return in.clients[a] < in.clients[b]; });
  for (;;) {
    std::size_t pick = order.size();
    for (std::size_t a : order) {
      if (distance_to_open(in.clients[a]) > in.cover[a] + kTol) {
        pick = a;
        break;
      }
    }
    if (pick == order.size()) break;
    if (++out.iterations > in.guard) {
      fail("covering loop exceeded its guard of " + std::to_string(in.guard) + " iterations at t=" +
           std::to_string(in.t));
      break;
    }
    const std::size_t j = in.clients[pick];
    const double r = std::min(in.birth_radius[pick], rule_.top);
    const auto conf = conflicts(j, r);

    ++audit_.conflict_checks;
    audit_.max_conflicts = std::max(audit_.max_conflicts, conf.size());
    bool single_ok = conf.size() <= 1;
    for (std::size_t c : conf) {
      const double rc = balls_[c].radius;
      audit_.min_conflict_ratio = std::min(audit_.min_conflict_ratio, r > 0.0 ? rc / r : std::numeric_limits<double>::infinity());
      if (!(rc > rule_.conflict_ratio * r - kTol) || rc <= 0.0) single_ok = false;
    }
    if (!single_ok) {
      ++audit_.conflict_failures;
      std::string msg = "single-conflict check failed at t=" + std::to_string(in.t) + " adding client " +
                        std::to_string(j) + " radius " + fmt(r) + ": conflicts";
      for (std::size_t c : conf) msg += " (" + std::to_string(balls_[c].client) + ", r=" + fmt(balls_[c].radius) + ")";
      fail(msg);
    }

    const double phi0 = potential(in.x);
    Ball nb;
    nb.client = j;
    nb.radius = r;
    nb.birth = in.t;
    nb.members = members(j, r);
    nb.facility = choose_facility(j, nb.members);
    nb.birth_mass = mass(nb, in.x);
    if (nb.birth_mass < rule_.birth_mass - kTol) {
      fail("birth mass " + fmt(nb.birth_mass) + " below " + fmt(rule_.birth_mass) + " for client " +
           std::to_string(j) + " at t=" + std::to_string(in.t));
    }
    out.events.push_back({in.t, EventKind::kAdd, DropReason::kNone, j, nb.facility, r});
    for (auto it = conf.rbegin(); it != conf.rend(); ++it) {
      const Ball& b = balls_[*it];
      out.events.push_back({in.t, EventKind::kDrop, DropReason::kSeparation, b.client, b.facility, b.radius});
      balls_.erase(balls_.begin() + static_cast<long>(*it));
    }
    balls_.push_back(std::move(nb));
    ++audit_.adds;
    audit_.separation_drops += conf.size();
    record_slack(-(static_cast<double>(conf.size()) + potential(in.x) - phi0), in.t,
                 conf.empty() ? "add" : "add with drop");
  }

  prev_x_.assign(in.x.begin(), in.x.end());
  const auto after = open_facilities();
  std::vector<std::size_t> diff;
  std::set_symmetric_difference(before.begin(), before.end(), after.begin(), after.end(), std::back_inserter(diff));
  out.recourse = diff.size();

  ++audit_.invariant_checks;
  for (const auto& v : check_invariants(in)) fail("t=" + std::to_string(in.t) + ": " + v);
  return out;
}

std::vector<std::string> BallRounding::check_invariants(const RoundingInput& in) const {
  std::vector<std::string> out;
  for (std::size_t a = 0; a < in.clients.size(); ++a) {
    const double d = distance_to_open(in.clients[a]);
    if (d > in.cover[a] + kTol) {
      out.push_back("coverage: client " + std::to_string(in.clients[a]) + " at distance " + fmt(d) + " > " +
                    fmt(in.cover[a]));
    }
  }
  std::vector<int> owner(fac_.size(), -1);
  for (std::size_t i = 0; i < balls_.size(); ++i) {
    const Ball& b = balls_[i];
    for (std::size_t k = i + 1; k < balls_.size(); ++k) {
      const Ball& o = balls_[k];
      const double need = b.radius + o.radius + rule_.delta * std::min(b.radius, o.radius);
      if ((*metric_)(b.client, o.client) < need - kTol) {
        out.push_back("separation: balls at " + std::to_string(b.client) + " and " + std::to_string(o.client));
      }
    }
    const double mv = mass(b, in.x);
    if (mv < rule_.keep_mass - kTol) {
      out.push_back("mass: ball at " + std::to_string(b.client) + " holds " + fmt(mv));
    }
    if (b.birth_mass < rule_.birth_mass - kTol) {
      out.push_back("birth mass: ball at " + std::to_string(b.client) + " was born with " + fmt(b.birth_mass));
    }
    if (!std::binary_search(b.members.begin(), b.members.end(), b.facility)) {
      out.push_back("association: facility " + std::to_string(b.facility) + " outside the ball of " +
                    std::to_string(b.client));
    } else if (rule_.open_center) {
      if (b.facility != b.client) out.push_back("association: center " + std::to_string(b.client) + " not opened");
    } else {
      for (std::size_t p : b.members) {
        if (fac_.cost[p] < fac_.cost[b.facility]) {
          out.push_back("association: facility " + std::to_string(b.facility) + " is not the cheapest in the ball of " +
                        std::to_string(b.client));
          break;
        }
      }
    }
    for (std::size_t p : b.members) {
      if (owner[p] >= 0) {
        out.push_back("disjointness: facility " + std::to_string(p) + " lies in the balls of " +
                      std::to_string(balls_[static_cast<std::size_t>(owner[p])].client) + " and " +
                      std::to_string(b.client));
      }
      owner[p] = static_cast<int>(i);
    }
  }
  return out;
}

}  // namespace ccl
