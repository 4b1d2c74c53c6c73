#include "netloss/control.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "netloss/errors.hpp"

namespace netloss {

PlantModel::PlantModel(Mat a, Mat b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() == 0 || !a_.is_square()) throw ValidationError("plant: A must be non-empty and square");
  if (b_.rows() != a_.rows() || b_.cols() == 0) {
    std::ostringstream os;
    os << "plant: B must be " << a_.rows() << " x m, got " << b_.rows() << "x" << b_.cols();
    throw ValidationError(os.str());
  }
}

TriggerController::TriggerController(Mat k, Mat p, double beta, std::uint64_t theta)
    : k_(std::move(k)), p_(std::move(p)), beta_(beta), theta_(theta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ValidationError("controller: beta must lie in (0, 1)");
  if (theta < 1) throw ValidationError("controller: theta must be >= 1");
  if (!p_.is_square() || p_.rows() == 0) throw ValidationError("controller: P must be square");
  if (k_.cols() != p_.rows()) throw ValidationError("controller: K and P dimensions disagree");
  if (p_.asymmetry() > 1e-9) throw ValidationError("controller: P must be symmetric");
  try {
    (void)cholesky(p_);
  } catch (const NumericError& e) {
    throw ValidationError(std::string("controller: P must be positive definite (") + e.what() + ")");
  }
}

double TriggerController::lyapunov(const Vec& x) const { return x.dot(p_ * x); }

void check_compatible(const PlantModel& plant, const TriggerController& ctrl) {
  if (ctrl.K().rows() != plant.m() || ctrl.K().cols() != plant.n() || ctrl.P().rows() != plant.n()) {
    std::ostringstream os;
    os << "controller does not fit plant: K is " << ctrl.K().rows() << "x" << ctrl.K().cols() << ", P is "
       << ctrl.P().rows() << "x" << ctrl.P().cols() << ", plant has n=" << plant.n() << " m=" << plant.m();
    throw ValidationError(os.str());
  }
}

void validate(const SimConfig& cfg, const PlantModel& plant) {
  if (cfg.x0.size() != plant.n()) throw ValidationError("sim: x0 has the wrong dimension");
  if (!cfg.x0.all_finite()) throw ValidationError("sim: x0 must be finite");
  if (cfg.horizon < 1) throw ValidationError("sim: horizon must be >= 1");
  if (!(cfg.converge_threshold > 0.0) || !(cfg.diverge_threshold > cfg.converge_threshold) ||
      !std::isfinite(cfg.diverge_threshold)) {
    throw ValidationError("sim: need 0 < converge_threshold < diverge_threshold < inf");
  }
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::diverged: return "diverged";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

bool trigger_due(const TriggerController& ctrl, const Vec& x_next_open, double v_at_last_exchange,
                 std::uint64_t steps_since_exchange) {
  if (steps_since_exchange >= ctrl.theta()) return true;
  return ctrl.lyapunov(x_next_open) > ctrl.beta() * v_at_last_exchange;
}

Vec step_closed_loop(const PlantModel& plant, const Vec& x, const Vec& u_held) {
  return plant.A() * x + plant.B() * u_held;
}

namespace {

Verdict classify(const Vec& x, const SimConfig& cfg) {
  const double r = x.norm();
  if (!std::isfinite(r) || r > cfg.diverge_threshold) return Verdict::diverged;
  if (r < cfg.converge_threshold) return Verdict::converged;
  return Verdict::inconclusive;
}

}  // namespace

SimResult simulate(const PlantModel& plant, const TriggerController& ctrl, const LossChannel& channel,
                   const SimConfig& cfg) {
  check_compatible(plant, ctrl);
  validate(cfg, plant);
  if (cfg.trace_attempts > 0 && std::holds_alternative<StateThreshold>(channel.attack())) {
    throw ConfigError("sim: trace_attempts cannot extend a state-threshold attack past the simulation");
  }

  SimResult res;
  ChannelProcess proc(channel, cfg.seed);
  Vec x = cfg.x0;
  Vec u(plant.m());
  double v_last = 0.0;
  std::uint64_t last_exchange = 0;

  res.states.push_back(x);
  res.v_trace.push_back(ctrl.lyapunov(x));
  res.verdict = classify(x, cfg);

  auto attempt = [&](std::uint64_t t) {
    const double v = res.v_trace.back();
    const ChannelStep s = proc.step(res.trigger_times.size(), std::log(v));
    u = s.l == 0 ? ctrl.K() * x : Vec(plant.m());
    v_last = v;
    last_exchange = t;
    res.trigger_times.push_back(t);
  };

  for (std::uint64_t t = 0; t < cfg.horizon && res.verdict == Verdict::inconclusive; ++t) {
    if (t == 0 || trigger_due(ctrl, step_closed_loop(plant, x, u), v_last, t - last_exchange)) attempt(t);
    res.inputs.push_back(u);
    x = step_closed_loop(plant, x, u);
    res.states.push_back(x);
    res.v_trace.push_back(x.all_finite() ? ctrl.lyapunov(x) : std::numeric_limits<double>::infinity());
    res.verdict = classify(x, cfg);
  }
  res.plant_attempts = res.trigger_times.size();

  while (proc.next_index() < cfg.trace_attempts) proc.step(proc.next_index());
  res.loss = proc.combined();
  res.random_loss = proc.random_part();
  res.attack_loss = proc.attack_part();
  res.ratio_series = empirical_ratio(res.loss);
  return res;
}

std::vector<double> lyap_exponent_series(const SimResult& result, double beta, double phi) {
  if (!(beta > 0.0) || !(phi > 0.0)) throw ValidationError("lyapunov exponent: beta and phi must be positive");
  const double lb = std::log(beta);
  const double lp = std::log(phi);
  const auto& cum = result.loss.cum();
  std::vector<double> out(result.loss.size());
  for (std::size_t k = 1; k <= result.loss.size(); ++k) {
    const double lost = static_cast<double>(cum[k]);
    const double kd = static_cast<double>(k);
    out[k - 1] = ((kd - lost) * lb + lost * lp) / kd;
  }
  return out;
}

double lyap_exponent_estimate(const SimResult& result, double beta, double phi) {
  if (result.loss.empty()) throw ValidationError("lyapunov exponent: no attempts recorded");
  return lyap_exponent_series(result, beta, phi).back();
}

}  // namespace netloss
