#include "netloss/loss_models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "netloss/errors.hpp"

namespace netloss {

namespace {

constexpr double kBoundSlack = 1e-12;

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << what << " must lie in [0, 1], got " << p;
    throw ValidationError(os.str());
  }
}

double trig_eval(Trig t, double x) { return t == Trig::sin ? std::sin(x) : std::cos(x); }

}  // namespace

// ---------------------------------------------------------------- schedules

TransitionSchedule::TransitionSchedule(ScheduleKind kind, double base, double amplitude, double frequency, Trig trig)
    : kind_(kind), trig_(trig), base_(base), amplitude_(amplitude), frequency_(frequency) {
  if (!std::isfinite(base) || !std::isfinite(amplitude) || !std::isfinite(frequency)) {
    throw ValidationError("schedule: non-finite parameter");
  }
  require_probability(base, "schedule base");
  switch (kind) {
    case ScheduleKind::constant:
      lower_ = upper_ = base;
      break;
    case ScheduleKind::sinusoid:
      lower_ = base - std::abs(amplitude);
      upper_ = base + std::abs(amplitude);
      break;
    case ScheduleKind::sinusoid_squared:
      lower_ = base + std::min(0.0, amplitude);
      upper_ = base + std::max(0.0, amplitude);
      break;
  }
  if (lower_ < 0.0 || upper_ > 1.0) {
    std::ostringstream os;
    os << "schedule: values may leave [0, 1] (range [" << lower_ << ", " << upper_ << "])";
    throw ValidationError(os.str());
  }
}

TransitionSchedule TransitionSchedule::constant(double p) {
  return TransitionSchedule(ScheduleKind::constant, p, 0.0, 0.0, Trig::sin);
}

TransitionSchedule TransitionSchedule::sinusoid(double base, double amplitude, double frequency, Trig trig) {
  return TransitionSchedule(ScheduleKind::sinusoid, base, amplitude, frequency, trig);
}

TransitionSchedule TransitionSchedule::sinusoid_squared(double base, double amplitude, double frequency, Trig trig) {
  return TransitionSchedule(ScheduleKind::sinusoid_squared, base, amplitude, frequency, trig);
}

double TransitionSchedule::operator()(std::uint64_t i) const {
  const double x = frequency_ * static_cast<double>(i);
  double v = base_;
  switch (kind_) {
    case ScheduleKind::constant:
      break;
    case ScheduleKind::sinusoid:
      v += amplitude_ * trig_eval(trig_, x);
      break;
    case ScheduleKind::sinusoid_squared: {
      const double t = trig_eval(trig_, x);
      v += amplitude_ * t * t;
      break;
    }
  }
  // Rounding can push a boundary value a hair outside [0, 1].
  return std::clamp(v, 0.0, 1.0);
}

// ---------------------------------------------------------------- chain

MarkovLossModel::MarkovLossModel(double theta0, double theta1, TransitionSchedule from_success,
                                 TransitionSchedule from_failure, std::optional<double> p1_bound,
                                 std::optional<double> p0_bound)
    : from_success_(from_success), from_failure_(from_failure) {
  if (!(theta0 >= 0.0) || !(theta1 >= 0.0) || !std::isfinite(theta0 + theta1) || theta0 + theta1 <= 0.0) {
    throw ValidationError("markov model: initial distribution must be non-negative with positive mass");
  }
  const double total = theta0 + theta1;
  theta1_ = theta1 / total;
  theta0_ = 1.0 - theta1_;

  const double worst_fail = std::max(from_success_.upper(), from_failure_.upper());
  const double worst_success = 1.0 - std::min(from_success_.lower(), from_failure_.lower());
  p1_ = p1_bound.value_or(worst_fail);
  p0_ = p0_bound.value_or(worst_success);
  require_probability(p1_, "p1 bound");
  require_probability(p0_, "p0 bound");
  if (worst_fail > p1_ + kBoundSlack) {
    std::ostringstream os;
    os << "markov model: failure probability can reach " << worst_fail << " > p1 bound " << p1_;
    throw ValidationError(os.str());
  }
  if (worst_success > p0_ + kBoundSlack) {
    std::ostringstream os;
    os << "markov model: success probability can reach " << worst_success << " > p0 bound " << p0_;
    throw ValidationError(os.str());
  }
}

MarkovLossModel MarkovLossModel::bernoulli(double p) {
  require_probability(p, "loss probability");
  return MarkovLossModel(1.0 - p, p, TransitionSchedule::constant(p), TransitionSchedule::constant(p));
}

MarkovLossModel MarkovLossModel::never_fail() { return bernoulli(0.0); }

double MarkovLossModel::fail_probability(std::uint64_t i, int prev) const {
  if (i == 0) return theta1_;
  // The schedule at index i-1 governs the transition i-1 -> i.
  return to_fail(prev)(i - 1);
}

int markov_next(const MarkovLossModel& model, int prev, std::uint64_t i, Rng& rng) {
  if (i > 0 && prev != 0 && prev != 1) throw UsageError("markov_next: previous state required for i > 0");
  const double p = model.fail_probability(i, prev);
  if (!(p >= 0.0 && p <= 1.0)) throw std::logic_error("markov_next: schedule left [0, 1]");
  return rng.bernoulli(p) ? 1 : 0;
}

// ---------------------------------------------------------------- attacks

Rational snap_rational(double x, std::int64_t max_den) {
  if (!(x >= 0.0 && x <= 1e12)) throw ValidationError("snap_rational: value outside [0, 1e12]");
  if (max_den < 1) throw ValidationError("snap_rational: max_den must be positive");
  // Convergents h/k of the continued fraction of x.
  std::int64_t h_prev = 1, h_prev2 = 0;
  std::int64_t k_prev = 0, k_prev2 = 1;
  double rest = x;
  Rational best{static_cast<std::int64_t>(std::floor(x)), 1};
  for (int iter = 0; iter < 64; ++iter) {
    const double a_real = std::floor(rest);
    if (a_real > 1e13) break;
    const auto a = static_cast<std::int64_t>(a_real);
    const std::int64_t h = a * h_prev + h_prev2;
    const std::int64_t k = a * k_prev + k_prev2;
    if (k > max_den) break;
    best = {h, k};
    h_prev2 = h_prev;
    h_prev = h;
    k_prev2 = k_prev;
    k_prev = k;
    const double frac = rest - a_real;
    if (frac < 1e-12) break;
    rest = 1.0 / frac;
  }
  return best;
}

namespace {

struct BudgetParams {
  double kappa;
  double tau;
};

std::optional<BudgetParams> budget_params(const AttackStrategy& s) {
  if (const auto* b = std::get_if<BudgetGreedy>(&s)) return BudgetParams{b->kappa, b->tau};
  if (const auto* b = std::get_if<SelectiveBudget>(&s)) return BudgetParams{b->kappa, b->tau};
  if (const auto* b = std::get_if<StateThreshold>(&s)) return BudgetParams{b->kappa, b->tau};
  return std::nullopt;
}

// count <= kappa + k / tau, exactly, with kappa = kn/kd and tau = tn/td.
bool within_budget(std::uint64_t count, std::uint64_t k, Rational kappa, Rational tau) {
  __extension__ typedef __int128 wide;
  const wide lhs = static_cast<wide>(count) * kappa.den * tau.num;
  const wide rhs = static_cast<wide>(kappa.num) * tau.num + static_cast<wide>(k) * tau.den * kappa.den;
  return lhs <= rhs;
}

int budget_decision(std::uint64_t i, std::uint64_t history, Rational kappa, Rational tau) {
  if (i == 0) return 0;
  return within_budget(history + 1, i + 1, kappa, tau) ? 1 : 0;
}

}  // namespace

void validate(const AttackStrategy& s) {
  if (auto b = budget_params(s)) {
    if (!std::isfinite(b->kappa) || b->kappa < 0.0) throw ValidationError("attack: kappa must be finite and >= 0");
    if (!std::isfinite(b->tau) || b->tau <= 1.0) throw ValidationError("attack: tau must be finite and > 1");
    if (b->tau > 1e12 || b->kappa > 1e12) throw ValidationError("attack: kappa/tau too large");
  }
  if (const auto* st = std::get_if<StateThreshold>(&s)) {
    if (!std::isfinite(st->zeta)) throw ValidationError("attack: zeta must be finite");
  }
  if (const auto* rp = std::get_if<RandomPeriod>(&s)) {
    if (rp->support.empty() || rp->support.size() != rp->probs.size()) {
      throw ValidationError("attack: random period needs matching non-empty support and probabilities");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < rp->support.size(); ++j) {
      if (rp->support[j] < 1) throw ValidationError("attack: periods must be positive");
      require_probability(rp->probs[j], "period probability");
      total += rp->probs[j];
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("attack: period probabilities must sum to 1");
  }
  if (const auto* be = std::get_if<BernoulliAttack>(&s)) require_probability(be->p, "attack probability");
}

bool needs_observables(const AttackStrategy& s) {
  return std::holds_alternative<SelectiveBudget>(s) || std::holds_alternative<StateThreshold>(s);
}

bool is_budget_variant(const AttackStrategy& s) { return budget_params(s).has_value(); }

std::pair<double, double> budget_of(const AttackStrategy& s) {
  auto b = budget_params(s);
  if (!b) throw ValidationError("attack: not a budget strategy");
  return {b->kappa, b->tau};
}

namespace {

int decide(const AttackStrategy& s, std::uint64_t i, std::uint64_t history, const Observables& obs,
           Rational kappa, Rational tau) {
  if (std::holds_alternative<NoAttack>(s)) return 0;
  if (std::holds_alternative<BudgetGreedy>(s)) return budget_decision(i, history, kappa, tau);
  if (std::holds_alternative<SelectiveBudget>(s)) {
    if (!obs.random_loss) throw ConfigError("selective attacker needs the random-loss observable");
    if (*obs.random_loss != 0) return 0;
    return budget_decision(i, history, kappa, tau);
  }
  if (const auto* st = std::get_if<StateThreshold>(&s)) {
    if (!obs.random_loss || !obs.ln_v) throw ConfigError("state-threshold attacker needs the random-loss and ln V observables");
    if (*obs.random_loss != 0) return 0;
    if (!(*obs.ln_v <= st->zeta)) return 0;
    return budget_decision(i, history, kappa, tau);
  }
  throw ValidationError("attack_next: strategy needs per-path randomness; use AttackProcess");
}

}  // namespace

int attack_next(const AttackStrategy& s, std::uint64_t i, std::uint64_t history, const Observables& obs) {
  validate(s);
  Rational kappa{}, tau{1, 1};
  if (auto b = budget_params(s)) {
    kappa = snap_rational(b->kappa);
    tau = snap_rational(b->tau);
  }
  return decide(s, i, history, obs, kappa, tau);
}

AttackProcess::AttackProcess(AttackStrategy s, Rng& rng) : strategy_(std::move(s)) {
  validate(strategy_);
  if (auto b = budget_params(strategy_)) {
    kappa_ = snap_rational(b->kappa);
    tau_ = snap_rational(b->tau);
  }
  if (const auto* rp = std::get_if<RandomPeriod>(&strategy_)) {
    const double u = rng.uniform();
    double acc = 0.0;
    period_ = rp->support.back();
    for (std::size_t j = 0; j < rp->support.size(); ++j) {
      acc += rp->probs[j];
      if (u < acc) {
        period_ = rp->support[j];
        break;
      }
    }
  }
}

int AttackProcess::step(std::uint64_t i, const Observables& obs, Rng& rng) {
  int bit = 0;
  if (std::holds_alternative<RandomPeriod>(strategy_)) {
    bit = (i > 0 && i % period_ == 0) ? 1 : 0;
  } else if (const auto* be = std::get_if<BernoulliAttack>(&strategy_)) {
    bit = rng.bernoulli(be->p) ? 1 : 0;
  } else {
    bit = decide(strategy_, i, count_, obs, kappa_, tau_);
  }
  count_ += static_cast<std::uint64_t>(bit);
  if (is_budget_variant(strategy_) && !within_budget(count_, i + 1, kappa_, tau_)) {
    throw std::logic_error("attack budget exceeded");
  }
  return bit;
}

// ---------------------------------------------------------------- channel

LossChannel::LossChannel(MarkovLossModel random, AttackStrategy attack, Dependence dependence)
    : random_(std::move(random)), attack_(std::move(attack)), dependence_(dependence) {
  validate(attack_);
  if (dependence_ == Dependence::independent && needs_observables(attack_)) {
    throw ConfigError("selective and state-threshold attackers require the attacker-observes-random channel");
  }
}

LossChannel LossChannel::never_fail() {
  return LossChannel(MarkovLossModel::never_fail(), NoAttack{}, Dependence::independent);
}

void LossTrace::push(int bit) {
  bits_.push_back(static_cast<std::uint8_t>(bit != 0));
  cum_.push_back(cum_.back() + static_cast<std::uint64_t>(bit != 0));
}

ChannelProcess::ChannelProcess(const LossChannel& channel, std::uint64_t seed)
    : channel_(channel), rng_(seed), attacker_(channel.attack(), rng_) {}

ChannelStep ChannelProcess::step(std::uint64_t i, std::optional<double> ln_v) {
  if (i != next_) {
    std::ostringstream os;
    os << "channel: attempt " << i << " presented, expected " << next_;
    throw UsageError(os.str());
  }
  ChannelStep out;
  if (channel_.dependence() == Dependence::independent) {
    out.l_m = attacker_.step(i, Observables{std::nullopt, ln_v}, rng_);
    out.l_r = markov_next(channel_.random(), prev_r_, i, rng_);
  } else {
    out.l_r = markov_next(channel_.random(), prev_r_, i, rng_);
    out.l_m = attacker_.step(i, Observables{out.l_r, ln_v}, rng_);
  }
  out.l = std::max(out.l_r, out.l_m);
  prev_r_ = out.l_r;
  ++next_;
  combined_.push(out.l);
  random_.push(out.l_r);
  attack_.push(out.l_m);
  return out;
}

LossTrace generate_trace(const LossChannel& channel, std::uint64_t seed, std::uint64_t n) {
  if (std::holds_alternative<StateThreshold>(channel.attack())) {
    throw ConfigError("generate_trace: state-threshold attacks depend on the plant; simulate instead");
  }
  ChannelProcess proc(channel, seed);
  for (std::uint64_t i = 0; i < n; ++i) proc.step(i);
  return proc.combined();
}

std::vector<double> empirical_ratio(const LossTrace& trace) {
  std::vector<double> out(trace.size());
  for (std::size_t k = 1; k <= trace.size(); ++k) {
    out[k - 1] = static_cast<double>(trace.cum()[k]) / static_cast<double>(k);
  }
  return out;
}

}  // namespace netloss
