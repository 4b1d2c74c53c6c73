#pragma once

// Random (Markov) and malicious loss processes, and the channel combining
// them into the failure indicator l(i) = max(l_R(i), l_M(i)).

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "netloss/rng.hpp"

namespace netloss {

enum class ScheduleKind { constant, sinusoid, sinusoid_squared };
enum class Trig { sin, cos };

// Probability of a failed attempt as a function of the attempt index:
//   constant:          base
//   sinusoid:          base + amplitude * trig(frequency * i)
//   sinusoid_squared:  base + amplitude * trig(frequency * i)^2
class TransitionSchedule {
 public:
  static TransitionSchedule constant(double p);
  static TransitionSchedule sinusoid(double base, double amplitude, double frequency, Trig trig = Trig::sin);
  static TransitionSchedule sinusoid_squared(double base, double amplitude, double frequency,
                                             Trig trig = Trig::sin);

  [[nodiscard]] double operator()(std::uint64_t i) const;

  // Interval bounds over all i; construction guarantees [lower, upper] ⊆ [0, 1].
  [[nodiscard]] double lower() const noexcept { return lower_; }
  [[nodiscard]] double upper() const noexcept { return upper_; }

  [[nodiscard]] ScheduleKind kind() const noexcept { return kind_; }
  [[nodiscard]] Trig trig() const noexcept { return trig_; }
  [[nodiscard]] double base() const noexcept { return base_; }
  [[nodiscard]] double amplitude() const noexcept { return amplitude_; }
  [[nodiscard]] double frequency() const noexcept { return frequency_; }

 private:
  TransitionSchedule(ScheduleKind kind, double base, double amplitude, double frequency, Trig trig);

  ScheduleKind kind_;
  Trig trig_;
  double base_;
  double amplitude_;
  double frequency_;
  double lower_;
  double upper_;
};

// Two-state chain for random losses. State 1 is a failed attempt.
// P[l_R(0) = 1] = init_fail; P[l_R(i+1) = 1 | l_R(i) = q] = schedule_q(i).
class MarkovLossModel {
 public:
  // init = (theta0, theta1), normalised to sum 1. Bounds default to the
  // tightest values implied by the schedules' interval bounds.
  MarkovLossModel(double theta0, double theta1, TransitionSchedule from_success, TransitionSchedule from_failure,
                  std::optional<double> p1_bound = std::nullopt, std::optional<double> p0_bound = std::nullopt);

  static MarkovLossModel bernoulli(double p);
  static MarkovLossModel never_fail();

  [[nodiscard]] double init_fail() const noexcept { return theta1_; }
  [[nodiscard]] double init_success() const noexcept { return theta0_; }
  [[nodiscard]] const TransitionSchedule& to_fail(int prev) const { return prev == 0 ? from_success_ : from_failure_; }
  // Upper bound on every failure probability.
  [[nodiscard]] double p1_bound() const noexcept { return p1_; }
  // Upper bound on every success probability.
  [[nodiscard]] double p0_bound() const noexcept { return p0_; }

  // Failure probability of attempt i given the outcome of attempt i-1
  // (prev is ignored at i = 0).
  [[nodiscard]] double fail_probability(std::uint64_t i, int prev) const;

 private:
  double theta0_;
  double theta1_;
  TransitionSchedule from_success_;
  TransitionSchedule from_failure_;
  double p1_;
  double p0_;
};

// prev < 0 marks the start of the chain.
[[nodiscard]] int markov_next(const MarkovLossModel& model, int prev, std::uint64_t i, Rng& rng);

// ---------------------------------------------------------------- attacks

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  [[nodiscard]] double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
};

// Best rational approximation with denominator <= max_den (continued
// fractions). Requires 0 <= x <= 1e12.
[[nodiscard]] Rational snap_rational(double x, std::int64_t max_den = 1'000'000);

struct NoAttack {};

// Attacks whenever doing so keeps the count within kappa + k/tau.
struct BudgetGreedy {
  double kappa = 0.0;
  double tau = 2.0;
};

// As BudgetGreedy, but only when the random channel has not already failed.
struct SelectiveBudget {
  double kappa = 0.0;
  double tau = 2.0;
};

// As SelectiveBudget, and only while ln V(x) <= zeta.
struct StateThreshold {
  double kappa = 0.0;
  double tau = 2.0;
  double zeta = 0.0;
};

// Draws a period alpha once per path; attacks at positive multiples of it.
struct RandomPeriod {
  std::vector<std::uint64_t> support;
  std::vector<double> probs;
};

struct BernoulliAttack {
  double p = 0.0;
};

using AttackStrategy = std::variant<NoAttack, BudgetGreedy, SelectiveBudget, StateThreshold, RandomPeriod, BernoulliAttack>;

// Throws ValidationError on out-of-domain parameters.
void validate(const AttackStrategy& s);

[[nodiscard]] bool needs_observables(const AttackStrategy& s);
[[nodiscard]] bool is_budget_variant(const AttackStrategy& s);
// (kappa, tau) of a budget variant.
[[nodiscard]] std::pair<double, double> budget_of(const AttackStrategy& s);

struct Observables {
  std::optional<int> random_loss;  // l_R(i), when the attacker may see it
  std::optional<double> ln_v;      // ln V(x) at this attempt
};

// Decision of a deterministic strategy at attempt i, given the number of
// attacks already placed. RandomPeriod needs the drawn period and
// BernoulliAttack needs randomness; both are refused here (use AttackProcess).
[[nodiscard]] int attack_next(const AttackStrategy& s, std::uint64_t i, std::uint64_t history,
                              const Observables& obs);

// Stateful per-path attacker. Checks the budget inequality after every
// decision for the budget variants.
class AttackProcess {
 public:
  AttackProcess(AttackStrategy s, Rng& rng);

  int step(std::uint64_t i, const Observables& obs, Rng& rng);

  [[nodiscard]] std::uint64_t count() const noexcept { return count_; }
  [[nodiscard]] std::uint64_t period() const noexcept { return period_; }

 private:
  AttackStrategy strategy_;
  Rational kappa_{};
  Rational tau_{};
  std::uint64_t count_ = 0;
  std::uint64_t period_ = 0;
};

// ---------------------------------------------------------------- channel

enum class Dependence { independent, attacker_observes_random };

class LossChannel {
 public:
  // Throws ConfigError when an observing strategy is paired with an
  // independent channel.
  LossChannel(MarkovLossModel random, AttackStrategy attack, Dependence dependence);

  static LossChannel never_fail();

  [[nodiscard]] const MarkovLossModel& random() const noexcept { return random_; }
  [[nodiscard]] const AttackStrategy& attack() const noexcept { return attack_; }
  [[nodiscard]] Dependence dependence() const noexcept { return dependence_; }

 private:
  MarkovLossModel random_;
  AttackStrategy attack_;
  Dependence dependence_;
};

struct ChannelStep {
  int l = 0;
  int l_r = 0;
  int l_m = 0;
};

class LossTrace {
 public:
  LossTrace() : cum_{0} {}

  void push(int bit);

  [[nodiscard]] std::size_t size() const noexcept { return bits_.size(); }
  [[nodiscard]] bool empty() const noexcept { return bits_.empty(); }
  [[nodiscard]] const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  // cum()[k] = number of ones among the first k bits; size() + 1 entries.
  [[nodiscard]] const std::vector<std::uint64_t>& cum() const noexcept { return cum_; }

 private:
  std::vector<std::uint8_t> bits_;
  std::vector<std::uint64_t> cum_;
};

// One path of the channel. Owns its random stream, so a standalone trace
// and the losses seen inside a simulation agree for the same seed.
class ChannelProcess {
 public:
  ChannelProcess(const LossChannel& channel, std::uint64_t seed);

  // Attempts must be presented as 0, 1, 2, ... (UsageError otherwise).
  ChannelStep step(std::uint64_t i, std::optional<double> ln_v = std::nullopt);

  [[nodiscard]] std::uint64_t next_index() const noexcept { return next_; }
  [[nodiscard]] const LossTrace& combined() const noexcept { return combined_; }
  [[nodiscard]] const LossTrace& random_part() const noexcept { return random_; }
  [[nodiscard]] const LossTrace& attack_part() const noexcept { return attack_; }

 private:
  LossChannel channel_;
  Rng rng_;
  AttackProcess attacker_;
  int prev_r_ = -1;
  std::uint64_t next_ = 0;
  LossTrace combined_;
  LossTrace random_;
  LossTrace attack_;
};

// First n attempts of one path. Refuses state-threshold attackers, whose
// decisions depend on the plant.
[[nodiscard]] LossTrace generate_trace(const LossChannel& channel, std::uint64_t seed, std::uint64_t n);

// L(k)/k for k = 1..size.
[[nodiscard]] std::vector<double> empirical_ratio(const LossTrace& trace);

}  // namespace netloss
