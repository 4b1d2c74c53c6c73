#pragma once

// Closed loop x(t+1) = A x(t) + B u(t) with an event-triggered,
// zero-on-failure feedback law u(t) = (1 - l(i)) K x(tau_i).

#include <cstdint>
#include <string_view>
#include <vector>

#include "netloss/linalg.hpp"
#include "netloss/loss_models.hpp"

namespace netloss {

class PlantModel {
 public:
  // A: n x n, B: n x m.
  PlantModel(Mat a, Mat b);

  [[nodiscard]] const Mat& A() const noexcept { return a_; }
  [[nodiscard]] const Mat& B() const noexcept { return b_; }
  [[nodiscard]] std::size_t n() const noexcept { return a_.rows(); }
  [[nodiscard]] std::size_t m() const noexcept { return b_.cols(); }

 private:
  Mat a_;
  Mat b_;
};

class TriggerController {
 public:
  // K: m x n; P symmetric positive definite; beta in (0, 1); theta >= 1.
  TriggerController(Mat k, Mat p, double beta, std::uint64_t theta);

  [[nodiscard]] const Mat& K() const noexcept { return k_; }
  [[nodiscard]] const Mat& P() const noexcept { return p_; }
  [[nodiscard]] double beta() const noexcept { return beta_; }
  [[nodiscard]] std::uint64_t theta() const noexcept { return theta_; }

  // V(x) = x^T P x
  [[nodiscard]] double lyapunov(const Vec& x) const;

 private:
  Mat k_;
  Mat p_;
  double beta_;
  std::uint64_t theta_;
};

// Throws ValidationError unless K is m x n and P is n x n for the plant.
void check_compatible(const PlantModel& plant, const TriggerController& ctrl);

struct SimConfig {
  Vec x0;
  std::uint64_t horizon = 500;
  double diverge_threshold = 1e9;
  double converge_threshold = 1e-9;
  std::uint64_t seed = 0;
  // After the state loop ends, keep drawing channel outcomes until this many
  // attempts exist, so long-run loss ratios can be read off a short
  // simulation. Refused for state-threshold attackers.
  std::uint64_t trace_attempts = 0;
};

void validate(const SimConfig& cfg, const PlantModel& plant);

enum class Verdict { converged, diverged, inconclusive };

[[nodiscard]] std::string_view to_string(Verdict v);

struct SimResult {
  std::vector<Vec> states;    // x(0..T)
  std::vector<Vec> inputs;    // u(0..T-1)
  std::vector<double> v_trace;  // V(x(t))
  std::vector<std::uint64_t> trigger_times;
  LossTrace loss;         // l(i) per attempt
  LossTrace random_loss;  // l_R(i)
  LossTrace attack_loss;  // l_M(i)
  std::vector<double> ratio_series;  // L(k)/k
  Verdict verdict = Verdict::inconclusive;
  // Attempts made while the plant was simulated (the rest of `loss` comes
  // from trace_attempts).
  std::uint64_t plant_attempts = 0;

  [[nodiscard]] std::uint64_t final_time() const noexcept { return states.empty() ? 0 : states.size() - 1; }
};

// True iff an exchange must be attempted now: the cap theta is reached or
// the state predicted under the held input would leave the level
// beta * V(x(tau_i)) (strictly).
[[nodiscard]] bool trigger_due(const TriggerController& ctrl, const Vec& x_next_open, double v_at_last_exchange,
                               std::uint64_t steps_since_exchange);

// A x + B u
[[nodiscard]] Vec step_closed_loop(const PlantModel& plant, const Vec& x, const Vec& u_held);

[[nodiscard]] SimResult simulate(const PlantModel& plant, const TriggerController& ctrl, const LossChannel& channel,
                                 const SimConfig& cfg);

// ((k - L(k)) ln beta + L(k) ln phi) / k for k = 1..attempts.
[[nodiscard]] std::vector<double> lyap_exponent_series(const SimResult& result, double beta, double phi);
// Last entry of lyap_exponent_series.
[[nodiscard]] double lyap_exponent_estimate(const SimResult& result, double beta, double phi);

}  // namespace netloss
