#pragma once

// Chernoff-type tail bounds on loss counts, admissible long-run loss-ratio
// ranges, and a brute-force enumeration oracle used to check the bounds.

#include <cstdint>
#include <string_view>
#include <vector>

#include "netloss/loss_models.hpp"

namespace netloss {

// Bound on P[sum_{i<k} xi(i) chi(i) > rho k] where xi fails with probability
// at most p_tilde and chi is active on at most a w_tilde fraction of steps.
struct TailBoundSpec {
  double rho = 0.0;
  double p_tilde = 0.0;
  double w_tilde = 1.0;
};

// Requires 0 < p_tilde < 1, 0 < w_tilde <= 1, p_tilde*w_tilde < rho < w_tilde.
void validate(const TailBoundSpec& spec);

// phi = (rho/w)(1-p) / (p (1 - rho/w)); always > 1 inside the window.
[[nodiscard]] double chernoff_phi(const TailBoundSpec& spec);

// sigma_tilde_k + phi^(1 - rho k) ((phi-1)p + 1)^(w k) - 1) / ((phi-1) p).
// Evaluated in log space for k > 200.
[[nodiscard]] double psi_k(const TailBoundSpec& spec, double sigma_tilde_k, std::uint64_t k);

// dist[k][j] = P[sum_{i<k} l_R(i) = j] for k = 0..kmax, by walking every
// binary loss sequence of length kmax (kmax <= 20).
[[nodiscard]] std::vector<std::vector<double>> exact_count_distributions(const MarkovLossModel& model,
                                                                         unsigned kmax);

// P[count > rho k] from one row of exact_count_distributions. A threshold
// rho*k within 1e-9 of an integer is treated as that integer.
[[nodiscard]] double tail_probability(const std::vector<double>& dist_k, double rho);

// Exact P[sum_{i<k} l_R(i) > rho k]; refuses k > 20.
[[nodiscard]] double exact_tail_oracle(const MarkovLossModel& model, unsigned k, double rho);

// e^(kappa - (rho_m - 1/tau) k), valid for rho_m in (1/tau, 1).
[[nodiscard]] double jamming_tail_bound(double kappa, double tau, double rho_m, std::uint64_t k);

enum class RangeKind { open_interval, trivial_one };

enum class RangeSource {
  rho_independent,
  rho_dependent,
  sigma_independent,
  sigma_dependent,
  sigma_exclusive,
};

[[nodiscard]] std::string_view to_string(RangeSource s);

// Either the open interval (lower, upper) or the degenerate certificate
// "ratio = 1", which always holds because L(k) <= k.
struct RatioRange {
  RangeKind kind = RangeKind::open_interval;
  double lower = 0.0;
  double upper = 1.0;
  RangeSource source = RangeSource::rho_independent;

  [[nodiscard]] bool contains(double x) const noexcept {
    return kind == RangeKind::trivial_one ? x == 1.0 : (lower < x && x < upper);
  }
};

// Upper-ratio bounds for random losses combined with attacks.
[[nodiscard]] RatioRange rho_range_independent(double p1, double p0, double rho_m);
[[nodiscard]] RatioRange rho_range_dependent(double p1, double rho_m);

// Lower-ratio bounds (attacker's side).
[[nodiscard]] RatioRange sigma_range_independent(double p0, double sigma_m);
[[nodiscard]] RatioRange sigma_range_dependent(double p0, double sigma_m);
// Only when the attacker never hits an already-lost attempt; requires
// 1 - p0 + sigma_m <= 1.
[[nodiscard]] RatioRange sigma_range_exclusive(double p0, double sigma_m);

struct MomentCheck {
  double empirical = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  std::uint64_t paths = 0;
};

// Monte Carlo estimate of E[phi^(sum_j l_R(indices[j]))] against the closed
// form phi ((phi-1) p1 + 1)^(s-1), with p1 the model's failure bound.
// Deterministic for a given seed regardless of thread count.
[[nodiscard]] MomentCheck moment_bound_check(const MarkovLossModel& model, double phi,
                                             const std::vector<std::uint64_t>& indices, std::uint64_t paths,
                                             std::uint64_t seed);

}  // namespace netloss
