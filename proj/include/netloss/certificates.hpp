#pragma once

// Almost-sure stability / instability certificates for the event-triggered
// loop, the LMI pair behind gain synthesis, and the gain-design search.

#include <optional>
#include <vector>

#include "netloss/control.hpp"
#include "netloss/linalg.hpp"

namespace netloss {

struct StabilityCertificate {
  double contraction_margin = 0.0;  // lambda_min(beta P - F^T P F), F = A + B K
  double growth_margin = 0.0;       // lambda_min(phi P - A^T P A)
  double exponent = 0.0;            // (1 - rho) ln beta + rho ln phi
  double nu = 0.0;                  // lambda_max(P) / lambda_min(P)
  double tol = 0.0;                 // matrix tolerance used, 1e-9 ||P||_F
  bool pass = false;
};

// pass iff both matrix margins >= -tol and exponent < 0. The exponent
// test is strict with a relative guard of 1e-12 (|ln beta| + |ln phi|), so
// exact ties such as rho = 2/3 in the scalar example do not pass.
[[nodiscard]] StabilityCertificate check_stability(const PlantModel& plant, const Mat& k, const Mat& p, double beta,
                                                   double phi, double rho);

struct InstabilityCertificate {
  double expansion_margin = 0.0;  // lambda_min(F^T P F - beta P)
  double open_loop_margin = 0.0;  // lambda_min(A^T P A - phi P)
  double exponent = 0.0;          // (1 - sigma) ln beta + sigma ln phi
  double tol = 0.0;
  bool pass = false;
  // The certificate reasons about attempts at every step; set when the
  // caller's controller has theta != 1.
  bool theta_warning = false;
};

[[nodiscard]] InstabilityCertificate check_instability(const PlantModel& plant, const Mat& k, const Mat& p_hat,
                                                       double beta_hat, double phi_hat, double sigma,
                                                       std::optional<std::uint64_t> theta = std::nullopt);

// Stationary failure fraction p01 / (p01 + p10) of a homogeneous chain.
[[nodiscard]] double markov_rho(double p01, double p10);

struct LmiReport {
  double q_min = 0.0;       // lambda_min(Q)
  double contraction_min = 0.0;  // lambda_min([beta Q, (AQ+BM)^T; AQ+BM, Q])
  double growth_min = 0.0;       // lambda_min([phi Q, (AQ)^T; AQ, Q])
  bool feasible = false;
};

// tol is relative to the Frobenius norm of each block.
[[nodiscard]] LmiReport lmi_pair_margins(const Mat& q, const Mat& m, const PlantModel& plant, double beta, double phi,
                                         double tol = 1e-9);
[[nodiscard]] bool lmi_pair_feasible(const Mat& q, const Mat& m, const PlantModel& plant, double beta, double phi,
                                     double tol = 1e-9);

struct GainPair {
  Mat k;
  Mat p;
};

// K = M Q^{-1}, P = Q^{-1}.
[[nodiscard]] GainPair gain_from_qm(const Mat& q, const Mat& m);

struct DesignResult {
  Mat k;
  Mat p;
  double beta = 0.0;
  double phi = 0.0;      // on the curve (1 - rho) ln beta + rho ln phi = -delta
  double phi_min = 0.0;  // smallest phi with phi P >= A^T P A for this P
  Mat q;
  Mat m;
  StabilityCertificate certificate;
};

// Descending geometric grid from e^{-delta/(1-rho)} down to `floor`.
[[nodiscard]] std::vector<double> default_beta_grid(double rho, double delta, std::size_t points = 32,
                                                    double floor = 1e-6);

// phi on the design curve for a given beta.
[[nodiscard]] double design_curve_phi(double rho, double delta, double beta);

// Searches the grid in order; for each beta tries pole-placement gains with
// closed-loop poles of modulus gamma sqrt(beta), builds P from the Stein
// equation and returns the first (K, P) whose certificate passes. Throws
// InfeasibleDesign when the grid is exhausted. Single-input plants only.
[[nodiscard]] DesignResult design_gain(const PlantModel& plant, double rho, double delta,
                                       const std::vector<double>& beta_grid);
[[nodiscard]] DesignResult design_gain(const PlantModel& plant, double rho, double delta = 0.01);

}  // namespace netloss
