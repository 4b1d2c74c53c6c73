#include "netloss/certificates.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "netloss/errors.hpp"

namespace netloss {

namespace {

void require_fit(const PlantModel& plant, const Mat& k, const Mat& p) {
  if (k.rows() != plant.m() || k.cols() != plant.n()) {
    std::ostringstream os;
    os << "certificate: K must be " << plant.m() << "x" << plant.n() << ", got " << k.rows() << "x" << k.cols();
    throw ValidationError(os.str());
  }
  if (p.rows() != plant.n() || p.cols() != plant.n()) throw ValidationError("certificate: P has the wrong shape");
  if (p.asymmetry() > 1e-9) throw ValidationError("certificate: P must be symmetric");
  try {
    (void)cholesky(p);
  } catch (const NumericError& e) {
    throw ValidationError(std::string("certificate: P must be positive definite (") + e.what() + ")");
  }
}

double exponent_guard(double beta, double phi) { return 1e-12 * (std::abs(std::log(beta)) + std::abs(std::log(phi))); }

Mat congruence(const Mat& f, const Mat& p) { return (f.transpose() * p * f).symmetrized(); }

}  // namespace

StabilityCertificate check_stability(const PlantModel& plant, const Mat& k, const Mat& p, double beta, double phi,
                                     double rho) {
  require_fit(plant, k, p);
  if (!(beta > 0.0 && beta < 1.0)) throw ValidationError("certificate: beta must lie in (0, 1)");
  if (!(phi >= 1.0) || !std::isfinite(phi)) throw ValidationError("certificate: phi must be >= 1");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ValidationError("certificate: rho must lie in [0, 1]");

  const Mat f = plant.A() + plant.B() * k;
  StabilityCertificate c;
  c.tol = 1e-9 * p.frobenius_norm();
  c.contraction_margin = sym_eigenvalues((beta * p - congruence(f, p)).symmetrized()).min();
  c.growth_margin = sym_eigenvalues((phi * p - congruence(plant.A(), p)).symmetrized()).min();
  c.exponent = (1.0 - rho) * std::log(beta) + rho * std::log(phi);
  const SymEigResult pe = sym_eigenvalues(p);
  c.nu = pe.max() / pe.min();
  c.pass = c.contraction_margin >= -c.tol && c.growth_margin >= -c.tol && c.exponent < -exponent_guard(beta, phi);
  return c;
}

InstabilityCertificate check_instability(const PlantModel& plant, const Mat& k, const Mat& p_hat, double beta_hat,
                                         double phi_hat, double sigma, std::optional<std::uint64_t> theta) {
  require_fit(plant, k, p_hat);
  if (!(beta_hat > 0.0 && beta_hat < 1.0)) throw ValidationError("certificate: beta_hat must lie in (0, 1)");
  if (!(phi_hat >= 1.0) || !std::isfinite(phi_hat)) throw ValidationError("certificate: phi_hat must be >= 1");
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw ValidationError("certificate: sigma must lie in [0, 1]");

  const Mat f = plant.A() + plant.B() * k;
  InstabilityCertificate c;
  c.tol = 1e-9 * p_hat.frobenius_norm();
  c.expansion_margin = sym_eigenvalues((congruence(f, p_hat) - beta_hat * p_hat).symmetrized()).min();
  c.open_loop_margin = sym_eigenvalues((congruence(plant.A(), p_hat) - phi_hat * p_hat).symmetrized()).min();
  c.exponent = (1.0 - sigma) * std::log(beta_hat) + sigma * std::log(phi_hat);
  c.pass = c.expansion_margin >= -c.tol && c.open_loop_margin >= -c.tol &&
           c.exponent > exponent_guard(beta_hat, phi_hat);
  c.theta_warning = theta.has_value() && *theta != 1;
  return c;
}

double markov_rho(double p01, double p10) {
  if (!(p01 >= 0.0 && p01 <= 1.0) || !(p10 >= 0.0 && p10 <= 1.0)) {
    throw ValidationError("markov_rho: transition probabilities must lie in [0, 1]");
  }
  if (p01 + p10 <= 0.0) throw ValidationError("markov_rho: chain is reducible (p01 + p10 = 0)");
  return p01 / (p01 + p10);
}

LmiReport lmi_pair_margins(const Mat& q, const Mat& m, const PlantModel& plant, double beta, double phi, double tol) {
  const std::size_t n = plant.n();
  if (q.rows() != n || q.cols() != n) throw ValidationError("lmi: Q must be n x n");
  if (m.rows() != plant.m() || m.cols() != n) throw ValidationError("lmi: M must be m x n");
  if (q.asymmetry() > 1e-9) throw ValidationError("lmi: Q must be symmetric");

  const Mat qs = q.symmetrized();
  const Mat closed = plant.A() * qs + plant.B() * m;
  const Mat open = plant.A() * qs;
  const Mat contraction = block2x2(beta * qs, closed.transpose(), closed, qs).symmetrized();
  const Mat growth = block2x2(phi * qs, open.transpose(), open, qs).symmetrized();

  LmiReport r;
  r.q_min = sym_eigenvalues(qs).min();
  r.contraction_min = sym_eigenvalues(contraction).min();
  r.growth_min = sym_eigenvalues(growth).min();
  r.feasible = r.q_min > 0.0 && r.contraction_min >= -tol * contraction.frobenius_norm() &&
               r.growth_min >= -tol * growth.frobenius_norm();
  return r;
}

bool lmi_pair_feasible(const Mat& q, const Mat& m, const PlantModel& plant, double beta, double phi, double tol) {
  return lmi_pair_margins(q, m, plant, beta, phi, tol).feasible;
}

GainPair gain_from_qm(const Mat& q, const Mat& m) {
  if (!q.is_square() || q.rows() == 0) throw ValidationError("gain_from_qm: Q must be square");
  if (m.cols() != q.rows()) throw ValidationError("gain_from_qm: M must have n columns");
  if (q.asymmetry() > 1e-9) throw ValidationError("gain_from_qm: Q must be symmetric");
  try {
    (void)cholesky(q);
  } catch (const NumericError& e) {
    throw ValidationError(std::string("gain_from_qm: Q must be positive definite (") + e.what() + ")");
  }
  const Mat q_inv = inverse(q);
  return GainPair{m * q_inv, q_inv.symmetrized()};
}

std::vector<double> default_beta_grid(double rho, double delta, std::size_t points, double floor) {
  if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("design: rho must lie in (0, 1)");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("design: delta must be positive");
  if (points < 2) throw ValidationError("design: grid needs at least two points");
  const double top = std::exp(-delta / (1.0 - rho));
  if (!(floor > 0.0 && floor < top)) throw ValidationError("design: grid floor must lie in (0, top)");
  std::vector<double> grid(points);
  const double step = (std::log(floor) - std::log(top)) / static_cast<double>(points - 1);
  for (std::size_t j = 0; j < points; ++j) grid[j] = std::exp(std::log(top) + step * static_cast<double>(j));
  grid.back() = floor;
  return grid;
}

double design_curve_phi(double rho, double delta, double beta) {
  return std::exp(-((1.0 - rho) * std::log(beta) + delta) / rho);
}

namespace {

// Closed-loop spectra of modulus r for an n-state plant. omega = 0 gives a
// repeated real pole; otherwise conjugate pairs plus one real pole if n is odd.
std::vector<std::complex<double>> spectrum(std::size_t n, double r, double omega) {
  std::vector<std::complex<double>> poles;
  poles.reserve(n);
  if (omega == 0.0) {
    poles.assign(n, {r, 0.0});
    return poles;
  }
  for (std::size_t j = 0; j + 1 < n; j += 2) {
    poles.push_back(std::polar(r, omega));
    poles.push_back(std::polar(r, -omega));
  }
  if (n % 2 == 1) poles.emplace_back(r, 0.0);
  return poles;
}

// Smallest phi with phi P >= A^T P A: lambda_max(L^{-1} A^T P A L^{-T}).
double minimal_phi(const Mat& a, const Mat& p) {
  const Mat l = cholesky(p);
  const Mat l_inv = inverse(l, std::numeric_limits<double>::infinity());
  return sym_eigenvalues((l_inv * congruence(a, p) * l_inv.transpose()).symmetrized()).max();
}

}  // namespace

DesignResult design_gain(const PlantModel& plant, double rho, double delta, const std::vector<double>& beta_grid) {
  if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("design: rho must lie in (0, 1)");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("design: delta must be positive");
  if (plant.m() != 1) throw ValidationError("design: only single-input plants are supported");
  if (beta_grid.empty()) throw ValidationError("design: empty beta grid");
  const double top = std::exp(-delta / (1.0 - rho));
  for (std::size_t j = 0; j < beta_grid.size(); ++j) {
    if (!(beta_grid[j] > 0.0 && beta_grid[j] <= top * (1.0 + 1e-12))) {
      throw ValidationError("design: beta grid values must lie in (0, e^{-delta/(1-rho)}]");
    }
    if (j > 0 && !(beta_grid[j] < beta_grid[j - 1])) throw ValidationError("design: beta grid must be descending");
  }

  const std::size_t n = plant.n();
  const Vec b = plant.B().col_vec(0);
  const double a_norm = plant.A().frobenius_norm();
  const Mat rhs = (1e-6 * std::max(a_norm * a_norm, 1.0)) * Mat::identity(n);

  const std::vector<double> gammas{0.0, 0.3, 0.6, 0.9};
  const std::vector<double> omegas{0.0, std::numbers::pi / 4.0, std::numbers::pi / 2.0};

  double best_exponent = std::numeric_limits<double>::infinity();
  for (double beta : beta_grid) {
    const double phi = design_curve_phi(rho, delta, beta);
    for (double gamma : gammas) {
      for (double omega : omegas) {
        if ((gamma == 0.0 || n == 1) && omega != 0.0) continue;  // same spectrum as omega = 0
        const auto poles = spectrum(n, gamma * std::sqrt(beta), omega);
        Mat k_row;
        Mat p;
        try {
          const Vec k = pole_place_si(plant.A(), b, poles);
          k_row = -1.0 * Mat::row(k);
          const Mat f = plant.A() + plant.B() * k_row;
          p = solve_stein(f, beta, rhs);
        } catch (const NumericError&) {
          continue;
        }
        StabilityCertificate cert;
        double phi_min = 0.0;
        try {
          cert = check_stability(plant, k_row, p, beta, phi, rho);
          phi_min = minimal_phi(plant.A(), p);
        } catch (const Error&) {
          continue;  // P not positive definite for this candidate
        }
        if (cert.contraction_margin >= -cert.tol) {
          const double e = (1.0 - rho) * std::log(beta) + rho * std::log(std::max(phi_min, 1.0));
          best_exponent = std::min(best_exponent, e);
        }
        if (!cert.pass) continue;
        DesignResult out;
        out.k = k_row;
        out.p = p;
        out.beta = beta;
        out.phi = phi;
        out.phi_min = phi_min;
        out.q = inverse(p).symmetrized();
        out.m = k_row * out.q;
        out.certificate = cert;
        return out;
      }
    }
  }
  std::ostringstream os;
  os << "design: no candidate on the beta grid passed the stability certificate (best exponent " << best_exponent
     << ")";
  throw InfeasibleDesign(os.str(), best_exponent);
}

DesignResult design_gain(const PlantModel& plant, double rho, double delta) {
  return design_gain(plant, rho, delta, default_beta_grid(rho, delta));
}

}  // namespace netloss
