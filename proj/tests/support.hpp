#pragma once

// Shared fixtures: random matrices and conversions to Eigen, which serves as
// the independent numerical oracle in these tests.

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "netloss/linalg.hpp"
#include "netloss/loss_models.hpp"

namespace netloss::testing {

inline Eigen::MatrixXd to_eigen(const Mat& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) e(r, c) = m(r, c);
  return e;
}

inline Mat from_eigen(const Eigen::MatrixXd& e) {
  Mat m(e.rows(), e.cols());
  for (Eigen::Index r = 0; r < e.rows(); ++r)
    for (Eigen::Index c = 0; c < e.cols(); ++c) m(r, c) = e(r, c);
  return m;
}

inline Mat random_mat(std::mt19937_64& gen, std::size_t r, std::size_t c, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Mat m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = d(gen);
  return m;
}

inline Mat random_sym(std::mt19937_64& gen, std::size_t n) {
  return random_mat(gen, n, n).symmetrized();
}

inline Mat random_pd(std::mt19937_64& gen, std::size_t n) {
  const Mat g = random_mat(gen, n, n);
  return (g * g.transpose() + 0.5 * Mat::identity(n)).symmetrized();
}

inline double eigen_spectral_radius(const Mat& m) {
  return to_eigen(m).eigenvalues().cwiseAbs().maxCoeff();
}

// Example 1 plant and published LMI solution.
inline Mat ex1_a() { return Mat{{1.0, 0.1}, {-0.5, 1.1}}; }
inline Mat ex1_b() { return Mat{{0.1}, {1.2}}; }
inline Mat ex1_q() { return Mat{{0.618, -2.119}, {-2.119, 28.214}}; }
inline Mat ex1_m() { return Mat{{0.202, -20.405}}; }

// Example 1 random-loss chain: fail prob 0.2 + 0.03 sin^2(0.1 i) after a
// success, 0.2 + 0.03 cos^2(0.1 i) after a failure, starting failed.
inline MarkovLossModel ex1_chain() {
  return MarkovLossModel(0.0, 1.0, TransitionSchedule::sinusoid_squared(0.2, 0.03, 0.1, Trig::sin),
                         TransitionSchedule::sinusoid_squared(0.2, 0.03, 0.1, Trig::cos), 0.23, 0.8);
}

// Example 2 chain: 0.4 + 0.01 cos(0.1 i) after success, 0.4 + 0.01 sin(0.1 i)
// after failure.
inline MarkovLossModel ex2_chain() {
  return MarkovLossModel(0.0, 1.0, TransitionSchedule::sinusoid(0.4, 0.01, 0.1, Trig::cos),
                         TransitionSchedule::sinusoid(0.4, 0.01, 0.1, Trig::sin), 0.41, 0.61);
}

}  // namespace netloss::testing
