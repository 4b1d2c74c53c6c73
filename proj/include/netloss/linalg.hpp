#pragma once

// Small dense linear algebra for the matrices that appear in the certificate
// and design code (n <= 8). Row-major storage, value semantics.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace netloss {

class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t n) : data_(n, 0.0) {}
  // Rejects non-finite entries.
  explicit Vec(std::vector<double> entries);
  Vec(std::initializer_list<double> entries);

  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return data_; }
  [[nodiscard]] const std::vector<double>& raw() const noexcept { return data_; }

  [[nodiscard]] double norm() const;
  [[nodiscard]] double dot(const Vec& other) const;
  [[nodiscard]] bool all_finite() const;

  // Arithmetic results may legitimately overflow during divergent
  // simulations, so they bypass the finiteness check.
  [[nodiscard]] static Vec unchecked(std::vector<double> entries);

 private:
  std::vector<double> data_;
};

Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(double s, const Vec& v);

class Mat {
 public:
  Mat() = default;
  // Zero matrix.
  Mat(std::size_t rows, std::size_t cols);
  // Row-major entries; rejects size mismatch and non-finite values.
  Mat(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  [[nodiscard]] static Mat identity(std::size_t n);
  [[nodiscard]] static Mat diag(std::span<const double> d);
  [[nodiscard]] static Mat column(const Vec& v);
  [[nodiscard]] static Mat row(const Vec& v);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  [[nodiscard]] std::span<const double> entries() const noexcept { return data_; }

  [[nodiscard]] Mat transpose() const;
  [[nodiscard]] double frobenius_norm() const;
  [[nodiscard]] double trace() const;
  [[nodiscard]] Vec row_vec(std::size_t r) const;
  [[nodiscard]] Vec col_vec(std::size_t c) const;
  // Max |m - m^T| relative to the Frobenius norm.
  [[nodiscard]] double asymmetry() const;
  [[nodiscard]] Mat symmetrized() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat operator*(const Mat& a, const Mat& b);
Mat operator*(double s, const Mat& m);
Vec operator*(const Mat& m, const Vec& v);

// Assembles [[tl, tr], [bl, br]].
Mat block2x2(const Mat& tl, const Mat& tr, const Mat& bl, const Mat& br);

struct JacobiOptions {
  double symmetry_tol = 1e-9;   // relative
  double offdiag_tol = 1e-12;   // relative to ||m||_F
  int max_sweeps = 100;
};

struct SymEigResult {
  std::vector<double> eigenvalues;  // ascending
  double max_offdiag_residual = 0.0;
  int sweeps = 0;

  [[nodiscard]] double min() const { return eigenvalues.front(); }
  [[nodiscard]] double max() const { return eigenvalues.back(); }
};

// Cyclic Jacobi. Throws ValidationError for non-square/asymmetric input and
// NumericError if the off-diagonal mass does not vanish within max_sweeps.
[[nodiscard]] SymEigResult sym_eigenvalues(const Mat& m, const JacobiOptions& opts = {});

// lambda_min(m) >= -tol.
[[nodiscard]] bool is_psd(const Mat& m, double tol = 1e-9);

// Lower-triangular L with L L^T = m.
[[nodiscard]] Mat cholesky(const Mat& m);

// Gaussian elimination with partial pivoting. Throws NumericError on a
// (numerically) singular matrix.
[[nodiscard]] Vec solve(const Mat& a, const Vec& b);
[[nodiscard]] Mat solve(const Mat& a, const Mat& b);

// Inverse via Gauss-Jordan; throws NumericError when the 1-norm condition
// estimate exceeds max_condition.
[[nodiscard]] Mat inverse(const Mat& a, double max_condition = 1e12);

[[nodiscard]] double condition_1norm(const Mat& a);

// Rank by pivoted elimination with a relative pivot threshold.
[[nodiscard]] std::size_t numeric_rank(const Mat& a, double rel_tol = 1e-10);

// Solves F^T P F - beta P = -rhs for symmetric P through the vectorised
// n^2 x n^2 system. The caller is responsible for rho(F) < sqrt(beta);
// a singular system surfaces as NumericError.
[[nodiscard]] Mat solve_stein(const Mat& f, double beta, const Mat& rhs);

// ||F^T P F - beta P + rhs||_F
[[nodiscard]] double stein_residual(const Mat& f, double beta, const Mat& p, const Mat& rhs);

// Sufficient test for rho(F) < bound. Exact (closed form) for n <= 2;
// for larger n accepts iff ||F^64||_F^(1/64) < bound - 1e-6.
[[nodiscard]] bool spectral_radius_below(const Mat& f, double bound);

// Eigenvalues of a real n x n matrix for n <= 2 (closed form).
[[nodiscard]] std::vector<std::complex<double>> small_eigenvalues(const Mat& f);

// Monic polynomial coefficients [c_{n-1}, ..., c_0] of prod (s - r_i);
// roots must be closed under conjugation.
[[nodiscard]] std::vector<double> poly_from_roots(std::span<const std::complex<double>> roots);

// Ackermann: returns the gain row k such that eig(A - b k) = targets.
[[nodiscard]] Vec pole_place_si(const Mat& a, const Vec& b, std::span<const std::complex<double>> targets);

}  // namespace netloss
