#include "netloss/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "netloss/errors.hpp"

namespace netloss {

namespace {

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) {
      throw ValidationError(std::string(what) + ": non-finite entry");
    }
  }
}

void require_square(const Mat& m, const char* what) {
  if (!m.is_square() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw ValidationError(os.str());
  }
}

void require_same_shape(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x" << b.cols();
    throw ValidationError(os.str());
  }
}

double max_abs(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

// ---------------------------------------------------------------- Vec

Vec::Vec(std::vector<double> entries) : data_(std::move(entries)) { require_finite(data_, "Vec"); }

Vec::Vec(std::initializer_list<double> entries) : data_(entries) { require_finite(data_, "Vec"); }

Vec Vec::unchecked(std::vector<double> entries) {
  Vec v;
  v.data_ = std::move(entries);
  return v;
}

double Vec::norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

double Vec::dot(const Vec& other) const {
  if (other.size() != size()) throw ValidationError("Vec::dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) s += data_[i] * other.data_[i];
  return s;
}

bool Vec::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Vec operator+(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ValidationError("Vec +: size mismatch");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return Vec::unchecked(std::move(out));
}

Vec operator-(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ValidationError("Vec -: size mismatch");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return Vec::unchecked(std::move(out));
}

Vec operator*(double s, const Vec& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = s * v[i];
  return Vec::unchecked(std::move(out));
}

// ---------------------------------------------------------------- Mat

Mat::Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    std::ostringstream os;
    os << "Mat: " << data_.size() << " entries for a " << rows_ << "x" << cols_ << " matrix";
    throw ValidationError(os.str());
  }
  require_finite(data_, "Mat");
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ValidationError("Mat: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_, "Mat");
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diag(std::span<const double> d) {
  Mat m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  require_finite(m.data_, "Mat::diag");
  return m;
}

Mat Mat::column(const Vec& v) { return Mat(v.size(), 1, v.raw()); }

Mat Mat::row(const Vec& v) { return Mat(1, v.size(), v.raw()); }

Mat Mat::transpose() const {
  Mat t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Mat::frobenius_norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

double Mat::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
  return s;
}

Vec Mat::row_vec(std::size_t r) const {
  return Vec::unchecked(std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                                            data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)));
}

Vec Mat::col_vec(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return Vec::unchecked(std::move(out));
}

double Mat::asymmetry() const {
  if (!is_square()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = r + 1; c < cols_; ++c) worst = std::max(worst, std::abs((*this)(r, c) - (*this)(c, r)));
  const double scale = frobenius_norm();
  return scale > 0.0 ? worst / scale : worst;
}

Mat Mat::symmetrized() const {
  require_square(*this, "symmetrized");
  Mat s(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) s(r, c) = 0.5 * ((*this)(r, c) + (*this)(c, r));
  return s;
}

Mat operator+(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "Mat +");
  Mat out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) + b(r, c);
  return out;
}

Mat operator-(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "Mat -");
  Mat out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) - b(r, c);
  return out;
}

Mat operator*(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "Mat *: inner dimension mismatch " << a.rows() << "x" << a.cols() << " * " << b.rows() << "x" << b.cols();
    throw ValidationError(os.str());
  }
  Mat out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double ark = a(r, k);
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += ark * b(k, c);
    }
  return out;
}

Mat operator*(double s, const Mat& m) {
  Mat out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = s * m(r, c);
  return out;
}

Vec operator*(const Mat& m, const Vec& v) {
  if (m.cols() != v.size()) throw ValidationError("Mat * Vec: dimension mismatch");
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) s += m(r, c) * v[c];
    out[r] = s;
  }
  return Vec::unchecked(std::move(out));
}

Mat block2x2(const Mat& tl, const Mat& tr, const Mat& bl, const Mat& br) {
  if (tl.rows() != tr.rows() || bl.rows() != br.rows() || tl.cols() != bl.cols() || tr.cols() != br.cols()) {
    throw ValidationError("block2x2: incompatible blocks");
  }
  const std::size_t r0 = tl.rows();
  const std::size_t c0 = tl.cols();
  Mat out(r0 + bl.rows(), c0 + tr.cols());
  auto put = [&out](const Mat& b, std::size_t ro, std::size_t co) {
    for (std::size_t r = 0; r < b.rows(); ++r)
      for (std::size_t c = 0; c < b.cols(); ++c) out(ro + r, co + c) = b(r, c);
  };
  put(tl, 0, 0);
  put(tr, 0, c0);
  put(bl, r0, 0);
  put(br, r0, c0);
  return out;
}

// ---------------------------------------------------------------- eigen

SymEigResult sym_eigenvalues(const Mat& m, const JacobiOptions& opts) {
  require_square(m, "sym_eigenvalues");
  if (m.asymmetry() > opts.symmetry_tol) {
    throw ValidationError("sym_eigenvalues: matrix is not symmetric");
  }
  const std::size_t n = m.rows();
  Mat a = m.symmetrized();
  const double scale = m.frobenius_norm();
  const double target = opts.offdiag_tol * scale;

  auto offdiag = [&a, n] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  SymEigResult res;
  double off = offdiag();
  while (off > target) {
    if (res.sweeps >= opts.max_sweeps) {
      std::ostringstream os;
      os << "sym_eigenvalues: no convergence after " << opts.max_sweeps << " sweeps (residual " << off << ")";
      throw NumericError(os.str());
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
    ++res.sweeps;
    off = offdiag();
  }
  res.max_offdiag_residual = off;
  res.eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.eigenvalues[i] = a(i, i);
  std::sort(res.eigenvalues.begin(), res.eigenvalues.end());
  return res;
}

bool is_psd(const Mat& m, double tol) { return sym_eigenvalues(m).min() >= -tol; }

Mat cholesky(const Mat& m) {
  require_square(m, "cholesky");
  if (m.asymmetry() > 1e-9) throw ValidationError("cholesky: matrix is not symmetric");
  const std::size_t n = m.rows();
  Mat l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) {
      std::ostringstream os;
      os << "cholesky: matrix is not positive definite (pivot " << j << " = " << d << ")";
      throw NumericError(os.str());
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

// ---------------------------------------------------------------- solves

namespace {

// In-place elimination on [a | b]; b has nrhs columns.
void gauss_partial_pivot(std::vector<double>& a, std::vector<double>& b, std::size_t n, std::size_t nrhs,
                         const char* what) {
  const double scale = std::max(max_abs(a), std::numeric_limits<double>::min());
  const double singular = 1e-14 * scale;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(a[r * n + col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best <= singular) {
      std::ostringstream os;
      os << what << ": singular system (pivot column " << col << ")";
      throw NumericError(os.str());
    }
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      for (std::size_t c = 0; c < nrhs; ++c) std::swap(b[piv * nrhs + c], b[col * nrhs + c]);
    }
    const double d = a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / d;
      if (f == 0.0) continue;
      a[r * n + col] = 0.0;
      for (std::size_t c = col + 1; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      for (std::size_t c = 0; c < nrhs; ++c) b[r * nrhs + c] -= f * b[col * nrhs + c];
    }
  }
  for (std::size_t rr = n; rr-- > 0;) {
    for (std::size_t c = 0; c < nrhs; ++c) {
      double s = b[rr * nrhs + c];
      for (std::size_t k = rr + 1; k < n; ++k) s -= a[rr * n + k] * b[k * nrhs + c];
      b[rr * nrhs + c] = s / a[rr * n + rr];
    }
  }
}

}  // namespace

Vec solve(const Mat& a, const Vec& b) {
  require_square(a, "solve");
  if (b.size() != a.rows()) throw ValidationError("solve: rhs size mismatch");
  std::vector<double> aa(a.entries().begin(), a.entries().end());
  std::vector<double> bb = b.raw();
  gauss_partial_pivot(aa, bb, a.rows(), 1, "solve");
  return Vec::unchecked(std::move(bb));
}

Mat solve(const Mat& a, const Mat& b) {
  require_square(a, "solve");
  if (b.rows() != a.rows()) throw ValidationError("solve: rhs rows mismatch");
  std::vector<double> aa(a.entries().begin(), a.entries().end());
  std::vector<double> bb(b.entries().begin(), b.entries().end());
  gauss_partial_pivot(aa, bb, a.rows(), b.cols(), "solve");
  return Mat(b.rows(), b.cols(), std::move(bb));
}

namespace {
double norm1(const Mat& a) {
  double best = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) s += std::abs(a(r, c));
    best = std::max(best, s);
  }
  return best;
}
}  // namespace

Mat inverse(const Mat& a, double max_condition) {
  require_square(a, "inverse");
  Mat inv = solve(a, Mat::identity(a.rows()));
  const double cond = norm1(a) * norm1(inv);
  if (!(cond <= max_condition)) {
    std::ostringstream os;
    os << "inverse: matrix is ill-conditioned (cond_1 ~ " << cond << ")";
    throw NumericError(os.str());
  }
  return inv;
}

double condition_1norm(const Mat& a) {
  try {
    return norm1(a) * norm1(solve(a, Mat::identity(a.rows())));
  } catch (const NumericError&) {
    return std::numeric_limits<double>::infinity();
  }
}

std::size_t numeric_rank(const Mat& a, double rel_tol) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  std::vector<double> m(a.entries().begin(), a.entries().end());
  const double threshold = rel_tol * std::max(max_abs(m), std::numeric_limits<double>::min());
  std::size_t rank = 0;
  std::vector<bool> used(rows, false);
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rows;
    double best = threshold;
    for (std::size_t r = 0; r < rows; ++r) {
      if (!used[r] && std::abs(m[r * cols + c]) > best) {
        best = std::abs(m[r * cols + c]);
        piv = r;
      }
    }
    if (piv == rows) continue;
    used[piv] = true;
    ++rank;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == piv) continue;
      const double f = m[r * cols + c] / m[piv * cols + c];
      for (std::size_t k = c; k < cols; ++k) m[r * cols + k] -= f * m[piv * cols + k];
    }
  }
  return rank;
}

// ---------------------------------------------------------------- Stein

Mat solve_stein(const Mat& f, double beta, const Mat& rhs) {
  require_square(f, "solve_stein");
  require_same_shape(f, rhs, "solve_stein");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("solve_stein: beta must be positive");
  if (rhs.asymmetry() > 1e-9) throw ValidationError("solve_stein: rhs must be symmetric");
  const std::size_t n = f.rows();
  const std::size_t nn = n * n;
  // Unknown vec(P) in row-major order: index i*n + j.
  std::vector<double> sys(nn * nn, 0.0);
  std::vector<double> b(nn, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t row = i * n + j;
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) sys[row * nn + k * n + l] += f(k, i) * f(l, j);
      sys[row * nn + row] -= beta;
      b[row] = -rhs(i, j);
    }
  }
  gauss_partial_pivot(sys, b, nn, 1, "solve_stein");
  Mat p = Mat(n, n, std::move(b)).symmetrized();
  const double res = stein_residual(f, beta, p, rhs);
  if (res > 1e-8 * rhs.frobenius_norm()) {
    std::ostringstream os;
    os << "solve_stein: residual " << res << " exceeds tolerance";
    throw NumericError(os.str());
  }
  return p;
}

double stein_residual(const Mat& f, double beta, const Mat& p, const Mat& rhs) {
  return (f.transpose() * p * f - beta * p + rhs).frobenius_norm();
}

std::vector<std::complex<double>> small_eigenvalues(const Mat& f) {
  require_square(f, "small_eigenvalues");
  if (f.rows() == 1) return {std::complex<double>(f(0, 0), 0.0)};
  if (f.rows() != 2) throw ValidationError("small_eigenvalues: only n <= 2 supported");
  const double half_tr = 0.5 * (f(0, 0) + f(1, 1));
  const double det = f(0, 0) * f(1, 1) - f(0, 1) * f(1, 0);
  const double disc = half_tr * half_tr - det;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    return {{half_tr - r, 0.0}, {half_tr + r, 0.0}};
  }
  const double im = std::sqrt(-disc);
  return {{half_tr, -im}, {half_tr, im}};
}

bool spectral_radius_below(const Mat& f, double bound) {
  require_square(f, "spectral_radius_below");
  if (f.rows() <= 2) {
    double radius = 0.0;
    for (const auto& z : small_eigenvalues(f)) radius = std::max(radius, std::abs(z));
    return radius < bound;
  }
  // ||F^64||^(1/64) via six scaled squarings.
  Mat g = f;
  double log_scale = 0.0;
  for (int i = 0; i < 6; ++i) {
    g = g * g;
    log_scale *= 2.0;
    const double c = g.frobenius_norm();
    if (c == 0.0) return bound > 0.0;
    g = (1.0 / c) * g;
    log_scale += std::log(c);
  }
  return std::exp(log_scale / 64.0) < bound - 1e-6;
}

// ---------------------------------------------------------------- poles

std::vector<double> poly_from_roots(std::span<const std::complex<double>> roots) {
  std::vector<std::complex<double>> c{1.0};  // highest degree first
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= r * c[i];
    }
    c = std::move(next);
  }
  std::vector<double> out;
  out.reserve(roots.size());
  double scale = 1.0;
  for (const auto& z : c) scale = std::max(scale, std::abs(z));
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (std::abs(c[i].imag()) > 1e-9 * scale) {
      throw ValidationError("poly_from_roots: roots are not closed under conjugation");
    }
    out.push_back(c[i].real());
  }
  return out;
}

Vec pole_place_si(const Mat& a, const Vec& b, std::span<const std::complex<double>> targets) {
  require_square(a, "pole_place_si");
  const std::size_t n = a.rows();
  if (b.size() != n) throw ValidationError("pole_place_si: b must have n entries");
  if (targets.size() != n) throw ValidationError("pole_place_si: need exactly n target poles");
  require_finite(b.values(), "pole_place_si");

  // Controllability matrix [b, Ab, ..., A^{n-1} b] (columns).
  Mat ctrb(n, n);
  Vec col = b;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) ctrb(i, j) = col[i];
    col = a * col;
  }
  if (numeric_rank(ctrb) < n) throw ValidationError("pole_place_si: (A, b) is not controllable");

  const std::vector<double> coeffs = poly_from_roots(targets);
  // phi(A) = A^n + c_{n-1} A^{n-1} + ... + c_0 I (Horner).
  Mat phi = Mat::identity(n);
  for (double c : coeffs) phi = phi * a + c * Mat::identity(n);

  // k = e_n^T C^{-1} phi(A); solve C^T y = e_n.
  Vec en(n);
  en[n - 1] = 1.0;
  const Vec y = solve(ctrb.transpose(), en);
  std::vector<double> k(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) k[j] += y[i] * phi(i, j);
  return Vec(std::move(k));
}

}  // namespace netloss
