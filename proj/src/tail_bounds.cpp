#include "netloss/tail_bounds.hpp"

#include <cmath>
#include <sstream>

#include "netloss/errors.hpp"
#include "netloss/parallel.hpp"

namespace netloss {

namespace {

void require_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream os;
    os << what << " must lie in [0, 1], got " << x;
    throw ValidationError(os.str());
  }
}

}  // namespace

void validate(const TailBoundSpec& s) {
  if (!(s.p_tilde > 0.0 && s.p_tilde < 1.0)) throw ValidationError("tail bound: p_tilde must lie in (0, 1)");
  if (!(s.w_tilde > 0.0 && s.w_tilde <= 1.0)) throw ValidationError("tail bound: w_tilde must lie in (0, 1]");
  if (!(s.rho > s.p_tilde * s.w_tilde && s.rho < s.w_tilde)) {
    std::ostringstream os;
    os << "tail bound: rho = " << s.rho << " outside the window (" << s.p_tilde * s.w_tilde << ", " << s.w_tilde
       << ")";
    throw ValidationError(os.str());
  }
}

double chernoff_phi(const TailBoundSpec& s) {
  validate(s);
  const double r = s.rho / s.w_tilde;
  return r * (1.0 - s.p_tilde) / (s.p_tilde * (1.0 - r));
}

double psi_k(const TailBoundSpec& s, double sigma_tilde_k, std::uint64_t k) {
  require_unit(sigma_tilde_k, "sigma_tilde_k");
  if (k < 1) throw ValidationError("psi_k: k must be >= 1");
  const double phi = chernoff_phi(s);
  const double denom = (phi - 1.0) * s.p_tilde;
  const double kd = static_cast<double>(k);
  const double log_g = std::log1p(denom);  // ln((phi-1)p + 1)
  if (k <= 200) {
    const double growth = std::pow(1.0 + denom, s.w_tilde * kd);
    const double direct = std::pow(phi, 1.0 - s.rho * kd) * (growth - 1.0) / denom;
    // near rho -> w the factors under/overflow; the true value is > 0
    if (std::isfinite(direct) && direct > 0.0) return sigma_tilde_k + direct;
  }
  const double wk_log_g = s.w_tilde * kd * log_g;
  const double log_lead = (1.0 - s.rho * kd) * std::log(phi) + wk_log_g;
  return sigma_tilde_k + std::exp(log_lead) * (-std::expm1(-wk_log_g)) / denom;
}

std::vector<std::vector<double>> exact_count_distributions(const MarkovLossModel& model, unsigned kmax) {
  if (kmax > 20) throw ValidationError("exact oracle: k > 20 refused (2^k paths)");
  std::vector<std::vector<double>> dist(kmax + 1);
  for (unsigned k = 0; k <= kmax; ++k) dist[k].assign(k + 1, 0.0);

  // Depth-first walk over every sequence; each prefix contributes its path
  // probability to the count distribution at its own length.
  struct Walker {
    const MarkovLossModel& model;
    unsigned kmax;
    std::vector<std::vector<double>>& dist;

    void visit(unsigned depth, int prev, unsigned count, double prob) {
      dist[depth][count] += prob;
      if (depth == kmax || prob == 0.0) return;
      const double p_fail = model.fail_probability(depth, prev);
      visit(depth + 1, 1, count + 1, prob * p_fail);
      visit(depth + 1, 0, count, prob * (1.0 - p_fail));
    }
  };
  Walker{model, kmax, dist}.visit(0, -1, 0, 1.0);
  return dist;
}

double tail_probability(const std::vector<double>& dist_k, double rho) {
  const double k = static_cast<double>(dist_k.size() - 1);
  double threshold = rho * k;
  const double nearest = std::round(threshold);
  if (std::abs(threshold - nearest) <= 1e-9 * std::max(1.0, std::abs(threshold))) threshold = nearest;
  double tail = 0.0;
  for (std::size_t j = 0; j < dist_k.size(); ++j) {
    if (static_cast<double>(j) > threshold) tail += dist_k[j];
  }
  return tail;
}

double exact_tail_oracle(const MarkovLossModel& model, unsigned k, double rho) {
  if (k > 20) throw ValidationError("exact oracle: k > 20 refused (2^k paths)");
  return tail_probability(exact_count_distributions(model, k)[k], rho);
}

double jamming_tail_bound(double kappa, double tau, double rho_m, std::uint64_t k) {
  if (!(tau > 1.0) || !std::isfinite(tau)) throw ValidationError("jamming bound: tau must be > 1");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ValidationError("jamming bound: kappa must be >= 0");
  if (!(rho_m > 1.0 / tau && rho_m < 1.0)) throw ValidationError("jamming bound: rho_m must lie in (1/tau, 1)");
  if (k < 1) throw ValidationError("jamming bound: k must be >= 1");
  return std::exp(kappa - (rho_m - 1.0 / tau) * static_cast<double>(k));
}

std::string_view to_string(RangeSource s) {
  switch (s) {
    case RangeSource::rho_independent: return "rho_independent";
    case RangeSource::rho_dependent: return "rho_dependent";
    case RangeSource::sigma_independent: return "sigma_independent";
    case RangeSource::sigma_dependent: return "sigma_dependent";
    case RangeSource::sigma_exclusive: return "sigma_exclusive";
  }
  return "unknown";
}

namespace {

RatioRange upper_ratio_range(double lower, RangeSource src) {
  if (lower >= 1.0) return RatioRange{RangeKind::trivial_one, 1.0, 1.0, src};
  return RatioRange{RangeKind::open_interval, lower, 1.0, src};
}

RatioRange lower_ratio_range(double upper, RangeSource src) {
  if (!(upper > 0.0)) throw ValidationError("ratio range: the admissible interval is empty");
  return RatioRange{RangeKind::open_interval, 0.0, std::min(upper, 1.0), src};
}

}  // namespace

RatioRange rho_range_independent(double p1, double p0, double rho_m) {
  require_unit(p1, "p1");
  require_unit(p0, "p0");
  require_unit(rho_m, "rho_m");
  return upper_ratio_range(p1 + p0 * rho_m, RangeSource::rho_independent);
}

RatioRange rho_range_dependent(double p1, double rho_m) {
  require_unit(p1, "p1");
  require_unit(rho_m, "rho_m");
  return upper_ratio_range(p1 + rho_m, RangeSource::rho_dependent);
}

RatioRange sigma_range_independent(double p0, double sigma_m) {
  require_unit(p0, "p0");
  require_unit(sigma_m, "sigma_m");
  return lower_ratio_range(1.0 - p0 * (1.0 - sigma_m), RangeSource::sigma_independent);
}

RatioRange sigma_range_dependent(double p0, double sigma_m) {
  require_unit(p0, "p0");
  require_unit(sigma_m, "sigma_m");
  return lower_ratio_range(std::max(1.0 - p0, sigma_m), RangeSource::sigma_dependent);
}

RatioRange sigma_range_exclusive(double p0, double sigma_m) {
  require_unit(p0, "p0");
  require_unit(sigma_m, "sigma_m");
  const double upper = 1.0 - p0 + sigma_m;
  if (upper > 1.0) {
    std::ostringstream os;
    os << "sigma range: 1 - p0 + sigma_m = " << upper
       << " > 1, so the exclusive-loss range does not apply; use sigma_range_dependent";
    throw ValidationError(os.str());
  }
  return lower_ratio_range(upper, RangeSource::sigma_exclusive);
}

MomentCheck moment_bound_check(const MarkovLossModel& model, double phi, const std::vector<std::uint64_t>& indices,
                               std::uint64_t paths, std::uint64_t seed) {
  if (indices.empty()) throw ValidationError("moment check: need at least one index");
  for (std::size_t j = 1; j < indices.size(); ++j) {
    if (indices[j] <= indices[j - 1]) throw ValidationError("moment check: indices must be strictly increasing");
  }
  if (!(phi > 1.0) || !std::isfinite(phi)) throw ValidationError("moment check: phi must be > 1");
  if (paths < 2) throw ValidationError("moment check: need at least two paths");

  const double p1 = model.p1_bound();
  const double s = static_cast<double>(indices.size());
  MomentCheck out;
  out.paths = paths;
  out.bound = phi * std::pow((phi - 1.0) * p1 + 1.0, s - 1.0);

  // Fixed-size chunks reduced in chunk order keep the sum independent of
  // the number of workers.
  constexpr std::uint64_t kChunk = 4096;
  const std::uint64_t chunks = (paths + kChunk - 1) / kChunk;
  std::vector<double> sums(chunks, 0.0);
  std::vector<double> sq_sums(chunks, 0.0);
  const std::uint64_t last = indices.back();
  parallel_for(chunks, [&](std::size_t c) {
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min(paths, begin + kChunk);
    double sum = 0.0;
    double sq = 0.0;
    for (std::uint64_t p = begin; p < end; ++p) {
      Rng rng(path_seed(seed, p));
      int prev = -1;
      unsigned hits = 0;
      std::size_t next_idx = 0;
      for (std::uint64_t i = 0; i <= last; ++i) {
        prev = markov_next(model, prev, i, rng);
        if (i == indices[next_idx]) {
          hits += static_cast<unsigned>(prev);
          ++next_idx;
        }
      }
      const double v = std::pow(phi, hits);
      sum += v;
      sq += v * v;
    }
    sums[c] = sum;
    sq_sums[c] = sq;
  });
  double sum = 0.0;
  double sq = 0.0;
  for (std::uint64_t c = 0; c < chunks; ++c) {
    sum += sums[c];
    sq += sq_sums[c];
  }
  const double n = static_cast<double>(paths);
  out.empirical = sum / n;
  const double var = std::max(0.0, (sq - n * out.empirical * out.empirical) / (n - 1.0));
  out.std_error = std::sqrt(var / n);
  return out;
}

}  // namespace netloss
