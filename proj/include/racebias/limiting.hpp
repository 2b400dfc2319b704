#pragma once

// The limiting distribution mu of E(y) under GRH and LI:
//   mu_hat(xi) = exp(-i <t,r> xi) prod_n J0(2 |b_n| xi),
// its density by Fourier inversion, delta = mu(0, inf), the random model
// g^(T) on the torus, and the threshold/envelope formulas built on top.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "racebias/explicit.hpp"
#include "racebias/special.hpp"
#include "racebias/wasserstein.hpp"
#include "racebias/zeros.hpp"

namespace racebias {

inline constexpr double kMuHatThreshold = 1e-12;
inline constexpr std::size_t kMaxXiPoints = std::size_t{1} << 18;
inline constexpr std::size_t kDensityGridPoints = 2049;
inline constexpr double kGridSigmas = 12.0;
inline constexpr std::size_t kMonteCarloSamples = 10'000'000;
inline constexpr unsigned kCosineTableBits = 16;

/// -a_n cos(theta_n) summands plus a centred Gaussian of variance tail_variance.
struct LimitModel {
  double constant = 0.0;           // -<t, r>
  std::vector<double> amplitudes;  // a_n = 2 |b_n|
  double tail_variance = 0.0;
  double T = 0.0;

  double mean() const { return constant; }
  double truncated_variance() const {
    CompensatedSum s;
    for (double a : amplitudes) s += 0.5 * a * a;
    return s.value();
  }
  double variance() const { return truncated_variance() + tail_variance; }

  LimitModel negated() const {
    LimitModel m = *this;
    m.constant = -constant;
    return m;
  }
  LimitModel first_terms(std::size_t k) const {
    LimitModel m = *this;
    m.amplitudes.resize(std::min(k, amplitudes.size()));
    return m;
  }
};

/// V_tail = 2 sum_chi |<t,chi>|^2 sum_{gamma > T} 1/(1/4+gamma^2), with the
/// zero counting measure replaced by its Riemann-von Mangoldt density.
inline double tail_variance(const Spectrum &sp) {
  CompensatedSum s;
  for (const auto &l : sp)
    s += 2.0 * std::norm(l.coefficient) *
         detail::rvm_tail(static_cast<double>(l.conductor), l.coverage, [](double u) { return 1.0 / (0.25 + u * u); });
  return s.value();
}

inline LimitModel limit_model(const TruncatedModel &m, double tail_var = 0.0) {
  LimitModel out;
  out.constant = m.constant();
  out.T = m.T();
  out.tail_variance = tail_var;
  out.amplitudes.reserve(m.terms().size());
  for (const auto &term : m.terms()) out.amplitudes.push_back(2.0 * std::abs(term.b));
  return out;
}

inline void require_limit_coverage(double T_max) {
  if (!(T_max >= kMinimumCoverage))
    fail(ErrorKind::InsufficientCoverage,
         "limiting distribution needs zeros up to T >= 100, got " + std::to_string(T_max));
}

inline LimitModel limit_model(const RaceWeight &t, const ZeroStore &store, double T_max, bool with_tail = true) {
  require_limit_coverage(T_max);
  Spectrum sp;
  try {
    sp = spectrum(store, t, T_max);
  } catch (const Error &e) {
    fail(ErrorKind::InsufficientCoverage, e.what());
  }
  return limit_model(build_model(t, store, T_max), with_tail ? tail_variance(sp) : 0.0);
}

inline cplx mu_hat(const LimitModel &m, double xi) {
  double prod = std::exp(-0.5 * xi * xi * m.tail_variance);
  for (double a : m.amplitudes) prod *= bessel_j0(a * xi);
  return std::polar(prod, m.constant * xi);
}

inline cplx mu_hat(const RaceWeight &t, const ZeroStore &store, double T_max, double xi) {
  return mu_hat(limit_model(t, store, T_max), xi);
}

namespace detail {

// Upper envelope of |mu_hat| from |J0(x)| <= min(1, sqrt(2 / (pi |x|))).
// Non-increasing in |xi|. Returns the envelope and the number of factors
// that are below one.
struct MuHatEnvelope {
  double bound;
  double bessel_part;
  std::size_t active;
};

inline MuHatEnvelope mu_hat_envelope(const LimitModel &m, double xi) {
  double log_b = 0.0;
  std::size_t active = 0;
  for (double a : m.amplitudes) {
    const double x = std::abs(a * xi);
    if (x > 2.0 / kPi) {
      log_b += 0.5 * std::log(2.0 / (kPi * x));
      ++active;
    }
  }
  const double bessel = std::exp(log_b);
  return {bessel * std::exp(-0.5 * xi * xi * m.tail_variance), bessel, active};
}

}  // namespace detail

/// mu_hat sampled at k h for k = 0..K, K the first index whose envelope is
/// below the threshold.
struct XiGrid {
  double step = 0.0;
  std::vector<cplx> values;
  double end_envelope = 0.0;

  double end() const { return step * static_cast<double>(values.size() - 1); }
};

inline XiGrid xi_grid(const LimitModel &m, double step, double threshold = kMuHatThreshold,
                      std::size_t max_points = kMaxXiPoints) {
  XiGrid g;
  g.step = step;
  for (std::size_t k = 0;; ++k) {
    const double xi = step * static_cast<double>(k);
    g.values.push_back(mu_hat(m, xi));
    const auto env = detail::mu_hat_envelope(m, xi);
    if (k > 0 && env.bound < threshold) {
      g.end_envelope = env.bound;
      return g;
    }
    if (k + 1 >= max_points) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "mu_hat has not decayed by xi = %.6g: |mu_hat| = %.3e, envelope %.3e", xi,
                    std::abs(g.values.back()), env.bound);
      fail(ErrorKind::GridInsufficient, buf);
    }
  }
}

struct LimitingDistribution {
  std::vector<double> x;
  std::vector<double> f;
  double delta = 0.0;               // mu(0, inf) from the density
  double delta_gil_pelaez = 0.0;    // 1/2 + (1/pi) int_0^inf Im mu_hat / xi
  double mean = 0.0;                // closed form -<t, r>
  double variance = 0.0;            // closed form plus tail
  double mean_quadrature = 0.0;
  double variance_quadrature = 0.0;
  double integral = 0.0;            // trapezoid of f over the grid
  double bias = 0.0;                // mean / sqrt(variance)
  double f_max = 0.0;
  double xi_step = 0.0;
  double xi_end = 0.0;

  void write_csv(std::ostream &os) const {
    char buf[64];
    os << "x,f\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", x[i], f[i]);
      os << buf;
    }
  }
};

namespace detail {

inline double gaussian_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace detail

inline LimitingDistribution invert_density(const LimitModel &m, std::size_t grid_points = kDensityGridPoints) {
  const double var = m.variance();
  if (!(var > 0.0)) fail(ErrorKind::InvalidMeasure, "limiting distribution has zero variance");
  const double sd = std::sqrt(var), mu = m.mean();
  const double R = std::max(kGridSigmas * sd, std::abs(mu) + 4.0 * sd);
  const double lo = mu - R, hi = mu + R;
  // period of the discrete inversion equals the x-range
  const double h = 2.0 * kPi / (hi - lo);
  const XiGrid g = xi_grid(m, h);
  const std::size_t K = g.values.size();

  LimitingDistribution d;
  d.xi_step = h;
  d.xi_end = g.end();
  d.mean = mu;
  d.variance = var;
  d.bias = mu / sd;

  d.x.resize(grid_points);
  d.f.resize(grid_points);
  const double dx = (hi - lo) / static_cast<double>(grid_points - 1);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = lo + dx * static_cast<double>(i);
    CompensatedSum s;
    for (std::size_t k = 1; k < K; ++k) {
      const double a = h * static_cast<double>(k) * x;
      s += g.values[k].real() * std::cos(a) + g.values[k].imag() * std::sin(a);
    }
    d.x[i] = x;
    d.f[i] = h / (2.0 * kPi) * (1.0 + 2.0 * s.value());
    d.f_max = std::max(d.f_max, d.f[i]);
  }

  // trapezoid moments
  CompensatedSum m0, m1, m2;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double w = (i == 0 || i + 1 == grid_points) ? 0.5 * dx : dx;
    m0 += w * d.f[i];
    m1 += w * d.f[i] * d.x[i];
    m2 += w * d.f[i] * d.x[i] * d.x[i];
  }
  d.integral = m0.value();
  d.mean_quadrature = m1.value() / d.integral;
  d.variance_quadrature = m2.value() / d.integral - d.mean_quadrature * d.mean_quadrature;

  // delta: the Fourier series integrated exactly over [0, hi], plus a
  // Gaussian estimate of the mass beyond the grid
  if (lo >= 0.0) {
    d.delta = 1.0 - detail::gaussian_upper_tail((mu - lo) / sd);
  } else if (hi <= 0.0) {
    d.delta = detail::gaussian_upper_tail((hi - mu) / sd);
  } else {
    CompensatedSum s;
    for (std::size_t k = 1; k < K; ++k) {
      const double w = h * static_cast<double>(k);
      // int_0^hi Re(mu_k e^{-i w x}) dx
      const cplx prim = (std::exp(cplx(0.0, -w * hi)) - 1.0) / cplx(0.0, -w);
      s += (g.values[k] * prim).real();
    }
    d.delta = h / (2.0 * kPi) * (hi + 2.0 * s.value()) + detail::gaussian_upper_tail((hi - mu) / sd);
  }

  // Gil-Pelaez on the same grid; the integrand is even and smooth at 0
  CompensatedSum gp;
  gp += 0.5 * mu;
  for (std::size_t k = 1; k < K; ++k) gp += g.values[k].imag() / (h * static_cast<double>(k));
  d.delta_gil_pelaez = 0.5 + h * gp.value() / kPi;
  return d;
}

inline LimitingDistribution invert_density(const RaceWeight &t, const ZeroStore &store, double T_max,
                                           std::size_t grid_points = kDensityGridPoints) {
  return invert_density(limit_model(t, store, T_max), grid_points);
}

struct MuHatL1 {
  double value;        // int_R |mu_hat|
  double tail;         // bound on the part beyond the grid, included in value
  double xi_end;
  double density_bound;  // value / 2 pi >= sup f
};

inline MuHatL1 mu_hat_l1(const LimitModel &m, double step = 0.0) {
  const double sd = std::sqrt(m.variance());
  if (!(sd > 0.0)) fail(ErrorKind::InvalidMeasure, "limiting distribution has zero variance");
  if (step <= 0.0) step = 2.0 * kPi / (2.0 * std::max(kGridSigmas * sd, std::abs(m.mean()) + 4.0 * sd)) / 4.0;
  const XiGrid g = xi_grid(m, step);
  CompensatedSum s;
  for (std::size_t k = 0; k < g.values.size(); ++k)
    s += (k == 0 || k + 1 == g.values.size() ? 0.5 : 1.0) * std::abs(g.values[k]);
  const double xe = g.end();
  const auto env = detail::mu_hat_envelope(m, xe);
  // beyond xe the envelope is at most bessel(xe) (xe/xi)^{active/2} exp(-xi^2 V / 2)
  double tail = std::numeric_limits<double>::infinity();
  if (env.active > 2) tail = env.bound * xe / (0.5 * static_cast<double>(env.active) - 1.0);
  if (m.tail_variance > 0.0)
    tail = std::min(tail, env.bessel_part * std::sqrt(kPi / (2.0 * m.tail_variance)) *
                              std::erfc(xe * std::sqrt(0.5 * m.tail_variance)));
  if (!std::isfinite(tail)) fail(ErrorKind::GridInsufficient, "mu_hat is not integrable");
  const double value = 2.0 * (step * s.value() + tail);
  return {value, 2.0 * tail, xe, value / (2.0 * kPi)};
}

inline MuHatL1 mu_hat_l1(const RaceWeight &t, const ZeroStore &store, double T_max) {
  return mu_hat_l1(limit_model(t, store, T_max));
}

struct LipschitzD {
  double truncated;  // 2 (sum_{gamma <= T} |<t,chi>|^2 / (1/4 + gamma^2))^{1/2}
  double with_tail;
};

inline LipschitzD lipschitz_constant_D(const RaceWeight &t, const ZeroStore &store, double T) {
  const auto sp = spectrum(store, t, T);
  CompensatedSum s;
  for (const auto &l : sp)
    for (double g : l.ordinates) s += std::norm(l.coefficient) / (0.25 + g * g);
  const double trunc = s.value();
  return {2.0 * std::sqrt(trunc), 2.0 * std::sqrt(trunc + 0.5 * tail_variance(sp))};
}

inline LipschitzD lipschitz_constant_D(const LimitModel &m) {
  CompensatedSum s;
  for (double a : m.amplitudes) s += a * a;
  return {std::sqrt(s.value()), std::sqrt(s.value() + 2.0 * m.tail_variance)};
}

/// g^(T)(z) = -<t,r> - 2 Re sum_n b_n z_n.
inline double random_model_value(const TruncatedModel &m, const std::vector<cplx> &z) {
  if (z.size() != m.terms().size()) fail(ErrorKind::Validation, "phase vector has the wrong dimension");
  CompensatedSum s;
  for (std::size_t n = 0; n < z.size(); ++n) s += (m.terms()[n].b * z[n]).real();
  return m.constant() - 2.0 * s.value();
}

struct MonteCarloDelta {
  double delta;
  double std_error;
  std::size_t samples;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// P(g > 0) for independent uniform phases. Phases are drawn from the
/// 2^16-th roots of unity; each chunk of samples has its own generator
/// seeded from (seed, chunk), so the result does not depend on scheduling.
inline MonteCarloDelta random_model_delta(const LimitModel &m, std::size_t samples = kMonteCarloSamples,
                                          std::uint64_t seed = 20240601, bool include_tail = true) {
  constexpr std::size_t M = std::size_t{1} << kCosineTableBits;
  constexpr std::size_t chunk = 1 << 16;
  static const std::vector<double> cos_table = [] {
    std::vector<double> c(M);
    for (std::size_t j = 0; j < M; ++j) c[j] = std::cos(2.0 * kPi * static_cast<double>(j) / static_cast<double>(M));
    return c;
  }();
  const std::size_t N = m.amplitudes.size();
  const double tail_sd = include_tail ? std::sqrt(m.tail_variance) : 0.0;
  std::size_t positive = 0;
  for (std::size_t c0 = 0, ci = 0; c0 < samples; c0 += chunk, ++ci) {
    std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(ci)));
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t c1 = std::min(samples, c0 + chunk);
    for (std::size_t s = c0; s < c1; ++s) {
      double v = m.constant;
      std::uint64_t bits = 0;
      for (std::size_t n = 0; n < N; ++n) {
        if (n % 4 == 0) bits = rng();
        v -= m.amplitudes[n] * cos_table[bits & (M - 1)];
        bits >>= kCosineTableBits;
      }
      if (tail_sd > 0.0) v += tail_sd * normal(rng);
      positive += v > 0.0;
    }
  }
  const double p = static_cast<double>(positive) / static_cast<double>(samples);
  return {p, std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(samples)) / static_cast<double>(samples)),
          samples};
}

struct EliThreshold {
  double support;  // |supp t_hat|
  double log_k;
  double A;
  double L;
  double log_X0;  // (L S log k)^A log(S log k)
  double X0;      // may be +inf

  /// Rate envelope C^{3/4} (log C)^{1/4A} (log log X) (log X)^{-1/4A}, with
  /// log C floored at 1.
  static double envelope(double C, double A, double X) {
    const double lc = std::max(std::log(C), 1.0);
    const double lX = std::log(X);
    return std::pow(C, 0.75) * std::pow(lc, 0.25 / A) * std::log(lX) * std::pow(lX, -0.25 / A);
  }
};

inline EliThreshold eli_threshold(double support, double log_k, double A, double L) {
  if (!(A > 1.0)) fail(ErrorKind::InvalidExponent, "ELI exponent A must exceed 1");
  if (!(L > 0.0)) fail(ErrorKind::InvalidExponent, "threshold constant L must be positive");
  const double base = support * log_k;
  EliThreshold r{support, log_k, A, L, 0.0, 0.0};
  r.log_X0 = std::pow(L * base, A) * std::log(base);
  r.X0 = std::exp(r.log_X0);
  return r;
}

inline EliThreshold eli_threshold(const RaceWeight &t, double A, double L) {
  const auto st = weight_stats(t);
  return eli_threshold(static_cast<double>(t.support().size()), st.log_k, A, L);
}

struct BiasSummary {
  double mean;
  double variance;
  double variance_truncated;
  double bias;              // mean / sqrt(variance)
  double log_C;
  double skewes_envelope;   // K (B^2 + log C), bounds log log log x(t)
  double delta_lower_shape; // exp(-c1 B^2), meaningful when mean <= 0
};

inline BiasSummary bias_summary(const RaceWeight &t, const ZeroStore &store, double T = kMinimumCoverage,
                                double K = 1.0, double c1 = 1.0) {
  const auto m = limit_model(t, store, T);
  BiasSummary b{};
  b.mean = m.mean();
  b.variance = m.variance();
  b.variance_truncated = m.truncated_variance();
  if (!(b.variance > 0.0)) fail(ErrorKind::InvalidMeasure, "zero variance for a non-zero weight");
  b.bias = b.mean / std::sqrt(b.variance);
  b.log_C = std::log(weight_stats(t).C);
  b.skewes_envelope = K * (b.bias * b.bias + b.log_C);
  b.delta_lower_shape = std::exp(-c1 * b.bias * b.bias);
  return b;
}

/// Value distribution of E^(T)(y) for y on a uniform grid of [y0, Y].
inline EmpiricalMeasure model_window_measure(const TruncatedModel &m, double y0, double Y, double step) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>((Y - y0) / step) + 2);
  for (double y = y0; y <= Y; y += step) v.push_back(m(y));
  return EmpiricalMeasure(v);
}

}  // namespace racebias
