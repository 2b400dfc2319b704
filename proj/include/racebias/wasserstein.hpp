#pragma once

// Wasserstein-1 on the line, on the circle and (through bounds) on tori:
// exact 1-D transport, the quantitative Kronecker-Weyl upper bound, duality
// lower bounds from explicit 1-Lipschitz test functions, and the h_L^+-
// bracketing of a half-line mass.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <vector>

#include "racebias/arith.hpp"
#include "racebias/error.hpp"

namespace racebias {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 6.28318530717958647692;

/// Finite probability measure on the line (or on [0, 2pi) for circle use):
/// sorted atoms with positive weights summing to one.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;

  /// Equal-weight samples.
  explicit EmpiricalMeasure(std::vector<double> samples) {
    if (samples.empty()) fail(ErrorKind::InvalidMeasure, "empirical measure needs at least one sample");
    std::sort(samples.begin(), samples.end());
    const double w = 1.0 / static_cast<double>(samples.size());
    for (double x : samples) push(x, w);
  }

  /// Weighted atoms; weights are normalised to total mass one.
  EmpiricalMeasure(const std::vector<double> &points, const std::vector<double> &weights) {
    if (points.empty() || points.size() != weights.size())
      fail(ErrorKind::InvalidMeasure, "weighted measure needs matching non-empty points and weights");
    std::vector<std::size_t> idx(points.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorKind::InvalidMeasure, "weights must be non-negative");
      total += w;
    }
    if (!(total > 0.0)) fail(ErrorKind::InvalidMeasure, "total mass must be positive");
    for (std::size_t i : idx)
      if (weights[i] > 0.0) push(points[i], weights[i] / total);
  }

  /// Step CDF given by knots and the CDF value just after each knot.
  static EmpiricalMeasure from_cdf(const std::vector<double> &knots, const std::vector<double> &cdf) {
    if (knots.empty() || knots.size() != cdf.size()) fail(ErrorKind::InvalidMeasure, "cdf needs matching knots");
    std::vector<double> w(knots.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (cdf[i] < prev - 1e-15 || (i && knots[i] <= knots[i - 1]))
        fail(ErrorKind::InvalidMeasure, "cdf must be nondecreasing on increasing knots");
      w[i] = std::max(0.0, cdf[i] - prev);
      prev = cdf[i];
    }
    if (std::abs(prev - 1.0) > 1e-9) fail(ErrorKind::InvalidMeasure, "cdf must end at 1");
    return EmpiricalMeasure(knots, w);
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<double> &points() const { return points_; }
  const std::vector<double> &weights() const { return weights_; }

  /// nu(0, infinity).
  double positive_mass() const {
    CompensatedSum s;
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (points_[i] > 0.0) s += weights_[i];
    return s.value();
  }

  template <class F>
  EmpiricalMeasure pushforward(F &&f) const {
    std::vector<double> p(points_.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = f(points_[i]);
    return EmpiricalMeasure(p, weights_);
  }

 private:
  void push(double x, double w) {
    if (!std::isfinite(x)) fail(ErrorKind::InvalidMeasure, "atoms must be finite");
    if (!points_.empty() && points_.back() == x) {
      weights_.back() += w;
      return;
    }
    points_.push_back(x);
    weights_.push_back(w);
  }

  std::vector<double> points_;
  std::vector<double> weights_;
};

namespace detail {

struct CdfSegment {
  double length;
  double diff;  // F_a - F_b on the segment
};

// Segments of [lo, hi] on which F_a - F_b is constant.
inline std::vector<CdfSegment> cdf_difference(const EmpiricalMeasure &a, const EmpiricalMeasure &b, double lo, double hi) {
  std::vector<CdfSegment> segs;
  std::size_t i = 0, j = 0;
  double Fa = 0.0, Fb = 0.0, x = lo;
  const auto &pa = a.points(), &pb = b.points();
  while (i < pa.size() && pa[i] <= lo) Fa += a.weights()[i++];
  while (j < pb.size() && pb[j] <= lo) Fb += b.weights()[j++];
  while (x < hi) {
    double next = hi;
    if (i < pa.size()) next = std::min(next, pa[i]);
    if (j < pb.size()) next = std::min(next, pb[j]);
    if (next > x) segs.push_back({next - x, Fa - Fb});
    x = next;
    while (i < pa.size() && pa[i] <= x) Fa += a.weights()[i++];
    while (j < pb.size() && pb[j] <= x) Fb += b.weights()[j++];
  }
  return segs;
}

inline void require_nonempty(const EmpiricalMeasure &a, const EmpiricalMeasure &b) {
  if (a.empty() || b.empty()) fail(ErrorKind::InvalidMeasure, "Wasserstein distance of an empty measure");
}

}  // namespace detail

/// W1 on the line: integral of |F_a - F_b|.
inline double w1_line(const EmpiricalMeasure &a, const EmpiricalMeasure &b) {
  detail::require_nonempty(a, b);
  const double lo = std::min(a.points().front(), b.points().front());
  const double hi = std::max(a.points().back(), b.points().back());
  CompensatedSum s;
  for (const auto &seg : detail::cdf_difference(a, b, lo, hi)) s += seg.length * std::abs(seg.diff);
  return s.value();
}

/// Reduces an angle to [0, 2pi).
inline double wrap_angle(double t) {
  double r = std::fmod(t, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r >= kTwoPi ? 0.0 : r;
}

/// Arc-length distance on the unit circle.
inline double arc_distance(double a, double b) {
  const double d = std::abs(wrap_angle(a) - wrap_angle(b));
  return std::min(d, kTwoPi - d);
}

/// W1 on the circle with the arc-length metric, for measures given by angles.
/// Uses min_c int_0^{2pi} |F_a - F_b - c|, attained at a Lebesgue-weighted
/// median of the CDF difference.
inline double w1_circle(const EmpiricalMeasure &a, const EmpiricalMeasure &b) {
  detail::require_nonempty(a, b);
  const auto wa = a.pushforward(wrap_angle);
  const auto wb = b.pushforward(wrap_angle);
  auto segs = detail::cdf_difference(wa, wb, 0.0, kTwoPi);
  std::sort(segs.begin(), segs.end(), [](const auto &x, const auto &y) { return x.diff < y.diff; });
  double acc = 0.0, c = segs.empty() ? 0.0 : segs.back().diff;
  for (const auto &s : segs) {
    acc += s.length;
    if (acc >= 0.5 * kTwoPi) {
      c = s.diff;
      break;
    }
  }
  CompensatedSum s;
  for (const auto &seg : segs) s += seg.length * std::abs(seg.diff - c);
  return s.value();
}

/// Equispaced discretisation of Haar measure on the circle.
inline EmpiricalMeasure haar_circle(std::size_t n = 10'000) {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = kTwoPi * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return EmpiricalMeasure(std::move(p));
}

/// The orbit x -> (e^{i x gamma_j})_j for x in [x0, X].
struct TorusOrbitSpec {
  std::vector<double> gamma;
  double x0;
  double X;
  std::vector<std::vector<i64>> relations;  // filled by find_relations
};

inline double dot(const std::vector<i64> &m, const std::vector<double> &g) {
  double s = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j) s += static_cast<double>(m[j]) * g[j];
  return s;
}

/// <m, gamma> counts as zero below 1e-9 ||m||_1 max gamma.
inline bool is_relation(const std::vector<i64> &m, const std::vector<double> &gamma) {
  double l1 = 0.0, gmax = 0.0;
  for (i64 v : m) l1 += static_cast<double>(std::llabs(v));
  for (double g : gamma) gmax = std::max(gmax, std::abs(g));
  return std::abs(dot(m, gamma)) < 1e-9 * l1 * gmax || l1 == 0.0;
}

inline void validate(const TorusOrbitSpec &s) {
  if (s.gamma.empty()) fail(ErrorKind::InvalidMeasure, "orbit needs N >= 1 frequencies");
  if (!(s.X > s.x0)) fail(ErrorKind::InvalidMeasure, "orbit window needs X > x0");
  for (const auto &m : s.relations)
    if (m.size() != s.gamma.size() || !is_relation(m, s.gamma))
      fail(ErrorKind::InvalidMeasure, "listed relation fails the tolerance test");
}

namespace detail {

// Calls f(m) for every m in [-H, H]^N \ {0}.
template <class F>
void for_each_box_vector(std::size_t N, i64 H, F &&f) {
  std::vector<i64> m(N, -H);
  while (true) {
    bool zero = true;
    for (i64 v : m) zero = zero && v == 0;
    if (!zero) f(m);
    std::size_t k = 0;
    while (k < N && m[k] == H) m[k++] = -H;
    if (k == N) return;
    ++m[k];
  }
}

}  // namespace detail

/// Integer relations with ||m||_inf <= H among the frequencies (one of each
/// +-m pair).
inline std::vector<std::vector<i64>> find_relations(const std::vector<double> &gamma, i64 H) {
  std::vector<std::vector<i64>> out;
  const double count = std::pow(2.0 * static_cast<double>(H) + 1.0, static_cast<double>(gamma.size()));
  if (count > 1e7) fail(ErrorKind::Budget, "relation search box exceeds 1e7 vectors");
  detail::for_each_box_vector(gamma.size(), H, [&](const std::vector<i64> &m) {
    std::size_t k = 0;
    while (m[k] == 0) ++k;
    if (m[k] > 0 && is_relation(m, gamma)) out.push_back(m);
  });
  return out;
}

/// Fourier coefficient of the orbit measure nu_X at m.
inline cplx orbit_fourier(const TorusOrbitSpec &s, const std::vector<i64> &m) {
  if (m.size() != s.gamma.size()) fail(ErrorKind::InvalidMeasure, "dimension mismatch");
  if (is_relation(m, s.gamma)) return 1.0;
  for (const auto &r : s.relations) {
    bool same = true, opposite = true;
    for (std::size_t j = 0; j < m.size(); ++j) {
      same = same && r[j] == m[j];
      opposite = opposite && r[j] == -m[j];
    }
    if (same || opposite) return 1.0;
  }
  const double w = dot(m, s.gamma);
  return (std::exp(cplx(0.0, w * s.X)) - std::exp(cplx(0.0, w * s.x0))) / (cplx(0.0, w) * (s.X - s.x0));
}

struct KWBound {
  i64 H;
  double leading;  // 4 sqrt(3) sqrt(N) / H
  double tail;     // 2/(X - x0) sqrt(sum 1/(|m|_2^2 <m,gamma>^2))
  double total;
  bool sampled = false;
  double std_error = 0.0;  // of the tail, when sampled
  std::size_t terms = 0;   // vectors enumerated or sampled

  void write_row(std::ostream &os) const { os << H << ", " << leading << ", " << tail << ", " << total << "\n"; }
};

struct KWOptions {
  double enumeration_budget = 1e7;
  bool allow_sampling = false;
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 20240601;
};

inline KWBound kw_bound(const TorusOrbitSpec &s, i64 H, const KWOptions &opt = {}) {
  validate(s);
  if (H < 1) fail(ErrorKind::OutOfRange, "H must be >= 1");
  const std::size_t N = s.gamma.size();
  KWBound b{};
  b.H = H;
  b.leading = 4.0 * std::sqrt(3.0) * std::sqrt(static_cast<double>(N)) / static_cast<double>(H);
  auto term = [&](const std::vector<i64> &m) {
    if (is_relation(m, s.gamma)) return 0.0;
    double n2 = 0.0;
    for (i64 v : m) n2 += static_cast<double>(v * v);
    const double w = dot(m, s.gamma);
    return 1.0 / (n2 * w * w);
  };
  const double box = std::pow(2.0 * static_cast<double>(H) + 1.0, static_cast<double>(N));
  const double scale = 2.0 / (s.X - s.x0);
  if (box <= opt.enumeration_budget) {
    CompensatedSum sum;
    detail::for_each_box_vector(N, H, [&](const std::vector<i64> &m) {
      sum += term(m);
      ++b.terms;
    });
    b.tail = scale * std::sqrt(sum.value());
  } else {
    if (!opt.allow_sampling)
      fail(ErrorKind::Budget, "(2H+1)^N exceeds the enumeration budget and sampling is disabled");
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<i64> U(-H, H);
    std::vector<i64> m(N);
    CompensatedSum s1, s2;
    std::size_t n = 0;
    while (n < opt.samples) {
      bool zero = true;
      for (auto &v : m) {
        v = U(rng);
        zero = zero && v == 0;
      }
      if (zero) continue;
      const double v = term(m);
      s1 += v;
      s2 += v * v;
      ++n;
    }
    const double vol = box - 1.0;
    const double mean = s1.value() / static_cast<double>(n);
    const double var = std::max(0.0, s2.value() / static_cast<double>(n) - mean * mean);
    const double sum = vol * mean;
    const double se_sum = vol * std::sqrt(var / static_cast<double>(n));
    b.tail = scale * std::sqrt(sum);
    b.std_error = sum > 0.0 ? scale * se_sum / (2.0 * std::sqrt(sum)) : 0.0;
    b.sampled = true;
    b.terms = n;
  }
  b.total = b.leading + b.tail;
  return b;
}

/// Points on the torus, stored as angle vectors.
using TorusPoints = std::vector<std::vector<double>>;

/// n points of the orbit at the midpoints of a uniform partition of [x0, X].
inline TorusPoints orbit_samples(const TorusOrbitSpec &s, std::size_t n) {
  validate(s);
  TorusPoints out(n, std::vector<double>(s.gamma.size()));
  const double h = (s.X - s.x0) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = s.x0 + (static_cast<double>(i) + 0.5) * h;
    for (std::size_t j = 0; j < s.gamma.size(); ++j) out[i][j] = wrap_angle(x * s.gamma[j]);
  }
  return out;
}

struct DualityOptions {
  std::size_t trials = 64;
  std::uint64_t seed = 7;
};

/// Lower bound for W1 between the empirical measure on `a` and either Haar
/// measure (b == nullptr) or the empirical measure on *b, from test functions
/// u(z) = sum_j c_j l(z_j, p_j) / ||c||_2, which are 1-Lipschitz for the
/// product metric.
inline double w1_duality_lower_bound(const TorusPoints &a, const TorusPoints *b, const DualityOptions &opt = {}) {
  if (a.empty() || (b && b->empty())) fail(ErrorKind::InvalidMeasure, "empty point set");
  const std::size_t N = a.front().size();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> U(0.0, kTwoPi);
  std::normal_distribution<double> G(0.0, 1.0);

  // candidate centers per coordinate: random, sample points and antipodes
  std::vector<std::vector<double>> centers;
  for (std::size_t k = 0; k < opt.trials; ++k) {
    std::vector<double> c(N);
    for (auto &v : c) v = U(rng);
    centers.push_back(c);
  }
  std::uniform_int_distribution<std::size_t> pick(0, a.size() - 1);
  for (std::size_t k = 0; k < opt.trials; ++k) {
    auto c = a[pick(rng)];
    centers.push_back(c);
    for (auto &v : c) v = wrap_angle(v + 0.5 * kTwoPi);
    centers.push_back(c);
  }

  auto mean_dist = [&](const TorusPoints &pts, std::size_t j, double c) {
    CompensatedSum s;
    for (const auto &p : pts) s += arc_distance(p[j], c);
    return s.value() / static_cast<double>(pts.size());
  };
  double best = 0.0;
  for (const auto &c : centers) {
    // per-coordinate differences of integrals of l(z_j, c_j)
    std::vector<double> d(N);
    for (std::size_t j = 0; j < N; ++j)
      d[j] = mean_dist(a, j, c[j]) - (b ? mean_dist(*b, j, c[j]) : 0.25 * kTwoPi);
    for (std::size_t j = 0; j < N; ++j) best = std::max(best, std::abs(d[j]));
    // the optimal combination for these centers is c ~ d, giving ||d||_2
    double n2 = 0.0;
    for (double v : d) n2 += v * v;
    best = std::max(best, std::sqrt(n2));
    for (std::size_t r = 0; r < 4 && N > 1; ++r) {
      std::vector<double> w(N);
      double norm = 0.0, val = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        w[j] = G(rng);
        norm += w[j] * w[j];
        val += w[j] * d[j];
      }
      best = std::max(best, std::abs(val) / std::sqrt(norm));
    }
  }
  return best;
}

/// Exact W1 between the N = 1 orbit measure of frequency gamma on [x0, X]
/// and Haar measure. With total angle A = |gamma|(X - x0) = 2 pi k + r, the
/// CDF difference is a tent of height r(2pi - r)/(2pi A); its Lebesgue median
/// is half the height, giving r(2pi - r)/(4A).
inline double w1_orbit_haar_circle(double gamma, double x0, double X) {
  if (!(X > x0) || gamma == 0.0) fail(ErrorKind::InvalidMeasure, "need X > x0 and gamma != 0");
  const double total = std::abs(gamma) * (X - x0);
  const double r = total - std::floor(total / kTwoPi) * kTwoPi;
  return r * (kTwoPi - r) / (4.0 * total);
}

struct Bracket {
  double lower;  // int h_L^- d nu
  double upper;  // int h_L^+ d nu
};

inline double h_plus(double x, double L) { return x >= 0.0 ? 1.0 : (x <= -1.0 / L ? 0.0 : L * (x + 1.0 / L)); }
inline double h_minus(double x, double L) { return x <= 0.0 ? 0.0 : (x >= 1.0 / L ? 1.0 : L * x); }

inline Bracket lipschitz_bracket(const EmpiricalMeasure &nu, double L) {
  if (!(L > 0.0)) fail(ErrorKind::OutOfRange, "L must be positive");
  CompensatedSum lo, hi;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    lo += nu.weights()[i] * h_minus(nu.points()[i], L);
    hi += nu.weights()[i] * h_plus(nu.points()[i], L);
  }
  return {lo.value(), hi.value()};
}

/// Bracket for a density sampled on a uniform grid (trapezoid rule).
inline Bracket lipschitz_bracket_density(const std::vector<double> &x, const std::vector<double> &f, double L) {
  if (!(L > 0.0)) fail(ErrorKind::OutOfRange, "L must be positive");
  if (x.size() != f.size() || x.size() < 2) fail(ErrorKind::InvalidMeasure, "density grid needs >= 2 matching points");
  CompensatedSum lo, hi;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = x[i + 1] - x[i];
    lo += 0.5 * h * (f[i] * h_minus(x[i], L) + f[i + 1] * h_minus(x[i + 1], L));
    hi += 0.5 * h * (f[i] * h_plus(x[i], L) + f[i + 1] * h_plus(x[i + 1], L));
  }
  return {lo.value(), hi.value()};
}

}  // namespace racebias
