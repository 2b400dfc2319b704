#pragma once

// The truncated explicit formula
//   E^(T)(y) = -<t, r> - 2 Re sum_n b_n e^{i gamma_n y},  b_n = <t, chi_n> / (1/2 + i gamma_n),
// its psi-level counterpart, the pi <-> psi bridge and the almost-periodicity gap.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "racebias/primes.hpp"
#include "racebias/residue.hpp"
#include "racebias/zeros.hpp"

namespace racebias {

struct ModelTerm {
  double gamma;
  cplx b;
  u64 label;  // Conrey label mod q of the character
};

class TruncatedModel {
 public:
  TruncatedModel(double T, double constant, std::vector<ModelTerm> terms)
      : T_(T), constant_(constant), terms_(std::move(terms)) {
    std::stable_sort(terms_.begin(), terms_.end(), [](const ModelTerm &a, const ModelTerm &b) { return a.gamma < b.gamma; });
  }

  double T() const { return T_; }
  /// -<t, r>.
  double constant() const { return constant_; }
  const std::vector<ModelTerm> &terms() const { return terms_; }

  double operator()(double y) const {
    CompensatedSum s;
    for (const auto &term : terms_) {
      const double a = term.gamma * y;
      s += term.b.real() * std::cos(a) - term.b.imag() * std::sin(a);
    }
    return constant_ - 2.0 * s.value();
  }

  /// sum_n |b_n|.
  double sum_abs_b() const {
    CompensatedSum s;
    for (const auto &term : terms_) s += std::abs(term.b);
    return s.value();
  }
  /// 2 sum_n |b_n|^2, the variance of the limiting distribution truncated at T.
  double variance() const {
    CompensatedSum s;
    for (const auto &term : terms_) s += std::norm(term.b);
    return 2.0 * s.value();
  }
  /// |constant| + 2 sum |b_n|.
  double sup_bound() const { return std::abs(constant_) + 2.0 * sum_abs_b(); }

  void write(std::ostream &os) const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "# racebias model v1\n# T=%.12g\n# constant=%.15g\n", T_, constant_);
    os << buf << "gamma,Re(b),Im(b),label\n";
    for (const auto &term : terms_) {
      std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g,%llu\n", term.gamma, term.b.real(), term.b.imag(),
                    static_cast<unsigned long long>(term.label));
      os << buf;
    }
  }

 private:
  double T_;
  double constant_;
  std::vector<ModelTerm> terms_;
};

inline TruncatedModel build_model(const RaceWeight &t, const ZeroStore &store, double T) {
  std::vector<ModelTerm> terms;
  const auto sp = spectrum(store, t, T);
  std::size_t k = 0;
  for (std::size_t i : t.support()) {
    const auto &line = sp[k++];
    for (double g : line.ordinates) terms.push_back({g, line.coefficient / cplx(0.5, g), t.table().chars[i].label()});
  }
  return TruncatedModel(T, -mean_shift(t), std::move(terms));
}

struct PsiExplicit {
  double main;      // -sqrt(x) 2 Re sum_n b_n x^{i gamma_n}
  double envelope;  // lambda (log q)^2 (log x + (x/T) (log xT)^2), constant 1
};

inline PsiExplicit psi_truncated(double x, const RaceWeight &t, const TruncatedModel &model) {
  if (!(x >= 2.0)) fail(ErrorKind::OutOfRange, "psi_truncated needs x >= 2");
  const double lx = std::log(x);
  CompensatedSum s;
  for (const auto &term : model.terms()) {
    const double a = term.gamma * lx;
    s += term.b.real() * std::cos(a) - term.b.imag() * std::sin(a);
  }
  const auto st = weight_stats(t);
  const double lq = std::log(static_cast<double>(t.modulus()));
  const double T = std::max(model.T(), 1.0);
  const double lxT = std::log(x * T);
  return {-std::sqrt(x) * 2.0 * s.value(), st.lambda * lq * lq * (lx + x / T * lxT * lxT)};
}

struct BridgeReport {
  double pi;               // pi(x; t) from the sieve
  double shift_term;       // -(sqrt x / log x) <t, r>
  double psi_exact_term;   // psi(x; t) / log x, psi from the sieve
  double psi_model_term;   // truncated explicit-formula psi over log x
  double residual_exact;   // pi - shift - psi_exact_term
  double residual_model;   // pi - shift - psi_model_term
  double envelope;         // C(t) sqrt(x) / (log x)^2, constant 1
};

inline BridgeReport pi_psi_bridge(double x, const RaceWeight &t, const PrimeTable &primes, const TruncatedModel &model) {
  if (!(x >= 2.0)) fail(ErrorKind::OutOfRange, "pi_psi_bridge needs x >= 2");
  const double lx = std::log(x);
  const auto st = weight_stats(t);
  BridgeReport r{};
  r.pi = pi_weighted(primes, x, t);
  r.shift_term = -std::sqrt(x) / lx * st.mean_shift;
  r.psi_exact_term = psi_weighted(primes, x, t) / lx;
  r.psi_model_term = psi_truncated(x, t, model).main / lx;
  r.residual_exact = r.pi - r.shift_term - r.psi_exact_term;
  r.residual_model = r.pi - r.shift_term - r.psi_model_term;
  r.envelope = st.C * std::sqrt(x) / (lx * lx);
  return r;
}

struct GapReport {
  double gap;                   // (1/Y) int_{log 2}^Y |E - E^(T)| dy
  double envelope;              // C (log T / sqrt T + 1 / sqrt Y)
  double envelope_uncorrected;  // C (log T / sqrt T + log T / sqrt(T Y))
  double fitted_constant;       // gap / (envelope / C)
};

namespace detail {

// int_0^h |f| for f linear from a to b.
inline double abs_linear_integral(double a, double b, double h) {
  if ((a >= 0) == (b >= 0)) return 0.5 * h * std::abs(a + b);
  return 0.5 * h * (a * a + b * b) / (std::abs(a) + std::abs(b));
}

}  // namespace detail

/// int |E - E^(T)| over the trajectory range. pi(e^y; t) is constant between
/// nodes, so the left limit at each node is rebuilt from the previous node.
inline double integrate_abs_gap(const RaceTrajectory &tr, const TruncatedModel &model) {
  const auto &pts = tr.points;
  CompensatedSum s;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double ya = pts[i].y, yb = pts[i + 1].y;
    const double pi_const = pts[i].E / (ya * std::exp(-0.5 * ya));
    const double left = pts[i].E - model(ya);
    const double right = race_error(yb, pi_const) - model(yb);
    s += detail::abs_linear_integral(left, right, yb - ya);
  }
  return s.value();
}

inline GapReport almost_periodicity_gap(const RaceWeight &t, const WeightedCounts &counts, const TruncatedModel &model,
                                        double Y, double grid_step) {
  const double T = model.T();
  if (T > 1.0 && Y < std::log(T)) fail(ErrorKind::OutOfRange, "almost-periodicity gap needs Y >= log T");
  const auto tr = trajectory(counts, Y, grid_step);
  GapReport r{};
  r.gap = integrate_abs_gap(tr, model) / Y;
  const double C = weight_stats(t).C;
  const double Te = std::max(T, std::exp(1.0));
  const double lT = std::log(Te);
  r.envelope = C * (lT / std::sqrt(Te) + 1.0 / std::sqrt(Y));
  r.envelope_uncorrected = C * (lT / std::sqrt(Te) + lT / std::sqrt(Te * Y));
  r.fitted_constant = r.gap / (r.envelope / C);
  return r;
}

}  // namespace racebias
