#pragma once

// Logarithmic density of the lead set {y : pi(e^y; t) > 0} and the least
// x with pi(x; t) > 0. pi(e^y; t) is constant between consecutive log p and
// sign(E(y)) = sign(pi), so both are exact sums over prime gaps.

#include <cmath>
#include <optional>
#include <vector>

#include "racebias/primes.hpp"

namespace racebias {

struct DensityEstimate {
  double X = 0.0;
  double estimate = 0.0;          // |{y in [log 2, X] : pi(e^y) > 0}| / (X - log 2)
  double tie_fraction = 0.0;      // same for pi(e^y) = 0
  std::vector<u64> sign_changes;  // primes where 1{pi > 0} switches
  std::optional<u64> skewes_hit;  // least prime with pi > 0
};

namespace detail {

inline bool leads(double pi, double scale) { return pi > 1e-9 * scale; }
inline bool ties(double pi, double scale) { return std::abs(pi) <= 1e-9 * scale; }

}  // namespace detail

inline DensityEstimate log_density(const WeightedCounts &counts, double X) {
  const double y0 = std::log(2.0);
  if (!(X > y0)) fail(ErrorKind::OutOfRange, "density window needs X > log 2");
  const double xmax = std::exp(X);
  if (xmax > static_cast<double>(counts.table().limit()) * (1.0 + 1e-12))
    fail(ErrorKind::OutOfRange, "e^X exceeds the sieve limit " + std::to_string(counts.table().limit()));
  const auto &P = counts.table().primes();
  const double scale = counts.weight().sup_norm();
  DensityEstimate d;
  d.X = X;
  CompensatedSum lead, tie;
  bool prev = false;  // pi = 0 below 2
  // interval [log p_k, log p_{k+1}) carries pi after the first k+1 primes
  for (std::size_t k = 0; k < P.size() && static_cast<double>(P[k]) <= xmax; ++k) {
    const double pi = counts.pi_after(k + 1);
    const double a = std::log(static_cast<double>(P[k]));
    const double b = (k + 1 < P.size() && static_cast<double>(P[k + 1]) <= xmax) ? std::log(static_cast<double>(P[k + 1])) : X;
    const bool now = detail::leads(pi, scale);
    if (now) lead += b - a;
    if (detail::ties(pi, scale)) tie += b - a;
    if (now != prev) d.sign_changes.push_back(P[k]);
    if (now && !d.skewes_hit) d.skewes_hit = P[k];
    prev = now;
  }
  d.estimate = lead.value() / (X - y0);
  d.tie_fraction = tie.value() / (X - y0);
  return d;
}

inline DensityEstimate log_density(const RaceWeight &t, double X, const PrimeTable &table) {
  return log_density(WeightedCounts(table, t), X);
}

struct SkewesResult {
  std::optional<u64> hit;  // least x >= 2 with pi(x; t) > 0
  u64 ceiling;             // when no hit: x(t) > ceiling
};

inline SkewesResult skewes_search(const RaceWeight &t, const PrimeTable &table, u64 ceiling) {
  table.require(ceiling);
  const double scale = t.sup_norm();
  CompensatedSum s;
  for (u64 p : table.primes()) {
    if (p > ceiling) break;
    s += t(static_cast<i64>(p % t.modulus()));
    if (detail::leads(s.value(), scale)) return {p, ceiling};
  }
  return {std::nullopt, ceiling};
}

inline SkewesResult skewes_search(const RaceWeight &t, u64 ceiling) { return skewes_search(t, sieve(ceiling), ceiling); }

}  // namespace racebias
