#pragma once

// Segmented sieve and the weighted prime-counting functions pi, theta, psi
// attached to a race weight, plus the normalised race error
// E(y) = (y / e^{y/2}) pi(e^y; t).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "racebias/arith.hpp"
#include "racebias/error.hpp"
#include "racebias/residue.hpp"

namespace racebias {

inline constexpr std::size_t kSieveSegment = std::size_t{1} << 20;
inline constexpr std::size_t kDefaultSieveBudgetBytes = std::size_t{1} << 32;

class PrimeTable {
 public:
  PrimeTable() = default;
  PrimeTable(u64 limit, std::vector<u64> primes) : limit_(limit), primes_(std::move(primes)) {}

  u64 limit() const { return limit_; }
  const std::vector<u64> &primes() const { return primes_; }
  std::size_t size() const { return primes_.size(); }

  /// Number of primes <= x (x may exceed the limit only up to the limit).
  std::size_t count_upto(u64 x) const {
    return static_cast<std::size_t>(std::upper_bound(primes_.begin(), primes_.end(), x) - primes_.begin());
  }

  void require(u64 x) const {
    if (x > limit_)
      fail(ErrorKind::OutOfRange, "x = " + std::to_string(x) + " exceeds sieve limit " + std::to_string(limit_));
  }

 private:
  u64 limit_ = 0;
  std::vector<u64> primes_;
};

/// All primes <= limit by a segmented sieve of Eratosthenes.
inline PrimeTable sieve(u64 limit, std::size_t budget_bytes = kDefaultSieveBudgetBytes) {
  if (limit < 2) fail(ErrorKind::OutOfRange, "sieve limit must be >= 2");
  const double est = limit < 100 ? 30.0 : 1.3 * static_cast<double>(limit) / std::log(static_cast<double>(limit));
  if (est * sizeof(u64) > static_cast<double>(budget_bytes))
    fail(ErrorKind::Resource, "sieve to " + std::to_string(limit) + " exceeds the memory budget");

  const u64 root = static_cast<u64>(std::sqrt(static_cast<double>(limit))) + 1;
  std::vector<char> small(root + 1, 1);
  std::vector<u64> base;
  for (u64 i = 2; i <= root; ++i) {
    if (!small[i]) continue;
    base.push_back(i);
    for (u64 j = i * i; j <= root; j += i) small[j] = 0;
  }

  std::vector<u64> primes;
  primes.reserve(static_cast<std::size_t>(est));
  std::vector<char> seg(kSieveSegment);
  for (u64 lo = 2; lo <= limit; lo += kSieveSegment) {
    const u64 hi = std::min<u64>(lo + kSieveSegment - 1, limit);
    std::fill(seg.begin(), seg.begin() + static_cast<std::ptrdiff_t>(hi - lo + 1), 1);
    for (u64 p : base) {
      if (p * p > hi) break;
      u64 start = std::max(p * p, (lo + p - 1) / p * p);
      for (u64 j = start; j <= hi; j += p) seg[j - lo] = 0;
    }
    for (u64 n = lo; n <= hi; ++n)
      if (seg[n - lo]) primes.push_back(n);
  }
  return PrimeTable(limit, std::move(primes));
}

/// Primes split by residue class modulo q (unit classes only).
struct ResidueIndex {
  u64 modulus;
  std::vector<u64> classes;              // units mod q
  std::vector<std::vector<u64>> primes;  // primes == classes[i] (mod q), sorted
};

inline ResidueIndex index_by_residue(const PrimeTable &table, u64 q) {
  UnitGroup g(q);
  ResidueIndex idx{q, g.units(), std::vector<std::vector<u64>>(g.phi())};
  for (u64 p : table.primes()) {
    if (auto i = g.index_of(static_cast<i64>(p % q))) idx.primes[*i].push_back(p);
  }
  return idx;
}

/// Prefix sums of t(p) and t(p) log p over the primes of a table, so that
/// pi(x; t) and theta(x; t) are O(log n) lookups.
class WeightedCounts {
 public:
  WeightedCounts(const PrimeTable &table, const RaceWeight &t) : table_(&table), weight_(t) {
    pi_.reserve(table.size() + 1);
    theta_.reserve(table.size() + 1);
    pi_.push_back(0.0);
    theta_.push_back(0.0);
    CompensatedSum sp, st;
    for (u64 p : table.primes()) {
      const double w = t(static_cast<i64>(p % t.modulus()));
      sp += w;
      st += w * std::log(static_cast<double>(p));
      pi_.push_back(sp.value());
      theta_.push_back(st.value());
    }
  }

  const PrimeTable &table() const { return *table_; }
  const RaceWeight &weight() const { return weight_; }

  double pi(double x) const { return pi_[index(x)]; }
  double theta(double x) const { return theta_[index(x)]; }
  /// pi after the first k primes.
  double pi_after(std::size_t k) const { return pi_[k]; }

  std::size_t index(double x) const {
    if (x < 2.0) return 0;
    const u64 xi = static_cast<u64>(std::floor(x));
    table_->require(xi);
    return table_->count_upto(xi);
  }

 private:
  const PrimeTable *table_;
  RaceWeight weight_;
  std::vector<double> pi_;
  std::vector<double> theta_;
};

/// pi(x; t) = sum_{p <= x, p coprime to q} t(p).
inline double pi_weighted(const PrimeTable &table, double x, const RaceWeight &t) {
  if (x >= 2.0) table.require(static_cast<u64>(std::floor(x)));
  CompensatedSum s;
  const u64 q = t.modulus();
  for (u64 p : table.primes()) {
    if (static_cast<double>(p) > x) break;
    s += t(static_cast<i64>(p % q));
  }
  return s.value();
}

/// theta for an arbitrary class function f on (Z/qZ) (needed for t*(a) = t(a^2),
/// which is not orthogonal to the principal character in general).
template <class F>
double theta_class_function(const PrimeTable &table, double x, u64 q, F &&f) {
  if (x >= 2.0) table.require(static_cast<u64>(std::floor(x)));
  CompensatedSum s;
  for (u64 p : table.primes()) {
    if (static_cast<double>(p) > x) break;
    if (std::gcd(p, q) != 1) continue;
    s += f(static_cast<i64>(p % q)) * std::log(static_cast<double>(p));
  }
  return s.value();
}

inline double theta_weighted(const PrimeTable &table, double x, const RaceWeight &t) {
  return theta_class_function(table, x, t.modulus(), t);
}

/// psi(x; t) = sum_{n <= x, (n,q)=1} t(n) Lambda(n).
inline double psi_weighted(const PrimeTable &table, double x, const RaceWeight &t) {
  if (x >= 2.0) table.require(static_cast<u64>(std::floor(x)));
  CompensatedSum s;
  const u64 q = t.modulus();
  for (u64 p : table.primes()) {
    if (static_cast<double>(p) > x) break;
    const double lp = std::log(static_cast<double>(p));
    for (u128 pk = p; static_cast<double>(pk) <= x; pk *= p) s += t(static_cast<i64>(static_cast<u64>(pk % q))) * lp;
  }
  return s.value();
}

/// E(y) = (y / e^{y/2}) pi(e^y; t).
inline double race_error(double y, double pi_value) { return y * std::exp(-0.5 * y) * pi_value; }

struct TrajectoryPoint {
  double y;
  double E;
  bool jump;  // y = log p for a prime p (value is the right limit)
};

struct RaceTrajectory {
  std::vector<TrajectoryPoint> points;

  void write_csv(std::ostream &os) const {
    char buf[64];
    for (const auto &pt : points) {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", pt.y, pt.E);
      os << buf;
    }
  }
};

/// Samples E on a uniform grid from log 2 to X plus one point at each jump
/// y = log p, p <= e^X, p coprime to q.
inline RaceTrajectory trajectory(const WeightedCounts &counts, double X, double grid_step) {
  const double y0 = std::log(2.0);
  if (!(X > y0)) fail(ErrorKind::OutOfRange, "trajectory needs X > log 2");
  if (!(grid_step > 0.0)) fail(ErrorKind::OutOfRange, "grid step must be positive");
  const double xmax = std::exp(X);
  const auto &table = counts.table();
  if (xmax > static_cast<double>(table.limit()) + 0.5)
    fail(ErrorKind::OutOfRange, "e^X exceeds the sieve limit");
  const u64 q = counts.weight().modulus();

  std::vector<TrajectoryPoint> jumps;
  for (std::size_t k = 0; k < table.size(); ++k) {
    const u64 p = table.primes()[k];
    if (static_cast<double>(p) > xmax) break;
    if (q % p == 0) continue;
    const double y = std::log(static_cast<double>(p));
    jumps.push_back({y, race_error(y, counts.pi_after(k + 1)), true});
  }
  std::vector<TrajectoryPoint> grid;
  const auto n = static_cast<std::size_t>(std::floor((X - y0) / grid_step));
  for (std::size_t i = 0; i <= n; ++i) {
    const double y = std::min(y0 + static_cast<double>(i) * grid_step, X);
    grid.push_back({y, race_error(y, counts.pi(std::exp(y))), false});
  }
  if (grid.back().y < X) grid.push_back({X, race_error(X, counts.pi(xmax)), false});

  RaceTrajectory out;
  out.points.reserve(jumps.size() + grid.size());
  std::merge(grid.begin(), grid.end(), jumps.begin(), jumps.end(), std::back_inserter(out.points),
             [](const TrajectoryPoint &a, const TrajectoryPoint &b) { return a.y < b.y; });
  // keep the grid strictly increasing; a jump node wins over a coincident grid node
  std::vector<TrajectoryPoint> dedup;
  dedup.reserve(out.points.size());
  for (const auto &pt : out.points) {
    if (!dedup.empty() && pt.y <= dedup.back().y) {
      if (pt.jump) dedup.back() = pt;
      continue;
    }
    dedup.push_back(pt);
  }
  out.points = std::move(dedup);
  return out;
}

}  // namespace racebias
