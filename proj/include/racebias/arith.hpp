#pragma once

// Small-integer number theory used throughout: modular arithmetic on 64-bit
// words, factorisation, primitive roots and the Jacobi symbol.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "racebias/error.hpp"

namespace racebias {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

inline u64 powmod(u64 base, u64 exp, u64 m) {
  u64 result = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return result;
}

/// Deterministic Miller-Rabin for all 64-bit inputs (bases from Sinclair's set).
inline bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ULL, 325ULL, 9375ULL, 28178ULL, 450775ULL, 9780504ULL, 1795265022ULL}) {
    u64 x = powmod(a % n, d, n);
    if (a % n == 0 || x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

namespace detail {

inline u64 pollard_rho(u64 n) {
  if (n % 2 == 0) return 2;
  for (u64 c = 1;; ++c) {
    u64 x = 2, y = 2, d = 1;
    auto f = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
    while (d == 1) {
      x = f(x);
      y = f(f(y));
      d = std::gcd(x > y ? x - y : y - x, n);
    }
    if (d != n) return d;
  }
}

inline void factor_into(u64 n, std::vector<u64> &out) {
  if (n == 1) return;
  if (is_prime_u64(n)) {
    out.push_back(n);
    return;
  }
  u64 d = pollard_rho(n);
  factor_into(d, out);
  factor_into(n / d, out);
}

}  // namespace detail

struct PrimePower {
  u64 prime;
  int exponent;
  u64 value;  // prime^exponent
};

/// Prime factorisation in increasing prime order.
inline std::vector<PrimePower> factorize(u64 n) {
  std::vector<u64> raw;
  for (u64 p = 2; p < 1000 && p * p <= n; ++p) {
    while (n % p == 0) {
      raw.push_back(p);
      n /= p;
    }
  }
  if (n > 1) detail::factor_into(n, raw);
  std::sort(raw.begin(), raw.end());
  std::vector<PrimePower> out;
  for (u64 p : raw) {
    if (!out.empty() && out.back().prime == p) {
      ++out.back().exponent;
      out.back().value *= p;
    } else {
      out.push_back({p, 1, p});
    }
  }
  return out;
}

inline u64 euler_phi(u64 n) {
  u64 phi = n;
  for (const auto &pp : factorize(n)) phi = phi / pp.prime * (pp.prime - 1);
  return phi;
}

inline u64 radical(u64 n) {
  u64 r = 1;
  for (const auto &pp : factorize(n)) r *= pp.prime;
  return r;
}

inline bool is_squarefree(u64 n) {
  for (const auto &pp : factorize(n))
    if (pp.exponent > 1) return false;
  return true;
}

/// Multiplicative order of a modulo m (gcd(a,m)=1), given phi(m) and its prime factors.
inline u64 multiplicative_order(u64 a, u64 m, u64 phi, const std::vector<PrimePower> &phi_factors) {
  u64 order = phi;
  for (const auto &pp : phi_factors) {
    while (order % pp.prime == 0 && powmod(a, order / pp.prime, m) == 1) order /= pp.prime;
  }
  return order;
}

/// Least primitive root modulo an odd prime power.
inline u64 least_primitive_root(u64 prime_power) {
  const u64 phi = euler_phi(prime_power);
  const auto pf = factorize(phi);
  for (u64 g = 2; g < prime_power; ++g) {
    if (std::gcd(g, prime_power) != 1) continue;
    if (multiplicative_order(g, prime_power, phi, pf) == phi) return g;
  }
  fail(ErrorKind::InvalidModulus, "no primitive root modulo " + std::to_string(prime_power));
}

/// Jacobi symbol (a | n) for odd positive n.
inline int jacobi(i64 a, u64 n) {
  if (n == 0 || n % 2 == 0) fail(ErrorKind::UnsupportedModulus, "Jacobi symbol needs odd n");
  u64 aa = static_cast<u64>(((a % static_cast<i64>(n)) + static_cast<i64>(n)) % static_cast<i64>(n));
  int result = 1;
  while (aa != 0) {
    while (aa % 2 == 0) {
      aa /= 2;
      const u64 r = n % 8;
      if (r == 3 || r == 5) result = -result;
    }
    std::swap(aa, n);
    if (aa % 4 == 3 && n % 4 == 3) result = -result;
    aa %= n;
  }
  return n == 1 ? result : 0;
}

/// Chinese remainder for pairwise coprime moduli; result in [0, prod).
inline u64 crt(const std::vector<u64> &residues, const std::vector<u64> &moduli) {
  u64 x = 0, m = 1;
  for (std::size_t i = 0; i < residues.size(); ++i) {
    const u64 mi = moduli[i];
    // solve x + m*k = r (mod mi)
    const u64 inv = powmod(m % mi, euler_phi(mi) - 1, mi);
    const u64 diff = (residues[i] % mi + mi - x % mi) % mi;
    const u64 k = mulmod(diff, inv, mi);
    x += m * k;
    m *= mi;
  }
  return x % m;
}

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  CompensatedSum &operator+=(double v) {
    add(v);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace racebias
