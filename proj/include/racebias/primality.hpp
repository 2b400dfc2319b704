#pragma once

// Big-integer primality and Jacobi symbols.

#include <array>
#include <random>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/miller_rabin.hpp>

#include "racebias/error.hpp"

namespace racebias {

using BigInt = boost::multiprecision::cpp_int;

namespace detail {

// strong probable prime test to base a, n odd > 2
inline bool strong_probable_prime(const BigInt &n, const BigInt &a) {
  const BigInt n1 = n - 1;
  BigInt d = n1;
  unsigned s = 0;
  while (!boost::multiprecision::bit_test(d, 0)) {
    d >>= 1;
    ++s;
  }
  BigInt x = boost::multiprecision::powm(a % n, d, n);
  if (x == 1 || x == n1) return true;
  for (unsigned r = 1; r < s; ++r) {
    x = x * x % n;
    if (x == n1) return true;
    if (x == 1) return false;
  }
  return false;
}

}  // namespace detail

/// Bases 2..41 are deterministic below this bound.
inline const BigInt &deterministic_mr_bound() {
  static const BigInt b("3317044064679887385961981");
  return b;
}

/// Deterministic below 3.3e24; above, a base-2 strong test followed by 64
/// Miller-Rabin rounds with seeded random bases (error < 2^-128).
inline bool is_probable_prime(const BigInt &n) {
  if (n < 2) return false;
  static constexpr std::array<unsigned, 13> bases = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};
  for (unsigned p : bases) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  if (n < deterministic_mr_bound()) {
    for (unsigned p : bases)
      if (!detail::strong_probable_prime(n, BigInt(p))) return false;
    return true;
  }
  if (!detail::strong_probable_prime(n, BigInt(2))) return false;
  std::mt19937_64 gen(0x5eedULL);
  return boost::multiprecision::miller_rabin_test(n, 64, gen);
}

/// Jacobi symbol (a | n), n odd positive.
inline int jacobi(BigInt a, BigInt n) {
  if (n <= 0 || !boost::multiprecision::bit_test(n, 0)) fail(ErrorKind::UnsupportedModulus, "Jacobi symbol needs odd n > 0");
  a %= n;
  if (a < 0) a += n;
  int result = 1;
  while (a != 0) {
    while (!boost::multiprecision::bit_test(a, 0)) {
      a >>= 1;
      const unsigned r = static_cast<unsigned>(n % 8);
      if (r == 3 || r == 5) result = -result;
    }
    std::swap(a, n);
    if (a % 4 == 3 && n % 4 == 3) result = -result;
    a %= n;
  }
  return n == 1 ? result : 0;
}

inline std::string to_string(const BigInt &n) { return n.str(); }

inline BigInt parse_bigint(const std::string &s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    fail(ErrorKind::Parse, "not a non-negative integer: '" + s + "'");
  return BigInt(s);
}

}  // namespace racebias
