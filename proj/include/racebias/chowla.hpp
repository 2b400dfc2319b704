#pragma once

// Moduli whose least quadratic residue / nonresidue primes are forced past
// the first n odd primes (Chowla's argument), with re-checkable certificates.
//
//   Q_n = 8 p_1 ... p_n,  p_i the first n odd primes.
//   For xi = (x_1..x_n), x_i a nonzero square mod p_i, a_xi = 1 (8), x_i (p_i);
//   P_xi a prime = a_xi (mod Q_n) with P_xi > sqrt(Q_n).
//   q_n = product of r_n such primes, r_n = floor(x_n), 2^{x_n}/x_n = n log n f.
//   q'_n = Q q_n with Q prime = b (mod Q_n), b = 5 (8), b nonresidue mod every p_i.

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "racebias/arith.hpp"
#include "racebias/primality.hpp"
#include "racebias/primes.hpp"
#include "racebias/text.hpp"

namespace racebias {

inline constexpr u64 kDefaultLinnikCeiling = 1'000'000;

/// The first n odd primes.
inline std::vector<u64> first_odd_primes(u64 n) {
  std::vector<u64> out;
  for (u64 p = 3; out.size() < n; p += 2)
    if (is_prime_u64(p)) out.push_back(p);
  return out;
}

/// Nonzero squares mod an odd prime, ascending.
inline std::vector<u64> quadratic_residues(u64 p) {
  std::vector<u64> out;
  for (u64 x = 1; x < p; ++x)
    if (powmod(x, (p - 1) / 2, p) == 1) out.push_back(x);
  return out;
}

inline u64 least_nonresidue(u64 p) {
  for (u64 x = 2; x < p; ++x)
    if (powmod(x, (p - 1) / 2, p) == p - 1) return x;
  fail(ErrorKind::InvalidModulus, "no nonresidue modulo " + std::to_string(p));
}

/// r_n = floor(x) for the unique x > 2 with 2^x / x = n log(n) f; when
/// n log(n) f <= 2 there is no solution and r_n = 1.
inline u64 chowla_r(u64 n, double f_value) {
  if (n < 1) fail(ErrorKind::OutOfRange, "n must be >= 1");
  if (!(f_value > 0.0)) fail(ErrorKind::OutOfRange, "f value must be positive");
  const double target = static_cast<double>(n) * std::log(static_cast<double>(n)) * f_value;
  auto g = [](double x) { return std::exp2(x) / x; };
  if (!(target > 2.0)) return 1;
  double lo = 2.0, hi = 4.0;
  while (g(hi) < target) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < target ? lo : hi) = mid;
  }
  return static_cast<u64>(std::floor(0.5 * (lo + hi)));
}

inline BigInt crt_big(const std::vector<u64> &residues, const std::vector<u64> &moduli) {
  BigInt x = 0, m = 1;
  for (std::size_t i = 0; i < residues.size(); ++i) {
    const u64 mi = moduli[i];
    const u64 mm = static_cast<u64>(m % mi);
    const u64 inv = powmod(mm, euler_phi(mi) - 1, mi);
    const u64 xm = static_cast<u64>(x % mi);
    const u64 diff = (residues[i] % mi + mi - xm) % mi;
    x += m * mulmod(diff, inv, mi);
    m *= mi;
  }
  return x % m;
}

struct ChowlaFactor {
  std::vector<u64> tuple;  // x_i mod p_i
  BigInt residue;          // a (or b) mod Q_n
  BigInt prime;
  u64 steps = 0;           // progression steps taken
  bool relaxed = false;    // prime not above sqrt(Q_n)
};

struct ConstructionCertificate {
  u64 n = 0;
  double f_value = 1.0;
  u64 seed = 0;
  u64 r_n = 0;
  bool r_overridden = false;
  std::vector<u64> base_primes;
  BigInt Q;
  std::vector<ChowlaFactor> factors;
  BigInt q;
  std::optional<ChowlaFactor> extra;
  std::optional<BigInt> q_prime;

  std::vector<BigInt> factorization() const {
    std::vector<BigInt> f;
    for (const auto &x : factors) f.push_back(x.prime);
    return f;
  }
  std::vector<BigInt> factorization_prime() const {
    auto f = factorization();
    if (extra) f.push_back(extra->prime);
    return f;
  }

  void write(std::ostream &os) const;
  static ConstructionCertificate parse(std::istream &is, const std::string &name = "<certificate>");
};

struct ChowlaOptions {
  u64 ceiling = kDefaultLinnikCeiling;
  u64 seed = 0;
  std::optional<u64> r_override;
};

namespace detail {

// least prime = a (mod Q) above `floor`, scanning a + kQ for k < ceiling
inline std::optional<std::pair<BigInt, u64>> progression_prime(const BigInt &a, const BigInt &Q, const BigInt &floor,
                                                              u64 ceiling) {
  BigInt c = a;
  u64 k = 0;
  if (c <= floor) {
    const BigInt skip = (floor - c) / Q + 1;
    c += skip * Q;
    k = static_cast<u64>(skip);
  }
  for (u64 steps = 0; steps < ceiling; ++steps, ++k, c += Q)
    if (is_probable_prime(c)) return std::pair{c, k};
  return std::nullopt;
}

inline BigInt isqrt_floor(const BigInt &x) { return boost::multiprecision::sqrt(x); }

inline std::string join(const std::vector<u64> &v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

}  // namespace detail

inline ConstructionCertificate construct_q(u64 n, double f_value, const ChowlaOptions &opt = {}) {
  ConstructionCertificate c;
  c.n = n;
  c.f_value = f_value;
  c.seed = opt.seed;
  c.r_n = opt.r_override ? *opt.r_override : chowla_r(n, f_value);
  c.r_overridden = opt.r_override.has_value();
  if (c.r_n < 1) fail(ErrorKind::OutOfRange, "r_n must be >= 1");
  c.base_primes = first_odd_primes(n);
  c.Q = 8;
  BigInt s_n = 1;
  std::vector<std::vector<u64>> qr;
  std::mt19937_64 rng(opt.seed);
  for (u64 p : c.base_primes) {
    c.Q *= p;
    s_n *= (p - 1) / 2;
    qr.push_back(quadratic_residues(p));
    std::shuffle(qr.back().begin(), qr.back().end(), rng);
  }
  if (BigInt(c.r_n) > s_n)
    fail(ErrorKind::Infeasible, "r_n = " + std::to_string(c.r_n) + " exceeds the " + to_string(s_n) +
                                    " available residue tuples for n = " + std::to_string(n));

  std::vector<u64> moduli{8};
  moduli.insert(moduli.end(), c.base_primes.begin(), c.base_primes.end());
  const BigInt root = detail::isqrt_floor(c.Q);
  std::vector<std::size_t> digit(n, 0);
  c.q = 1;
  while (c.factors.size() < c.r_n) {
    ChowlaFactor f;
    std::vector<u64> residues{1};
    for (std::size_t i = 0; i < n; ++i) {
      f.tuple.push_back(qr[i][digit[i]]);
      residues.push_back(f.tuple.back());
    }
    f.residue = crt_big(residues, moduli);
    if (auto hit = detail::progression_prime(f.residue, c.Q, root, opt.ceiling)) {
      f.prime = hit->first;
      f.steps = hit->second;
    } else if (is_probable_prime(f.residue)) {
      f.prime = f.residue;
      f.relaxed = true;
    } else {
      fail(ErrorKind::LinnikSearch, "no prime = " + to_string(f.residue) + " mod " + to_string(c.Q) + " within " +
                                        std::to_string(opt.ceiling) + " steps (" + std::to_string(c.factors.size()) +
                                        " of " + std::to_string(c.r_n) + " factors found)");
    }
    c.q *= f.prime;
    c.factors.push_back(std::move(f));
    // next tuple in lexicographic order of the shuffled coordinate lists
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++digit[i] < qr[i].size()) break;
      digit[i] = 0;
    }
  }
  return c;
}

inline ConstructionCertificate construct_q_prime(const ConstructionCertificate &base, u64 ceiling = kDefaultLinnikCeiling) {
  if (base.q_prime) fail(ErrorKind::Validation, "certificate already carries q'");
  ConstructionCertificate c = base;
  ChowlaFactor f;
  std::vector<u64> residues{5}, moduli{8};
  for (u64 p : c.base_primes) {
    f.tuple.push_back(least_nonresidue(p));
    residues.push_back(f.tuple.back());
    moduli.push_back(p);
  }
  f.residue = crt_big(residues, moduli);
  auto hit = detail::progression_prime(f.residue, c.Q, BigInt(1), ceiling);
  if (!hit)
    fail(ErrorKind::LinnikSearch, "no prime = " + to_string(f.residue) + " mod " + to_string(c.Q) + " within " +
                                      std::to_string(ceiling) + " steps");
  f.prime = hit->first;
  f.steps = hit->second;
  for (const auto &x : c.factors)
    if (x.prime == f.prime) fail(ErrorKind::Validation, "extra prime repeats a factor of q");
  c.q_prime = f.prime * c.q;
  c.extra = std::move(f);
  return c;
}

struct VerificationReport {
  bool ok = true;
  std::size_t checks = 0;
  std::vector<std::string> failures;

  void check(bool cond, const std::string &what) {
    ++checks;
    if (!cond) {
      ok = false;
      failures.push_back(what);
    }
  }
};

/// Recomputes every claim of a certificate from its raw numbers.
inline VerificationReport verify_certificate(const ConstructionCertificate &c) {
  VerificationReport r;
  r.check(c.base_primes == first_odd_primes(c.n), "base primes are the first n odd primes");
  BigInt Q = 8;
  for (u64 p : c.base_primes) Q *= p;
  r.check(Q == c.Q, "Q = 8 p_1 ... p_n");
  if (!c.r_overridden) r.check(c.r_n == chowla_r(c.n, c.f_value), "r_n follows the 2^x/x rule");
  r.check(c.factors.size() == c.r_n, "r_n factors present");
  const BigInt root = detail::isqrt_floor(Q);
  BigInt prod = 1;
  for (std::size_t k = 0; k < c.factors.size(); ++k) {
    const auto &f = c.factors[k];
    const std::string tag = "factor " + std::to_string(k + 1) + ": ";
    r.check(f.tuple.size() == c.base_primes.size(), tag + "tuple length");
    for (std::size_t j = 0; j < k; ++j) r.check(c.factors[j].tuple != f.tuple, tag + "tuple distinct from factor " + std::to_string(j + 1));
    r.check(f.residue % 8 == 1, tag + "residue = 1 mod 8");
    for (std::size_t i = 0; i < f.tuple.size() && i < c.base_primes.size(); ++i) {
      const u64 p = c.base_primes[i];
      r.check(f.residue % p == f.tuple[i], tag + "residue matches tuple mod " + std::to_string(p));
      r.check(f.tuple[i] % p != 0 && powmod(f.tuple[i] % p, (p - 1) / 2, p) == 1,
              tag + "tuple entry is a square mod " + std::to_string(p));
      r.check(jacobi(BigInt(p), f.prime) == 1, tag + "(p_i | P) = +1 for p_i = " + std::to_string(p));
    }
    r.check((f.prime - f.residue) % Q == 0, tag + "P = residue mod Q");
    r.check(is_probable_prime(f.prime), tag + "P is prime");
    r.check(f.relaxed || f.prime > root, tag + "P > sqrt(Q) unless flagged");
    r.check(jacobi(BigInt(2), f.prime) == 1, tag + "(2 | P) = +1");
    prod *= f.prime;
  }
  r.check(prod == c.q, "q is the product of the factors");
  for (u64 p : c.base_primes) r.check(jacobi(BigInt(p), c.q) == 1, "(p_i | q) = +1 for p_i = " + std::to_string(p));
  r.check(jacobi(BigInt(2), c.q) == 1, "(2 | q) = +1");
  if (c.extra || c.q_prime) {
    r.check(c.extra && c.q_prime, "q' and its extra prime both present");
    if (c.extra && c.q_prime) {
      const auto &f = *c.extra;
      r.check(f.residue % 8 == 5, "extra residue = 5 mod 8");
      for (std::size_t i = 0; i < f.tuple.size() && i < c.base_primes.size(); ++i) {
        const u64 p = c.base_primes[i];
        r.check(f.residue % p == f.tuple[i], "extra residue matches tuple mod " + std::to_string(p));
        r.check(powmod(f.tuple[i] % p, (p - 1) / 2, p) == p - 1, "extra tuple entry is a nonresidue mod " + std::to_string(p));
      }
      r.check((f.prime - f.residue) % Q == 0, "extra prime = residue mod Q");
      r.check(is_probable_prime(f.prime), "extra prime is prime");
      for (const auto &x : c.factors) r.check(x.prime != f.prime, "extra prime is not a factor of q");
      r.check(*c.q_prime == f.prime * c.q, "q' = extra prime times q");
      r.check(jacobi(BigInt(2), *c.q_prime) == -1, "(2 | q') = -1");
      for (u64 p : c.base_primes)
        r.check(jacobi(BigInt(p), *c.q_prime) == -1, "(p_i | q') = -1 for p_i = " + std::to_string(p));
    }
  }
  return r;
}

inline void write_factor(std::ostream &os, const ChowlaFactor &f) {
  os << "tuple: " << detail::join(f.tuple) << "\n"
     << "residue: " << f.residue << "\n"
     << "prime: " << f.prime << "\n"
     << "steps: " << f.steps << "\n"
     << "relaxed: " << (f.relaxed ? "true" : "false") << "\n";
}

inline void ConstructionCertificate::write(std::ostream &os) const {
  char fbuf[64];
  std::snprintf(fbuf, sizeof fbuf, "%.17g", f_value);
  os << "# racebias chowla certificate v1\n"
     << "n: " << n << "\n"
     << "f_value: " << fbuf << "\n"
     << "seed: " << seed << "\n"
     << "r_n: " << r_n << "\n"
     << "r_overridden: " << (r_overridden ? "true" : "false") << "\n"
     << "base_primes: " << detail::join(base_primes) << "\n"
     << "Q: " << Q << "\n"
     << "q: " << q << "\n";
  for (std::size_t k = 0; k < factors.size(); ++k) {
    os << "[factor " << (k + 1) << "]\n";
    write_factor(os, factors[k]);
  }
  if (extra) {
    os << "[extra]\n";
    write_factor(os, *extra);
    os << "q_prime: " << (q_prime ? to_string(*q_prime) : std::string("?")) << "\n";
  }
}

inline ConstructionCertificate ConstructionCertificate::parse(std::istream &is, const std::string &name) {
  ConstructionCertificate c;
  ChowlaFactor *cur = nullptr;
  std::string line;
  std::size_t lineno = 0;
  auto err = [&](const std::string &msg) { fail(ErrorKind::Parse, name + ":" + std::to_string(lineno) + ": " + msg); };
  auto u64_list = [&](const std::string &v) {
    std::vector<u64> out;
    std::istringstream ss(v);
    std::string tok;
    while (ss >> tok) {
      u64 x;
      if (!detail::parse_u64(tok, x)) err("bad integer '" + tok + "'");
      out.push_back(x);
    }
    return out;
  };
  auto one_u64 = [&](const std::string &v) {
    u64 x;
    if (!detail::parse_u64(v, x)) err("bad integer '" + v + "'");
    return x;
  };
  auto boolean = [&](const std::string &v) {
    if (v == "true") return true;
    if (v == "false") return false;
    err("expected true or false");
    return false;
  };
  auto big = [&](const std::string &v) {
    try {
      return parse_bigint(v);
    } catch (const Error &) {
      err("bad integer '" + v + "'");
    }
    return BigInt{};
  };
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (lineno == 1 && line == "# racebias chowla certificate v1") header = true;
      continue;
    }
    if (line.front() == '[') {
      if (line == "[extra]") {
        c.extra.emplace();
        cur = &*c.extra;
      } else if (line.rfind("[factor ", 0) == 0) {
        c.factors.emplace_back();
        cur = &c.factors.back();
      } else {
        err("unknown section " + line);
      }
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) err("expected 'key: value'");
    const std::string key = detail::trim(line.substr(0, colon)), val = detail::trim(line.substr(colon + 1));
    if (cur) {
      if (key == "tuple") cur->tuple = u64_list(val);
      else if (key == "residue") cur->residue = big(val);
      else if (key == "prime") cur->prime = big(val);
      else if (key == "steps") cur->steps = one_u64(val);
      else if (key == "relaxed") cur->relaxed = boolean(val);
      else if (key == "q_prime" && cur == (c.extra ? &*c.extra : nullptr)) c.q_prime = big(val);
      else err("unknown key '" + key + "'");
      continue;
    }
    if (key == "n") c.n = one_u64(val);
    else if (key == "f_value") {
      if (!detail::parse_double(val, c.f_value)) err("bad number");
    } else if (key == "seed") c.seed = one_u64(val);
    else if (key == "r_n") c.r_n = one_u64(val);
    else if (key == "r_overridden") c.r_overridden = boolean(val);
    else if (key == "base_primes") c.base_primes = u64_list(val);
    else if (key == "Q") c.Q = big(val);
    else if (key == "q") c.q = big(val);
    else err("unknown key '" + key + "'");
  }
  if (!header) fail(ErrorKind::Parse, name + ": missing certificate header");
  return c;
}

struct LeastPrimeReport {
  BigInt q;
  std::optional<u64> Phi;  // least prime that is a square mod q
  std::optional<u64> Psi;  // least prime that is not
  u64 ceiling;
};

/// Scans primes p <= ceiling not dividing q; p is a square mod q iff
/// (p | l) = +1 for every prime l | q.
inline LeastPrimeReport least_qr_nr(const BigInt &q, const std::vector<BigInt> &factors, u64 ceiling = kDefaultLinnikCeiling) {
  if (q < 3 || !boost::multiprecision::bit_test(q, 0))
    fail(ErrorKind::UnsupportedModulus, "least_qr_nr needs an odd modulus >= 3");
  BigInt prod = 1;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (factors[i] == factors[j]) fail(ErrorKind::UnsupportedModulus, "modulus is not square-free");
    prod *= factors[i];
  }
  if (prod != q) fail(ErrorKind::Validation, "factorisation does not multiply to q");
  LeastPrimeReport r{q, std::nullopt, std::nullopt, ceiling};
  const PrimeTable P = sieve(ceiling);
  for (u64 p : P.primes()) {
    if (q % p == 0) continue;
    bool square = true;
    for (const auto &l : factors) square = square && jacobi(BigInt(p), l) == 1;
    if (square && !r.Phi) r.Phi = p;
    if (!square && !r.Psi) r.Psi = p;
    if (r.Phi && r.Psi) break;
  }
  return r;
}

inline LeastPrimeReport least_qr_nr(u64 q, u64 ceiling = kDefaultLinnikCeiling) {
  if (q < 3 || q % 2 == 0) fail(ErrorKind::UnsupportedModulus, "least_qr_nr needs an odd modulus >= 3");
  std::vector<BigInt> f;
  for (const auto &pp : factorize(q)) {
    if (pp.exponent > 1) fail(ErrorKind::UnsupportedModulus, std::to_string(q) + " is not square-free");
    f.emplace_back(pp.prime);
  }
  return least_qr_nr(BigInt(q), f, ceiling);
}

struct ConjectureDiagnostic {
  double rho;        // number of square roots of 1 mod q
  double log_rad;
  double ratio;      // rho / log rad
  double envelope;   // rho / log rad + log rho
};

/// `factors` lists each prime of q with its exponent.
inline ConjectureDiagnostic conjecture_diagnostic(const std::vector<std::pair<BigInt, unsigned>> &factors) {
  double rho = 1.0, log_rad = 0.0;
  for (const auto &[p, e] : factors) {
    if (e == 0) continue;
    log_rad += std::log(static_cast<double>(p));
    if (p == 2) rho *= e == 1 ? 1.0 : (e == 2 ? 2.0 : 4.0);
    else rho *= 2.0;
  }
  if (!(log_rad > 0.0)) fail(ErrorKind::InvalidModulus, "modulus must be > 1");
  return {rho, log_rad, rho / log_rad, rho / log_rad + std::log(rho)};
}

inline ConjectureDiagnostic conjecture_diagnostic(u64 q) {
  std::vector<std::pair<BigInt, unsigned>> f;
  for (const auto &pp : factorize(q)) f.emplace_back(BigInt(pp.prime), pp.exponent);
  return conjecture_diagnostic(f);
}

inline ConjectureDiagnostic conjecture_diagnostic(const std::vector<BigInt> &squarefree_factors) {
  std::vector<std::pair<BigInt, unsigned>> f;
  for (const auto &p : squarefree_factors) f.emplace_back(p, 1u);
  return conjecture_diagnostic(f);
}

}  // namespace racebias
