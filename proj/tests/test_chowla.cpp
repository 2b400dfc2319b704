#include <gtest/gtest.h>

#include <chrono>
#include <sstream>

#include "racebias/chowla.hpp"
#include "racebias/residue.hpp"

using namespace racebias;

namespace {

// x is a square mod m (gcd(x, m) = 1) by direct enumeration
bool is_square_mod(u64 x, u64 m) {
  for (u64 y = 1; y < m; ++y)
    if (y * y % m == x % m) return true;
  return false;
}

int legendre_euler(u64 a, u64 p) {
  const u64 v = powmod(a % p, (p - 1) / 2, p);
  return v == 0 ? 0 : (v == 1 ? 1 : -1);
}

}  // namespace

TEST(Primality, AgreesWithU64Test) {
  for (u64 n = 0; n < 20000; ++n) EXPECT_EQ(is_probable_prime(BigInt(n)), is_prime_u64(n)) << n;
  // Carmichael numbers and strong pseudoprimes to several bases
  for (u64 n : {561ULL, 1105ULL, 2047ULL, 3215031751ULL, 3825123056546413051ULL}) EXPECT_FALSE(is_probable_prime(BigInt(n)));
  EXPECT_TRUE(is_probable_prime(BigInt("170141183460469231731687303715884105727")));  // 2^127 - 1
  EXPECT_FALSE(is_probable_prime(BigInt("170141183460469231731687303715884105727") * 3));
  const BigInt big = BigInt("3317044064679887385961981");  // first strong pseudoprime to bases 2..37
  EXPECT_FALSE(is_probable_prime(big));
  EXPECT_TRUE(is_probable_prime(BigInt("618970019642690137449562111")));  // 2^89 - 1
}

TEST(Primality, JacobiMatchesSmallVersionAndEuler) {
  for (u64 n = 3; n < 200; n += 2)
    for (i64 a = -50; a < 250; ++a) EXPECT_EQ(jacobi(BigInt(a), BigInt(n)), jacobi(a, n));
  for (u64 p : {3ULL, 5ULL, 73ULL, 101ULL})
    for (u64 a = 1; a < p; ++a) EXPECT_EQ(jacobi(BigInt(a), BigInt(p)), legendre_euler(a, p));
  EXPECT_THROW(jacobi(BigInt(3), BigInt(10)), Error);
}

TEST(Chowla, RRule) {
  EXPECT_EQ(chowla_r(1, 1.0), 1u);  // log 1 = 0, no solution
  EXPECT_EQ(chowla_r(2, 1.0), 1u);  // 2 log 2 < 2
  EXPECT_EQ(chowla_r(3, 1.0), 3u);
  for (u64 n : {3ULL, 10ULL, 50ULL})
    for (double f : {1.0, 5.0, 100.0}) {
      const double t = static_cast<double>(n) * std::log(static_cast<double>(n)) * f;
      const double r = static_cast<double>(chowla_r(n, f));
      EXPECT_LE(std::exp2(r) / r, t + 1e-9);
      EXPECT_GT(std::exp2(r + 1) / (r + 1), t);
    }
}

TEST(Chowla, FirstModulus) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = construct_q(1, 1.0);
  EXPECT_EQ(c.Q, 24);
  EXPECT_EQ(c.r_n, 1u);
  ASSERT_EQ(c.factors.size(), 1u);
  EXPECT_EQ(c.factors[0].residue, 1);
  EXPECT_EQ(c.q, 73);
  EXPECT_FALSE(c.factors[0].relaxed);
  EXPECT_EQ(jacobi(BigInt(2), c.q), 1);
  EXPECT_EQ(jacobi(BigInt(3), c.q), 1);
  EXPECT_TRUE(is_square_mod(2, 73) && is_square_mod(3, 73));
  const auto lp = least_qr_nr(c.q, c.factorization());
  EXPECT_EQ(lp.Psi, 5u);
  EXPECT_EQ(lp.Phi, 2u);
  EXPECT_TRUE(verify_certificate(c).ok);

  const auto c2 = construct_q_prime(c);
  ASSERT_TRUE(c2.extra && c2.q_prime);
  EXPECT_EQ(c2.extra->residue, 5);
  EXPECT_EQ(c2.extra->prime, 5);
  EXPECT_EQ(*c2.q_prime, 365);
  EXPECT_EQ(jacobi(BigInt(2), BigInt(365)), -1);
  EXPECT_EQ(jacobi(BigInt(3), BigInt(365)), -1);
  EXPECT_FALSE(is_square_mod(2, 365));
  EXPECT_FALSE(is_square_mod(3, 365));
  const auto lp2 = least_qr_nr(*c2.q_prime, c2.factorization_prime());
  EXPECT_EQ(lp2.Psi, 2u);
  ASSERT_TRUE(lp2.Phi);
  EXPECT_GT(*lp2.Phi, 3u);
  const auto v = verify_certificate(c2);
  EXPECT_TRUE(v.ok) << (v.failures.empty() ? "" : v.failures[0]);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 10.0);
}

TEST(Chowla, SecondModulusAllTuples) {
  // |S_2| = (3-1)/2 (5-1)/2 = 2 tuples
  ChowlaOptions opt;
  opt.r_override = 2;
  const auto c = construct_q(2, 1.0, opt);
  EXPECT_EQ(c.Q, 120);
  ASSERT_EQ(c.factors.size(), 2u);
  for (const auto &f : c.factors) {
    EXPECT_EQ(f.residue % 8, 1);
    for (u64 p : {2ULL, 3ULL, 5ULL}) EXPECT_EQ(jacobi(BigInt(p), f.prime), 1) << f.prime;
    EXPECT_TRUE(is_square_mod(static_cast<u64>(f.residue % 3), 3));
    EXPECT_TRUE(is_square_mod(static_cast<u64>(f.residue % 5), 5));
  }
  EXPECT_NE(c.factors[0].tuple, c.factors[1].tuple);
  EXPECT_TRUE(verify_certificate(c).ok);
  opt.r_override = 3;
  try {
    construct_q(2, 1.0, opt);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
}

TEST(Chowla, OverrideForcesSingleFactor) {
  ChowlaOptions opt;
  opt.r_override = 1;
  const auto c = construct_q(4, 1000.0, opt);
  EXPECT_EQ(c.factors.size(), 1u);
  EXPECT_EQ(c.q, c.factors[0].prime);
  EXPECT_TRUE(verify_certificate(c).ok);
}

TEST(Chowla, ForcedBoundsAndSizeLaw) {
  for (u64 n : {1ULL, 2ULL, 3ULL}) {
    const auto c = construct_q(n, 1.0);
    const auto c2 = construct_q_prime(c);
    const u64 pn = c.base_primes.back();
    const auto lq = least_qr_nr(c.q, c.factorization());
    const auto lq2 = least_qr_nr(*c2.q_prime, c2.factorization_prime());
    ASSERT_TRUE(lq.Psi && lq2.Phi);
    EXPECT_GT(*lq.Psi, pn);
    EXPECT_GT(*lq2.Phi, pn);
    const double ratio = std::log(static_cast<double>(c.q)) / (static_cast<double>(c.r_n) * std::log(static_cast<double>(c.Q)));
    EXPECT_GE(ratio, 0.25) << n;
    EXPECT_LE(ratio, 4.0) << n;
    EXPECT_TRUE(verify_certificate(c2).ok);
  }
}

TEST(Chowla, Determinism) {
  ChowlaOptions opt;
  opt.seed = 17;
  std::ostringstream a, b, c;
  construct_q(4, 50.0, opt).write(a);
  construct_q(4, 50.0, opt).write(b);
  opt.seed = 18;
  construct_q(4, 50.0, opt).write(c);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

TEST(Chowla, CertificateRoundTripAndTamper) {
  ChowlaOptions opt;
  opt.seed = 3;
  const auto c = construct_q_prime(construct_q(3, 1.0, opt));
  std::ostringstream os;
  c.write(os);
  std::istringstream is(os.str());
  const auto back = ConstructionCertificate::parse(is);
  std::ostringstream os2;
  back.write(os2);
  EXPECT_EQ(os.str(), os2.str());
  EXPECT_TRUE(verify_certificate(back).ok);

  auto t1 = back;
  t1.factors[0].residue += 1;
  EXPECT_FALSE(verify_certificate(t1).ok);
  auto t2 = back;
  t2.factors[0].prime += t2.Q;
  EXPECT_FALSE(verify_certificate(t2).ok);
  auto t3 = back;
  t3.extra->residue += 8;
  EXPECT_FALSE(verify_certificate(t3).ok);
  auto t4 = back;
  t4.q += 2;
  EXPECT_FALSE(verify_certificate(t4).ok);
  auto t5 = back;
  t5.factors[0].tuple[0] = 2;
  EXPECT_FALSE(verify_certificate(t5).ok);

  std::istringstream bad("# racebias chowla certificate v1\nn: x\n");
  try {
    ConstructionCertificate::parse(bad, "cert.txt");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("cert.txt:2"), std::string::npos);
  }
}

TEST(Chowla, LinnikCeiling) {
  ChowlaOptions opt;
  opt.ceiling = 1;
  // progression 1 mod 24 above sqrt 24: 25 is composite, so one step fails;
  // 1 itself is not prime either
  try {
    construct_q(1, 1.0, opt);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::LinnikSearch);
    EXPECT_EQ(e.exit_code(), 3);
  }
}

TEST(LeastPrimes, SmallModuli) {
  const auto r3 = least_qr_nr(3);
  EXPECT_EQ(r3.Phi, 7u);
  EXPECT_EQ(r3.Psi, 2u);
  const auto r73 = least_qr_nr(73);
  EXPECT_EQ(r73.Phi, 2u);
  EXPECT_EQ(r73.Psi, 5u);
  EXPECT_EQ(least_qr_nr(365).Psi, 2u);
  // brute-force oracle over odd square-free moduli
  for (u64 q = 3; q < 400; q += 2) {
    if (!is_squarefree(q)) {
      EXPECT_THROW(least_qr_nr(q), Error);
      continue;
    }
    const auto r = least_qr_nr(q, 1000);
    std::optional<u64> phi, psi;
    for (u64 p = 2; p < 1000; ++p) {
      if (!is_prime_u64(p) || q % p == 0) continue;
      if (is_square_mod(p, q)) {
        if (!phi) phi = p;
      } else if (!psi) {
        psi = p;
      }
    }
    EXPECT_EQ(r.Phi, phi) << q;
    EXPECT_EQ(r.Psi, psi) << q;
  }
  try {
    least_qr_nr(12);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedModulus);
  }
}

TEST(Conjecture, Diagnostic) {
  const auto d = conjecture_diagnostic(105);
  EXPECT_EQ(d.rho, 8.0);
  EXPECT_NEAR(d.log_rad, std::log(105.0), 1e-14);
  EXPECT_NEAR(d.ratio, 1.719, 1e-3);
  EXPECT_NEAR(d.envelope, d.ratio + std::log(8.0), 1e-14);
  EXPECT_EQ(conjecture_diagnostic(73).rho, 2.0);
  // agrees with the unit-group count
  for (u64 q = 3; q < 600; ++q) EXPECT_EQ(conjecture_diagnostic(q).rho, static_cast<double>(rho(q))) << q;
  const auto a = conjecture_diagnostic(std::vector<BigInt>{73});
  const auto b = conjecture_diagnostic(std::vector<BigInt>{73, 97});
  EXPECT_EQ(b.rho, 2.0 * a.rho);
  EXPECT_NEAR(b.log_rad, a.log_rad + std::log(97.0), 1e-13);
}
