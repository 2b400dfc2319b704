#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "racebias/limiting.hpp"

using namespace racebias;

namespace {

double j0_series(double x) {
  double term = 1.0, s = 1.0;
  for (int k = 1; k < 60; ++k) {
    term *= -(x * x / 4.0) / (static_cast<double>(k) * k);
    s += term;
  }
  return s;
}

LimitModel toy(double tail = 0.0) {
  LimitModel m;
  m.amplitudes = {2.0 / std::sqrt(4.25)};
  m.tail_variance = tail;
  return m;
}

struct Race {
  RaceWeight t;
  ZeroStore store;
};

Race race(u64 q, i64 a, i64 b, double T) {
  Race r{race_weight_two_class(q, a, b), {}};
  ensure_zeros(r.store, r.t, T, std::nullopt);
  return r;
}

const Race &mod4_500() {
  static const Race r = race(4, 3, 1, 500.0);
  return r;
}

const LimitingDistribution &mod4_density() {
  static const LimitingDistribution d = invert_density(mod4_500().t, mod4_500().store, 500.0);
  return d;
}

}  // namespace

TEST(MuHat, TrivialAndToyValues) {
  EXPECT_EQ(mu_hat(toy(), 0.0), cplx(1.0, 0.0));
  const double x = 2.0 / std::sqrt(4.25);
  EXPECT_NEAR(std::abs(x - 0.9701425), 0.0, 1e-7);
  EXPECT_NEAR(mu_hat(toy(), 1.0).real(), j0_series(x), 1e-14);
  EXPECT_NEAR(mu_hat(toy(), 1.0).real(), 0.7782, 1e-4);
  EXPECT_EQ(mu_hat(toy(), 1.0).imag(), 0.0);
}

TEST(MuHat, SymmetryAndBound) {
  const auto &r = mod4_500();
  const auto m = limit_model(r.t, r.store, 500.0);
  EXPECT_EQ(mu_hat(m, 0.0), cplx(1.0, 0.0));
  const cplx p = mu_hat(m, 3.7), n = mu_hat(m, -3.7);
  EXPECT_NEAR(std::abs(p - std::conj(n)), 0.0, 1e-12);
  for (double xi = 0.0; xi < 20.0; xi += 0.37) EXPECT_LE(std::abs(mu_hat(m, xi)), 1.0 + 1e-15);
  // the phase is exp(-i <t,r> xi) = exp(2 i xi)
  const cplx v = mu_hat(m, 0.5);
  EXPECT_NEAR(std::arg(v), 1.0, 1e-12);
}

TEST(MuHat, TailFactorMatchesSmallArgumentExpansion) {
  // replacing J0 by exp(-x^2/4) for far zeros: compare the model with zeros
  // up to 500 against the model truncated at 200 plus its tail
  auto r = race(4, 3, 1, 500.0);
  const auto m500 = limit_model(r.t, r.store, 500.0, false);
  const auto m200 = limit_model(r.t, r.store, 200.0, true);
  const auto m200bare = limit_model(r.t, r.store, 200.0, false);
  for (double xi : {0.5, 1.0, 2.0}) {
    const double exact = std::abs(mu_hat(m500, xi));
    EXPECT_LT(std::abs(std::abs(mu_hat(m200, xi)) - exact), std::abs(std::abs(mu_hat(m200bare, xi)) - exact));
  }
}

TEST(MuHat, CoverageBelow100) {
  auto r = race(4, 3, 1, 60.0);
  try {
    mu_hat(r.t, r.store, 60.0, 1.0);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientCoverage);
  }
  try {
    mu_hat(r.t, r.store, 150.0, 1.0);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientCoverage);
  }
}

TEST(Density, Mod4Race) {
  const auto &d = mod4_density();
  EXPECT_NEAR(d.delta, 0.9959, 5e-3);
  EXPECT_GT(d.delta, 0.99);
  EXPECT_LT(d.delta, 1.0);
  EXPECT_NEAR(d.delta, d.delta_gil_pelaez, 1e-6);
  EXPECT_NEAR(d.integral, 1.0, 1e-4);
  for (double v : d.f) EXPECT_GE(v, -1e-8);
  EXPECT_DOUBLE_EQ(d.mean, 2.0);
  EXPECT_NEAR(d.mean_quadrature, d.mean, 1e-6);
  EXPECT_NEAR(d.variance_quadrature, d.variance, 1e-3 * d.variance);
  EXPECT_NEAR(d.bias, d.mean / std::sqrt(d.variance), 1e-15);
}

TEST(Density, AgreesWithMonteCarlo) {
  const auto &r = mod4_500();
  const auto m = limit_model(r.t, r.store, 500.0);
  const auto mc = random_model_delta(m, 1'000'000, 7);
  const auto &d = mod4_density();
  EXPECT_LE(std::abs(mc.delta - d.delta), 3.0 * mc.std_error + 1e-4);
  EXPECT_EQ(random_model_delta(m, 100'000, 7).delta, random_model_delta(m, 100'000, 7).delta);
}

TEST(Density, SignFlip) {
  const auto &r = mod4_500();
  const auto m = limit_model(r.t, r.store, 500.0);
  const auto a = invert_density(m);
  const auto b = invert_density(m.negated());
  EXPECT_NEAR(a.delta + b.delta, 1.0, 1e-6);
  EXPECT_NEAR(a.delta_gil_pelaez + b.delta_gil_pelaez, 1.0, 1e-6);
  // the weight-level negation gives the same measure
  const auto c = invert_density(r.t.negated(), r.store, 500.0);
  EXPECT_NEAR(c.delta, b.delta, 1e-12);
}

TEST(Density, ToyModel) {
  EXPECT_THROW(
      {
        try {
          invert_density(toy());
        } catch (const Error &e) {
          EXPECT_EQ(e.kind(), ErrorKind::GridInsufficient);
          throw;
        }
      },
      Error);
  const auto d = invert_density(toy(0.05));
  EXPECT_NEAR(d.delta, 0.5, 1e-6);
  EXPECT_NEAR(d.delta_gil_pelaez, 0.5, 1e-12);
  const std::size_t n = d.x.size();
  for (std::size_t i = 0; i < n / 2; ++i) EXPECT_NEAR(d.f[i], d.f[n - 1 - i], 1e-9);
  EXPECT_NEAR(d.integral, 1.0, 1e-4);
}

TEST(Density, TwoPipelineAgreement) {
  for (auto [q, a, b] : {std::tuple{3, 2, 1}, {4, 3, 1}, {5, 2, 1}, {8, 3, 1}}) {
    auto r = race(static_cast<u64>(q), a, b, 100.0);
    const auto m = limit_model(r.t, r.store, 100.0);
    const auto d = invert_density(m);
    const auto mc = random_model_delta(m, 200'000, 11);
    EXPECT_LE(std::abs(d.delta - mc.delta), 3.0 * mc.std_error + 1e-4) << q << " " << a << " " << b;
    EXPECT_NEAR(d.delta, d.delta_gil_pelaez, 1e-6);
    EXPECT_NEAR(d.integral, 1.0, 1e-4);
    EXPECT_NEAR(d.variance_quadrature, d.variance, 1e-3 * d.variance);
  }
}

TEST(MuHatL1, ToyDiverges) {
  try {
    mu_hat_l1(toy());
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridInsufficient);
  }
}

TEST(MuHatL1, Mod4BoundsDensity) {
  const auto &r = mod4_500();
  const auto l1 = mu_hat_l1(r.t, r.store, 500.0);
  EXPECT_TRUE(std::isfinite(l1.value));
  EXPECT_GT(l1.value, 0.0);
  EXPECT_GE(l1.density_bound, mod4_density().f_max);
  EXPECT_LT(l1.tail, 1e-9);
}

TEST(MuHatL1, MonotoneInZeros) {
  const auto &r = mod4_500();
  const auto full = limit_model(r.t, r.store, 500.0);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= 10; ++k) {
    const double step = 0.05;
    const auto v = mu_hat_l1(full.first_terms(k), step).value;
    EXPECT_LE(v, prev + 1e-12) << k;
    prev = v;
  }
}

TEST(Lipschitz, ToyAndCauchySchwarz) {
  EXPECT_NEAR(lipschitz_constant_D(toy()).truncated, 0.9701425, 1e-7);
  const auto &r = mod4_500();
  const auto D = lipschitz_constant_D(r.t, r.store, 200.0);
  EXPECT_GT(D.with_tail, D.truncated);
  double w = 0.0;
  for (const auto &l : spectrum(r.store, r.t, 200.0))
    for (double g : l.ordinates) w += 1.0 / (0.25 + g * g);
  // equality for a single character
  EXPECT_LE(D.truncated, 2.0 * weight_stats(r.t).lambda * std::sqrt(w) * (1.0 + 1e-12));
  EXPECT_NEAR(D.truncated, lipschitz_constant_D(limit_model(r.t, r.store, 200.0)).truncated, 1e-12);
}

TEST(Lipschitz, EmpiricalRatio) {
  const auto &r = mod4_500();
  const double T = 50.0;
  const auto model = build_model(r.t, r.store, T);
  const double D = lipschitz_constant_D(r.t, r.store, T).truncated;
  const std::size_t N = model.terms().size();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.0, 2.0 * kPi), small(-0.3, 0.3);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<cplx> z(N), w(N);
    double rho2 = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      const double th = U(rng);
      z[n] = std::polar(1.0, th);
      w[n] = std::polar(1.0, k % 2 ? U(rng) : th + small(rng));
      rho2 += std::norm(z[n] - w[n]);
    }
    worst = std::max(worst, std::abs(random_model_value(model, z) - random_model_value(model, w)) / std::sqrt(rho2));
  }
  EXPECT_LE(worst, D + 1e-9);
  // moving each phase along the tangent where b_n i z_n > 0, by |b_n| eps, attains D
  std::vector<cplx> z(N), w(N);
  const double eps = 1e-7;
  double rho2 = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const cplx b = model.terms()[n].b;
    z[n] = cplx(0.0, -1.0) * std::conj(b) / std::abs(b);
    w[n] = z[n] * std::polar(1.0, eps * std::abs(b));
    rho2 += std::norm(z[n] - w[n]);
  }
  EXPECT_NEAR(std::abs(random_model_value(model, z) - random_model_value(model, w)) / std::sqrt(rho2), D, 1e-6);
}

TEST(Eli, Threshold) {
  const auto e = eli_threshold(1.0, std::log(4.0), 2.0, 1.0);
  EXPECT_NEAR(e.X0, 1.873, 1e-3);
  EXPECT_NEAR(e.log_X0, std::pow(std::log(4.0), 2.0) * std::log(std::log(4.0)), 1e-14);
  EXPECT_THROW(eli_threshold(1.0, 1.0, 1.0, 1.0), Error);
  try {
    eli_threshold(1.0, 1.0, 0.5, 1.0);
  } catch (const Error &e2) {
    EXPECT_EQ(e2.kind(), ErrorKind::InvalidExponent);
  }
  const auto t = race_weight_two_class(4, 3, 1);
  const auto r = eli_threshold(t, 2.0, 1.0);
  EXPECT_EQ(r.support, 1.0);
  EXPECT_NEAR(r.log_k, std::log(4.0), 1e-15);
  EXPECT_GT(EliThreshold::envelope(weight_stats(t).C, 2.0, 1e6), 0.0);
}

TEST(Eli, EnvelopeShape) {
  const double C = 10.0;
  for (double A : {1.5, 2.0, 3.0}) {
    // decreasing once log X exceeds e^{4A}
    const double u0 = std::exp(4.0 * A);
    double prev = std::numeric_limits<double>::infinity();
    for (double u = u0; u < 1e3 * u0; u *= 1.7) {
      const double v = EliThreshold::envelope(C, A, std::exp(std::min(u, 700.0)));
      if (u > 700.0) break;
      EXPECT_LT(v, prev);
      prev = v;
    }
    // and increasing just above e^e
    EXPECT_LT(EliThreshold::envelope(C, A, std::exp(std::exp(1.0) + 0.1)), EliThreshold::envelope(C, A, std::exp(5.0)));
  }
}

TEST(Bias, Summary) {
  const auto &r = mod4_500();
  const auto b = bias_summary(r.t, r.store);
  EXPECT_DOUBLE_EQ(b.mean, 2.0);
  EXPECT_GT(b.variance, b.variance_truncated);
  EXPECT_NEAR(b.bias, b.mean / std::sqrt(b.variance), 1e-15);
  EXPECT_NEAR(b.skewes_envelope, b.bias * b.bias + b.log_C, 1e-12);

  const RaceWeight t2 = r.t.scaled(2.0);
  const auto b2 = bias_summary(t2, r.store);
  EXPECT_NEAR(b2.mean, 2.0 * b.mean, 1e-12);
  EXPECT_NEAR(std::sqrt(b2.variance), 2.0 * std::sqrt(b.variance), 1e-12);
  EXPECT_NEAR(b2.bias, b.bias, 1e-12);

  const auto l8 = race_weight_qr_nr(8);
  ZeroStore s8;
  ensure_zeros(s8, l8, 100.0, std::nullopt);
  EXPECT_NEAR(bias_summary(l8, s8).mean, -3.0, 1e-12);
}

TEST(Bracket, WithinDensityBound) {
  const auto &d = mod4_density();
  const auto l1 = mu_hat_l1(mod4_500().t, mod4_500().store, 500.0);
  for (double L : {10.0, 100.0}) {
    const auto br = lipschitz_bracket_density(d.x, d.f, L);
    EXPECT_LE(br.lower, d.delta + 1e-6);
    EXPECT_GE(br.upper, d.delta - 1e-6);
    EXPECT_LE(std::abs(d.delta - br.lower), l1.density_bound / (2.0 * L));
    EXPECT_LE(std::abs(d.delta - br.upper), l1.density_bound / (2.0 * L));
  }
}

TEST(W1Chain, TruncationAndCauchyDecay) {
  const auto &r = mod4_500();
  const PrimeTable P = sieve(1'000'000);
  WeightedCounts wc(P, r.t);
  const double y0 = std::log(2.0), X = std::log(1e6), step = 1e-3;
  std::vector<double> ev;
  for (double y = y0; y <= X; y += step) ev.push_back(race_error(y, wc.pi(std::exp(y))));
  const EmpiricalMeasure actual(ev);
  const double C = weight_stats(r.t).C;
  std::vector<EmpiricalMeasure> surrogate;
  for (double T : {50.0, 100.0, 200.0}) {
    surrogate.push_back(model_window_measure(build_model(r.t, r.store, T), y0, X, step));
    const double w = w1_line(surrogate.back(), actual);
    const double shape = C * (std::log(T) / std::sqrt(T) + 1.0 / std::sqrt(X));
    EXPECT_LE(w / shape, 10.0) << T;
  }
  const double w50_200 = w1_line(surrogate[0], surrogate[2]);
  const double w50_100 = w1_line(surrogate[0], surrogate[1]);
  const double w100_200 = w1_line(surrogate[1], surrogate[2]);
  EXPECT_LE(w50_200 / (C * (std::log(50.0) / std::sqrt(50.0) + std::log(200.0) / std::sqrt(200.0))), 10.0);
  EXPECT_LT(w100_200, w50_100);
}
