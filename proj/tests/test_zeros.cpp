#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "racebias/zeros.hpp"

using namespace racebias;

namespace {

// Reference values below were produced with an arbitrary-precision library
// (30 digits) and are frozen here.
void expect_close(cplx got, cplx want, double tol) {
  EXPECT_NEAR(got.real(), want.real(), tol);
  EXPECT_NEAR(got.imag(), want.imag(), tol);
}

// Power series for J0, used as an independent oracle for small arguments.
double j0_series(double x) {
  long double term = 1.0L, sum = 1.0L;
  const long double q = -(static_cast<long double>(x) * x) / 4.0L;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    sum += term;
  }
  return static_cast<double>(sum);
}

DirichletCharacter primitive(u64 q, u64 label) {
  auto tab = character_table(q);
  return tab->chars[tab->index_of_label(label)];
}

}  // namespace

TEST(Special, LogGamma) {
  expect_close(log_gamma({0.25, 50.0}), {-78.5988804327018425, 145.208659524257228}, 1e-10);
  expect_close(log_gamma({0.75, 0.1}), {0.190652969941031956, -0.107710776632443262}, 1e-13);
  expect_close(log_gamma({3.0, 200.0}), {-299.994470912060640, 863.575047834560062}, 1e-9);
  EXPECT_NEAR(log_gamma({5.0, 0.0}).real(), std::log(24.0), 1e-13);
  EXPECT_NEAR(log_gamma({0.5, 0.0}).real(), 0.5 * std::log(kPi), 1e-13);
  EXPECT_THROW(log_gamma({-1.0, 0.0}), Error);
}

TEST(Special, HurwitzZeta) {
  expect_close(hurwitz_zeta({0.5, 100.0}, 0.3), {0.558735594632740873, -1.09677251190441326}, 1e-11);
  expect_close(hurwitz_zeta({2.0, 1.0}, 1.0), {1.15035570325490267, -0.437530865919607881}, 1e-12);
  EXPECT_NEAR(hurwitz_zeta({2.0, 0.0}, 1.0).real(), kPi * kPi / 6.0, 1e-13);
  EXPECT_THROW(hurwitz_zeta({1.0, 0.0}, 0.5), Error);
  EXPECT_THROW(hurwitz_zeta({0.5, 1.0}, 0.0), Error);
}

TEST(Special, BesselJ0) {
  for (double x = 0.0; x <= 12.0; x += 0.173) EXPECT_NEAR(bessel_j0(x), j0_series(x), 1e-12) << x;
  EXPECT_EQ(bessel_j0(0.0), 1.0);
  EXPECT_NEAR(bessel_j0(2.404825557695773), 0.0, 1e-14);
  EXPECT_NEAR(bessel_j0(-1.5), bessel_j0(1.5), 0.0);
  // two-term Hankel asymptotics
  for (double x : {200.0, 1000.0}) {
    const double c = x - kPi / 4;
    EXPECT_NEAR(bessel_j0(x), std::sqrt(2.0 / (kPi * x)) * (std::cos(c) + std::sin(c) / (8.0 * x)), 2e-7);
  }
}

TEST(LFunction, ValuesMatchReference) {
  LFunction L4(primitive(4, 3));
  expect_close(L4({0.5, 10.0}), {0.0277689526169027705, -0.443060675593740767}, 1e-11);
  LFunction L3(primitive(3, 2));
  expect_close(L3({0.5, 7.3}), {0.223467062908675579, -0.814362068516433984}, 1e-11);
  LFunction L5(primitive(5, 2));  // chi(2) = i
  EXPECT_NEAR(std::abs(primitive(5, 2)(2) - cplx(0, 1)), 0.0, 1e-15);
  expect_close(L5({0.5, 3.0}), {1.95568028443658708, 0.140812073443243364}, 1e-11);
  expect_close(L5({0.5, 40.0}), {-0.915872628340621556, -1.25468624818182941}, 1e-10);
}

TEST(LFunction, RejectsImprimitive) {
  auto tab = character_table(12);
  // label 5 mod 12 is induced from conductor 3
  const auto &chi = tab->chars[tab->index_of_label(5)];
  ASSERT_FALSE(chi.is_primitive());
  try {
    LFunction L(chi);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::MustBePrimitive);
  }
  EXPECT_THROW(compute_zeros(chi, 10.0), Error);
}

TEST(LFunction, RotationIsRealForRealCharacters) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 200.0);
  for (auto [q, label] : {std::pair<u64, u64>{4, 3}, {3, 2}, {8, 3}, {8, 5}, {5, 4}}) {
    LFunction L(primitive(q, label));
    for (int i = 0; i < 100; ++i) {
      const cplx z = L.rotated(U(rng));
      EXPECT_LE(std::abs(z.imag()), 1e-8 * std::max(1.0, std::abs(z.real()))) << q << "," << label;
    }
  }
}

TEST(LFunction, RotationIsRealForComplexCharacters) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 100.0);
  for (auto [q, label] : {std::pair<u64, u64>{5, 2}, {7, 3}, {13, 2}}) {
    LFunction L(primitive(q, label));
    EXPECT_NEAR(std::abs(L.root_number()), 1.0, 1e-12);
    for (int i = 0; i < 50; ++i) {
      const cplx z = L.rotated(U(rng));
      EXPECT_LE(std::abs(z.imag()), 1e-8 * std::max(1.0, std::abs(z.real())));
    }
  }
}

TEST(ComputeZeros, Mod4Reference) {
  const auto r = compute_zeros(primitive(4, 3), 30.0);
  const std::vector<double> want = {6.020948904697597, 10.24377030416655, 12.98809801231242, 16.34260710458722,
                                    18.29199319612353, 21.45061134398346, 23.27837652045953, 25.72875642508873,
                                    28.35963434302533, 29.65638401459315};
  ASSERT_EQ(r.ordinates.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(r.ordinates[i], want[i], 1e-8);
  EXPECT_FALSE(r.count_flagged);
}

TEST(ComputeZeros, ComplexCharacterMod5) {
  const auto r = compute_zeros(primitive(5, 2), 20.0);
  const std::vector<double> want = {6.183578195450854, 8.457229174423231, 12.67494641701136,
                                    14.82502557032843, 17.33780210685304, 18.99858804168614};
  ASSERT_EQ(r.ordinates.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(r.ordinates[i], want[i], 1e-8);
}

TEST(ComputeZeros, Mod3CountAgainstMainTerm) {
  const auto r = compute_zeros(primitive(3, 2), 50.0);
  EXPECT_EQ(r.ordinates.size(), 17u);
  EXPECT_NEAR(r.ordinates[0], 8.03973715568, 1e-9);
  EXPECT_NEAR(r.main_term, 50.0 / (2 * kPi) * std::log(150.0 / (2 * kPi * std::exp(1.0))), 1e-12);
  EXPECT_LE(std::abs(r.residual), 3.0 * std::log(3.0 * 52.0));
}

TEST(ComputeZeros, EdgeCases) {
  EXPECT_TRUE(compute_zeros(primitive(4, 3), 0.0).ordinates.empty());
  EXPECT_THROW(compute_zeros(primitive(4, 3), 501.0), Error);
  EXPECT_THROW(compute_zeros(primitive(4, 3), -1.0), Error);
}

TEST(ComputeZeros, RiemannVonMangoldtResidualSmallConductors) {
  for (u64 q = 3; q <= 20; ++q) {
    auto tab = character_table(q);
    for (const auto &chi : tab->chars) {
      if (!chi.is_primitive() || chi.is_principal()) continue;
      const auto r = compute_zeros(chi, 60.0);
      EXPECT_LE(std::abs(r.residual), rvm_flag_bound(static_cast<double>(q), 60.0)) << q << "," << chi.label();
      for (std::size_t i = 1; i < r.ordinates.size(); ++i) EXPECT_GT(r.ordinates[i] - r.ordinates[i - 1], 1e-6);
    }
  }
}

TEST(ZeroStore, IngestFormat) {
  std::istringstream one("4,3,6.02094890\n");
  auto s = parse_zeros(one);
  EXPECT_EQ(s.size(), 1u);
  ASSERT_NE(s.find({4, 3}), nullptr);
  EXPECT_EQ(s.find({4, 3})->entries[0].source, ZeroSource::Ingested);

  std::istringstream empty("");
  EXPECT_TRUE(parse_zeros(empty).empty());

  std::istringstream unordered("# comment\n4,3,12.98809801231242\n4,3,6.020948904697597\n\n4,3,10.24377030416655\n");
  auto u = parse_zeros(unordered);
  const auto &e = u.find({4, 3})->entries;
  ASSERT_EQ(e.size(), 3u);
  EXPECT_LT(e[0].ordinate, e[1].ordinate);
  EXPECT_LT(e[1].ordinate, e[2].ordinate);
}

TEST(ZeroStore, IngestErrors) {
  std::istringstream bad("4,3,6.02\n4,3\n");
  try {
    parse_zeros(bad, "f");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("f:2"), std::string::npos);
  }
  std::istringstream neg("4,3,-6.02\n");
  try {
    parse_zeros(neg);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
  }
  std::istringstream junk("4,3,abc\n");
  EXPECT_THROW(parse_zeros(junk), Error);
}

TEST(ZeroStore, DedupPrefersIngested) {
  ZeroStore s;
  s.add({4, 3}, {{6.020948904697597, 1e-8, ZeroSource::Computed}}, 7.0);
  s.add({4, 3}, {{6.02094890, 1e-8, ZeroSource::Ingested}});
  const auto *z = s.find({4, 3});
  ASSERT_EQ(z->entries.size(), 1u);
  EXPECT_EQ(z->entries[0].source, ZeroSource::Ingested);
  EXPECT_DOUBLE_EQ(z->coverage(), 7.0);
}

TEST(ZeroStore, ImprimitiveLabelsMapToInducer) {
  std::istringstream in("12,7,6.020948904697597\n");  // chi_7 mod 12 is induced from chi_{-4}
  auto s = parse_zeros(in);
  EXPECT_NE(s.find({4, 3}), nullptr);
}

TEST(ZeroStore, WriteReadRoundTripAndCache) {
  ZeroStore s;
  const auto chi = primitive(4, 3);
  s.add_computed(chi, compute_zeros(chi, 20.0));
  std::stringstream io;
  s.write(io);
  auto back = parse_zeros(io);
  const auto *a = s.find({4, 3});
  const auto *b = back.find({4, 3});
  ASSERT_NE(b, nullptr);
  ASSERT_EQ(a->entries.size(), b->entries.size());
  for (std::size_t i = 0; i < a->entries.size(); ++i) EXPECT_NEAR(a->entries[i].ordinate, b->entries[i].ordinate, 1e-11);
  EXPECT_DOUBLE_EQ(b->coverage(), 20.0);

  const auto dir = std::filesystem::temp_directory_path() / "racebias_zero_cache_test";
  std::filesystem::remove_all(dir);
  ZeroCache cache(dir);
  ZeroStore st;
  const auto t = race_weight_two_class(4, 3, 1);
  ensure_zeros(st, t, 15.0, cache);
  EXPECT_TRUE(std::filesystem::exists(cache.file_for({4, 3})));
  ZeroStore again;
  ensure_zeros(again, t, 15.0, cache);
  EXPECT_EQ(again.find({4, 3})->entries.size(), st.find({4, 3})->entries.size());
  std::filesystem::remove_all(dir);
}

TEST(CountZeros, SupportSums) {
  ZeroStore s;
  const auto t4 = race_weight_two_class(4, 3, 1);
  ensure_zeros(s, t4, 30.0, std::nullopt);
  EXPECT_EQ(count_zeros(s, t4, 5.0).observed, 0u);
  EXPECT_EQ(count_zeros(s, t4, 10.0).observed, 1u);

  const auto t12 = race_weight_two_class(12, 1, 5);
  ensure_zeros(s, t12, 30.0, std::nullopt);
  std::size_t per_char = 0;
  for (std::size_t i : t12.support()) {
    const auto &chi = t12.table().chars[i];
    const auto tab = character_table(chi.conductor());
    per_char += compute_zeros(tab->chars[tab->index_of_label(chi.primitive_label())], 30.0).ordinates.size();
  }
  const auto rep = count_zeros(s, t12, 30.0);
  EXPECT_EQ(rep.observed, per_char);
  EXPECT_NEAR(rep.residual, static_cast<double>(rep.observed) - rep.main_term, 1e-12);

  try {
    count_zeros(s, t4, 40.0);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::Coverage);
  }
}

TEST(ZeroSums, ToySpectrum) {
  Spectrum sp{{4, 3, 1.0, {2.0}, 2.0}};
  const auto z = zero_sums(sp, false);
  EXPECT_NEAR(z.S2, 1.0 / 4.25, 1e-15);
  EXPECT_NEAR(z.S2, 0.2353, 5e-5);
  EXPECT_NEAR(z.S1, 1.0 / std::abs(cplx(0.5, 2.0) * cplx(1.5, 2.0)), 1e-15);
}

TEST(ZeroSums, Mod4WithTail) {
  ZeroStore s;
  const auto t = race_weight_two_class(4, 3, 1);
  ensure_zeros(s, t, 200.0, std::nullopt);
  const auto z = zero_sums(s, t, 200.0);
  EXPECT_TRUE(std::isfinite(z.S2));
  EXPECT_GT(z.tail_S2, 0.0);
  EXPECT_LT(z.tail_error, z.tail_S2);
  const auto st = weight_stats(t);
  EXPECT_NEAR(z.fitted_S2, z.S2 / (st.lambda * std::log(4.0)), 1e-14);
  EXPECT_LT(z.fitted_S2, 1.0);

  // the tail integral is close to the discrete sum it replaces
  const auto sp100 = spectrum(s, t, 100.0);
  const auto sp200 = spectrum(s, t, 200.0);
  const auto with_tail = zero_sums(sp100, true);
  const auto discrete = zero_sums(sp200, true);
  EXPECT_NEAR(with_tail.S2, discrete.S2, with_tail.tail_error + discrete.tail_error);

  EXPECT_THROW(zero_sums(s, t, 50.0), Error);
  try {
    zero_sums(s, t, 300.0);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientCoverage);
  }
}

TEST(ZeroSums, S2MonotoneForNonNegativeCoefficients) {
  ZeroStore s;
  const auto t = race_weight_qr_nr(5);
  ensure_zeros(s, t, 60.0, std::nullopt);
  auto sp = spectrum(s, t, 60.0);
  for (const auto &l : sp) ASSERT_GE(l.coefficient.real(), -1e-12);
  double prev = 0.0;
  for (double T = 5.0; T <= 60.0; T += 5.0) {
    const double cur = zero_sums(spectrum(s, t, T), false).S2;
    EXPECT_GE(cur, prev - 1e-15);
    prev = cur;
  }
}

TEST(ZeroPairSum, ToyAndEmpty) {
  const auto p = zero_pair_sum({10.0}, {20.0}, 5.0, 1.0, 4.0);
  EXPECT_NEAR(p.value, 1.0 / (200.0 * 11.0) + 1.0 / (200.0 * 31.0), 1e-16);
  EXPECT_NEAR(p.value, 0.000616, 5e-7);
  EXPECT_FALSE(p.bound_applicable);
  EXPECT_EQ(zero_pair_sum({10.0}, {20.0}, 25.0, 1.0, 4.0).value, 0.0);
}

TEST(ZeroPairSum, Mod4AgainstBound) {
  const auto z = compute_zeros(primitive(4, 3), 200.0).ordinates;
  const auto p = zero_pair_sum(z, z, 10.0, 10.0, 4.0);
  // direct double loop oracle
  double direct = 0.0;
  for (double a : z)
    for (double b : z) {
      if (a < 10.0 || b < 10.0) continue;
      direct += 1.0 / (a * b * (1.0 + 10.0 * std::abs(a - b))) + 1.0 / (a * b * (1.0 + 10.0 * (a + b)));
    }
  EXPECT_NEAR(p.value, direct, 1e-12);
  EXPECT_TRUE(p.bound_applicable);
  EXPECT_LT(p.value, p.bound);
}
