#pragma once

// Critical-line zeros of Dirichlet L-functions: evaluation through Hurwitz
// zeta, a sign-change zero finder on the rotated (real) L-function, a zero
// store with a text file format and on-disk cache, zero counting and the
// zero-sum diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "racebias/error.hpp"
#include "racebias/residue.hpp"
#include "racebias/text.hpp"
#include "racebias/special.hpp"

namespace racebias {

inline constexpr double kDefaultZeroCeiling = 500.0;
inline constexpr double kZeroDedupTolerance = 1e-7;
inline constexpr double kZeroSimplicityTolerance = 1e-6;
inline constexpr double kMinimumCoverage = 100.0;

/// L(s, chi) for a primitive character together with the rotation making it
/// real on the critical line.
class LFunction {
 public:
  explicit LFunction(const DirichletCharacter &chi) : q_(chi.modulus()), label_(chi.label()) {
    if (!chi.is_primitive() || chi.is_principal())
      fail(ErrorKind::MustBePrimitive, "character " + std::to_string(chi.label()) + " mod " + std::to_string(q_) +
                                           " is not primitive (conductor " + std::to_string(chi.conductor()) + ")");
    kappa_ = chi.parity() == 1 ? 0 : 1;
    values_.assign(q_, 0.0);
    cplx tau = 0.0;
    for (u64 a = 1; a < q_; ++a) {
      values_[a] = chi(static_cast<i64>(a));
      tau += values_[a] * std::polar(1.0, 2.0 * kPi * static_cast<double>(a) / static_cast<double>(q_));
    }
    const double sq = std::sqrt(static_cast<double>(q_));
    if (std::abs(std::abs(tau) - sq) > 1e-9 * sq) fail(ErrorKind::Precision, "Gauss sum modulus differs from sqrt(q)");
    const cplx ik = kappa_ ? cplx(0.0, 1.0) : cplx(1.0, 0.0);
    root_number_ = tau / (ik * sq);
    log_q_over_pi_ = std::log(static_cast<double>(q_) / kPi);
  }

  u64 modulus() const { return q_; }
  u64 label() const { return label_; }
  int kappa() const { return kappa_; }
  /// epsilon(chi) = tau(chi) / (i^kappa sqrt q), of modulus one.
  cplx root_number() const { return root_number_; }

  cplx operator()(cplx s) const {
    const double qd = static_cast<double>(q_);
    cplx sum = 0.0;
    for (u64 a = 1; a < q_; ++a) {
      if (values_[a] == 0.0) continue;
      sum += values_[a] * hurwitz_zeta(s, static_cast<double>(a) / qd);
    }
    return std::exp(-s * std::log(qd)) * sum;
  }

  /// Phase theta(t) with exp(i theta(t)) L(1/2 + it) real.
  double theta(double t) const {
    const double lg = log_gamma(cplx(0.5 * (0.5 + kappa_), 0.5 * t)).imag();
    return 0.5 * t * log_q_over_pi_ + lg - 0.5 * std::arg(root_number_);
  }

  /// exp(i theta(t)) L(1/2 + it); real up to rounding.
  cplx rotated(double t) const { return std::polar(1.0, theta(t)) * (*this)(cplx(0.5, t)); }
  double Z(double t) const { return rotated(t).real(); }

 private:
  u64 q_;
  u64 label_;
  int kappa_ = 0;
  std::vector<cplx> values_;
  cplx root_number_;
  double log_q_over_pi_ = 0.0;
};

/// (T / 2pi) log(q T / (2 pi e)).
inline double rvm_main_term(double q, double T) {
  if (T <= 0.0) return 0.0;
  return T / (2.0 * kPi) * std::log(q * T / (2.0 * kPi * std::exp(1.0)));
}

inline double rvm_flag_bound(double q, double T) { return 3.0 * std::log(q * (T + 2.0)); }

struct ZeroSearchResult {
  std::vector<double> ordinates;
  double T = 0.0;
  double main_term = 0.0;
  double residual = 0.0;
  bool count_flagged = false;  // |residual| > 3 log(q (T + 2))
};

struct ZeroSearchOptions {
  double ceiling = kDefaultZeroCeiling;
  double tolerance = 1e-10;
};

namespace detail {

template <class F>
double refine_root(const F &f, double a, double b, double fa, double fb, double tol) {
  // Illinois false position, falling back to bisection when it stalls.
  int side = 0;
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    double c = (a * fb - b * fa) / (fb - fa);
    if (!(c > a && c < b) || it % 4 == 3) c = 0.5 * (a + b);
    const double fc = f(c);
    if (!std::isfinite(fc))
      fail(ErrorKind::Precision, "non-finite L-value on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
    if (fc == 0.0) return c;
    if ((fc > 0) == (fb > 0)) {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
  }
  if (b - a > 100 * tol)
    fail(ErrorKind::Precision, "zero refinement did not converge on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
  return 0.5 * (a + b);
}

}  // namespace detail

/// All ordinates of zeros of L(1/2 + it, chi) with 0 < t <= T.
inline ZeroSearchResult compute_zeros(const DirichletCharacter &chi, double T, const ZeroSearchOptions &opt = {}) {
  LFunction L(chi);
  if (T < 0.0) fail(ErrorKind::OutOfRange, "T must be non-negative");
  if (T > opt.ceiling) fail(ErrorKind::OutOfRange, "T = " + std::to_string(T) + " exceeds the zero ceiling");
  ZeroSearchResult res;
  res.T = T;
  if (T == 0.0) return res;
  const double qd = static_cast<double>(chi.modulus());
  const double spacing = 2.0 * kPi / std::max(1.0, std::log(qd * std::max(T, 10.0) / (2.0 * kPi)));
  const double h = std::min(0.05, spacing / 10.0);
  const auto n = static_cast<std::size_t>(std::ceil(T / h));
  std::vector<double> ts(n + 1), zs(n + 1);
  auto Z = [&](double t) {
    const double z = L.Z(t);
    if (!std::isfinite(z)) fail(ErrorKind::Precision, "non-finite L-value at t = " + std::to_string(t));
    return z;
  };
  for (std::size_t i = 0; i <= n; ++i) {
    ts[i] = std::min(T, static_cast<double>(i) * h);
    zs[i] = Z(ts[i]);
  }
  auto roots_in = [&](double a, double b, double fa, double fb) {
    if (fa == 0.0) {
      if (a > 0.0) res.ordinates.push_back(a);
      return;
    }
    if ((fa > 0) != (fb > 0) && fb != 0.0) res.ordinates.push_back(detail::refine_root(Z, a, b, fa, fb, opt.tolerance));
  };
  for (std::size_t i = 0; i < n; ++i) roots_in(ts[i], ts[i + 1], zs[i], zs[i + 1]);
  if (zs[n] == 0.0) res.ordinates.push_back(ts[n]);
  // A close pair of zeros inside one step shows up as a local minimum of |Z|
  // without a sign change; resample such spots finely.
  for (std::size_t i = 1; i < n; ++i) {
    const bool same = (zs[i - 1] > 0) == (zs[i] > 0) && (zs[i] > 0) == (zs[i + 1] > 0);
    if (!same || !(std::abs(zs[i]) < std::abs(zs[i - 1]) && std::abs(zs[i]) < std::abs(zs[i + 1]))) continue;
    constexpr int kSub = 32;
    double pa = ts[i - 1], fa = zs[i - 1];
    for (int k = 1; k <= kSub; ++k) {
      const double pb = ts[i - 1] + (ts[i + 1] - ts[i - 1]) * k / kSub;
      const double fb = k == kSub ? zs[i + 1] : Z(pb);
      if (fb != 0.0 && (fa > 0) != (fb > 0)) res.ordinates.push_back(detail::refine_root(Z, pa, pb, fa, fb, opt.tolerance));
      pa = pb;
      fa = fb;
    }
  }
  std::sort(res.ordinates.begin(), res.ordinates.end());
  res.main_term = rvm_main_term(qd, T);
  res.residual = static_cast<double>(res.ordinates.size()) - res.main_term;
  res.count_flagged = std::abs(res.residual) > rvm_flag_bound(qd, T);
  return res;
}

enum class ZeroSource { Computed, Ingested };

struct ZeroEntry {
  double ordinate;
  double precision;
  ZeroSource source;
};

/// Zeros of one primitive character, sorted ascending.
struct CharacterZeros {
  u64 conductor = 0;
  u64 label = 0;
  std::vector<ZeroEntry> entries;
  double computed_to = 0.0;  // the finder has scanned (0, computed_to]

  double coverage() const { return std::max(computed_to, entries.empty() ? 0.0 : entries.back().ordinate); }
  std::vector<double> ordinates_upto(double T) const {
    std::vector<double> out;
    for (const auto &e : entries)
      if (e.ordinate <= T) out.push_back(e.ordinate);
    return out;
  }
  /// Adjacent ordinates closer than the simplicity tolerance (flag only).
  std::vector<double> near_coincidences() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < entries.size(); ++i)
      if (entries[i].ordinate - entries[i - 1].ordinate < kZeroSimplicityTolerance) out.push_back(entries[i].ordinate);
    return out;
  }
};

/// Key of a primitive character: (conductor, Conrey label mod conductor).
using CharKey = std::pair<u64, u64>;

inline CharKey char_key(const DirichletCharacter &chi) { return {chi.conductor(), chi.primitive_label()}; }

class ZeroStore {
 public:
  const std::map<CharKey, CharacterZeros> &characters() const { return chars_; }
  bool empty() const { return chars_.empty(); }
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto &[k, z] : chars_) n += z.entries.size();
    return n;
  }

  const CharacterZeros *find(const CharKey &key) const {
    auto it = chars_.find(key);
    return it == chars_.end() ? nullptr : &it->second;
  }

  /// Adds entries, collapsing duplicates within 1e-7 (ingested wins).
  void add(const CharKey &key, const std::vector<ZeroEntry> &entries, double computed_to = 0.0) {
    for (const auto &e : entries) {
      if (!(e.ordinate > 0.0) || !std::isfinite(e.ordinate))
        fail(ErrorKind::Validation, "ordinate must be positive, got " + std::to_string(e.ordinate));
    }
    auto &cz = chars_[key];
    cz.conductor = key.first;
    cz.label = key.second;
    cz.computed_to = std::max(cz.computed_to, computed_to);
    auto &v = cz.entries;
    v.insert(v.end(), entries.begin(), entries.end());
    std::stable_sort(v.begin(), v.end(), [](const ZeroEntry &a, const ZeroEntry &b) { return a.ordinate < b.ordinate; });
    std::vector<ZeroEntry> merged;
    for (const auto &e : v) {
      if (!merged.empty() && e.ordinate - merged.back().ordinate <= kZeroDedupTolerance) {
        if (e.source == ZeroSource::Ingested && merged.back().source != ZeroSource::Ingested) merged.back() = e;
        continue;
      }
      merged.push_back(e);
    }
    v = std::move(merged);
  }

  void add_computed(const DirichletCharacter &primitive, const ZeroSearchResult &r, double precision = 1e-8) {
    std::vector<ZeroEntry> es;
    for (double g : r.ordinates) es.push_back({g, precision, ZeroSource::Computed});
    add({primitive.modulus(), primitive.label()}, es, r.T);
  }

  void merge(const ZeroStore &other) {
    for (const auto &[k, z] : other.chars_) add(k, z.entries, z.computed_to);
  }

  /// "q,label,ordinate" lines, '#' comments; the computed range is kept in a
  /// "# computed q,label,T" comment so cached files remember their coverage.
  void write(std::ostream &os) const {
    char buf[96];
    os << "# racebias zeros v1\n";
    for (const auto &[k, z] : chars_) {
      if (z.computed_to > 0.0) {
        std::snprintf(buf, sizeof buf, "# computed %llu,%llu,%.6f\n", static_cast<unsigned long long>(k.first),
                      static_cast<unsigned long long>(k.second), z.computed_to);
        os << buf;
      }
      for (const auto &e : z.entries) {
        std::snprintf(buf, sizeof buf, "%llu,%llu,%.12f\n", static_cast<unsigned long long>(k.first),
                      static_cast<unsigned long long>(k.second), e.ordinate);
        os << buf;
      }
    }
  }

 private:
  std::map<CharKey, CharacterZeros> chars_;
};

/// Parses zero-file text. Labels of imprimitive characters are mapped to
/// their primitive inducer.
inline ZeroStore parse_zeros(std::istream &is, const std::string &name = "<stream>") {
  ZeroStore store;
  std::map<CharKey, std::vector<ZeroEntry>> pending;
  std::map<CharKey, double> computed;
  std::map<CharKey, CharKey> resolved;
  auto resolve = [&](u64 q, u64 label, std::size_t lineno) -> CharKey {
    const CharKey raw{q, label};
    if (auto it = resolved.find(raw); it != resolved.end()) return it->second;
    CharKey key;
    try {
      const auto tab = character_table(q);
      const auto &chi = tab->chars[tab->index_of_label(label % q)];
      if (chi.is_principal()) fail(ErrorKind::Validation, "principal character has no zero list");
      key = char_key(chi);
    } catch (const Error &e) {
      fail(ErrorKind::Parse, name + ":" + std::to_string(lineno) + ": " + e.what());
    }
    resolved[raw] = key;
    return key;
  };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string tag = "# computed ";
      if (t.rfind(tag, 0) == 0) {
        const auto f = detail::split_csv(t.substr(tag.size()));
        u64 q, l;
        double T;
        if (f.size() == 3 && detail::parse_u64(f[0], q) && detail::parse_u64(f[1], l) && detail::parse_double(f[2], T)) {
          auto &c = computed[resolve(q, l, lineno)];
          c = std::max(c, T);
        }
      }
      continue;
    }
    const auto f = detail::split_csv(t);
    u64 q, l;
    double g;
    if (f.size() != 3 || !detail::parse_u64(detail::trim(f[0]), q) || !detail::parse_u64(detail::trim(f[1]), l) ||
        !detail::parse_double(detail::trim(f[2]), g))
      fail(ErrorKind::Parse, name + ":" + std::to_string(lineno) + ": expected \"q,label,ordinate\"");
    if (!(g > 0.0))
      fail(ErrorKind::Validation, name + ":" + std::to_string(lineno) + ": ordinate must be positive");
    pending[resolve(q, l, lineno)].push_back({g, 1e-10, ZeroSource::Ingested});
  }
  for (auto &[k, v] : pending) store.add(k, v, computed.count(k) ? computed[k] : 0.0);
  for (auto &[k, T] : computed)
    if (!pending.count(k)) store.add(k, {}, T);
  return store;
}

inline ZeroStore ingest_zeros(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open zero file " + path.string());
  return parse_zeros(in, path.string());
}

/// On-disk cache: one file per primitive character.
class ZeroCache {
 public:
  explicit ZeroCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  /// Directory from RACEBIAS_ZERO_CACHE, if set.
  static std::optional<ZeroCache> from_environment() {
    if (const char *p = std::getenv("RACEBIAS_ZERO_CACHE"); p && *p) return ZeroCache(p);
    return std::nullopt;
  }

  std::filesystem::path file_for(const CharKey &k) const {
    return dir_ / ("zeros_" + std::to_string(k.first) + "_" + std::to_string(k.second) + ".txt");
  }

  std::optional<CharacterZeros> load(const CharKey &k) const {
    const auto f = file_for(k);
    if (!std::filesystem::exists(f)) return std::nullopt;
    auto s = ingest_zeros(f);
    if (const auto *z = s.find(k)) return *z;
    return std::nullopt;
  }

  void save(const CharKey &k, const CharacterZeros &z) const {
    std::filesystem::create_directories(dir_);
    ZeroStore s;
    s.add(k, z.entries, z.computed_to);
    const auto f = file_for(k);
    const auto tmp = f.string() + ".tmp";
    {
      std::ofstream out(tmp);
      s.write(out);
    }
    std::filesystem::rename(tmp, f);
  }

 private:
  std::filesystem::path dir_;
};

/// Makes sure every character in the support of t has zeros up to T in the
/// store, computing (or loading from cache) what is missing.
inline void ensure_zeros(ZeroStore &store, const RaceWeight &t, double T, const std::optional<ZeroCache> &cache,
                         const ZeroSearchOptions &opt = {}) {
  for (std::size_t i : t.support()) {
    const auto &chi = t.table().chars[i];
    const CharKey key = char_key(chi);
    if (const auto *z = store.find(key); z && z->coverage() >= T) continue;
    if (cache) {
      if (auto z = cache->load(key); z && z->coverage() >= T) {
        store.add(key, z->entries, z->computed_to);
        continue;
      }
    }
    const auto tab = character_table(key.first);
    const auto &prim = tab->chars[tab->index_of_label(key.second)];
    const auto r = compute_zeros(prim, T, opt);
    store.add_computed(prim, r);
    if (cache) cache->save(key, *store.find(key));
  }
}

/// One character's contribution: coefficient <t, chi> and its positive
/// ordinates (those of the primitive inducer).
struct SpectralLine {
  u64 conductor;
  u64 label;
  cplx coefficient;
  std::vector<double> ordinates;
  double coverage;
};

using Spectrum = std::vector<SpectralLine>;

/// Zeros of the support of t with 0 < gamma <= T.
inline Spectrum spectrum(const ZeroStore &store, const RaceWeight &t, double T) {
  Spectrum out;
  for (std::size_t i : t.support()) {
    const auto &chi = t.table().chars[i];
    const CharKey key = char_key(chi);
    const auto *z = store.find(key);
    if (!z || z->coverage() < T)
      fail(ErrorKind::Coverage, "zeros of character " + std::to_string(chi.label()) + " mod " +
                                    std::to_string(chi.modulus()) + " (conductor " + std::to_string(key.first) +
                                    ") cover only up to " + std::to_string(z ? z->coverage() : 0.0));
    out.push_back({key.first, key.second, t.fourier()[i], z->ordinates_upto(T), T});
  }
  return out;
}

/// All ordinates of a spectrum merged in non-decreasing order (multiplicity kept).
inline std::vector<double> merged_ordinates(const Spectrum &sp) {
  std::vector<double> out;
  for (const auto &l : sp) out.insert(out.end(), l.ordinates.begin(), l.ordinates.end());
  std::sort(out.begin(), out.end());
  return out;
}

struct ZeroCountReport {
  double T;
  std::size_t observed;
  double main_term;
  double residual;
};

/// N(T, t) = sum over the support of N(T, chi), against
/// (|supp| T / 2pi) log(k T / 2 pi e) with log k the mean log conductor.
inline ZeroCountReport count_zeros(const ZeroStore &store, const RaceWeight &t, double T) {
  const auto sp = spectrum(store, t, T);
  std::size_t n = 0;
  double logk = 0.0;
  for (const auto &l : sp) {
    n += l.ordinates.size();
    logk += std::log(static_cast<double>(l.conductor));
  }
  logk /= static_cast<double>(sp.size());
  const double main = T > 0.0 ? static_cast<double>(sp.size()) * T / (2.0 * kPi) *
                                    (logk + std::log(T / (2.0 * kPi * std::exp(1.0))))
                              : 0.0;
  return {T, n, main, static_cast<double>(n) - main};
}

struct ZeroSums {
  double S1;
  double S2;
  double tail_S1;      // density-integral tail included in S1
  double tail_S2;
  double tail_error;   // bound on the error of the tail replacement
  double fitted_S1;    // S1 / (lambda log q)
  double fitted_S2;
};

namespace detail {

// integral_T^inf g(u) (1/2pi) log(q u / 2pi) du
template <class G>
double rvm_tail(double q, double T, G g) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double v) {
    const double u = T + v;
    return g(u) * std::log(q * u / (2.0 * kPi)) / (2.0 * kPi);
  };
  return integrator.integrate(f);
}

}  // namespace detail

/// S1 = |sum_chi <t,chi> sum_gamma 1/((1/2+i gamma)(3/2+i gamma))| and
/// S2 = |sum_chi <t,chi> sum_gamma 1/(1/4+gamma^2)| over the positive
/// ordinates of the spectrum; with_tail adds the density integral beyond
/// each line's coverage.
inline ZeroSums zero_sums(const Spectrum &sp, bool with_tail, double lambda = 0.0, double q = 0.0) {
  cplx s1 = 0.0, s2 = 0.0, t1 = 0.0, t2 = 0.0;
  double err = 0.0;
  for (const auto &l : sp) {
    cplx a1 = 0.0;
    double a2 = 0.0;
    for (double g : l.ordinates) {
      a1 += 1.0 / (cplx(0.5, g) * cplx(1.5, g));
      a2 += 1.0 / (0.25 + g * g);
    }
    s1 += l.coefficient * a1;
    s2 += l.coefficient * a2;
    if (with_tail) {
      const double qc = static_cast<double>(l.conductor), T = l.coverage;
      const double re = detail::rvm_tail(qc, T, [](double u) { return (0.75 - u * u) / ((0.25 + u * u) * (2.25 + u * u)); });
      const double im = detail::rvm_tail(qc, T, [](double u) { return -2.0 * u / ((0.25 + u * u) * (2.25 + u * u)); });
      const double r2 = detail::rvm_tail(qc, T, [](double u) { return 1.0 / (0.25 + u * u); });
      t1 += l.coefficient * cplx(re, im);
      t2 += l.coefficient * r2;
      // partial summation with |N - main| <= 3 log(q(u+2)) and |g| <= 1/u^2, |g'| <= 2/u^3
      boost::math::quadrature::exp_sinh<double> integrator;
      const double ibp = integrator.integrate(
          [&](double v) { return 3.0 * std::log(qc * (T + v + 2.0)) * 2.0 / std::pow(T + v, 3); });
      err += std::abs(l.coefficient) * (rvm_flag_bound(qc, T) / (T * T) + ibp);
    }
  }
  ZeroSums out{};
  out.S1 = std::abs(s1 + t1);
  out.S2 = std::abs(s2 + t2);
  out.tail_S1 = std::abs(t1);
  out.tail_S2 = std::abs(t2);
  out.tail_error = err;
  const double denom = lambda * std::log(q);
  out.fitted_S1 = denom > 0.0 ? out.S1 / denom : 0.0;
  out.fitted_S2 = denom > 0.0 ? out.S2 / denom : 0.0;
  return out;
}

/// Store-level zero sums; requires coverage of at least T_max >= 100.
inline ZeroSums zero_sums(const ZeroStore &store, const RaceWeight &t, double T_max) {
  if (T_max < kMinimumCoverage)
    fail(ErrorKind::InsufficientCoverage, "zero sums need coverage T >= 100, got " + std::to_string(T_max));
  Spectrum sp;
  try {
    sp = spectrum(store, t, T_max);
  } catch (const Error &e) {
    fail(ErrorKind::InsufficientCoverage, e.what());
  }
  const auto st = weight_stats(t);
  return zero_sums(sp, true, st.lambda, static_cast<double>(t.modulus()));
}

struct PairSum {
  double value;
  double bound;           // (log q)^2 ((log T)^2 / T + (log T)^3 / (Y T))
  bool bound_applicable;  // T > 3 and Y > 3
};

/// sum over gamma_chi >= T and |gamma_psi| >= T (psi ordinates taken with
/// both signs) of 1 / (|gamma_chi gamma_psi| (1 + Y |gamma_chi - gamma_psi|)).
inline PairSum zero_pair_sum(const std::vector<double> &chi_ordinates, const std::vector<double> &psi_ordinates,
                             double T, double Y, double q) {
  if (!(T > 0.0) || !(Y > 0.0)) fail(ErrorKind::OutOfRange, "zero_pair_sum needs T > 0 and Y > 0");
  CompensatedSum s;
  for (double gc : chi_ordinates) {
    if (gc < T) continue;
    for (double gp : psi_ordinates) {
      if (gp < T) continue;
      for (double g2 : {gp, -gp}) s += 1.0 / (gc * gp * (1.0 + Y * std::abs(gc - g2)));
    }
  }
  const double lq = std::log(q), lT = std::log(T);
  return {s.value(), lq * lq * (lT * lT / T + lT * lT * lT / (Y * T)), T > 3.0 && Y > 3.0};
}

}  // namespace racebias
