#pragma once

// The unit group (Z/qZ)^x, its Dirichlet characters under Conrey labelling,
// and race weights t: (Z/qZ)^x -> R orthogonal to the principal character.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "racebias/arith.hpp"
#include "racebias/error.hpp"

namespace racebias {

using cplx = std::complex<double>;

/// One cyclic factor of the unit group. `generator` is lifted to a residue
/// mod q that is 1 in every other prime-power component.
struct CyclicFactor {
  u64 prime_power;  // modulus of the component this factor lives in
  u64 local_generator;
  u64 generator;
  u64 order;
};

class UnitGroup {
 public:
  explicit UnitGroup(u64 q) : q_(q) {
    if (q < 3) fail(ErrorKind::InvalidModulus, "modulus must be >= 3, got " + std::to_string(q));
    factors_ = factorize(q);
    index_.assign(q, -1);
    for (u64 a = 1; a < q; ++a) {
      if (std::gcd(a, q) == 1) {
        index_[a] = static_cast<std::int64_t>(units_.size());
        units_.push_back(a);
      }
    }
    build_generators();
    build_logs();
  }

  u64 modulus() const { return q_; }
  u64 phi() const { return units_.size(); }
  const std::vector<u64> &units() const { return units_; }
  const std::vector<PrimePower> &factorization() const { return factors_; }
  const std::vector<CyclicFactor> &generators() const { return gens_; }
  /// Exponent of the group (lcm of the factor orders); every character value
  /// is a power of exp(2 pi i / exponent).
  u64 exponent() const { return exponent_; }

  std::optional<std::size_t> index_of(i64 a) const {
    const auto r = static_cast<u64>(((a % static_cast<i64>(q_)) + static_cast<i64>(q_)) % static_cast<i64>(q_));
    if (index_[r] < 0) return std::nullopt;
    return static_cast<std::size_t>(index_[r]);
  }

  /// Discrete logarithms of the unit at `unit_index` w.r.t. generators().
  std::span<const u64> logs(std::size_t unit_index) const {
    return {logs_.data() + unit_index * gens_.size(), gens_.size()};
  }

  std::size_t unit_of_logs(std::span<const u64> l) const {
    u64 a = 1;
    for (std::size_t j = 0; j < gens_.size(); ++j) a = mulmod(a, powmod(gens_[j].generator, l[j], q_), q_);
    return *index_of(static_cast<i64>(a));
  }

 private:
  u64 lift(u64 residue, const PrimePower &comp) const {
    std::vector<u64> res, mods;
    for (const auto &f : factors_) {
      mods.push_back(f.value);
      res.push_back(f.prime == comp.prime ? residue % f.value : 1 % f.value);
    }
    return crt(res, mods);
  }

  void build_generators() {
    for (const auto &f : factors_) {
      if (f.prime == 2) {
        if (f.exponent == 1) continue;
        gens_.push_back({f.value, f.value - 1, lift(f.value - 1, f), 2});
        if (f.exponent >= 3) gens_.push_back({f.value, 5, lift(5, f), f.value / 4});
      } else {
        const u64 g = least_primitive_root(f.value);
        gens_.push_back({f.value, g, lift(g, f), f.value / f.prime * (f.prime - 1)});
      }
    }
    exponent_ = 1;
    for (const auto &g : gens_) exponent_ = std::lcm(exponent_, g.order);
  }

  void build_logs() {
    logs_.assign(units_.size() * gens_.size(), 0);
    // per prime-power component, tabulate discrete logs of every local unit
    std::size_t gi = 0;
    for (const auto &f : factors_) {
      if (f.prime == 2 && f.exponent == 1) continue;
      const u64 m = f.value;
      if (f.prime == 2) {
        std::vector<u64> sign_log(m, 0), five_log(m, 0);
        if (f.exponent >= 3) {
          u64 x = 1;
          for (u64 k = 0; k < m / 4; ++k) {
            five_log[x] = k;
            five_log[m - x] = k;
            sign_log[m - x] = 1;
            x = x * 5 % m;
          }
        } else {
          sign_log[3] = 1;
        }
        for (std::size_t i = 0; i < units_.size(); ++i) {
          const u64 r = units_[i] % m;
          logs_[i * gens_.size() + gi] = sign_log[r];
          if (f.exponent >= 3) logs_[i * gens_.size() + gi + 1] = five_log[r];
        }
        gi += f.exponent >= 3 ? 2 : 1;
      } else {
        std::vector<u64> table(m, 0);
        u64 x = 1;
        for (u64 k = 0; k < gens_[gi].order; ++k) {
          table[x] = k;
          x = mulmod(x, gens_[gi].local_generator, m);
        }
        for (std::size_t i = 0; i < units_.size(); ++i) logs_[i * gens_.size() + gi] = table[units_[i] % m];
        ++gi;
      }
    }
  }

  u64 q_;
  std::vector<PrimePower> factors_;
  std::vector<u64> units_;
  std::vector<std::int64_t> index_;
  std::vector<CyclicFactor> gens_;
  std::vector<u64> logs_;
  u64 exponent_ = 1;
};

inline UnitGroup build_unit_group(u64 q) { return UnitGroup(q); }

/// exp(2 pi i numerator / order), kept exact.
struct RootOfUnity {
  u64 numerator;
  u64 order;

  cplx value() const {
    if (numerator == 0) return 1.0;
    if (2 * numerator == order) return -1.0;
    if (4 * numerator == order) return {0.0, 1.0};
    if (4 * numerator == 3 * order) return {0.0, -1.0};
    const double ang = 2.0 * std::numbers::pi * static_cast<double>(numerator) / static_cast<double>(order);
    return std::polar(1.0, ang);
  }
  bool is_real() const { return numerator == 0 || 2 * numerator == order; }
};

class DirichletCharacter {
 public:
  DirichletCharacter(std::shared_ptr<const UnitGroup> group, u64 label) : group_(std::move(group)), label_(label) {
    const auto &g = *group_;
    const auto li = g.index_of(static_cast<i64>(label));
    if (!li) fail(ErrorKind::InvalidClass, "character label must be a unit");
    const auto nlog = g.logs(*li);
    const u64 M = g.exponent();
    exps_.resize(g.phi());
    for (std::size_t i = 0; i < g.phi(); ++i) {
      const auto mlog = g.logs(i);
      u64 e = 0;
      for (std::size_t j = 0; j < g.generators().size(); ++j) {
        const u64 ord = g.generators()[j].order;
        e = (e + (nlog[j] * mlog[j] % ord) * (M / ord)) % M;
      }
      exps_[i] = e;
    }
    principal_ = label_ % g.modulus() == 1;
    real_ = true;
    for (u64 e : exps_) real_ = real_ && (2 * e) % M == 0;
    parity_ = exps_[*g.index_of(-1)] == 0 ? 1 : -1;
    conductor_ = compute_conductor();
  }

  u64 modulus() const { return group_->modulus(); }
  u64 label() const { return label_; }
  u64 conductor() const { return conductor_; }
  bool is_principal() const { return principal_; }
  bool is_real() const { return real_; }
  bool is_primitive() const { return conductor_ == modulus(); }
  /// chi(-1).
  int parity() const { return parity_; }
  const UnitGroup &group() const { return *group_; }

  /// Conrey label (modulo the conductor) of the primitive character inducing
  /// this one. Filled in by character_table().
  u64 primitive_label() const { return primitive_label_; }
  void set_primitive_label(u64 label) { primitive_label_ = label; }

  std::optional<RootOfUnity> exact(i64 a) const {
    const auto i = group_->index_of(a);
    if (!i) return std::nullopt;
    return RootOfUnity{exps_[*i], group_->exponent()};
  }
  RootOfUnity exact_at_index(std::size_t unit_index) const { return {exps_[unit_index], group_->exponent()}; }

  cplx operator()(i64 a) const {
    const auto r = exact(a);
    return r ? r->value() : cplx{0.0, 0.0};
  }
  cplx at_index(std::size_t unit_index) const { return exact_at_index(unit_index).value(); }

 private:
  u64 compute_conductor() const {
    const auto &g = *group_;
    const u64 q = g.modulus();
    for (u64 d = 1; d <= q; ++d) {
      if (q % d) continue;
      bool trivial = true;
      for (std::size_t i = 0; i < g.phi() && trivial; ++i)
        if (g.units()[i] % d == 1 % d && exps_[i] != 0) trivial = false;
      if (trivial) return d;
    }
    return q;
  }

  std::shared_ptr<const UnitGroup> group_;
  u64 label_;
  std::vector<u64> exps_;
  u64 conductor_ = 1;
  bool principal_ = false;
  bool real_ = false;
  int parity_ = 1;
  u64 primitive_label_ = 1;
};

/// All characters modulo q, ordered by Conrey label.
struct CharacterTable {
  std::shared_ptr<const UnitGroup> group;
  std::vector<DirichletCharacter> chars;

  u64 modulus() const { return group->modulus(); }
  std::size_t index_of_label(u64 label) const {
    for (std::size_t i = 0; i < chars.size(); ++i)
      if (chars[i].label() == label) return i;
    fail(ErrorKind::InvalidClass, "no character with label " + std::to_string(label));
  }
  std::size_t conjugate_index(std::size_t i) const {
    const u64 q = modulus();
    // Conrey labels: conj(chi_n) = chi_{n^{-1}}
    const u64 inv = powmod(chars[i].label(), group->phi() - 1, q);
    return index_of_label(inv);
  }
};

inline std::shared_ptr<const CharacterTable> character_table(u64 q) {
  auto group = std::make_shared<const UnitGroup>(q);
  auto table = std::make_shared<CharacterTable>();
  table->group = group;
  for (u64 n : group->units()) table->chars.emplace_back(group, n);
  // Locate each inducing primitive character by value matching. For odd
  // moduli this agrees with n mod d; 2-power parts need the search.
  std::map<u64, std::shared_ptr<const CharacterTable>> by_conductor;
  for (auto &chi : table->chars) {
    const u64 d = chi.conductor();
    if (d == q) {
      chi.set_primitive_label(chi.label());
      continue;
    }
    if (d < 3) {
      chi.set_primitive_label(1);
      continue;
    }
    auto &sub = by_conductor[d];
    if (!sub) sub = character_table(d);
    for (const auto &cand : sub->chars) {
      if (!cand.is_primitive()) continue;
      bool same = true;
      for (std::size_t i = 0; i < group->phi() && same; ++i) {
        const auto a = static_cast<i64>(group->units()[i]);
        const auto x = chi.exact_at_index(i);
        const auto y = *cand.exact(a);
        same = x.numerator * y.order == y.numerator * x.order;
      }
      if (same) {
        chi.set_primitive_label(cand.label());
        break;
      }
    }
  }
  return table;
}

inline std::vector<DirichletCharacter> characters(u64 q) { return character_table(q)->chars; }

/// <f, chi> = (1/phi(q)) sum_a f(a) conj(chi(a)) for f given per unit index.
inline cplx inner_product(std::span<const double> f, const DirichletCharacter &chi) {
  const auto n = f.size();
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) s += f[i] * std::conj(chi.at_index(i));
  return s / static_cast<double>(n);
}

/// A coefficient is treated as zero below this fraction of ||t||_inf.
inline constexpr double kFourierZeroTolerance = 1e-9;

class RaceWeight {
 public:
  /// `values` are indexed like table->group->units().
  RaceWeight(std::shared_ptr<const CharacterTable> table, std::vector<double> values)
      : table_(std::move(table)), values_(std::move(values)) {
    const auto &g = *table_->group;
    if (values_.size() != g.phi()) fail(ErrorKind::InvalidClass, "weight must have one value per unit");
    double sup = 0.0;
    for (double v : values_) sup = std::max(sup, std::abs(v));
    if (sup == 0.0) fail(ErrorKind::InvalidClass, "race weight must be non-zero");
    sup_ = sup;
    fourier_.reserve(table_->chars.size());
    for (const auto &chi : table_->chars) fourier_.push_back(inner_product(values_, chi));
    for (std::size_t i = 0; i < fourier_.size(); ++i) {
      const bool nonzero = std::abs(fourier_[i]) >= kFourierZeroTolerance * sup_;
      if (table_->chars[i].is_principal()) {
        if (nonzero) fail(ErrorKind::InvalidClass, "race weight must be orthogonal to the principal character");
        fourier_[i] = 0.0;
      } else if (nonzero) {
        support_.push_back(i);
      } else {
        fourier_[i] = 0.0;
      }
    }
  }

  u64 modulus() const { return table_->modulus(); }
  const CharacterTable &table() const { return *table_; }
  std::shared_ptr<const CharacterTable> table_ptr() const { return table_; }
  const std::vector<double> &values() const { return values_; }
  /// t(a) for any integer a; zero when gcd(a, q) > 1.
  double operator()(i64 a) const {
    const auto i = table_->group->index_of(a);
    return i ? values_[*i] : 0.0;
  }
  const std::vector<cplx> &fourier() const { return fourier_; }
  /// Character-table indices with non-zero coefficient.
  const std::vector<std::size_t> &support() const { return support_; }
  double sup_norm() const { return sup_; }

  RaceWeight negated() const {
    auto v = values_;
    for (auto &x : v) x = -x;
    return RaceWeight(table_, std::move(v));
  }
  RaceWeight scaled(double c) const {
    auto v = values_;
    for (auto &x : v) x *= c;
    return RaceWeight(table_, std::move(v));
  }

 private:
  std::shared_ptr<const CharacterTable> table_;
  std::vector<double> values_;
  std::vector<cplx> fourier_;
  std::vector<std::size_t> support_;
  double sup_ = 0.0;
};

/// t = phi(q) (1_{a} - 1_{b}).
inline RaceWeight race_weight_two_class(u64 q, i64 a, i64 b) {
  auto table = character_table(q);
  const auto &g = *table->group;
  const auto ia = g.index_of(a), ib = g.index_of(b);
  if (!ia || !ib) fail(ErrorKind::InvalidClass, "race classes must be units modulo q");
  if (*ia == *ib) fail(ErrorKind::InvalidClass, "race classes must be distinct");
  std::vector<double> v(g.phi(), 0.0);
  v[*ia] = static_cast<double>(g.phi());
  v[*ib] = -static_cast<double>(g.phi());
  return RaceWeight(std::move(table), std::move(v));
}

inline RaceWeight race_weight_from_map(u64 q, const std::map<u64, double> &values) {
  auto table = character_table(q);
  const auto &g = *table->group;
  std::vector<double> v(g.phi(), 0.0);
  for (const auto &[a, x] : values) {
    const auto i = g.index_of(static_cast<i64>(a));
    if (!i) fail(ErrorKind::InvalidClass, "weight given on a non-unit residue " + std::to_string(a));
    v[*i] = x;
  }
  return RaceWeight(std::move(table), std::move(v));
}

/// r_q(a) = #{x : x^2 = a}, per unit index.
inline std::vector<u64> r_map(const UnitGroup &g) {
  std::vector<u64> r(g.phi(), 0);
  for (u64 x : g.units()) ++r[*g.index_of(static_cast<i64>(mulmod(x, x, g.modulus())))];
  return r;
}

inline u64 rho(u64 q) {
  UnitGroup g(q);
  return r_map(g)[*g.index_of(1)];
}

inline u64 rad(u64 q) { return radical(q); }

struct ResidueSplit {
  std::vector<u64> residues;
  std::vector<u64> nonresidues;
};

inline ResidueSplit residue_split(u64 q) {
  UnitGroup g(q);
  const auto r = r_map(g);
  ResidueSplit s;
  for (std::size_t i = 0; i < g.phi(); ++i) (r[i] ? s.residues : s.nonresidues).push_back(g.units()[i]);
  return s;
}

/// l_q = (rho(q) - 1) 1_{R_q} - 1_{NR_q}.
inline RaceWeight race_weight_qr_nr(u64 q) {
  auto table = character_table(q);
  const auto &g = *table->group;
  const auto r = r_map(g);
  const double rh = static_cast<double>(r[*g.index_of(1)]);
  std::vector<double> v(g.phi());
  bool has_nr = false;
  for (std::size_t i = 0; i < g.phi(); ++i) {
    v[i] = r[i] ? rh - 1.0 : -1.0;
    has_nr = has_nr || r[i] == 0;
  }
  if (!has_nr) fail(ErrorKind::DegenerateRace, "no quadratic nonresidues modulo " + std::to_string(q));
  return RaceWeight(std::move(table), std::move(v));
}

struct WeightStats {
  double lambda;       // sum_chi |<t, chi>|
  double lambda_star;  // same for t*(a) = t(a^2)
  double C;            // max(lambda (log q)^2, lambda* log q)
  double log_k;        // mean of log(conductor) over the support
  double mean_shift;   // <t, r_q>
};

inline double fourier_l1(const CharacterTable &table, std::span<const double> values) {
  CompensatedSum s;
  for (const auto &chi : table.chars) s += std::abs(inner_product(values, chi));
  return s.value();
}

inline std::vector<double> squared_weight(const RaceWeight &t) {
  const auto &g = t.table().group;
  std::vector<double> v(g->phi());
  for (std::size_t i = 0; i < g->phi(); ++i) {
    const u64 a = g->units()[i];
    v[i] = t(static_cast<i64>(mulmod(a, a, g->modulus())));
  }
  return v;
}

inline double mean_shift(const RaceWeight &t) {
  const auto r = r_map(*t.table().group);
  CompensatedSum s;
  for (std::size_t i = 0; i < r.size(); ++i) s += t.values()[i] * static_cast<double>(r[i]);
  return s.value() / static_cast<double>(r.size());
}

inline WeightStats weight_stats(const RaceWeight &t) {
  WeightStats st{};
  CompensatedSum l1;
  for (const auto &c : t.fourier()) l1 += std::abs(c);
  st.lambda = l1.value();
  st.lambda_star = fourier_l1(t.table(), squared_weight(t));
  const double lq = std::log(static_cast<double>(t.modulus()));
  st.C = std::max(st.lambda * lq * lq, st.lambda_star * lq);
  CompensatedSum lk;
  for (std::size_t i : t.support()) lk += std::log(static_cast<double>(t.table().chars[i].conductor()));
  st.log_k = t.support().empty() ? 0.0 : lk.value() / static_cast<double>(t.support().size());
  st.mean_shift = mean_shift(t);
  return st;
}

}  // namespace racebias
