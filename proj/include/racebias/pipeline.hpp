#pragma once

// End-to-end run: sieve, zeros, explicit model, limiting distribution,
// empirical density, W1 chain and ELI envelope, written atomically to an
// output directory with a key=value summary and an invariant verdict.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unistd.h>
#include <utility>
#include <vector>

#include <json.hpp>

#include "racebias/explicit.hpp"
#include "racebias/limiting.hpp"
#include "racebias/race.hpp"

namespace racebias {

inline constexpr u64 kMaxSieveLimit = 10'000'000'000ULL;
inline constexpr double kMaxZeroHeight = 5000.0;
inline constexpr u64 kMaxMonteCarloSamples = 1'000'000'000ULL;

struct RunConfig {
  u64 modulus = 4;
  std::string classes = "3,1";  // "a,b" for phi(q)(1_a - 1_b), or "qr" for residues vs nonresidues
  u64 sieve_limit = 1'000'000;
  double T = 500.0;
  std::string zeros_file;       // ingest instead of computing when set
  std::string cache_dir;        // empty: RACEBIAS_ZERO_CACHE or none
  double grid_step = 0.01;
  double A = 2.0;
  double L = 1.0;
  u64 seed = 20240601;
  u64 mc_samples = 1'000'000;
  std::string output_dir = "racebias-out";

  void validate() const {
    auto bad = [](const std::string &m) { fail(ErrorKind::Config, m); };
    if (modulus < 3) bad("modulus must be >= 3");
    if (sieve_limit < 1000 || sieve_limit > kMaxSieveLimit) bad("sieve_limit must lie in [1000, 1e10]");
    if (!(T >= kMinimumCoverage) || T > kMaxZeroHeight) bad("T must lie in [100, 5000]");
    if (!(grid_step > 0.0) || grid_step > 1.0) bad("grid_step must lie in (0, 1]");
    if (!(A > 1.0)) bad("A must exceed 1");
    if (!(L > 0.0)) bad("L must be positive");
    if (mc_samples > kMaxMonteCarloSamples) bad("mc_samples must be <= 1e9");
    if (output_dir.empty()) bad("output_dir must be set");
  }

  /// Keys present in `j` replace the current values.
  void merge_json(const nlohmann::json &j) {
    if (!j.is_object()) fail(ErrorKind::Config, "config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto &k = it.key();
      const auto &v = it.value();
      try {
        if (k == "modulus") modulus = v.get<u64>();
        else if (k == "classes") classes = v.get<std::string>();
        else if (k == "sieve_limit") sieve_limit = v.get<u64>();
        else if (k == "T") T = v.get<double>();
        else if (k == "zeros_file") zeros_file = v.get<std::string>();
        else if (k == "cache_dir") cache_dir = v.get<std::string>();
        else if (k == "grid_step") grid_step = v.get<double>();
        else if (k == "A") A = v.get<double>();
        else if (k == "L") L = v.get<double>();
        else if (k == "seed") seed = v.get<u64>();
        else if (k == "mc_samples") mc_samples = v.get<u64>();
        else if (k == "output_dir") output_dir = v.get<std::string>();
        else fail(ErrorKind::Config, "unknown config key '" + k + "'");
      } catch (const nlohmann::json::exception &e) {
        fail(ErrorKind::Config, "config key '" + k + "': " + e.what());
      }
    }
  }

  void merge_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Config, "cannot open config " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception &e) {
      fail(ErrorKind::Config, path.string() + ": " + e.what());
    }
    merge_json(j);
  }
};

/// "a,b" or "qr".
inline RaceWeight parse_weight(u64 q, const std::string &spec) {
  if (spec == "qr") return race_weight_qr_nr(q);
  const auto comma = spec.find(',');
  if (comma == std::string::npos) fail(ErrorKind::Config, "classes must be 'a,b' or 'qr', got '" + spec + "'");
  u64 a = 0, b = 0;
  if (!detail::parse_u64(detail::trim(spec.substr(0, comma)), a) || !detail::parse_u64(detail::trim(spec.substr(comma + 1)), b))
    fail(ErrorKind::Config, "classes must be two non-negative integers, got '" + spec + "'");
  return race_weight_two_class(q, static_cast<i64>(a), static_cast<i64>(b));
}

/// Zeros for the support of t up to T, ingested or computed (through the cache).
inline ZeroStore load_zeros(const RunConfig &cfg, const RaceWeight &t) {
  ZeroStore store;
  if (!cfg.zeros_file.empty()) {
    store = ingest_zeros(cfg.zeros_file);
    spectrum(store, t, cfg.T);  // coverage check
    return store;
  }
  std::optional<ZeroCache> cache = cfg.cache_dir.empty() ? ZeroCache::from_environment() : ZeroCache(cfg.cache_dir);
  ZeroSearchOptions opt;
  opt.ceiling = std::max(opt.ceiling, cfg.T);
  ensure_zeros(store, t, cfg.T, cache, opt);
  return store;
}

struct PipelineReport {
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<std::pair<std::string, bool>> invariants;
  bool passed() const {
    for (const auto &[k, ok] : invariants)
      if (!ok) return false;
    return true;
  }
  std::string summary_text() const {
    std::string s = "# racebias summary v1\n";
    for (const auto &[k, v] : summary) s += k + "=" + v + "\n";
    for (const auto &[k, ok] : invariants) s += "invariant." + k + "=" + (ok ? "pass" : "fail") + "\n";
    s += std::string("invariants=") + (passed() ? "pass" : "fail") + "\n";
    return s;
  }
};

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_text(const std::filesystem::path &p, const std::string &s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
  if (!out) fail(ErrorKind::Resource, "cannot write " + p.string());
}

}  // namespace detail

struct W1ChainRow {
  double T;
  double w1_to_actual;  // w1(mu_X^(T), mu_X)
  double shape;         // C (log T / sqrt T + 1 / sqrt X)
};

/// The pipeline without any file output.
inline PipelineReport compute_pipeline(const RunConfig &cfg, std::ostringstream *density_csv = nullptr,
                                       std::ostringstream *model_txt = nullptr, std::ostringstream *w1_csv = nullptr,
                                       std::ostringstream *eli_csv = nullptr) {
  cfg.validate();
  const RaceWeight t = parse_weight(cfg.modulus, cfg.classes);
  const auto st = weight_stats(t);
  const ZeroStore store = load_zeros(cfg, t);
  const PrimeTable P = sieve(cfg.sieve_limit);
  const WeightedCounts wc(P, t);
  const double X = std::log(static_cast<double>(cfg.sieve_limit));
  const double X3 = std::log(1000.0);

  PipelineReport r;
  auto put = [&](const std::string &k, const std::string &v) { r.summary.emplace_back(k, v); };
  auto num = [&](const std::string &k, double v) { put(k, detail::fmt(v)); };
  auto inv = [&](const std::string &k, bool ok) { r.invariants.emplace_back(k, ok); };

  put("modulus", std::to_string(cfg.modulus));
  put("classes", cfg.classes);
  put("sieve_limit", std::to_string(cfg.sieve_limit));
  num("T", cfg.T);
  num("X", X);
  num("lambda", st.lambda);
  num("C", st.C);
  num("log_k", st.log_k);
  put("support", std::to_string(t.support().size()));

  const auto zc = count_zeros(store, t, cfg.T);
  put("zeros", std::to_string(zc.observed));
  num("zeros_main_term", zc.main_term);

  // limiting distribution
  const auto lm = limit_model(t, store, cfg.T);
  const auto dist = invert_density(lm);
  const auto dist_neg = invert_density(lm.negated());
  const auto l1 = mu_hat_l1(lm);
  num("delta", dist.delta);
  num("delta_gil_pelaez", dist.delta_gil_pelaez);
  num("mean", dist.mean);
  num("variance", dist.variance);
  num("bias", dist.bias);
  num("mu_hat_l1", l1.value);
  num("density_sup_bound", l1.density_bound);
  num("density_max", dist.f_max);
  inv("density_normalised", std::abs(dist.integral - 1.0) <= 1e-4);
  bool nonneg = true;
  for (double v : dist.f) nonneg = nonneg && v >= -1e-8;
  inv("density_nonnegative", nonneg);
  inv("delta_gil_pelaez", std::abs(dist.delta - dist.delta_gil_pelaez) <= 1e-6);
  inv("mean_quadrature", std::abs(dist.mean_quadrature - dist.mean) <= 1e-6);
  inv("variance_quadrature", std::abs(dist.variance_quadrature - dist.variance) <= 1e-3 * dist.variance);
  inv("sign_flip", std::abs(dist.delta + dist_neg.delta - 1.0) <= 1e-6);
  inv("density_bound", l1.density_bound >= dist.f_max);
  if (cfg.mc_samples > 0) {
    const auto mc = random_model_delta(lm, cfg.mc_samples, cfg.seed);
    num("delta_monte_carlo", mc.delta);
    num("delta_monte_carlo_se", mc.std_error);
    inv("delta_two_pipelines", std::abs(mc.delta - dist.delta) <= 3.0 * mc.std_error + 1e-4);
  }
  for (double L : {10.0, 100.0}) {
    const auto br = lipschitz_bracket_density(dist.x, dist.f, L);
    const double bound = l1.density_bound / (2.0 * L);
    const std::string tag = "bracket_L" + detail::fmt(L);
    num(tag + "_lower", br.lower);
    num(tag + "_upper", br.upper);
    inv(tag, std::abs(dist.delta - br.lower) <= bound && std::abs(dist.delta - br.upper) <= bound);
  }

  // empirical density and Skewes
  const auto emp = log_density(wc, X);
  const auto emp3 = log_density(wc, X3);
  num("empirical_density", emp.estimate);
  num("empirical_density_log1e3", emp3.estimate);
  num("abs_gap", std::abs(emp.estimate - dist.delta));
  num("abs_gap_log1e3", std::abs(emp3.estimate - dist.delta));
  put("sign_changes", std::to_string(emp.sign_changes.size()));
  put("skewes", emp.skewes_hit ? std::to_string(*emp.skewes_hit) : ">" + std::to_string(cfg.sieve_limit));
  inv("density_in_unit_interval", emp.estimate >= 0.0 && emp.estimate <= 1.0);
  inv("skewes_density_consistency",
      (emp.estimate == 0.0) == (!emp.skewes_hit || static_cast<double>(*emp.skewes_hit) > std::exp(X)));

  // ELI threshold and rate envelope
  const auto eli = eli_threshold(t, cfg.A, cfg.L);
  num("eli_log_X0", eli.log_X0);
  num("eli_envelope", EliThreshold::envelope(st.C, cfg.A, X));
  if (eli_csv) {
    *eli_csv << "X,envelope\n";
    for (double lx = 1.0; lx <= 12.0; lx += 0.5) {
      const double Xv = std::pow(10.0, lx);
      *eli_csv << detail::fmt(Xv) << "," << detail::fmt(EliThreshold::envelope(st.C, cfg.A, Xv)) << "\n";
    }
  }

  // W1 chain on the window [log 2, X]
  const double y0 = std::log(2.0);
  std::vector<double> ev;
  for (double y = y0; y <= X; y += cfg.grid_step) ev.push_back(race_error(y, wc.pi(std::exp(y))));
  const EmpiricalMeasure actual(ev);
  std::vector<W1ChainRow> rows;
  std::vector<EmpiricalMeasure> surrogates;
  for (double T : {50.0, 100.0, 200.0, 500.0}) {
    if (T > cfg.T) break;
    surrogates.push_back(model_window_measure(build_model(t, store, T), y0, X, cfg.grid_step));
    rows.push_back({T, w1_line(surrogates.back(), actual), st.C * (std::log(T) / std::sqrt(T) + 1.0 / std::sqrt(X))});
  }
  double fitted = 0.0;
  for (const auto &row : rows) {
    num("w1_T" + detail::fmt(row.T), row.w1_to_actual);
    fitted = std::max(fitted, row.w1_to_actual / row.shape);
  }
  num("w1_fitted_constant", fitted);
  if (w1_csv) {
    *w1_csv << "T,w1_to_actual,shape\n";
    for (const auto &row : rows)
      *w1_csv << detail::fmt(row.T) << "," << detail::fmt(row.w1_to_actual) << "," << detail::fmt(row.shape) << "\n";
  }

  if (density_csv) dist.write_csv(*density_csv);
  if (model_txt) build_model(t, store, cfg.T).write(*model_txt);
  return r;
}

/// Runs the pipeline and writes summary.txt, density.csv, model.txt,
/// w1_chain.csv and eli_envelope.csv into cfg.output_dir, replacing it only
/// once everything has been produced.
inline PipelineReport run_pipeline(const RunConfig &cfg) {
  std::ostringstream density, model, w1, eli;
  const auto report = compute_pipeline(cfg, &density, &model, &w1, &eli);
  namespace fs = std::filesystem;
  const fs::path out = cfg.output_dir;
  const fs::path tmp = out.string() + ".tmp-" + std::to_string(::getpid());
  try {
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    detail::write_text(tmp / "summary.txt", report.summary_text());
    detail::write_text(tmp / "density.csv", density.str());
    detail::write_text(tmp / "model.txt", model.str());
    detail::write_text(tmp / "w1_chain.csv", w1.str());
    detail::write_text(tmp / "eli_envelope.csv", eli.str());
    fs::remove_all(out);
    fs::rename(tmp, out);
  } catch (const fs::filesystem_error &e) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    fail(ErrorKind::Resource, e.what());
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
  return report;
}

}  // namespace racebias
