// racebias command-line front end.
//
// Exit status: 0 success, 1 invariant or verification failure,
// 2 usage/configuration error, 3 resource or coverage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "racebias/racebias.hpp"

using namespace racebias;

namespace {

std::string fmt(double v) { return detail::fmt(v); }

void print_kv(const std::string &k, const std::string &v) { std::cout << k << "=" << v << "\n"; }
void print_kv(const std::string &k, double v) { print_kv(k, fmt(v)); }

std::vector<double> parse_list(const std::string &s) {
  std::vector<double> out;
  for (const auto &tok : detail::split_csv(s)) {
    double v;
    if (!detail::parse_double(detail::trim(tok), v)) fail(ErrorKind::Config, "bad number '" + tok + "' in list");
    out.push_back(v);
  }
  return out;
}

// Flags bound into a RunConfig; --config values win over flags.
void add_run_flags(CLI::App *app, RunConfig &cfg, std::string &config_path) {
  app->add_option("--config", config_path, "JSON config file (its keys override flags)");
  app->add_option("--modulus", cfg.modulus, "modulus q")->capture_default_str();
  app->add_option("--classes", cfg.classes, "'a,b' for the two-class race, 'qr' for residues vs nonresidues")
      ->capture_default_str();
  app->add_option("--T", cfg.T, "zero height")->capture_default_str();
  app->add_option("--zeros-file", cfg.zeros_file, "ingest zeros from this file instead of computing them");
  app->add_option("--cache-dir", cfg.cache_dir, "zero cache directory (default: $RACEBIAS_ZERO_CACHE)");
  app->add_option("--seed", cfg.seed, "Monte-Carlo seed")->capture_default_str();
  app->add_option("--mc-samples", cfg.mc_samples, "Monte-Carlo samples, 0 to skip")->capture_default_str();
}

void finish_config(RunConfig &cfg, const std::string &config_path) {
  if (!config_path.empty()) cfg.merge_file(config_path);
  cfg.validate();
}

int cmd_zeros(u64 q, u64 label, double T, const std::string &out, const std::string &cache_dir) {
  const auto tab = character_table(q);
  std::optional<ZeroCache> cache = cache_dir.empty() ? ZeroCache::from_environment() : ZeroCache(cache_dir);
  ZeroSearchOptions opt;
  opt.ceiling = std::max(opt.ceiling, T);
  ZeroStore store;
  std::cout << "label,conductor,zeros,main_term,residual,flag_bound\n";
  for (const auto &chi : tab->chars) {
    if (chi.is_principal() || (label != 0 && chi.label() != label)) continue;
    if (label == 0 && !chi.is_primitive()) continue;
    const auto key = char_key(chi);
    const CharacterZeros *z = nullptr;
    if (cache)
      if (auto c = cache->load(key); c && c->coverage() >= T) {
        store.add(key, c->entries, c->computed_to);
        z = store.find(key);
      }
    if (!z) {
      const auto ptab = character_table(key.first);
      const auto &prim = ptab->chars[ptab->index_of_label(key.second)];
      store.add_computed(prim, compute_zeros(prim, T, opt));
      z = store.find(key);
      if (cache) cache->save(key, *z);
    }
    const double qc = static_cast<double>(key.first);
    const double n = static_cast<double>(z->ordinates_upto(T).size());
    const double main = rvm_main_term(qc, T);
    std::cout << chi.label() << "," << key.first << "," << n << "," << fmt(main) << "," << fmt(n - main) << ","
              << fmt(rvm_flag_bound(qc, T)) << "\n";
  }
  if (!out.empty()) {
    std::ofstream f(out);
    store.write(f);
    if (!f) fail(ErrorKind::Resource, "cannot write " + out);
  }
  return 0;
}

int cmd_density(const RunConfig &cfg, const std::string &plot) {
  const RaceWeight t = parse_weight(cfg.modulus, cfg.classes);
  const ZeroStore store = load_zeros(cfg, t);
  const auto lm = limit_model(t, store, cfg.T);
  const auto d = invert_density(lm);
  const auto l1 = mu_hat_l1(lm);
  const auto b = bias_summary(t, store, cfg.T);
  const auto eli = eli_threshold(t, cfg.A, cfg.L);
  print_kv("delta", d.delta);
  print_kv("delta_gil_pelaez", d.delta_gil_pelaez);
  if (cfg.mc_samples > 0) {
    const auto mc = random_model_delta(lm, cfg.mc_samples, cfg.seed);
    print_kv("delta_monte_carlo", mc.delta);
    print_kv("delta_monte_carlo_se", mc.std_error);
  }
  print_kv("mean", d.mean);
  print_kv("variance", d.variance);
  print_kv("bias", b.bias);
  print_kv("skewes_envelope", b.skewes_envelope);
  print_kv("mu_hat_l1", l1.value);
  print_kv("density_sup_bound", l1.density_bound);
  print_kv("lipschitz_D", lipschitz_constant_D(lm).with_tail);
  print_kv("eli_log_X0", eli.log_X0);
  print_kv("integral", d.integral);
  if (!plot.empty()) {
    std::ofstream f(plot);
    d.write_csv(f);
    if (!f) fail(ErrorKind::Resource, "cannot write " + plot);
  }
  return std::abs(d.integral - 1.0) <= 1e-4 ? 0 : 1;
}

int cmd_wass(const std::string &gammas, double x0, double X, i64 H, bool sample) {
  TorusOrbitSpec s{parse_list(gammas), x0, X, {}};
  s.relations = find_relations(s.gamma, H);
  validate(s);
  KWOptions opt;
  opt.allow_sampling = sample;
  const auto kw = kw_bound(s, H, opt);
  print_kv("H", std::to_string(kw.H));
  print_kv("kw_leading", kw.leading);
  print_kv("kw_tail", kw.tail);
  print_kv("kw_total", kw.total);
  print_kv("kw_sampled", kw.sampled ? "true" : "false");
  const auto pts = orbit_samples(s, 4096);
  const double lower = w1_duality_lower_bound(pts, nullptr);
  print_kv("duality_lower_bound", lower);
  int status = lower <= kw.total + 1e-8 ? 0 : 1;
  if (s.gamma.size() == 1 && s.relations.empty()) {
    const double exact = w1_orbit_haar_circle(s.gamma[0], x0, X);
    print_kv("w1_exact_circle", exact);
    if (exact > kw.total + 1e-8) status = 1;
  }
  return status;
}

int cmd_construct(u64 n, double f, u64 seed, u64 ceiling, u64 r, bool prime, const std::string &out) {
  ChowlaOptions opt;
  opt.seed = seed;
  opt.ceiling = ceiling;
  if (r > 0) opt.r_override = r;
  auto cert = construct_q(n, f, opt);
  if (prime) cert = construct_q_prime(cert, ceiling);
  const auto v = verify_certificate(cert);
  const auto lp = least_qr_nr(cert.q, cert.factorization());
  print_kv("q", to_string(cert.q));
  print_kv("r_n", std::to_string(cert.r_n));
  print_kv("Psi_q", lp.Psi ? std::to_string(*lp.Psi) : ">" + std::to_string(lp.ceiling));
  const auto diag = conjecture_diagnostic(cert.factorization());
  print_kv("rho_over_log_rad", diag.ratio);
  if (cert.q_prime) {
    const auto lp2 = least_qr_nr(*cert.q_prime, cert.factorization_prime());
    print_kv("q_prime", to_string(*cert.q_prime));
    print_kv("Phi_q_prime", lp2.Phi ? std::to_string(*lp2.Phi) : ">" + std::to_string(lp2.ceiling));
  }
  print_kv("verified", v.ok ? "true" : "false");
  if (out.empty()) {
    cert.write(std::cout);
  } else {
    std::ofstream f(out);
    cert.write(f);
    if (!f) fail(ErrorKind::Resource, "cannot write " + out);
  }
  return v.ok ? 0 : 1;
}

int cmd_skewes(u64 q, const std::string &classes, u64 ceiling) {
  const auto r = skewes_search(parse_weight(q, classes), ceiling);
  if (r.hit) print_kv("skewes", std::to_string(*r.hit));
  else print_kv("skewes_lower_bound", std::to_string(r.ceiling));
  return 0;
}

int cmd_verify(const std::string &path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open certificate " + path);
  const auto cert = ConstructionCertificate::parse(in, path);
  const auto v = verify_certificate(cert);
  print_kv("checks", std::to_string(v.checks));
  for (const auto &f : v.failures) std::cout << "failed: " << f << "\n";
  print_kv("verified", v.ok ? "true" : "false");
  return v.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Prime number races: limiting distributions, densities and Chowla moduli"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;

  auto *race = app.add_subcommand("race", "full diagnostic pipeline into an output directory");
  add_run_flags(race, cfg, config_path);
  race->add_option("--sieve-limit", cfg.sieve_limit, "prime sieve limit")->capture_default_str();
  race->add_option("--grid-step", cfg.grid_step, "y grid step")->capture_default_str();
  race->add_option("--A", cfg.A, "ELI exponent")->capture_default_str();
  race->add_option("--L", cfg.L, "threshold constant")->capture_default_str();
  race->add_option("--output-dir", cfg.output_dir, "output directory")->capture_default_str();

  auto *zeros = app.add_subcommand("zeros", "zeros of Dirichlet L-functions on the critical line");
  u64 zq = 4, zlabel = 0;
  double zT = 100.0;
  std::string zout, zcache;
  zeros->add_option("--modulus", zq, "modulus q")->capture_default_str();
  zeros->add_option("--label", zlabel, "Conrey label (default: every primitive character)");
  zeros->add_option("--T", zT, "height")->capture_default_str();
  zeros->add_option("--out", zout, "write the zero file here");
  zeros->add_option("--cache-dir", zcache, "zero cache directory");

  auto *density = app.add_subcommand("density", "limiting distribution, delta and bias factor");
  add_run_flags(density, cfg, config_path);
  density->add_option("--A", cfg.A, "ELI exponent")->capture_default_str();
  density->add_option("--L", cfg.L, "threshold constant")->capture_default_str();
  std::string plot;
  density->add_option("--plot", plot, "write x,f(x) here");

  auto *wass = app.add_subcommand("wass", "Kronecker-Weyl W1 bound for a torus orbit");
  std::string gammas;
  double wx0 = 0.0, wX = 100.0;
  i64 wH = 3;
  bool wsample = false;
  wass->add_option("--gamma", gammas, "comma-separated frequencies")->required();
  wass->add_option("--x0", wx0, "orbit start")->capture_default_str();
  wass->add_option("--X", wX, "orbit end")->capture_default_str();
  wass->add_option("--H", wH, "Fourier cutoff")->capture_default_str();
  wass->add_flag("--sample", wsample, "sample the tail when enumeration exceeds the budget");

  auto *construct = app.add_subcommand("construct", "Chowla modulus with certificate");
  u64 cn = 1, cseed = 0, cceil = kDefaultLinnikCeiling, cr = 0;
  double cf = 1.0;
  bool cprime = false;
  std::string cout_path;
  construct->add_option("--n", cn, "number of base primes")->capture_default_str();
  construct->add_option("--f", cf, "f(n) value")->capture_default_str();
  construct->add_option("--seed", cseed, "tuple shuffle seed")->capture_default_str();
  construct->add_option("--ceiling", cceil, "progression steps per class")->capture_default_str();
  construct->add_option("--r", cr, "force r_n");
  construct->add_flag("--prime", cprime, "also build q'");
  construct->add_option("--out", cout_path, "certificate file (default: stdout)");

  auto *skewes = app.add_subcommand("skewes", "least x with pi(x; t) > 0");
  u64 sq = 4, sceil = 100'000;
  std::string sclasses = "1,3";
  skewes->add_option("--modulus", sq, "modulus q")->capture_default_str();
  skewes->add_option("--classes", sclasses, "'a,b' or 'qr'")->capture_default_str();
  skewes->add_option("--ceiling", sceil, "search ceiling")->capture_default_str();

  auto *verify = app.add_subcommand("verify", "re-verify a certificate file");
  std::string cert_path;
  verify->add_option("--certificate", cert_path, "certificate file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*race) {
      finish_config(cfg, config_path);
      const auto r = run_pipeline(cfg);
      std::cout << r.summary_text();
      return r.passed() ? 0 : 1;
    }
    if (*zeros) return cmd_zeros(zq, zlabel, zT, zout, zcache);
    if (*density) {
      finish_config(cfg, config_path);
      return cmd_density(cfg, plot);
    }
    if (*wass) return cmd_wass(gammas, wx0, wX, wH, wsample);
    if (*construct) return cmd_construct(cn, cf, cseed, cceil, cr, cprime, cout_path);
    if (*skewes) return cmd_skewes(sq, sclasses, sceil);
    if (*verify) return cmd_verify(cert_path);
  } catch (const Error &e) {
    std::cerr << "racebias: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception &e) {
    std::cerr << "racebias: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
