#include "daqec/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "daqec/analysis.hpp"

namespace daqec {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_preparation(Family f) { return f == Family::CPS || f == Family::TSS || f == Family::SqVac; }

StateOptions state_options(const ScenarioConfig& cfg) {
  StateOptions o;
  o.tail_tolerance = cfg.tail_tolerance;
  return o;
}

double scheme_duration(Scheme s) {
  double t = 0;
  for (const auto& f : step_factors(s, 0)) t += f.frac;
  return t;
}

json nan_to_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Smallest N in [0, traj.size()) reaching the threshold, or -1.
int first_reaching(const std::vector<double>& F, double thr) {
  for (size_t n = 0; n < F.size(); ++n)
    if (F[n] >= thr) return static_cast<int>(n);
  return -1;
}

std::vector<double> fidelities(const std::vector<Mat>& traj, const Vec& target) {
  std::vector<double> F;
  F.reserve(traj.size());
  for (const auto& r : traj) F.push_back(fidelity(r, target));
  return F;
}

// Mode-space storage channel for a fixed duration.
class Storage {
public:
  Storage(const NoiseModel& m, int D) : model_(m) {
    analytic_ = m.photon_loss == 0.0;
    if (!analytic_) L_ = Liouvillian(Mat::Zero(D, D), m.mode_jumps(D));
  }
  Mat operator()(const Mat& rho, double t) const {
    if (t <= 0) return rho;
    if (analytic_) return model_.dephasing > 0 ? dephase(rho, model_.dephasing * t) : rho;
    return evolve(rho, L_, t);
  }

private:
  NoiseModel model_;
  bool analytic_ = true;
  Liouvillian L_;
};

long predicted_depth(const NullifierSpec& spec, const Mat& rho0, double eps, double gamma_dt) {
  try {
    return depth_estimate(spec, rho0, eps, gamma_dt).depth_N;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EstimateUndefined) return 0;
    throw;
  }
}

}  // namespace

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

ScenarioResult run_prepare(const ScenarioConfig& cfg, const RunOptions& opt) {
  const NullifierSpec spec = cfg.spec.to_spec();
  const int D = cfg.cutoff;
  const Vec target = build_state_vector(spec, D, state_options(cfg));
  const Mat vac = fock_state(0, D) * fock_state(0, D).adjoint();
  const NoiseModel noise = cfg.noise.to_model();
  const bool noisy = cfg.qec_noise && noise.any();
  const int Nmax = *std::max_element(cfg.n_grid.begin(), cfg.n_grid.end());
  const double eps = 1.0 - cfg.fidelity_threshold * cfg.fidelity_threshold;
  const double nex = mean_excitation(spec, vac);

  const int ndt = static_cast<int>(cfg.dt_grid.size());
  std::vector<std::vector<double>> F(ndt), Fn(ndt), X(ndt);
  parallel_for(ndt, opt.threads, [&](int i) {
    const double gdt = cfg.gamma_hz * cfg.dt_grid[i];
    ProtocolOptions po;
    po.gamma_hz = cfg.gamma_hz;
    const auto traj = run_protocol(vac, spec, cfg.scheme, Nmax, gdt, po);
    F[i] = fidelities(traj, target);
    for (const auto& r : traj) X[i].push_back(mean_excitation(spec, r));
    if (noisy) {
      po.noise = &noise;
      Fn[i] = fidelities(run_protocol(vac, spec, cfg.scheme, Nmax, gdt, po), target);
    }
  });

  std::set<int> ns(cfg.n_grid.begin(), cfg.n_grid.end());
  ns.insert(0);
  Table t{"prepare",
          {"dt_s", "gamma_dt", "N", "fidelity", "fidelity_noisy", "excitation", "predicted_N", "wall_clock_s"},
          {}};
  json per_dt = json::array();
  bool region = false;
  for (int i = 0; i < ndt; ++i) {
    const double dt = cfg.dt_grid[i], gdt = cfg.gamma_hz * dt;
    const long pred = predicted_depth(spec, vac, eps, gdt);
    double best = 0, best_noisy = kNaN;
    int best_N = 0;
    for (int n : ns) {
      const double fn = noisy ? Fn[i][n] : kNaN;
      t.rows.push_back({dt, gdt, static_cast<long long>(n), F[i][n], fn, X[i][n], static_cast<long long>(pred),
                        n * scheme_duration(cfg.scheme) * dt});
      if (F[i][n] > best) {
        best = F[i][n];
        best_N = n;
      }
      if (noisy) best_noisy = std::isfinite(best_noisy) ? std::max(best_noisy, fn) : fn;
      if ((noisy ? fn : F[i][n]) >= cfg.fidelity_threshold && n <= 20) region = true;
    }
    std::vector<double> Fg;
    for (int n : ns) Fg.push_back(F[i][n]);
    int sim = -1;
    for (int n : ns)
      if (F[i][n] >= cfg.fidelity_threshold) {
        sim = n;
        break;
      }
    per_dt.push_back({{"dt_s", dt},
                      {"gamma_dt", gdt},
                      {"simulated_N", sim},
                      {"predicted_N", pred},
                      {"max_fidelity", best},
                      {"argmax_N", best_N},
                      {"max_fidelity_noisy", nan_to_null(best_noisy)}});
  }
  ScenarioResult res;
  res.tables.push_back(std::move(t));
  json summary = {{"scenario", "prepare"},
                  {"family", to_string(spec.family)},
                  {"mean_excitation_vacuum", nex},
                  {"epsilon", eps},
                  {"threshold", cfg.fidelity_threshold},
                  {"region_exists", region},
                  {"per_dt", per_dt}};

  if (!cfg.level_grid_db.empty()) {
    const int nl = static_cast<int>(cfg.level_grid_db.size());
    std::vector<int> req(nl);
    std::vector<long> pred(nl);
    std::vector<double> rs(nl), large(nl, kNaN);
    const double gdt = cfg.gamma_hz * cfg.dt_grid.front();
    parallel_for(nl, opt.threads, [&](int i) {
      SpecConfig sc = cfg.spec;
      if (spec.family == Family::TSS) {
        sc.xi.reset();
        sc.trisqueezing_db = cfg.level_grid_db[i];
      } else {
        sc.r.reset();
        sc.squeezing_db = cfg.level_grid_db[i];
      }
      const NullifierSpec s = sc.to_spec();
      rs[i] = spec.family == Family::TSS ? s.xi : s.r;
      const Vec tg = build_state_vector(s, D, state_options(cfg));
      ProtocolOptions po;
      po.gamma_hz = cfg.gamma_hz;
      const auto Fl = fidelities(run_protocol(vac, s, cfg.scheme, Nmax, gdt, po), tg);
      req[i] = first_reaching(Fl, cfg.fidelity_threshold);
      pred[i] = predicted_depth(s, vac, eps, gdt);
      if (s.family == Family::CPS) large[i] = std::ceil((2 * s.r + std::log((3 * s.eta * s.eta + 2) / (8 * eps))) / (gdt * gdt));
    });
    Table lt{"prepare_levels", {"level_db", "level_natural", "required_N", "predicted_N", "predicted_N_large_r"}, {}};
    std::vector<double> xu, yu, xa, ya;
    for (int i = 0; i < nl; ++i) {
      lt.rows.push_back({cfg.level_grid_db[i], rs[i], static_cast<long long>(req[i]), static_cast<long long>(pred[i]),
                         large[i]});
      if (req[i] >= 0) {
        xa.push_back(rs[i]);
        ya.push_back(req[i]);
      }
      if (req[i] > 0) {
        xu.push_back(rs[i]);
        yu.push_back(req[i]);
      }
    }
    json fit = json::object();
    if (xu.size() >= 2) {
      const LinearFit f = linear_fit(xu, yu);
      fit["uncensored"] = {{"points", xu.size()}, {"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
    }
    if (xa.size() >= 2) {
      const LinearFit f = linear_fit(xa, ya);
      fit["all"] = {{"points", xa.size()}, {"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
    }
    summary["level_fit"] = fit;
    res.tables.push_back(std::move(lt));
  }
  res.summary_json = summary.dump(2);
  return res;
}

ScenarioResult run_protect(const ScenarioConfig& cfg, const RunOptions& opt) {
  const NullifierSpec spec = cfg.spec.to_spec();
  const int D = cfg.cutoff;
  const Vec target = build_state_vector(spec, D, state_options(cfg));
  const Mat rho0 = target * target.adjoint();
  const NoiseModel noise = cfg.noise.to_model();
  const Storage store(cfg.noise.mode_only(), D);
  const int K = static_cast<int>(std::llround(cfg.horizon_s / cfg.round_interval_s));
  const int Nr = cfg.n_grid.front();
  const double dt = cfg.dt_grid.front(), gdt = cfg.gamma_hz * dt;
  const bool noisy = cfg.qec_noise && noise.any();
  std::vector<Strategy> strategies = cfg.strategies;
  if (strategies.empty()) strategies = {Strategy::NoQEC, Strategy::SingleQEC, Strategy::InterleavedQEC};
  auto wants = [&](Strategy s) { return std::find(strategies.begin(), strategies.end(), s) != strategies.end(); };

  const int period = scheme_period(cfg.scheme);
  std::vector<std::vector<Mat>> kraus;
  std::vector<NoisyStepContext> ctx;
  for (int k = 0; k < period; ++k) {
    kraus.push_back(step_kraus(compile_step(spec, cfg.scheme, gdt, D, CompileMode::Direct, k).unitary));
    if (noisy) ctx.push_back(noisy_step_context(spec, cfg.scheme, k, cfg.gamma_hz, dt, noise, D));
  }
  auto qec = [&](Mat rho, int steps, bool with_noise) {
    for (int n = 0; n < steps; ++n) {
      rho = with_noise ? apply_noisy_step(rho, ctx[n % period]) : apply_kraus(kraus[n % period], rho);
      check_cptp_state(rho);
    }
    return rho;
  };

  std::vector<Mat> bare(K + 1);
  bare[0] = rho0;
  for (int k = 1; k <= K; ++k) bare[k] = store(bare[k - 1], cfg.round_interval_s);

  // noiseless lines
  std::vector<double> f_none(K + 1), f_single(K + 1), f_inter(K + 1);
  Mat inter = rho0;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) inter = qec(store(inter, cfg.round_interval_s), Nr, false);
    f_none[k] = fidelity(bare[k], target);
    f_inter[k] = fidelity(inter, target);
    f_single[k] = fidelity(qec(bare[k], k * Nr, false), target);
  }

  // noisy points
  std::vector<double> n_single(K + 1, kNaN), n_inter(K + 1, kNaN);
  if (noisy) {
    std::vector<int> ks;
    for (int k = 0; k <= K; k += cfg.noisy_readout_stride) ks.push_back(k);
    if (ks.back() != K) ks.push_back(K);
    const int tasks = static_cast<int>(ks.size()) + 1;
    parallel_for(tasks, opt.threads, [&](int i) {
      if (i == 0) {
        if (!wants(Strategy::InterleavedQEC)) return;
        Mat r = rho0;
        n_inter[0] = fidelity(r, target);
        for (int k = 1; k <= K; ++k) {
          r = qec(store(r, cfg.round_interval_s), Nr, true);
          n_inter[k] = fidelity(r, target);
        }
        return;
      }
      if (!wants(Strategy::SingleQEC)) return;
      const int k = ks[i - 1];
      n_single[k] = fidelity(qec(bare[k], k * Nr, true), target);
    });
  }

  Table t{"protect", {"t_s", "strategy", "qec_noise", "fidelity"}, {}};
  for (int k = 0; k <= K; ++k) {
    const double tk = k * cfg.round_interval_s;
    if (wants(Strategy::NoQEC)) t.rows.push_back({tk, std::string("no-qec"), 0LL, f_none[k]});
    if (wants(Strategy::SingleQEC)) {
      t.rows.push_back({tk, std::string("single-qec"), 0LL, f_single[k]});
      if (noisy && std::isfinite(n_single[k])) t.rows.push_back({tk, std::string("single-qec"), 1LL, n_single[k]});
    }
    if (wants(Strategy::InterleavedQEC)) {
      t.rows.push_back({tk, std::string("interleaved-qec"), 0LL, f_inter[k]});
      if (noisy && std::isfinite(n_inter[k])) t.rows.push_back({tk, std::string("interleaved-qec"), 1LL, n_inter[k]});
    }
  }
  double dev = 0.0;
  for (int k = 0; k <= K; ++k) {
    if (std::isfinite(n_single[k])) dev = std::max(dev, std::abs(n_single[k] - f_single[k]));
    if (std::isfinite(n_inter[k])) dev = std::max(dev, std::abs(n_inter[k] - f_inter[k]));
  }
  json summary = {{"scenario", "protect"},
                  {"family", to_string(spec.family)},
                  {"rounds", K},
                  {"depth_per_round", Nr},
                  {"gamma_dt", gdt},
                  {"final",
                   {{"no-qec", f_none[K]},
                    {"single-qec", f_single[K]},
                    {"interleaved-qec", f_inter[K]},
                    {"single-qec-noisy", nan_to_null(n_single[K])},
                    {"interleaved-qec-noisy", nan_to_null(n_inter[K])}}},
                  {"max_noisy_deviation", noisy ? json(dev) : json(nullptr)}};
  ScenarioResult res;
  res.tables.push_back(std::move(t));
  res.summary_json = summary.dump(2);
  return res;
}

ScenarioResult run_scan(const ScenarioConfig& cfg, const RunOptions& opt) {
  std::vector<SpecConfig> states = cfg.states.empty() ? std::vector<SpecConfig>{cfg.spec} : cfg.states;
  std::vector<Scheme> schemes = cfg.schemes.empty() ? std::vector<Scheme>{cfg.scheme} : cfg.schemes;
  const int D = cfg.cutoff;
  const int Nmax = *std::max_element(cfg.n_grid.begin(), cfg.n_grid.end());
  const NoiseModel noise = cfg.noise.to_model();
  const bool noisy = cfg.qec_noise && noise.qubit_noise();
  const Storage store(cfg.noise.mode_only(), D);
  const int ns = static_cast<int>(states.size()), nsch = static_cast<int>(schemes.size()),
            ndt = static_cast<int>(cfg.dt_grid.size());

  std::vector<NullifierSpec> specs;
  std::vector<Vec> targets;
  std::vector<Mat> initials;
  for (const auto& s : states) {
    specs.push_back(s.to_spec());
    targets.push_back(build_state_vector(specs.back(), D, state_options(cfg)));
    if (is_preparation(specs.back().family)) {
      initials.push_back(fock_state(0, D) * fock_state(0, D).adjoint());
    } else {
      initials.push_back(store(targets.back() * targets.back().adjoint(), cfg.storage_s));
    }
  }
  const int cells = ns * nsch * ndt;
  std::vector<std::vector<double>> F(cells);
  parallel_for(cells, opt.threads, [&](int c) {
    const int i = c / (nsch * ndt), j = (c / ndt) % nsch, k = c % ndt;
    ProtocolOptions po;
    po.gamma_hz = cfg.gamma_hz;
    if (noisy) po.noise = &noise;
    F[c] = fidelities(run_protocol(initials[i], specs[i], schemes[j], Nmax, cfg.gamma_hz * cfg.dt_grid[k], po),
                      targets[i]);
  });

  ScenarioResult res;
  json per_state = json::array();
  for (int i = 0; i < ns; ++i) {
    json best = json::object();
    std::string winner;
    double wbest = -1;
    for (int j = 0; j < nsch; ++j) {
      Table t{fmt::format("scan_{}_{}", to_string(specs[i].family), to_string(schemes[j])),
              {"state", "scheme", "dt_s", "N", "fidelity"},
              {}};
      double mx = 0;
      for (int k = 0; k < ndt; ++k)
        for (int n : cfg.n_grid) {
          const double f = F[(i * nsch + j) * ndt + k][n];
          t.rows.push_back({std::string(to_string(specs[i].family)), std::string(to_string(schemes[j])),
                            cfg.dt_grid[k], static_cast<long long>(n), f});
          mx = std::max(mx, f);
        }
      best[to_string(schemes[j])] = mx;
      if (mx > wbest) {
        wbest = mx;
        winner = to_string(schemes[j]);
      }
      res.tables.push_back(std::move(t));
    }
    per_state.push_back({{"state", to_string(specs[i].family)}, {"max_fidelity", best}, {"winner", winner}});
  }
  res.summary_json = json({{"scenario", "scan"}, {"states", per_state}}).dump(2);
  return res;
}

ScenarioResult run_leakage(const ScenarioConfig& cfg, const RunOptions& opt) {
  const NullifierSpec spec = cfg.spec.to_spec();
  if (!spec.parity_symmetric()) throw Error(ErrorKind::ConfigError, "leakage needs a CAT or SqCAT spec");
  const int D = cfg.cutoff;
  const double gdt = cfg.gamma_hz * cfg.dt_grid.front();
  const Mat P = code_projector(spec, D, state_options(cfg));
  NullifierSpec sp = spec;
  sp.sign = +1;
  const Vec plus = build_state_vector(sp, D, state_options(cfg));
  std::vector<Scheme> schemes = cfg.schemes.empty()
                                    ? std::vector<Scheme>{Scheme::SharpenTrim, Scheme::sBs, Scheme::BsB}
                                    : cfg.schemes;
  const int nsch = static_cast<int>(schemes.size()), ne = static_cast<int>(cfg.epsilon_grid.size());

  std::vector<double> w(nsch * ne);
  parallel_for(nsch * ne, opt.threads, [&](int c) {
    const Scheme s = schemes[c / ne];
    const double eps = cfg.epsilon_grid[c % ne];
    std::vector<std::vector<Mat>> K;
    for (int k = 0; k < scheme_period(s); ++k)
      K.push_back(step_kraus(compile_step(spec, s, gdt, D, CompileMode::Direct, k).unitary));
    // dephasing of strength eps * kappa_s per step, kappa_s dt = (Gamma dt)^2
    Mat rho = plus * plus.adjoint();
    for (int n = 0; n < cfg.leakage_steps; ++n) {
      rho = dephase(rho, eps * gdt * gdt);
      rho = apply_kraus(K[n % K.size()], rho);
    }
    check_cptp_state(rho);
    w[c] = leakage(rho, P);
  });

  const PerturbativeResult pert = perturbative_A(spec, D);
  std::vector<double> wc(ne, kNaN);
  std::vector<int> pos;
  for (int e = 0; e < ne; ++e)
    if (cfg.epsilon_grid[e] > 0) pos.push_back(e);
  parallel_for(static_cast<int>(pos.size()), opt.threads,
               [&](int i) { wc[pos[i]] = continuous_steady_leakage(spec, D, cfg.epsilon_grid[pos[i]]); });
  std::vector<std::pair<double, double>> cs;
  for (int e : pos) cs.emplace_back(cfg.epsilon_grid[e], wc[e]);
  const LeakageExpansion creg = fit_leakage_expansion(cs);

  Table t{"leakage", {"scheme", "epsilon", "w_numeric", "w_perturbative_line"}, {}};
  json per_scheme = json::object();
  for (int j = 0; j < nsch; ++j) {
    std::vector<std::pair<double, double>> smp;
    for (int e = 0; e < ne; ++e) smp.emplace_back(cfg.epsilon_grid[e], w[j * ne + e]);
    const LeakageExpansion fit = fit_leakage_expansion(smp);
    for (int e = 0; e < ne; ++e)
      t.rows.push_back({std::string(to_string(schemes[j])), cfg.epsilon_grid[e], w[j * ne + e],
                        fit.C + cfg.epsilon_grid[e] * pert.A});
    per_scheme[to_string(schemes[j])] = {{"C", fit.C}, {"A", fit.A}, {"fit_residual", fit.residual}};
  }
  for (int e : pos)
    t.rows.push_back({std::string("continuous"), cfg.epsilon_grid[e], wc[e], cfg.epsilon_grid[e] * pert.A});

  json summary = {{"scenario", "leakage"},
                  {"gamma_dt", gdt},
                  {"steps", cfg.leakage_steps},
                  {"schemes", per_scheme},
                  {"A_perturbative", pert.A},
                  {"perturbative_residual", pert.residual},
                  {"A_regression_continuous", creg.A},
                  {"C_regression_continuous", creg.C}};
  ScenarioResult res;
  res.tables.push_back(std::move(t));

  if (!cfg.alpha_grid.empty() && !cfg.r_grid.empty()) {
    const int na = static_cast<int>(cfg.alpha_grid.size()), nr = static_cast<int>(cfg.r_grid.size());
    std::vector<double> A(na * nr), resid(na * nr);
    parallel_for(na * nr, opt.threads, [&](int c) {
      const double r = cfg.r_grid[c / na], al = cfg.alpha_grid[c % na];
      const PerturbativeResult pr = perturbative_A(NullifierSpec::sqcat(al, r, +1), D);
      A[c] = pr.A;
      resid[c] = pr.residual;
    });
    Table g{"leakage_A_grid", {"r", "alpha", "A", "residual"}, {}};
    json peaks = json::array();
    for (int i = 0; i < nr; ++i) {
      int arg = 0;
      for (int k = 0; k < na; ++k) {
        g.rows.push_back({cfg.r_grid[i], cfg.alpha_grid[k], A[i * na + k], resid[i * na + k]});
        if (A[i * na + k] > A[i * na + arg]) arg = k;
      }
      peaks.push_back({{"r", cfg.r_grid[i]},
                       {"peak_alpha", cfg.alpha_grid[arg]},
                       {"peak_A", A[i * na + arg]},
                       {"interior", arg > 0 && arg < na - 1}});
    }
    summary["A_grid_peaks"] = peaks;
    res.tables.push_back(std::move(g));
  }
  res.summary_json = summary.dump(2);
  return res;
}

ScenarioResult run_decompose_check(const ScenarioConfig& cfg, const RunOptions&) {
  const NullifierSpec spec = cfg.spec.to_spec();
  const int D = cfg.cutoff;
  const double dt = cfg.dt_grid.front(), gdt = cfg.gamma_hz * dt;
  const FactorGenerators gens = factor_generators(spec, 2 * D);
  const int keep = interior_size(D);

  Table t{"decompose_check", {"factor", "branch_z", "gate_index", "kind", "param_re", "param_im"}, {}};
  json factors = json::array();
  for (char which : {'A', 'B'}) {
    const CompiledFactor cf = compile_factor(spec, {which, 1.0}, gdt);
    // direct factor on a padded space, compared on the interior of D
    const Mat& h = which == 'A' ? gens.h1 : gens.h2;
    const Mat direct = which == 'A' ? pauli_conditional_exp(Pauli::X, 1.0, h, gdt)
                                    : pauli_conditional_exp(Pauli::Y, -1.0, h, gdt);
    const Mat compiled = compiled_factor_unitary(cf, 2 * D);
    Mat dsub(2 * D, 2 * D), csub(2 * D, 2 * D);
    // gather the qubit (x) interior block of each operator
    std::vector<int> idx;
    for (int q = 0; q < 2; ++q)
      for (int n = 0; n < keep; ++n) idx.push_back(q * 2 * D + n);
    const int m = static_cast<int>(idx.size());
    Mat a(m, m), b(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        a(i, j) = compiled(idx[i], idx[j]);
        b(i, j) = direct(idx[i], idx[j]);
      }
    const double dist = phase_aligned_distance(a, b, m);
    json branches = json::array();
    for (int br = 0; br < 2; ++br) {
      const int z = br == 0 ? 1 : -1;
      const auto& seq = cf.branch[br];
      json gl = json::array();
      for (size_t gi = 0; gi < seq.gates.size(); ++gi) {
        const auto& g = seq.gates[gi];
        const double pre = g.kind == GaussianGate::Kind::Displacement ? g.alpha.real() : g.value;
        const double pim = g.kind == GaussianGate::Kind::Displacement ? g.alpha.imag() : 0.0;
        t.rows.push_back({std::string(1, which), static_cast<long long>(z), static_cast<long long>(gi),
                          std::string(to_string(g.kind)), pre, pim});
        gl.push_back({{"kind", to_string(g.kind)}, {"re", pre}, {"im", pim}});
      }
      const SymplecticAffine sa = seq_to_symplectic(seq);
      branches.push_back({{"z", z},
                          {"gates", gl},
                          {"phase", seq.global_phase},
                          {"symplectic", {sa.S(0, 0), sa.S(0, 1), sa.S(1, 0), sa.S(1, 1)}},
                          {"shift", {sa.d(0), sa.d(1)}},
                          {"det_error", std::abs(sa.S.determinant() - 1.0)}});
    }
    factors.push_back({{"factor", std::string(1, which)},
                       {"basis_rotation", cf.basis_name},
                       {"interior_distance", dist},
                       {"branches", branches}});
  }
  StepChannel st = compile_step(spec, cfg.scheme, gdt, D, CompileMode::Compiled, 0);
  json summary = {{"scenario", "decompose-check"},
                  {"family", to_string(spec.family)},
                  {"gamma_dt", gdt},
                  {"factors", factors},
                  {"step_gates", json::parse(gates_to_json(st, dt))}};
  ScenarioResult res;
  res.tables.push_back(std::move(t));
  res.summary_json = summary.dump(2);
  return res;
}

ScenarioResult run_depth_theory(const ScenarioConfig& cfg, const RunOptions&) {
  const NullifierSpec spec = cfg.spec.to_spec();
  const int D = cfg.cutoff;
  const Mat vac = fock_state(0, D) * fock_state(0, D).adjoint();
  const double eps = 1.0 - cfg.fidelity_threshold * cfg.fidelity_threshold;
  Table t{"depth_theory",
          {"dt_s", "gamma_dt", "mean_excitation", "epsilon", "kappa_tau", "depth_N", "kappa_tau_large_r"},
          {}};
  const double nex = mean_excitation(spec, vac);
  for (double dt : cfg.dt_grid) {
    const double gdt = cfg.gamma_hz * dt;
    if (nex <= eps) {
      t.rows.push_back({dt, gdt, nex, eps, 0.0, 0LL, kNaN});
      continue;
    }
    const DepthEstimate e = depth_estimate(spec, vac, eps, gdt);
    t.rows.push_back({dt, gdt, e.mean_excitation, eps, e.kappa_tau, static_cast<long long>(e.depth_N),
                      e.cps_large_r_kappa_tau.value_or(kNaN)});
  }
  json summary = {{"scenario", "depth-theory"}, {"family", to_string(spec.family)}, {"mean_excitation", nex}};
  if (spec.family == Family::CPS) summary["closed_form"] = cps_vacuum_excitation(spec.r, spec.eta);
  if (spec.family == Family::TSS) summary["closed_form"] = tss_vacuum_excitation(spec.xi);
  ScenarioResult res;
  res.tables.push_back(std::move(t));
  res.summary_json = summary.dump(2);
  return res;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opt) {
  switch (cfg.scenario) {
    case ScenarioKind::Prepare: return run_prepare(cfg, opt);
    case ScenarioKind::Protect: return run_protect(cfg, opt);
    case ScenarioKind::Scan: return run_scan(cfg, opt);
    case ScenarioKind::Leakage: return run_leakage(cfg, opt);
    case ScenarioKind::DecomposeCheck: return run_decompose_check(cfg, opt);
    case ScenarioKind::DepthTheory: return run_depth_theory(cfg, opt);
  }
  throw Error(ErrorKind::ConfigError, "unhandled scenario");
}

namespace {
std::string cell_text(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return std::isfinite(*d) ? fmt::format("{:.17g}", *d) : "nan";
  if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
  const std::string& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}
}  // namespace

std::string table_to_csv(const Table& t, const std::string& hash) {
  std::string out;
  for (const auto& c : t.columns) out += c + ",";
  out += "config_hash,version\n";
  for (const auto& row : t.rows) {
    for (const auto& c : row) out += cell_text(c) + ",";
    out += hash + "," + library_version() + "\n";
  }
  return out;
}

void write_result(const ScenarioResult& res, const ScenarioConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::ConfigError, "cannot create output directory '" + dir + "': " + ec.message());
  const std::string hash = config_hash(cfg);
  for (const auto& t : res.tables) {
    std::ofstream f(fs::path(dir) / (t.name + ".csv"), std::ios::binary);
    if (!f) throw Error(ErrorKind::ConfigError, "cannot write " + t.name + ".csv");
    f << table_to_csv(t, hash);
  }
  json s = json::parse(res.summary_json);
  s["config_hash"] = hash;
  s["version"] = library_version();
  std::string name = to_string(cfg.scenario);
  std::replace(name.begin(), name.end(), '-', '_');
  std::ofstream f(fs::path(dir) / (name + "_summary.json"), std::ios::binary);
  f << s.dump(2) << "\n";
}

}  // namespace daqec
