#include "cdlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cdlab/kernels.hpp"
#include "cdlab/profiles.hpp"
#include "cdlab/runio.hpp"

namespace cdlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const Error& e) {
  static const std::set<std::string> usage{"config",
                                           "usage",
                                           "not subcritical",
                                           "regime/model mismatch",
                                           "invalid time",
                                           "norm",
                                           "exponent",
                                           "order overflow",
                                           "dimension",
                                           "below supercritical-mass threshold"};
  static const std::set<std::string> instability{"instability", "non-decaying integrand",
                                                 "quadrature", "corrupt field", "fit",
                                                 "fit window", "residual underflow", "mass",
                                                 "non-monotone", "tail"};
  static const std::set<std::string> domain{"domain", "domain mismatch", "resolution loss"};
  static const std::set<std::string> incomplete{"incomplete", "ledger gap", "missing constant"};
  if (usage.count(e.kind())) return 2;
  if (instability.count(e.kind())) return 3;
  if (domain.count(e.kind())) return 4;
  if (incomplete.count(e.kind())) return 5;
  return 1;
}

analysis::RunView RunResult::view() const {
  analysis::RunView v;
  v.model = &cfg.model;
  v.times = snapshot_times;
  v.load = [this](std::size_t i) { return fields.at(i); };
  v.ledger = &ledger;
  v.constants = &constants;
  v.run_id = cfg.name;
  return v;
}

RunResult run_experiment(const config::ExperimentConfig& cfg, bool write_outputs,
                         bool keep_fields) {
  cfg.validate();
  RunResult res;
  res.cfg = cfg;
  res.cfg.half_width = cfg.resolved_half_width();
  res.cfg.auto_half_width = false;

  grid::Grid g(cfg.model.n, res.cfg.half_width, cfg.points);
  solver::SolverConfig scfg(g);
  scfg.t_final = cfg.t_final;
  scfg.dt_init = cfg.dt_init;
  scfg.dt_growth = cfg.dt_growth;
  scfg.dt_rel_cap = cfg.dt_rel_cap;
  scfg.dt_abs_cap = cfg.dt_abs_cap;
  scfg.cfl = cfg.cfl;
  scfg.forced_times = cfg.ledger_times();

  std::vector<double> snaps = cfg.snapshot_times();
  auto is_snapshot = [&](double t) {
    auto it = std::lower_bound(snaps.begin(), snaps.end(), t * (1.0 - 1e-9));
    return it != snaps.end() && std::abs(*it - t) <= 1e-9 * std::max(1.0, t);
  };

  res.ledger.n = cfg.model.n;
  res.ledger.q = cfg.model.q;
  const bool phi_active = cfg.model.n == 1 && cfg.model.b.kind == model::BKind::PowerDecay &&
                          cfg.model.b.amplitude != 0.0;

  fs::path dir(cfg.out_dir);
  if (write_outputs) fs::create_directories(dir / "snapshots");

  solver::StepHooks hooks;
  hooks.on_forced_time = [&](double t, const grid::Field& u) {
    functionals::accumulate(res.ledger, t, u, cfg.model);
    if (t <= 0.0 || !is_snapshot(t)) return;
    if (phi_active)
      res.ledger.phi_snapshots.emplace_back(
          t, functionals::phi_field(t, u, res.ledger, cfg.model));
    if (t < cfg.snapshot_min_store_t) return;
    res.snapshot_times.push_back(t);
    if (write_outputs)
      runio::write_field_csv((dir / "snapshots" / runio::snapshot_filename(t)).string(), u);
    if (keep_fields) res.fields.push_back(u);
  };

  res.diag = solver::solve(cfg.model, scfg, hooks);
  res.constants = functionals::finalize_constants(res.ledger, cfg.model, cfg.t_final);

  if (write_outputs) {
    runio::write_ledger_csv((dir / "ledger.csv").string(), res.ledger);
    runio::write_constants_json((dir / "constants.json").string(), res.constants, cfg.model);
    runio::write_run_json((dir / "run.json").string(), res.cfg, res.diag, res.snapshot_times);
  }
  return res;
}

namespace {

profiles::Regime resolve_regime(const std::string& token, const model::ModelSpec& m) {
  if (token == "critical")
    return m.n == 1 ? profiles::Regime::CriticalOneDim : profiles::Regime::CriticalHighDim;
  return profiles::regime_from_label(token);
}

int max_order(profiles::Regime r) {
  switch (r) {
    case profiles::Regime::CriticalHighDim:
    case profiles::Regime::CriticalOneDim: return 3;
    case profiles::Regime::IkUhat: return 1;
    default: return 2;
  }
}

json rate_point_json(const analysis::RatePoint& pt) {
  return json::array({pt.t, pt.residual, pt.normalized});
}

json report_json(const analysis::RateReport& r) {
  json j;
  j["regime"] = r.regime_id;
  j["order"] = r.order;
  j["p"] = r.p_label;
  j["theoretical_exponent"] = r.theoretical_exponent;
  j["has_log"] = r.has_log;
  j["log_normalized"] = r.log_normalized;
  j["claim"] = r.claim == analysis::Claim::SlopeMatch
                   ? "slope"
                   : (r.claim == analysis::Claim::DecayToZero ? "decay" : "bounded");
  j["verdict"] = r.verdict;
  j["margin"] = r.margin;
  j["fit"] = {{"slope", r.fit.slope},
              {"stderr", r.fit.slope_stderr},
              {"intercept", r.fit.intercept},
              {"loglog_coeff", r.fit.loglog_coeff},
              {"used_log_regressor", r.fit.used_log_regressor},
              {"rss", r.fit.rss},
              {"npoints", r.fit.npoints}};
  json series = json::array();
  for (const auto& pt : r.series) series.push_back(rate_point_json(pt));
  j["series"] = series;
  return j;
}

}  // namespace

std::string verify_run(const analysis::RunView& view, const config::ExperimentConfig& cfg,
                       const std::vector<std::string>& regimes, bool write_outputs,
                       const std::string& out_dir) {
  if (regimes.empty()) throw Error("config", "empty regimes list");
  const model::ModelSpec& m = *view.model;

  analysis::TolerancePolicy pol;
  pol.slope_tol = cfg.slope_tol;
  pol.trend_factor = cfg.trend_factor;
  pol.growth_tol = cfg.growth_tol;
  analysis::Window fitw{cfg.fit_lo, cfg.fit_hi};
  if (!(fitw.hi > fitw.lo)) fitw = {cfg.t_final / 20.0, cfg.t_final};

  json report;
  report["run"] = view.run_id;
  report["tolerances"] = {{"slope_tol", pol.slope_tol},
                          {"trend_factor", pol.trend_factor},
                          {"growth_tol", pol.growth_tol},
                          {"fit_window", json::array({fitw.lo, fitw.hi})}};

  // Constants echo with tails.
  {
    json cj;
    cj["M"] = view.constants->M;
    cj["m"] = view.constants->m;
    if (!view.constants->mathM.empty()) cj["mathM"] = view.constants->mathM;
    if (view.constants->mathN) cj["mathN"] = *view.constants->mathN;
    if (view.constants->beta) cj["beta"] = *view.constants->beta;
    if (view.constants->mathL) cj["mathL"] = *view.constants->mathL;
    cj["tails"] = view.constants->tails;
    report["constants"] = cj;
  }

  json regime_reports = json::array();
  std::vector<analysis::RateReport> all_reports;
  for (const std::string& token : regimes) {
    profiles::Regime regime = resolve_regime(token, m);
    profiles::ExpansionSpec spec;
    spec.regime = regime;
    spec.constants = view.constants;
    spec.n = m.n;
    spec.q = m.q;
    spec.d = m.d;
    spec.b = m.b;
    if (regime == profiles::Regime::IkUhat && !m.b.is_zero())
      throw Error("regime/model mismatch", "ik_uhat regime requires b = 0");
    spec.check_consistent();
    for (int order = 1; order <= max_order(regime); ++order) {
      spec.order = order;
      auto reports =
          analysis::residual_series(view, spec, cfg.norms, cfg.verify_t_min, fitw, pol);
      for (auto& r : reports) {
        regime_reports.push_back(report_json(r));
        all_reports.push_back(std::move(r));
      }
    }

    if (regime == profiles::Regime::CriticalHighDim ||
        regime == profiles::Regime::CriticalOneDim) {
      json cstars = json::array();
      for (grid::Norm p : cfg.norms) {
        analysis::CStarResult cr = analysis::c_star_check(view, *view.constants, p,
                                                          std::max(cfg.verify_t_min, 2.0));
        json cj;
        cj["p"] = grid::norm_label(p);
        cj["c_star"] = cr.c_star;
        cj["relative_gap"] = cr.relative_gap;
        json lhs = json::array();
        for (const auto& pt : cr.lhs) lhs.push_back(rate_point_json(pt));
        cj["lhs"] = lhs;
        cstars.push_back(cj);
      }
      report["c_star"] = cstars;

      // Log-term detection on the order-1 L1 series.
      for (const auto& r : all_reports)
        if (r.regime_id == profiles::regime_label(regime) && r.order == 1 &&
            r.p_label == "1") {
          analysis::LogDetect ld = analysis::detect_log_term(r.series, m, grid::Norm::L1, fitw);
          report["log_detection"] = {{"prefers_log", ld.prefers_log}, {"a_fit", ld.a_fit},
                                     {"c_fit", ld.c_fit},             {"c_theory", ld.c_theory},
                                     {"rel_gap", ld.rel_gap},         {"bic_const", ld.bic_const},
                                     {"bic_log", ld.bic_log}};
          break;
        }
    }
  }
  report["regimes"] = regime_reports;

  if (m.n == 1 && !view.constants->K_table.empty()) {
    double worst = 0.0;
    for (const auto& kr : view.constants->K_table) {
      double lt = std::log(kr.t);
      worst = std::max(worst,
                       std::abs(kr.K * lt - (kr.mathK * lt + view.constants->mathL.value_or(0.0))));
    }
    report["k_split_max_abs"] = worst;
  }

  if (m.n == 1 && m.b.kind == model::BKind::PowerDecay && m.b.amplitude != 0.0) {
    json phis = json::array();
    for (grid::Norm p : {grid::Norm::L1, grid::Norm::Linf}) {
      auto series = analysis::phi_star_norms(view, p, std::max(cfg.verify_t_min, 2.0));
      json pj;
      pj["p"] = grid::norm_label(p);
      json s = json::array();
      for (const auto& pt : series) s.push_back(rate_point_json(pt));
      pj["series"] = s;
      analysis::RateReport tmp;
      tmp.series = series;
      tmp.claim = analysis::Claim::Bounded;
      analysis::apply_verdict(tmp, pol);
      pj["verdict"] = tmp.verdict;
      pj["margin"] = tmp.margin;
      phis.push_back(pj);
    }
    report["phi_bound"] = phis;

    analysis::LogGrowthFit gf = analysis::abs_bgradu_growth(view, fitw);
    report["bgradu_growth"] = {{"a", gf.a}, {"c", gf.c}};
  }

  // The asymptotic decay suite needs a long horizon to be meaningful (the
  // normalized norms plateau only past t ~ 100).
  if (cfg.t_final >= 100.0) {
    json dj = json::array();
    for (const auto& dc : analysis::decay_checks(*view.ledger, m, 0.0, pol)) {
      json e;
      e["name"] = dc.name;
      e["p"] = dc.p_label;
      e["verdict"] = dc.verdict;
      e["margin"] = dc.margin;
      json s = json::array();
      for (const auto& pt : dc.series) s.push_back(rate_point_json(pt));
      e["series"] = s;
      dj.push_back(e);
    }
    report["decay"] = dj;
  }

  std::string text = report.dump(2) + "\n";
  if (write_outputs) {
    fs::path dir(out_dir);
    fs::create_directories(dir);
    std::ofstream(dir / "report.json") << text;
    std::ofstream csv(dir / "report.csv");
    csv << "regime,order,p,t,residual,normalized\n";
    for (const auto& r : all_reports)
      for (const auto& pt : r.series)
        csv << r.regime_id << ',' << r.order << ',' << r.p_label << ','
            << runio::format_double(pt.t) << ',' << runio::format_double(pt.residual) << ','
            << runio::format_double(pt.normalized) << "\n";
    if (cfg.emit_plots) {
      fs::create_directories(dir / "plots");
      for (const auto& r : all_reports) {
        std::string id = r.regime_id + "_o" + std::to_string(r.order) + "_p" + r.p_label;
        std::ofstream dat(dir / "plots" / (id + ".dat"));
        for (const auto& pt : r.series)
          dat << runio::format_double(pt.t) << ' ' << runio::format_double(pt.normalized)
              << "\n";
        std::ofstream gp(dir / "plots" / (id + ".gp"));
        gp << "set logscale x\nset xlabel 't'\nset ylabel 'normalized residual'\n"
           << "set title '" << id << "'\nplot '" << id << ".dat' using 1:2 with linespoints\n";
      }
    }
  }
  return text;
}

int cmd_run(const std::vector<std::string>& config_paths, int jobs, std::ostream& out) {
  if (config_paths.empty()) throw Error("usage", "run requires at least one config file");
  std::vector<config::ExperimentConfig> cfgs;
  for (const auto& p : config_paths) cfgs.push_back(config::parse_file(p));

  std::vector<int> codes(cfgs.size(), 0);
  std::vector<std::string> messages(cfgs.size());
  std::size_t next = 0;
  std::mutex mu;
  auto worker = [&]() {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lk(mu);
        if (next >= cfgs.size()) return;
        i = next++;
      }
      try {
        RunResult r = run_experiment(cfgs[i], true, false);
        std::lock_guard<std::mutex> lk(mu);
        messages[i] = cfgs[i].name + ": ok, steps=" + std::to_string(r.diag.steps) +
                      ", mass_drift=" + runio::format_double(r.diag.mass_drift);
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lk(mu);
        codes[i] = exit_code_for(e);
        messages[i] = cfgs[i].name + ": error: " + e.what();
      }
    }
  };
  int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(cfgs.size())));
  std::vector<std::thread> pool;
  for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  int code = 0;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    out << messages[i] << "\n";
    if (codes[i] != 0 && code == 0) code = codes[i];
  }
  return code;
}

int cmd_verify(const std::string& run_dir, const std::vector<std::string>& regime_override,
               std::ostream& out) {
  runio::LoadedRun run = runio::load_run(run_dir);
  std::vector<std::string> regimes =
      regime_override.empty() ? run.cfg.regimes : regime_override;
  verify_run(run.view(), run.cfg, regimes, true, run_dir);
  out << run.run_id << ": report written to " << (fs::path(run_dir) / "report.json").string()
      << "\n";
  return 0;
}

int cmd_report(const std::string& run_dir, std::ostream& out) {
  fs::path p = fs::path(run_dir) / "report.json";
  std::ifstream in(p);
  if (!in) throw Error("incomplete", "missing report.json in " + run_dir + "; run verify first");
  json j;
  in >> j;
  out << "run: " << j.value("run", "?") << "\n";
  if (j.contains("constants")) {
    const json& c = j["constants"];
    out << "constants: M=" << c.value("M", 0.0);
    if (c.contains("mathM")) out << " mathM=" << c["mathM"].dump();
    if (c.contains("mathN")) out << " mathN=" << c["mathN"].dump();
    if (c.contains("beta")) out << " beta=" << c["beta"].dump();
    if (c.contains("mathL")) out << " mathL=" << c["mathL"].dump();
    out << "\n";
  }
  if (j.contains("regimes"))
    for (const auto& r : j["regimes"])
      out << "  [" << r.value("verdict", "?") << "] " << r.value("regime", "?") << " order "
          << r.value("order", 0) << " L^" << r.value("p", "?") << " claim "
          << r.value("claim", "?") << " slope " << r["fit"].value("slope", 0.0) << " (theory "
          << r.value("theoretical_exponent", 0.0) << ")\n";
  if (j.contains("c_star"))
    for (const auto& c : j["c_star"])
      out << "  c_star L^" << c.value("p", "?") << " = " << c.value("c_star", 0.0)
          << " relative gap " << c.value("relative_gap", 0.0) << "\n";
  if (j.contains("log_detection"))
    out << "  log detection: prefers_log=" << j["log_detection"].value("prefers_log", false)
        << " c_fit=" << j["log_detection"].value("c_fit", 0.0)
        << " c_theory=" << j["log_detection"].value("c_theory", 0.0) << "\n";
  if (j.contains("decay"))
    for (const auto& d : j["decay"])
      out << "  [" << d.value("verdict", "?") << "] decay " << d.value("name", "?") << " L^"
          << d.value("p", "?") << "\n";
  return 0;
}

int cmd_profiles(const ProfileQuery& query, std::ostream& out) {
  if (query.n != 1 && query.n != 2) throw Error("config", "profiles: n must be 1 or 2");
  std::vector<double> d = query.d;
  if (d.empty()) d.assign(static_cast<std::size_t>(query.n), 1.0);
  if (static_cast<int>(d.size()) != query.n)
    throw Error("config", "profiles: d must have n components");
  quad::QuadratureSpec qs;

  auto eval = [&](double x0, double t) -> double {
    double x[2] = {x0, 0.0};
    if (query.name == "f_star") return kernels::f_star(x, query.n);
    if (query.name == "psi_star") return profiles::psi_star(x, query.n, d, qs);
    if (query.name == "psi") return profiles::psi(x, t, query.n, d, qs);
    if (query.name == "v_exact") return profiles::v_exact(x, t, query.n, d, qs);
    if (query.name == "z_profile") return profiles::z_profile(x, t, query.q, query.n, d, qs);
    throw Error("usage", "unknown profile '" + query.name + "'");
  };

  const bool needs_t = query.name == "psi" || query.name == "v_exact" ||
                       query.name == "z_profile";
  if (query.name != "f_star" && query.name != "psi_star" && query.name != "psi" &&
      query.name != "v_exact" && query.name != "z_profile")
    throw Error("usage", "unknown profile '" + query.name + "'");
  if (needs_t && query.ts.empty())
    throw Error("usage", "profile '" + query.name + "' requires --t");
  std::vector<double> ts = needs_t ? query.ts : std::vector<double>{0.0};
  std::vector<double> xs = query.xs.empty() ? std::vector<double>{0.0} : query.xs;

  if (needs_t)
    out << "x,t,value\n";
  else
    out << "x,value\n";
  for (double t : ts)
    for (double x : xs) {
      double v = eval(x, t);
      if (needs_t)
        out << runio::format_double(x) << ',' << runio::format_double(t) << ','
            << runio::format_double(v) << "\n";
      else
        out << runio::format_double(x) << ',' << runio::format_double(v) << "\n";
    }
  return 0;
}

}  // namespace cdlab::cli
