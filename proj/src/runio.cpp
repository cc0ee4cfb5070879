#include "cdlab/runio.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cdlab::runio {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // collapse negative zero
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string snapshot_filename(double t) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "t_%.12g.csv", t);
  return buf;
}

void write_field_csv(const std::string& path, const grid::Field& f) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw Error("io", "cannot open " + path + " for writing");
  const grid::Grid& g = f.grid;
  double t = f.time_tag.value_or(0.0);
  std::fprintf(fp, "# n=%d L=%.17g N=%d t=%.17g\n", g.dim(), g.half_width(), g.points(), t);
  if (g.dim() == 1) {
    for (int i = 0; i < g.points(); ++i)
      std::fprintf(fp, "%.17g,%.17g\n", g.coord(i), f.values[static_cast<std::size_t>(i)]);
  } else {
    const int n = g.points();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        std::fprintf(fp, "%.17g,%.17g,%.17g\n", g.coord(i), g.coord(j),
                     f.values[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * j]);
  }
  std::fclose(fp);
}

grid::Field read_field_csv(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "r");
  if (!fp) throw Error("incomplete", "missing field file " + path);
  char line[256];
  if (!std::fgets(line, sizeof(line), fp)) {
    std::fclose(fp);
    throw Error("incomplete", "empty field file " + path);
  }
  int n = 0, N = 0;
  double L = 0.0, t = 0.0;
  if (std::sscanf(line, "# n=%d L=%lf N=%d t=%lf", &n, &L, &N, &t) != 4) {
    std::fclose(fp);
    throw Error("incomplete", "bad field header in " + path);
  }
  grid::Grid g(n, L, N);
  grid::Field f(g);
  f.time_tag = t;
  std::size_t count = 0;
  while (std::fgets(line, sizeof(line), fp)) {
    double a = 0.0, b = 0.0, c = 0.0;
    if (n == 1) {
      if (std::sscanf(line, "%lf,%lf", &a, &b) != 2) break;
      if (count >= f.values.size()) break;
      f.values[count++] = b;
    } else {
      if (std::sscanf(line, "%lf,%lf,%lf", &a, &b, &c) != 3) break;
      if (count >= f.values.size()) break;
      f.values[count++] = c;
    }
  }
  std::fclose(fp);
  if (count != f.values.size())
    throw Error("incomplete", "field file " + path + " has wrong row count");
  return f;
}

void write_ledger_csv(const std::string& path, const functionals::Ledger& ledger) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw Error("io", "cannot open " + path + " for writing");
  if (ledger.n == 1)
    std::fprintf(fp, "t,mass,m1,int_uq,int_rho,int_bgradu,l1,l2,linf,g_l1,g_l2,g_linf\n");
  else
    std::fprintf(fp,
                 "t,mass,m1,m2,int_uq,int_rho,int_bgradu1,int_bgradu2,l1,l2,linf,g_l1,g_l2,g_"
                 "linf\n");
  for (const auto& r : ledger.rows) {
    if (ledger.n == 1)
      std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                   r.t, r.mass, r.m1[0], r.int_uq, r.int_rho,
                   r.int_bgradu.empty() ? 0.0 : r.int_bgradu[0], r.l1, r.l2, r.linf, r.g_l1,
                   r.g_l2, r.g_linf);
    else
      std::fprintf(fp,
                   "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                   "%.17g\n",
                   r.t, r.mass, r.m1[0], r.m1[1], r.int_uq, r.int_rho,
                   r.int_bgradu.empty() ? 0.0 : r.int_bgradu[0],
                   r.int_bgradu.size() < 2 ? 0.0 : r.int_bgradu[1], r.l1, r.l2, r.linf, r.g_l1,
                   r.g_l2, r.g_linf);
  }
  std::fclose(fp);
}

void read_ledger_csv(const std::string& path, functionals::Ledger& ledger) {
  std::ifstream in(path);
  if (!in) throw Error("incomplete", "missing ledger.csv at " + path);
  std::string header;
  std::getline(in, header);
  int n = header.find(",m2,") != std::string::npos ? 2 : 1;
  ledger.n = n;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    functionals::LedgerRow r;
    std::size_t k = 0;
    r.t = v.at(k++);
    r.mass = v.at(k++);
    r.m1.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) r.m1[static_cast<std::size_t>(i)] = v.at(k++);
    r.int_uq = v.at(k++);
    r.int_rho = v.at(k++);
    r.int_bgradu.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) r.int_bgradu[static_cast<std::size_t>(i)] = v.at(k++);
    r.l1 = v.at(k++);
    r.l2 = v.at(k++);
    r.linf = v.at(k++);
    r.g_l1 = v.at(k++);
    r.g_l2 = v.at(k++);
    r.g_linf = v.at(k++);
    ledger.rows.push_back(std::move(r));
  }
  if (!ledger.rows.empty()) ledger.M = ledger.rows.front().mass;
}

namespace {

json model_to_json(const model::ModelSpec& m) {
  json j;
  j["n"] = m.n;
  j["q"] = m.q;
  j["d"] = m.d;
  j["b"]["kind"] = m.b.kind == model::BKind::Zero
                       ? "zero"
                       : (m.b.kind == model::BKind::Constant ? "constant" : "power_decay");
  j["b"]["amplitude"] = m.b.amplitude;
  j["b"]["delta"] = m.b.delta;
  j["u0"]["kind"] = m.u0.kind == model::U0Kind::Gaussian
                        ? "gaussian"
                        : (m.u0.kind == model::U0Kind::Dipole ? "dipole" : "sum");
  j["u0"]["mass"] = m.u0.mass;
  j["u0"]["width"] = m.u0.width;
  j["u0"]["center"] = m.u0.center;
  j["u0"]["scale"] = m.u0.dipole_scale;
  j["u0"]["dipole_width"] = m.u0.dipole_width;
  return j;
}

model::ModelSpec model_from_json(const json& j) {
  model::ModelSpec m;
  m.n = j.at("n").get<int>();
  m.q = j.at("q").get<double>();
  m.d = j.at("d").get<std::vector<double>>();
  std::string bk = j.at("b").at("kind").get<std::string>();
  m.b.kind = bk == "zero" ? model::BKind::Zero
                          : (bk == "constant" ? model::BKind::Constant : model::BKind::PowerDecay);
  m.b.amplitude = j.at("b").at("amplitude").get<double>();
  m.b.delta = j.at("b").at("delta").get<double>();
  std::string uk = j.at("u0").at("kind").get<std::string>();
  m.u0.kind = uk == "gaussian" ? model::U0Kind::Gaussian
                               : (uk == "dipole" ? model::U0Kind::Dipole : model::U0Kind::Sum);
  m.u0.mass = j.at("u0").at("mass").get<double>();
  m.u0.width = j.at("u0").at("width").get<double>();
  m.u0.center = j.at("u0").at("center").get<std::vector<double>>();
  m.u0.dipole_scale = j.at("u0").at("scale").get<double>();
  m.u0.dipole_width = j.at("u0").at("dipole_width").get<double>();
  return m;
}

}  // namespace

void write_constants_json(const std::string& path, const functionals::ConstantSet& cs,
                          const model::ModelSpec& m) {
  json j;
  j["M"] = cs.M;
  j["m"] = cs.m;
  if (!cs.mathM.empty()) j["mathM"] = cs.mathM;
  if (cs.mathN.has_value())
    j["mathN"] = *cs.mathN;
  else if (m.n >= 2)
    j["mathN"] = nullptr;
  if (cs.beta.has_value()) j["beta"] = *cs.beta;
  if (cs.mathL.has_value()) j["mathL"] = *cs.mathL;
  if (!cs.K_table.empty()) {
    json kt = json::array();
    for (const auto& kr : cs.K_table) kt.push_back({{"t", kr.t}, {"K", kr.K}, {"mathK", kr.mathK}});
    j["K_table"] = kt;
  }
  j["tails"] = cs.tails;
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

functionals::ConstantSet read_constants_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("incomplete", "missing constants.json at " + path);
  json j;
  in >> j;
  functionals::ConstantSet cs;
  cs.M = j.at("M").get<double>();
  cs.m = j.at("m").get<std::vector<double>>();
  if (j.contains("mathM")) cs.mathM = j.at("mathM").get<std::vector<double>>();
  if (j.contains("mathN") && !j.at("mathN").is_null())
    cs.mathN = j.at("mathN").get<std::vector<double>>();
  if (j.contains("beta")) cs.beta = j.at("beta").get<std::vector<double>>();
  if (j.contains("mathL")) cs.mathL = j.at("mathL").get<double>();
  if (j.contains("K_table"))
    for (const auto& e : j.at("K_table"))
      cs.K_table.push_back({e.at("t").get<double>(), e.at("K").get<double>(),
                            e.at("mathK").get<double>()});
  if (j.contains("tails"))
    cs.tails = j.at("tails").get<std::map<std::string, double>>();
  return cs;
}

void write_run_json(const std::string& path, const config::ExperimentConfig& cfg,
                    const solver::Diagnostics& diag, const std::vector<double>& snapshot_times) {
  json j;
  j["name"] = cfg.name;
  j["model"] = model_to_json(cfg.model);
  j["grid"] = {{"half_width", cfg.resolved_half_width()},
               {"points", cfg.points},
               {"auto_half_width", cfg.auto_half_width}};
  j["time"] = {{"t_final", cfg.t_final},
               {"dt_init", cfg.dt_init},
               {"dt_growth", cfg.dt_growth},
               {"dt_rel_cap", cfg.dt_rel_cap},
               {"cfl", cfg.cfl},
               {"snapshot_ratio", cfg.snapshot_ratio},
               {"snapshot_t0", cfg.snapshot_t0},
               {"ledger_t0", cfg.ledger_t0},
               {"ledger_refine", cfg.ledger_refine},
               {"snapshot_min_store_t", cfg.snapshot_min_store_t}};
  json regimes = json::array();
  for (const auto& r : cfg.regimes) regimes.push_back(r);
  json norms = json::array();
  for (grid::Norm p : cfg.norms) norms.push_back(grid::norm_label(p));
  j["verify"] = {{"regimes", regimes},
                 {"norms", norms},
                 {"fit_lo", cfg.fit_lo},
                 {"fit_hi", cfg.fit_hi},
                 {"slope_tol", cfg.slope_tol},
                 {"trend_factor", cfg.trend_factor},
                 {"growth_tol", cfg.growth_tol},
                 {"t_min", cfg.verify_t_min}};
  j["output"] = {{"emit_plots", cfg.emit_plots}};
  j["snapshots"] = snapshot_times;
  j["diagnostics"] = {{"mass_initial", diag.mass_initial}, {"mass_final", diag.mass_final},
                      {"mass_drift", diag.mass_drift},     {"boundary_leak", diag.boundary_leak},
                      {"steps", diag.steps},               {"dt_min", diag.dt_min},
                      {"dt_max", diag.dt_max}};
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

LoadedRun load_run(const std::string& dir) {
  std::vector<std::string> missing;
  for (const char* f : {"run.json", "ledger.csv", "constants.json"})
    if (!fs::exists(fs::path(dir) / f)) missing.push_back(f);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error("incomplete", "run directory " + dir + " is missing: " + list);
  }

  LoadedRun run;
  run.dir = dir;
  std::ifstream in((fs::path(dir) / "run.json").string());
  json j;
  try {
    in >> j;
    run.run_id = j.at("name").get<std::string>();
    run.cfg.name = run.run_id;
    run.cfg.model = model_from_json(j.at("model"));
    run.cfg.half_width = j.at("grid").at("half_width").get<double>();
    run.cfg.points = j.at("grid").at("points").get<int>();
    run.cfg.t_final = j.at("time").at("t_final").get<double>();
    run.cfg.dt_init = j.at("time").at("dt_init").get<double>();
    run.cfg.snapshot_ratio = j.at("time").at("snapshot_ratio").get<double>();
    run.cfg.snapshot_t0 = j.at("time").at("snapshot_t0").get<double>();
    run.cfg.snapshot_min_store_t = j.at("time").at("snapshot_min_store_t").get<double>();
    for (const auto& r : j.at("verify").at("regimes")) run.cfg.regimes.push_back(r.get<std::string>());
    run.cfg.norms.clear();
    for (const auto& p : j.at("verify").at("norms"))
      run.cfg.norms.push_back(grid::norm_from_p(p.get<std::string>() == "inf"
                                                    ? std::numeric_limits<double>::infinity()
                                                    : std::stod(p.get<std::string>())));
    run.cfg.fit_lo = j.at("verify").at("fit_lo").get<double>();
    run.cfg.fit_hi = j.at("verify").at("fit_hi").get<double>();
    run.cfg.slope_tol = j.at("verify").at("slope_tol").get<double>();
    run.cfg.trend_factor = j.at("verify").at("trend_factor").get<double>();
    run.cfg.growth_tol = j.at("verify").at("growth_tol").get<double>();
    run.cfg.verify_t_min = j.at("verify").at("t_min").get<double>();
    run.cfg.emit_plots = j.at("output").at("emit_plots").get<bool>();
    run.cfg.out_dir = dir;
    for (const auto& t : j.at("snapshots")) run.snapshot_times.push_back(t.get<double>());
    run.diag.mass_initial = j.at("diagnostics").at("mass_initial").get<double>();
    run.diag.mass_final = j.at("diagnostics").at("mass_final").get<double>();
    run.diag.mass_drift = j.at("diagnostics").at("mass_drift").get<double>();
    run.diag.boundary_leak = j.at("diagnostics").at("boundary_leak").get<double>();
    run.diag.steps = j.at("diagnostics").at("steps").get<long>();
  } catch (const json::exception& e) {
    throw Error("incomplete", std::string("run.json is malformed: ") + e.what());
  }

  for (double t : run.snapshot_times) {
    std::string p = (fs::path(dir) / "snapshots" / snapshot_filename(t)).string();
    if (!fs::exists(p)) throw Error("incomplete", "missing snapshot " + p);
    run.snapshot_paths.push_back(p);
  }

  run.ledger.n = run.cfg.model.n;
  run.ledger.q = run.cfg.model.q;
  read_ledger_csv((fs::path(dir) / "ledger.csv").string(), run.ledger);
  run.constants = read_constants_json((fs::path(dir) / "constants.json").string());

  // Rebuild phi snapshots for variable-diffusion 1-D runs.
  if (run.cfg.model.n == 1 && run.cfg.model.b.kind == model::BKind::PowerDecay &&
      run.cfg.model.b.amplitude != 0.0) {
    for (std::size_t i = 0; i < run.snapshot_times.size(); ++i) {
      grid::Field u = read_field_csv(run.snapshot_paths[i]);
      run.ledger.phi_snapshots.emplace_back(
          run.snapshot_times[i],
          functionals::phi_field(run.snapshot_times[i], u, run.ledger, run.cfg.model));
    }
  }
  return run;
}

analysis::RunView LoadedRun::view() const {
  analysis::RunView v;
  v.model = &cfg.model;
  v.times = snapshot_times;
  v.load = [this](std::size_t i) { return read_field_csv(snapshot_paths[i]); };
  v.ledger = &ledger;
  v.constants = &constants;
  v.run_id = run_id;
  return v;
}

}  // namespace cdlab::runio
