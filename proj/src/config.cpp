#include "cdlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace cdlab::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

struct KvTable {
  std::map<std::string, std::pair<std::string, int>> kv;  // key -> (value, line)
  std::string source;

  bool has(const std::string& k) const { return kv.count(k) > 0; }

  std::string require(const std::string& k) const {
    auto it = kv.find(k);
    if (it == kv.end()) throw Error("config", source + ": missing required key " + k);
    return it->second.first;
  }

  std::string get(const std::string& k, const std::string& dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second.first;
  }

  double number(const std::string& k, double dflt, bool required = false) const {
    auto it = kv.find(k);
    if (it == kv.end()) {
      if (required) throw Error("config", source + ": missing required key " + k);
      return dflt;
    }
    try {
      std::size_t pos = 0;
      double v = std::stod(it->second.first, &pos);
      if (pos != it->second.first.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw Error("config", source + ": line " + std::to_string(it->second.second) +
                                ": key " + k + " is not a number: '" + it->second.first + "'");
    }
  }

  bool flag(const std::string& k, bool dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    std::string v = it->second.first;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error("config", source + ": line " + std::to_string(it->second.second) + ": key " + k +
                              " must be true/false");
  }

  std::vector<double> numbers(const std::string& k, std::vector<double> dflt,
                              bool required = false) const {
    auto it = kv.find(k);
    if (it == kv.end()) {
      if (required) throw Error("config", source + ": missing required key " + k);
      return dflt;
    }
    std::vector<double> out;
    for (const auto& piece : split(it->second.first, ',')) {
      try {
        out.push_back(std::stod(piece));
      } catch (const std::exception&) {
        throw Error("config", source + ": line " + std::to_string(it->second.second) + ": key " +
                                  k + " has a non-numeric entry '" + piece + "'");
      }
    }
    return out;
  }
};

KvTable parse_kv(const std::string& text, const std::string& source) {
  KvTable t;
  t.source = source;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string s = line;
    std::size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw Error("config",
                  source + ": line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty())
      throw Error("config", source + ": line " + std::to_string(lineno) + ": empty key");
    t.kv[key] = {val, lineno};
  }
  return t;
}

}  // namespace

double ExperimentConfig::resolved_half_width() const {
  if (!auto_half_width) return half_width;
  double L = 8.0 * std::sqrt(1.0 + t_final) + model.u0.support_radius(model.n);
  return std::ceil(L);
}

std::vector<double> ExperimentConfig::snapshot_times() const {
  std::vector<double> out;
  double t = snapshot_t0;
  while (t < t_final * (1.0 - 1e-12)) {
    out.push_back(t);
    t *= snapshot_ratio;
  }
  out.push_back(t_final);
  return out;
}

std::vector<double> ExperimentConfig::ledger_times() const {
  std::vector<double> out = snapshot_times();
  double r = std::pow(snapshot_ratio, 1.0 / ledger_refine);
  double t = ledger_t0;
  double dense_end = std::min(1.0, t_final);
  while (t < dense_end * (1.0 - 1e-12)) {
    out.push_back(t);
    t *= r;
  }
  if (t_final >= 1.0) out.push_back(1.0);
  std::sort(out.begin(), out.end());
  std::vector<double> dedup;
  for (double v : out)
    if (dedup.empty() || v > dedup.back() * (1.0 + 1e-12)) dedup.push_back(v);
  return dedup;
}

void ExperimentConfig::validate() const {
  model.validate();
  if (points < 16 || points % 2 != 0)
    throw Error("config", "grid.points must be even and >= 16");
  if (!auto_half_width && !(half_width > 0.0))
    throw Error("config", "grid.half_width must be positive (or set grid.auto_half_width)");
  if (!(t_final > 0.0)) throw Error("config", "time.t_final must be positive");
  if (!(dt_init > 0.0)) throw Error("config", "time.dt_init must be positive");
  if (!(snapshot_ratio > 1.0)) throw Error("config", "time.snapshot_ratio must exceed 1");
  if (!(snapshot_t0 > 0.0) || snapshot_t0 >= t_final)
    throw Error("config", "time.snapshot_t0 must lie in (0, t_final)");
  if (norms.empty()) throw Error("config", "verify.norms must not be empty");
  if (out_dir.empty()) throw Error("config", "output.directory is required");
}

ExperimentConfig parse_string(const std::string& text, const std::string& name) {
  KvTable t = parse_kv(text, name);
  ExperimentConfig c;
  c.name = name;

  c.model.n = static_cast<int>(t.number("model.n", 0, true));
  c.model.q = t.number("model.q", 0, true);
  c.model.d = t.numbers("model.d", {}, true);
  std::string bkind = t.get("model.b.kind", "zero");
  if (bkind == "zero")
    c.model.b.kind = model::BKind::Zero;
  else if (bkind == "constant")
    c.model.b.kind = model::BKind::Constant;
  else if (bkind == "power_decay")
    c.model.b.kind = model::BKind::PowerDecay;
  else
    throw Error("config", name + ": model.b.kind must be zero|constant|power_decay");
  c.model.b.amplitude = t.number("model.b.amplitude", 0.0);
  c.model.b.delta = t.number("model.b.delta", 1.0);

  std::string ukind = t.get("model.u0.kind", "gaussian");
  if (ukind == "gaussian")
    c.model.u0.kind = model::U0Kind::Gaussian;
  else if (ukind == "dipole")
    c.model.u0.kind = model::U0Kind::Dipole;
  else if (ukind == "sum")
    c.model.u0.kind = model::U0Kind::Sum;
  else
    throw Error("config", name + ": model.u0.kind must be gaussian|dipole|sum");
  c.model.u0.mass = t.number("model.u0.mass", 1.0);
  c.model.u0.width = t.number("model.u0.width", 1.0);
  c.model.u0.center = t.numbers("model.u0.center", {});
  c.model.u0.dipole_scale = t.number("model.u0.scale", 1.0);
  c.model.u0.dipole_width = t.number("model.u0.dipole_width", c.model.u0.width);

  c.points = static_cast<int>(t.number("grid.points", 0, true));
  c.auto_half_width = t.flag("grid.auto_half_width", false);
  c.half_width = t.number("grid.half_width", 0.0, !c.auto_half_width);

  c.t_final = t.number("time.t_final", 0, true);
  c.dt_init = t.number("time.dt_init", c.dt_init);
  c.dt_growth = t.number("time.dt_growth", c.dt_growth);
  c.dt_rel_cap = t.number("time.dt_rel_cap", c.dt_rel_cap);
  c.dt_abs_cap = t.number("time.dt_abs_cap", c.dt_abs_cap);
  c.cfl = t.number("time.cfl", c.cfl);
  c.snapshot_ratio = t.number("time.snapshot_ratio", c.snapshot_ratio);
  c.snapshot_t0 = t.number("time.snapshot_t0", c.snapshot_t0);
  c.ledger_t0 = t.number("time.ledger_t0", c.ledger_t0);
  c.ledger_refine = t.number("time.ledger_refine", c.ledger_refine);
  c.snapshot_min_store_t = t.number("time.snapshot_min_store_t", c.snapshot_min_store_t);

  if (t.has("verify.regimes")) {
    for (const auto& r : split(t.get("verify.regimes", ""), ','))
      if (!r.empty()) c.regimes.push_back(r);
  }
  if (t.has("verify.norms")) {
    c.norms.clear();
    for (const auto& s : split(t.get("verify.norms", ""), ',')) {
      if (s == "1")
        c.norms.push_back(grid::Norm::L1);
      else if (s == "2")
        c.norms.push_back(grid::Norm::L2);
      else if (s == "inf")
        c.norms.push_back(grid::Norm::Linf);
      else
        throw Error("config", name + ": verify.norms entries must be 1, 2 or inf");
    }
  }
  if (t.has("verify.fit_window")) {
    auto w = t.numbers("verify.fit_window", {});
    if (w.size() != 2 || !(w[0] < w[1]))
      throw Error("config", name + ": verify.fit_window must be 'lo,hi' with lo < hi");
    c.fit_lo = w[0];
    c.fit_hi = w[1];
  }
  c.slope_tol = t.number("verify.slope_tol", c.slope_tol);
  c.trend_factor = t.number("verify.trend_factor", c.trend_factor);
  c.growth_tol = t.number("verify.growth_tol", c.growth_tol);
  c.verify_t_min = t.number("verify.t_min", c.verify_t_min);

  c.out_dir = t.get("output.directory", "");
  c.emit_plots = t.flag("output.emit_plots", false);

  c.validate();
  return c;
}

ExperimentConfig parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config", "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string stem = path;
  std::size_t slash = stem.find_last_of('/');
  if (slash != std::string::npos) stem = stem.substr(slash + 1);
  std::size_t dot = stem.find_last_of('.');
  if (dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_string(ss.str(), stem);
}

}  // namespace cdlab::config
