#include "cdlab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "cdlab/kernels.hpp"

namespace cdlab::profiles {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

double dot(const std::vector<double>& a, const double* x, int n) {
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += a[static_cast<std::size_t>(k)] * x[k];
  return s;
}

// g_theta(r) = G(r, theta) / (2 theta); d.grad G(x, theta) = -(d.x) g_theta(|x|).
double half_kernel(double r, double theta, int n) {
  return kernels::heat_g_radial(r, theta, n) / (2.0 * theta);
}

// d/dtheta of half_kernel at theta = 1.
double half_kernel_dtheta1(double r, int n) {
  double g = kernels::heat_g_radial(r, 1.0, n);
  // dG/dtheta = G (r^2/(4 theta^2) - n/(2 theta)); product rule with 1/(2 theta).
  return 0.5 * g * (r * r / 4.0 - 0.5 * n - 1.0);
}

// Radial factor of Psi_*: Psi_*(x) = (d.x) rho(|x|),
//   rho(r) = -alpha_n int_0^{2/(n+2)} [g_{1-w}(r) - g_1(r)] / w dw,
// with the removable w -> 0 limit evaluated by a Taylor fallback.
double psi_star_radial(double r, int n, const quad::QuadratureSpec& qs) {
  const double kappa = 2.0 / (n + 2);
  const double g1 = half_kernel(r, 1.0, n);
  auto integrand = [&](double w) {
    if (w < 1e-6) return -half_kernel_dtheta1(r, n);
    return (half_kernel(r, 1.0 - w, n) - g1) / w;
  };
  return -kernels::alpha_n(n) * quad::integrate(integrand, 0.0, kappa, qs).value;
}

double v_radial(double r, double t, int n, const quad::QuadratureSpec& qs) {
  const double kappa = 2.0 / (n + 2);  // 1 - 1/q at q = 1 + 2/n
  auto integrand = [&](double s) { return half_kernel(r, t - kappa * std::exp(s), n); };
  return -kernels::alpha_n(n) * quad::integrate(integrand, 0.0, std::log(t), qs).value;
}

struct ZParams {
  double a;       // n(q-1)/2 in (1/2, 1)
  double c0;      // (4 pi)^{-a} q^{-n/2}
  double kappa;   // 1 - 1/q
  double expo;    // 1/(1-a)
};

ZParams z_params(double q, int n) {
  if (!(q > 1.0 + 1.0 / n) || !(q < 1.0 + 2.0 / n))
    throw Error("not subcritical", "z profile requires 1 + 1/n < q < 1 + 2/n");
  ZParams p;
  p.a = 0.5 * n * (q - 1.0);
  p.c0 = std::pow(4.0 * kPi, -p.a) * std::pow(q, -0.5 * n);
  p.kappa = 1.0 - 1.0 / q;
  p.expo = 1.0 / (1.0 - p.a);
  return p;
}

double z_radial(double r, double t, double q, int n, const quad::QuadratureSpec& qs) {
  ZParams p = z_params(q, n);
  double smax = std::pow(t, 1.0 - p.a);
  auto integrand = [&](double s) {
    double tau = std::pow(s, p.expo);
    return half_kernel(r, t - p.kappa * tau, n);
  };
  return -p.c0 * p.expo * quad::integrate(integrand, 0.0, smax, qs).value;
}

// int_0^t (4 pi (1+tau))^{-a} q^{-n/2} dtau, closed form.
double uhat_mass_integral(double t, double q, int n) {
  double a = 0.5 * n * (q - 1.0);
  double c = std::pow(4.0 * kPi, -a) * std::pow(q, -0.5 * n);
  if (std::abs(a - 1.0) < 1e-12) return c * std::log1p(t);
  return c * (std::pow(1.0 + t, 1.0 - a) - 1.0) / (1.0 - a);
}

double uhat_radial(double r, double t, double q, int n, const quad::QuadratureSpec& qs) {
  // radial factor of the Duhamel term: (d.x) * ur(|x|)
  double a = 0.5 * n * (q - 1.0);
  double cq = std::pow(4.0 * kPi, -a) * std::pow(q, -0.5 * n);
  auto integrand = [&](double tau) {
    double theta = t - tau + (1.0 + tau) / q;
    return cq * std::pow(1.0 + tau, -a) * half_kernel(r, theta, n);
  };
  return -quad::integrate(integrand, 0.0, t, qs).value;
}

// Uniform-grid table of a radial function with Catmull-Rom interpolation;
// identically zero beyond r_max (the profiles carry Gaussian tails).
class RadialTable {
public:
  template <typename F>
  RadialTable(double r_max, int pts, F&& fn) : r_max_(r_max), dr_(r_max / (pts - 1)) {
    vals_.resize(static_cast<std::size_t>(pts));
    for (int i = 0; i < pts; ++i) vals_[static_cast<std::size_t>(i)] = fn(i * dr_);
  }

  double operator()(double r) const {
    if (r >= r_max_) return 0.0;
    double fi = r / dr_;
    int i1 = static_cast<int>(std::floor(fi));
    double s = fi - i1;
    auto get = [&](int i) -> double {
      if (i < 0) return vals_[static_cast<std::size_t>(-i)];  // radial symmetry
      if (i >= static_cast<int>(vals_.size())) return 0.0;
      return vals_[static_cast<std::size_t>(i)];
    };
    double p0 = get(i1 - 1), p1 = get(i1), p2 = get(i1 + 1), p3 = get(i1 + 2);
    double aa = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
    double bb = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
    double cc = -0.5 * p0 + 0.5 * p2;
    return ((aa * s + bb) * s + cc) * s + p1;
  }

private:
  double r_max_;
  double dr_;
  std::vector<double> vals_;
};

// Psi_* radial factor is t-independent; cache one table per dimension.
const RadialTable& psi_table(int n) {
  static std::mutex mu;
  static std::map<int, RadialTable> tables;
  std::lock_guard<std::mutex> lock(mu);
  auto it = tables.find(n);
  if (it == tables.end()) {
    quad::QuadratureSpec qs;  // defaults: 1e-10 / 1e-12
    it = tables
             .emplace(n, RadialTable(16.0, 4096,
                                     [&](double r) { return psi_star_radial(r, n, qs); }))
             .first;
  }
  return it->second;
}

// Sample (d.x) * radial(|x|) over a grid.
template <typename R>
grid::Field sample_drift_radial(const grid::Grid& g, const std::vector<double>& d, R&& radial,
                                double t_tag) {
  grid::Field out(g);
  if (g.dim() == 1) {
    for (int i = 0; i < g.points(); ++i) {
      double x = g.coord(i);
      out.values[static_cast<std::size_t>(i)] = d[0] * x * radial(std::abs(x));
    }
  } else {
    const int n = g.points();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double x = g.coord(i), y = g.coord(j);
        double r = std::hypot(x, y);
        out.values[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * j] =
            (d[0] * x + d[1] * y) * radial(r);
      }
  }
  out.time_tag = t_tag;
  return out;
}

double table_r_max(const grid::Grid& g, double width_scale) {
  double diag = g.half_width() * std::sqrt(static_cast<double>(g.dim()));
  return std::min(diag * 1.0001, 12.0 * width_scale + 10.0);
}

}  // namespace

std::string regime_label(Regime r) {
  switch (r) {
    case Regime::Subcritical: return "subcritical";
    case Regime::CriticalHighDim: return "critical_nge2";
    case Regime::CriticalOneDim: return "critical_n1";
    case Regime::Supercritical: return "supercritical";
    case Regime::LinearOnly: return "linear_only";
    case Regime::IkUhat: return "ik_uhat";
  }
  return "?";
}

Regime regime_from_label(const std::string& s) {
  if (s == "subcritical") return Regime::Subcritical;
  if (s == "critical_nge2") return Regime::CriticalHighDim;
  if (s == "critical_n1") return Regime::CriticalOneDim;
  if (s == "supercritical") return Regime::Supercritical;
  if (s == "linear_only") return Regime::LinearOnly;
  if (s == "ik_uhat") return Regime::IkUhat;
  throw Error("config", "unknown regime '" + s + "'");
}

Regime classify_regime(const model::ModelSpec& m) {
  if (m.is_critical()) return m.n == 1 ? Regime::CriticalOneDim : Regime::CriticalHighDim;
  if (m.is_subcritical()) return Regime::Subcritical;
  return Regime::Supercritical;
}

double psi_star(const double* x, int n, const std::vector<double>& d,
                const quad::QuadratureSpec& qs) {
  double r = (n == 1) ? std::abs(x[0]) : std::hypot(x[0], x[1]);
  return dot(d, x, n) * psi_star_radial(r, n, qs);
}

double psi(const double* x, double t, int n, const std::vector<double>& d,
           const quad::QuadratureSpec& qs) {
  if (!(t > 0.0)) throw Error("invalid time", "psi requires t > 0");
  double xs[2] = {0.0, 0.0};
  double rt = std::sqrt(t);
  for (int k = 0; k < n; ++k) xs[k] = x[k] / rt;
  return std::pow(t, -0.5 * n - 0.5) * psi_star(xs, n, d, qs);
}

double v_exact(const double* x, double t, int n, const std::vector<double>& d,
               const quad::QuadratureSpec& qs) {
  if (!(t >= 2.0)) throw Error("invalid time", "v profile requires t >= 2");
  double r = (n == 1) ? std::abs(x[0]) : std::hypot(x[0], x[1]);
  return dot(d, x, n) * v_radial(r, t, n, qs);
}

double z_profile(const double* x, double t, double q, int n, const std::vector<double>& d,
                 const quad::QuadratureSpec& qs) {
  if (!(t > 0.0)) throw Error("invalid time", "z profile requires t > 0");
  double r = (n == 1) ? std::abs(x[0]) : std::hypot(x[0], x[1]);
  return dot(d, x, n) * z_radial(r, t, q, n, qs);
}

double ik_uhat(const double* x, double t, double q, int n, const std::vector<double>& d,
               double M, const std::vector<double>& moment1_at_t,
               const quad::QuadratureSpec& qs) {
  if (!(t >= 0.0)) throw Error("invalid time", "uhat requires t >= 0");
  if (static_cast<int>(moment1_at_t.size()) != n)
    throw Error("ledger gap", "uhat needs the first-moment vector at t");
  double r = (n == 1) ? std::abs(x[0]) : std::hypot(x[0], x[1]);
  double mq = model::signed_power(M, q);  // |M|^{q-1} M
  double val = M * kernels::heat_g(x, 1.0 + t, n);
  double Q = uhat_mass_integral(t, q, n);
  double gv = kernels::heat_g_radial(r, 1.0 + t, n);
  for (int k = 0; k < n; ++k) {
    double ck = moment1_at_t[static_cast<std::size_t>(k)] + mq * d[static_cast<std::size_t>(k)] * Q;
    val -= ck * (-x[k] / (2.0 * (1.0 + t)) * gv);
  }
  if (mq != 0.0 && dot(d, x, n) != 0.0)
    val += mq * dot(d, x, n) * uhat_radial(r, t, q, n, qs);
  return val;
}

grid::Field sample_heat(const grid::Grid& g, double t, double mass) {
  return grid::sample(
      g, [&](const double* x) { return mass * kernels::heat_g(x, t, g.dim()); }, t);
}

grid::Field sample_grad_g(const grid::Grid& g, double t, const std::vector<double>& coeff) {
  return grid::sample(
      g,
      [&](const double* x) {
        double gv = kernels::heat_g(x, t, g.dim());
        double s = 0.0;
        for (int k = 0; k < g.dim(); ++k)
          s += coeff[static_cast<std::size_t>(k)] * (-x[k] / (2.0 * t)) * gv;
        return s;
      },
      t);
}

grid::Field sample_psi(const grid::Grid& g, double t, const std::vector<double>& d,
                       const quad::QuadratureSpec&) {
  const RadialTable& tab = psi_table(g.dim());
  double rt = std::sqrt(t);
  double pref = std::pow(t, -0.5 * g.dim() - 0.5) / rt;
  // Psi(x,t) = t^{-n/2-1/2} Psi_*(x/sqrt t) = pref (d.x) rho(|x|/sqrt t).
  return sample_drift_radial(g, d, [&](double r) { return pref * tab(r / rt); }, t);
}

grid::Field sample_v(const grid::Grid& g, double t, const std::vector<double>& d,
                     const quad::QuadratureSpec& qs) {
  RadialTable tab(table_r_max(g, std::sqrt(t)), 2048,
                  [&](double r) { return v_radial(r, t, g.dim(), qs); });
  return sample_drift_radial(g, d, [&](double r) { return tab(r); }, t);
}

grid::Field sample_z(const grid::Grid& g, double t, double q, const std::vector<double>& d,
                     const quad::QuadratureSpec& qs) {
  RadialTable tab(table_r_max(g, std::sqrt(t)), 2048,
                  [&](double r) { return z_radial(r, t, q, g.dim(), qs); });
  return sample_drift_radial(g, d, [&](double r) { return tab(r); }, t);
}

grid::Field sample_ik_uhat(const grid::Grid& g, double t, double q, const std::vector<double>& d,
                           double M, const std::vector<double>& moment1_at_t,
                           const quad::QuadratureSpec& qs) {
  RadialTable tab(table_r_max(g, std::sqrt(1.0 + t)), 2048,
                  [&](double r) { return uhat_radial(r, t, q, g.dim(), qs); });
  double mq = model::signed_power(M, q);
  double Q = uhat_mass_integral(t, q, g.dim());
  std::vector<double> c(static_cast<std::size_t>(g.dim()));
  for (int k = 0; k < g.dim(); ++k)
    c[static_cast<std::size_t>(k)] =
        moment1_at_t[static_cast<std::size_t>(k)] + mq * d[static_cast<std::size_t>(k)] * Q;
  grid::Field duh = sample_drift_radial(g, d, [&](double r) { return mq * tab(r); }, t);
  grid::Field out(g);
  if (g.dim() == 1) {
    for (int i = 0; i < g.points(); ++i) {
      double x[1] = {g.coord(i)};
      double gv = kernels::heat_g(x, 1.0 + t, 1);
      out.values[static_cast<std::size_t>(i)] =
          M * gv - c[0] * (-x[0] / (2.0 * (1.0 + t)) * gv) +
          duh.values[static_cast<std::size_t>(i)];
    }
  } else {
    const int n = g.points();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double x[2] = {g.coord(i), g.coord(j)};
        double gv = kernels::heat_g(x, 1.0 + t, 2);
        std::size_t k = static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * j;
        out.values[k] = M * gv + duh.values[k];
        for (int ax = 0; ax < 2; ++ax)
          out.values[k] -= c[static_cast<std::size_t>(ax)] * (-x[ax] / (2.0 * (1.0 + t)) * gv);
      }
  }
  out.time_tag = t;
  return out;
}

void ExpansionSpec::check_consistent() const {
  double qc = 1.0 + 2.0 / n;
  switch (regime) {
    case Regime::Subcritical:
      if (!(q > 1.0 + 1.0 / n && q < qc - 1e-12))
        throw Error("regime/model mismatch", "subcritical regime needs 1 + 1/n < q < 1 + 2/n");
      break;
    case Regime::CriticalHighDim:
    case Regime::CriticalOneDim:
      if (std::abs(q - qc) > 1e-12)
        throw Error("regime/model mismatch", "critical regime needs q = 1 + 2/n");
      if (regime == Regime::CriticalOneDim && n != 1)
        throw Error("regime/model mismatch", "critical_n1 regime needs n = 1");
      break;
    case Regime::Supercritical:
      if (!(q > qc + 1e-12))
        throw Error("regime/model mismatch", "supercritical regime needs q > 1 + 2/n");
      break;
    case Regime::LinearOnly:
    case Regime::IkUhat:
      break;
  }
}

ExpansionResult build_expansion(const ExpansionSpec& spec, double t, const grid::Grid& g,
                                const functionals::Ledger* ledger,
                                const quad::QuadratureSpec& qs) {
  spec.check_consistent();
  if (!spec.constants) throw Error("missing constant", "constant set");
  const functionals::ConstantSet& cs = *spec.constants;
  const int n = spec.n;
  ExpansionResult res{grid::Field(g), {}};
  res.field.time_tag = t;

  auto add_field = [&](const grid::Field& f) {
    for (std::size_t k = 0; k < res.field.values.size(); ++k)
      res.field.values[k] += f.values[k];
  };
  auto need = [&](bool ok, const std::string& symbol) {
    if (!ok) throw Error("missing constant", symbol);
  };

  if (spec.regime == Regime::IkUhat) {
    need(ledger != nullptr, "ledger");
    const functionals::LedgerRow* row = ledger->row_at(t);
    need(row != nullptr, "moment series at t");
    add_field(sample_ik_uhat(g, t, spec.q, spec.d, cs.M, row->m1, qs));
    res.terms.push_back({"uhat", 1.0});
    return res;
  }

  // Leading term M G(t) for every expansion regime.
  add_field(sample_heat(g, t, cs.M));
  res.terms.push_back({"M*G", cs.M});
  if (spec.order < 2) return res;

  switch (spec.regime) {
    case Regime::LinearOnly: {
      std::vector<double> coeff(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) coeff[static_cast<std::size_t>(k)] = -cs.m[static_cast<std::size_t>(k)];
      add_field(sample_grad_g(g, t, coeff));
      res.terms.push_back({"-m.gradG", coeff[0]});
      break;
    }
    case Regime::Subcritical: {
      double c = model::signed_power(cs.M, spec.q);  // |M|^{q-1} M
      grid::Field z = sample_z(g, t, spec.q, spec.d, qs);
      for (auto& v : z.values) v *= c;
      add_field(z);
      res.terms.push_back({"|M|^{q-1}M Z", c});
      break;
    }
    case Regime::Supercritical: {
      need(cs.beta.has_value(), "beta");
      add_field(sample_grad_g(g, t, *cs.beta));
      res.terms.push_back({"beta.gradG", (*cs.beta)[0]});
      break;
    }
    case Regime::CriticalHighDim: {
      double mpow = model::signed_power(cs.M, 1.0 + 2.0 / n);  // |M|^{2/n} M
      double lc = kernels::alpha_n(n) * mpow * std::log(t);
      std::vector<double> coeff(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) coeff[static_cast<std::size_t>(k)] = lc * spec.d[static_cast<std::size_t>(k)];
      add_field(sample_grad_g(g, t, coeff));
      res.terms.push_back({"alpha_n|M|^{2/n}M log(t) d.gradG", lc});
      if (spec.order >= 3) {
        need(!cs.mathM.empty(), "mathM");
        std::vector<double> c3(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
          double Nk = 0.0;
          if (n >= 2) {
            need(cs.mathN.has_value(), "mathN");
            Nk = (*cs.mathN)[static_cast<std::size_t>(k)];
          }
          c3[static_cast<std::size_t>(k)] = cs.mathM[static_cast<std::size_t>(k)] + Nk -
                                            cs.m[static_cast<std::size_t>(k)];
        }
        add_field(sample_grad_g(g, t, c3));
        res.terms.push_back({"(mathM+mathN-m).gradG", c3[0]});
        grid::Field p = sample_psi(g, t, spec.d, qs);
        for (auto& v : p.values) v *= mpow;
        add_field(p);
        res.terms.push_back({"|M|^{2/n}M Psi", mpow});
      }
      break;
    }
    case Regime::CriticalOneDim: {
      const bool b_active = spec.b.kind == model::BKind::PowerDecay && spec.b.amplitude != 0.0;
      double m3 = model::signed_power(cs.M, 3.0);  // M^3
      double K = b_active ? cs.K_at(t) : 0.0;
      double lc = (K + kernels::alpha_n(1) * spec.d[0] * m3) * std::log(t);
      add_field(sample_grad_g(g, t, std::vector<double>{lc}));
      res.terms.push_back({"(K+alpha_1 d M^3) log(t) dxG", lc});
      if (spec.order >= 3) {
        need(!cs.mathM.empty(), "mathM");
        std::vector<double> c3{cs.mathM[0] - cs.m[0]};
        add_field(sample_grad_g(g, t, c3));
        res.terms.push_back({"(mathM-m).dxG", c3[0]});
        grid::Field p = sample_psi(g, t, spec.d, qs);
        for (auto& v : p.values) v *= m3;
        add_field(p);
        res.terms.push_back({"M^3 Psi", m3});
        if (b_active) {
          need(ledger != nullptr && !ledger->phi_snapshots.empty(), "Phi (phi snapshots)");
          add_field(functionals::phi_duhamel(t, *ledger, qs));
          res.terms.push_back({"Phi", 1.0});
        }
      }
      break;
    }
    default: break;
  }
  return res;
}

}  // namespace cdlab::profiles
