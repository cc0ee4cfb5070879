#include "cdlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cdlab::solver {

namespace {

using grid::Field;
using grid::Grid;

// Diffusion face coefficients a(x) = 1 + b(x) evaluated at cell faces.
struct FaceCoeffs {
  int n = 0;             // points per axis
  std::vector<double> ax;  // n=1: size n+1. n=2: (n+1) x n, index f + (n+1)*j
  std::vector<double> ay;  // n=2 only: n x (n+1), index i + n*f
};

FaceCoeffs make_faces(const model::ModelSpec& m, const Grid& g) {
  FaceCoeffs fc;
  const int n = g.points();
  fc.n = n;
  const double L = g.half_width();
  const double h = g.spacing();
  if (g.dim() == 1) {
    fc.ax.resize(static_cast<std::size_t>(n) + 1);
    for (int f = 0; f <= n; ++f) {
      double x[1] = {-L + f * h};
      fc.ax[static_cast<std::size_t>(f)] = 1.0 + m.b.value(x, 1);
    }
  } else {
    fc.ax.resize(static_cast<std::size_t>(n + 1) * n);
    fc.ay.resize(static_cast<std::size_t>(n) * (n + 1));
    for (int j = 0; j < n; ++j)
      for (int f = 0; f <= n; ++f) {
        double x[2] = {-L + f * h, g.coord(j)};
        fc.ax[static_cast<std::size_t>(f) + static_cast<std::size_t>(n + 1) * j] =
            1.0 + m.b.value(x, 2);
      }
    for (int f = 0; f <= n; ++f)
      for (int i = 0; i < n; ++i) {
        double x[2] = {g.coord(i), -L + f * h};
        fc.ay[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * f] =
            1.0 + m.b.value(x, 2);
      }
  }
  return fc;
}

// out = (a_{i+1/2}(u_{i+1}-u_i) - a_{i-1/2}(u_i-u_{i-1})) / h^2 along one row.
// `af` has stride 1 and length n+1; ghost values are zero (Dirichlet walls).
void diffuse_row(const double* u, int n, int stride, const double* af, int astride,
                 double inv_h2, double* out, int out_stride) {
  for (int i = 0; i < n; ++i) {
    double um = i > 0 ? u[(i - 1) * stride] : 0.0;
    double up = i < n - 1 ? u[(i + 1) * stride] : 0.0;
    double al = af[i * astride];
    double ar = af[(i + 1) * astride];
    out[i * out_stride] = (ar * (up - u[i * stride]) - al * (u[i * stride] - um)) * inv_h2;
  }
}

// Thomas elimination for (1 - c*Arow) x = rhs on one row with the same
// face-coefficient layout as diffuse_row.
void solve_row(double* x, const double* rhs, int n, int stride, const double* af, int astride,
               double c_inv_h2, std::vector<double>& wd, std::vector<double>& wr) {
  // Matrix: sub_i = -c*al_i, diag_i = 1 + c*(al_i + ar_i), sup_i = -c*ar_i.
  for (int i = 0; i < n; ++i) {
    wd[static_cast<std::size_t>(i)] =
        1.0 + c_inv_h2 * (af[i * astride] + af[(i + 1) * astride]);
    wr[static_cast<std::size_t>(i)] = rhs[i * stride];
  }
  for (int i = 1; i < n; ++i) {
    double sub = -c_inv_h2 * af[i * astride];
    double sup_prev = -c_inv_h2 * af[i * astride];  // sup_{i-1} = -c*ar_{i-1} = -c*af[i]
    double w = sub / wd[static_cast<std::size_t>(i - 1)];
    wd[static_cast<std::size_t>(i)] -= w * sup_prev;
    wr[static_cast<std::size_t>(i)] -= w * wr[static_cast<std::size_t>(i - 1)];
  }
  x[(n - 1) * stride] = wr[static_cast<std::size_t>(n - 1)] / wd[static_cast<std::size_t>(n - 1)];
  for (int i = n - 2; i >= 0; --i) {
    double sup = -c_inv_h2 * af[(i + 1) * astride];
    x[i * stride] = (wr[static_cast<std::size_t>(i)] - sup * x[(i + 1) * stride]) /
                    wd[static_cast<std::size_t>(i)];
  }
}

// Centered divergence of the drift flux d * sign(u)|u|^q; also reports
// max |u| for the CFL control. Ghost values zero.
double convection(const std::vector<double>& u, const model::ModelSpec& m, const Grid& g,
                  std::vector<double>& gbuf, std::vector<double>& out) {
  const int n = g.points();
  const double inv2h = 1.0 / (2.0 * g.spacing());
  double umax = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    gbuf[k] = model::signed_power(u[k], m.q);
    umax = std::max(umax, std::abs(u[k]));
  }
  if (g.dim() == 1) {
    const double d0 = m.d[0];
    for (int i = 0; i < n; ++i) {
      double gm = i > 0 ? gbuf[static_cast<std::size_t>(i - 1)] : 0.0;
      double gp = i < n - 1 ? gbuf[static_cast<std::size_t>(i + 1)] : 0.0;
      out[static_cast<std::size_t>(i)] = d0 * (gp - gm) * inv2h;
    }
  } else {
    const double d0 = m.d[0], d1 = m.d[1];
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        std::size_t k = static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * j;
        double gxm = i > 0 ? gbuf[k - 1] : 0.0;
        double gxp = i < n - 1 ? gbuf[k + 1] : 0.0;
        double gym = j > 0 ? gbuf[k - static_cast<std::size_t>(n)] : 0.0;
        double gyp = j < n - 1 ? gbuf[k + static_cast<std::size_t>(n)] : 0.0;
        out[k] = (d0 * (gxp - gxm) + d1 * (gyp - gym)) * inv2h;
      }
  }
  return umax;
}

void apply_diffusion(const std::vector<double>& u, const FaceCoeffs& fc, const Grid& g,
                     std::vector<double>& out_x, std::vector<double>* out_y) {
  const int n = g.points();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  if (g.dim() == 1) {
    diffuse_row(u.data(), n, 1, fc.ax.data(), 1, inv_h2, out_x.data(), 1);
    return;
  }
  for (int j = 0; j < n; ++j)
    diffuse_row(u.data() + static_cast<std::ptrdiff_t>(j) * n, n, 1,
                fc.ax.data() + static_cast<std::ptrdiff_t>(j) * (n + 1), 1, inv_h2,
                out_x.data() + static_cast<std::ptrdiff_t>(j) * n, 1);
  for (int i = 0; i < n; ++i)
    diffuse_row(u.data() + i, n, n, fc.ay.data() + i, n, inv_h2, out_y->data() + i, n);
}

// Absolute wall-flux rate: an upper bound on instantaneous mass leakage.
double leak_rate(const std::vector<double>& u, const std::vector<double>& gbuf,
                 const FaceCoeffs& fc, const Grid& g, const model::ModelSpec& m) {
  const int n = g.points();
  const double h = g.spacing();
  double rate = 0.0;
  if (g.dim() == 1) {
    rate += (std::abs(fc.ax[0] * u[0]) +
             std::abs(fc.ax[static_cast<std::size_t>(n)] * u[static_cast<std::size_t>(n - 1)])) / h;
    rate += 0.5 * std::abs(m.d[0]) *
            (std::abs(gbuf[0]) + std::abs(gbuf[static_cast<std::size_t>(n - 1)]));
    return rate;
  }
  for (int j = 0; j < n; ++j) {
    std::size_t kl = static_cast<std::size_t>(n) * j;
    std::size_t kr = kl + static_cast<std::size_t>(n - 1);
    rate += (std::abs(fc.ax[static_cast<std::size_t>(n + 1) * j] * u[kl]) +
             std::abs(fc.ax[static_cast<std::size_t>(n) + static_cast<std::size_t>(n + 1) * j] * u[kr])) / h;
    rate += 0.5 * std::abs(m.d[0]) * (std::abs(gbuf[kl]) + std::abs(gbuf[kr]));
  }
  for (int i = 0; i < n; ++i) {
    std::size_t kb = static_cast<std::size_t>(i);
    std::size_t kt = static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * (n - 1);
    rate += (std::abs(fc.ay[kb] * u[kb]) +
             std::abs(fc.ay[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * n] * u[kt])) / h;
    rate += 0.5 * std::abs(m.d[1]) * (std::abs(gbuf[kb]) + std::abs(gbuf[kt]));
  }
  return rate * h;  // boundary cell measure
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

RhsParts discrete_rhs(const grid::Field& u, const model::ModelSpec& m) {
  if (!all_finite(u.values)) throw Error("corrupt field", "rhs input has non-finite values");
  const Grid& g = u.grid;
  FaceCoeffs fc = make_faces(m, g);
  Field diff(g), conv(g);
  std::vector<double> dx(g.size()), dy(g.dim() == 2 ? g.size() : 0), gbuf(g.size());
  apply_diffusion(u.values, fc, g, dx, g.dim() == 2 ? &dy : nullptr);
  for (std::size_t k = 0; k < g.size(); ++k)
    diff.values[k] = dx[k] + (g.dim() == 2 ? dy[k] : 0.0);
  convection(u.values, m, g, gbuf, conv.values);
  diff.time_tag = u.time_tag;
  conv.time_tag = u.time_tag;
  return {std::move(diff), std::move(conv)};
}

grid::Field gradient_component(const grid::Field& u, int axis) {
  const Grid& g = u.grid;
  const int n = g.points();
  const double inv2h = 1.0 / (2.0 * g.spacing());
  Field out(g);
  auto diff_line = [&](const double* src, int stride, double* dst) {
    dst[0] = (-3.0 * src[0] + 4.0 * src[stride] - src[2 * stride]) * inv2h;
    for (int i = 1; i < n - 1; ++i)
      dst[i * stride] = (src[(i + 1) * stride] - src[(i - 1) * stride]) * inv2h;
    dst[(n - 1) * stride] =
        (3.0 * src[(n - 1) * stride] - 4.0 * src[(n - 2) * stride] + src[(n - 3) * stride]) * inv2h;
  };
  if (g.dim() == 1) {
    diff_line(u.values.data(), 1, out.values.data());
  } else if (axis == 0) {
    for (int j = 0; j < n; ++j)
      diff_line(u.values.data() + static_cast<std::ptrdiff_t>(j) * n, 1,
                out.values.data() + static_cast<std::ptrdiff_t>(j) * n);
  } else {
    for (int i = 0; i < n; ++i) diff_line(u.values.data() + i, n, out.values.data() + i);
  }
  out.time_tag = u.time_tag;
  return out;
}

std::vector<grid::Field> gradient_field(const grid::Field& u) {
  if (!all_finite(u.values)) throw Error("corrupt field", "gradient input has non-finite values");
  std::vector<grid::Field> out;
  for (int k = 0; k < u.grid.dim(); ++k) out.push_back(gradient_component(u, k));
  return out;
}

grid::Field initial_field(const model::ModelSpec& m, const grid::Grid& g) {
  Field u0 = grid::sample(g, [&](const double* x) { return m.u0.value(x, m.n); }, 0.0);
  double scale = grid::lp_norm(u0, grid::Norm::L1);
  if (scale == 0.0) return u0;
  double err = std::abs(grid::moment0(u0) - m.u0.analytic_mass());
  if (err > 1e-8 * scale)
    throw Error("domain", "initial data tail mass outside the box exceeds 1e-8 of its scale; "
                          "enlarge grid.half_width");
  return u0;
}

Diagnostics solve(const model::ModelSpec& m, const SolverConfig& cfg, const StepHooks& hooks) {
  m.validate();
  const Grid& g = cfg.grid;
  if (g.dim() != m.n) throw Error("config", "grid dimension does not match model");
  const int n = g.points();
  const double h = g.spacing();
  const double inv_h2 = 1.0 / (h * h);

  FaceCoeffs fc = make_faces(m, g);
  Field u0f = initial_field(m, g);
  std::vector<double> u = u0f.values;

  const double mass_scale = std::max(grid::lp_norm(u0f, grid::Norm::L1), 1e-300);
  Diagnostics diag;
  diag.mass_initial = grid::moment0(u0f);
  diag.dt_min = std::numeric_limits<double>::infinity();

  if (hooks.on_forced_time) hooks.on_forced_time(0.0, u0f);

  std::vector<double> conv(g.size()), conv_prev(g.size()), gbuf(g.size());
  std::vector<double> rhs(g.size()), dx(g.size()), dy(g.dim() == 2 ? g.size() : 0);
  std::vector<double> wd(static_cast<std::size_t>(n)), wr(static_cast<std::size_t>(n));
  std::vector<double> ustar(g.dim() == 2 ? g.size() : 0);

  double t = 0.0;
  double dt_nominal = cfg.dt_init;
  double dt_prev = 0.0;
  std::size_t forced_idx = 0;
  const auto& forced = cfg.forced_times;
  while (forced_idx < forced.size() && forced[forced_idx] <= 0.0) ++forced_idx;

  bool have_prev_conv = false;
  double drift_speed = 0.0;
  for (double dk : m.d) drift_speed += std::abs(dk);

  while (t < cfg.t_final - 1e-14 * cfg.t_final) {
    double umax = convection(u, m, g, gbuf, conv);

    // Step size: geometric growth, CFL for the explicit flux, accuracy cap.
    double dt = dt_nominal;
    if (drift_speed > 0.0 && umax > 0.0) {
      double speed = drift_speed * model::signed_power_deriv(umax, m.q);
      if (speed > 0.0) dt = std::min(dt, cfg.cfl * h / speed);
    }
    dt = std::min(dt, cfg.dt_rel_cap * std::max(t, 1.0));
    dt = std::min(dt, cfg.dt_abs_cap);
    dt = std::min(dt, cfg.t_final - t);
    // First step uses an explicit midpoint predictor; keep it inside the
    // explicit diffusion stability region.
    if (!have_prev_conv) dt = std::min(dt, 0.125 * h * h);
    bool hit_forced = false;
    if (forced_idx < forced.size()) {
      double tf = forced[forced_idx];
      if (t + dt >= tf - 1e-12 * std::max(tf, 1.0)) {
        dt = tf - t;
        hit_forced = true;
      }
    }
    if (!(dt > 0.0)) {  // forced time at or behind current t
      if (hit_forced) {
        Field uf(g, u);
        uf.time_tag = forced[forced_idx];
        if (hooks.on_forced_time) hooks.on_forced_time(forced[forced_idx], uf);
        ++forced_idx;
        continue;
      }
      throw Error("instability", "time step collapsed to zero at t=" + std::to_string(t));
    }

    // Convection at the half step: AB2 extrapolation, explicit midpoint first.
    std::vector<double>& cmid = rhs;  // reuse buffer
    if (have_prev_conv && dt_prev > 0.0) {
      double w = dt / (2.0 * dt_prev);
      for (std::size_t k = 0; k < u.size(); ++k)
        cmid[k] = (1.0 + w) * conv[k] - w * conv_prev[k];
    } else {
      apply_diffusion(u, fc, g, dx, g.dim() == 2 ? &dy : nullptr);
      std::vector<double> uhalf(u.size());
      for (std::size_t k = 0; k < u.size(); ++k)
        uhalf[k] = u[k] + 0.5 * dt * (dx[k] + (g.dim() == 2 ? dy[k] : 0.0) + conv[k]);
      convection(uhalf, m, g, gbuf, cmid);
      // restore gbuf for the leak estimate of the current state
      for (std::size_t k = 0; k < u.size(); ++k) gbuf[k] = model::signed_power(u[k], m.q);
    }

    diag.boundary_leak += dt * leak_rate(u, gbuf, fc, g, m);

    if (g.dim() == 1) {
      // Crank-Nicolson: (I - dt/2 A) u1 = u + dt/2 A u + dt cmid
      apply_diffusion(u, fc, g, dx, nullptr);
      std::vector<double> b(u.size());
      for (std::size_t k = 0; k < u.size(); ++k) b[k] = u[k] + 0.5 * dt * dx[k] + dt * cmid[k];
      conv_prev.swap(conv);
      solve_row(u.data(), b.data(), n, 1, fc.ax.data(), 1, 0.5 * dt * inv_h2, wd, wr);
    } else {
      // Peaceman-Rachford ADI with the convection source split over sweeps.
      apply_diffusion(u, fc, g, dx, &dy);
      std::vector<double> b(u.size());
      for (std::size_t k = 0; k < u.size(); ++k)
        b[k] = u[k] + 0.5 * dt * dy[k] + 0.5 * dt * cmid[k];
      for (int j = 0; j < n; ++j)
        solve_row(ustar.data() + static_cast<std::ptrdiff_t>(j) * n,
                  b.data() + static_cast<std::ptrdiff_t>(j) * n, n, 1,
                  fc.ax.data() + static_cast<std::ptrdiff_t>(j) * (n + 1), 1, 0.5 * dt * inv_h2,
                  wd, wr);
      // second sweep: (I - dt/2 Ay) u1 = u* + dt/2 Ax u* + dt/2 cmid
      for (int j = 0; j < n; ++j)
        diffuse_row(ustar.data() + static_cast<std::ptrdiff_t>(j) * n, n, 1,
                    fc.ax.data() + static_cast<std::ptrdiff_t>(j) * (n + 1), 1, inv_h2,
                    dx.data() + static_cast<std::ptrdiff_t>(j) * n, 1);
      for (std::size_t k = 0; k < u.size(); ++k)
        b[k] = ustar[k] + 0.5 * dt * dx[k] + 0.5 * dt * cmid[k];
      conv_prev.swap(conv);
      for (int i = 0; i < n; ++i)
        solve_row(u.data() + i, b.data() + i, n, n, fc.ay.data() + i, n, 0.5 * dt * inv_h2, wd,
                  wr);
    }

    have_prev_conv = true;
    dt_prev = dt;
    t = hit_forced ? forced[forced_idx] : t + dt;
    ++diag.steps;
    diag.dt_min = std::min(diag.dt_min, dt);
    diag.dt_max = std::max(diag.dt_max, dt);
    dt_nominal = std::max(dt_nominal, dt) * cfg.dt_growth;

    if (!all_finite(u)) {
      std::ostringstream os;
      os << "instability detected; last stable time t=" << (t - dt);
      throw Error("instability", os.str());
    }
    if (diag.boundary_leak > cfg.leak_tol_rel * mass_scale)
      throw Error("domain", "boundary leak exceeds tolerance; domain too small, recommend "
                            "larger grid.half_width");

    if (hit_forced) {
      Field uf(g, u);
      uf.time_tag = t;
      if (hooks.on_forced_time) hooks.on_forced_time(t, uf);
      ++forced_idx;
    }
  }

  Field ufinal(g, u);
  diag.mass_final = grid::moment0(ufinal);
  diag.mass_drift = std::abs(diag.mass_final - diag.mass_initial);
  if (diag.mass_drift > cfg.mass_tol_rel * mass_scale + diag.boundary_leak) {
    std::ostringstream os;
    os << "mass drift " << diag.mass_drift << " exceeds tolerance";
    throw Error("instability", os.str());
  }
  if (diag.steps == 0) diag.dt_min = 0.0;
  return diag;
}

}  // namespace cdlab::solver
