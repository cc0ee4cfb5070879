#include "cdlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cdlab::grid {

Grid::Grid(int dimension, double half_width, int points_per_axis)
    : dim_(dimension), half_width_(half_width), points_(points_per_axis) {
  if (dim_ != 1 && dim_ != 2) throw Error("dimension", "grid dimension must be 1 or 2");
  if (half_width_ <= 0.0) throw Error("half_width", "grid half-width must be positive");
  if (points_ < 16 || points_ % 2 != 0)
    throw Error("points", "points per axis must be even and >= 16");
  spacing_ = 2.0 * half_width_ / points_;
  size_ = 1;
  for (int k = 0; k < dim_; ++k) size_ *= static_cast<std::size_t>(points_);
  coords_.resize(static_cast<std::size_t>(points_));
  // Mirror the negative half so the node set is exactly symmetric.
  for (int i = 0; i < points_ / 2; ++i) {
    double x = -half_width_ + (i + 0.5) * spacing_;
    coords_[static_cast<std::size_t>(i)] = x;
    coords_[static_cast<std::size_t>(points_ - 1 - i)] = -x;
  }
}

double Grid::cell_volume() const {
  double v = spacing_;
  for (int k = 1; k < dim_; ++k) v *= spacing_;
  return v;
}

bool Grid::same_as(const Grid& other) const {
  return dim_ == other.dim_ && half_width_ == other.half_width_ && points_ == other.points_;
}

Norm norm_from_p(double p) {
  if (p == 1.0) return Norm::L1;
  if (p == 2.0) return Norm::L2;
  if (std::isinf(p)) return Norm::Linf;
  throw Error("norm", "p must be 1, 2 or inf");
}

double norm_p_value(Norm n) {
  switch (n) {
    case Norm::L1: return 1.0;
    case Norm::L2: return 2.0;
    default: return std::numeric_limits<double>::infinity();
  }
}

std::string norm_label(Norm n) {
  switch (n) {
    case Norm::L1: return "1";
    case Norm::L2: return "2";
    default: return "inf";
  }
}

namespace {
void check_finite(const Field& f) {
  for (double v : f.values)
    if (!std::isfinite(v)) throw Error("corrupt field", "field contains non-finite values");
}
}  // namespace

double lp_norm(const Field& f, Norm p) {
  check_finite(f);
  if (p == Norm::Linf) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
  }
  CompensatedSum s;
  if (p == Norm::L1) {
    for (double v : f.values) s.add(std::abs(v));
    return s.value() * f.grid.cell_volume();
  }
  for (double v : f.values) s.add(v * v);
  return std::sqrt(s.value() * f.grid.cell_volume());
}

double moment0(const Field& f) {
  check_finite(f);
  CompensatedSum s;
  for (double v : f.values) s.add(v);
  return s.value() * f.grid.cell_volume();
}

std::vector<double> moment1(const Field& f) {
  check_finite(f);
  const Grid& g = f.grid;
  std::vector<double> out(static_cast<std::size_t>(g.dim()), 0.0);
  if (g.dim() == 1) {
    CompensatedSum s;
    for (int i = 0; i < g.points(); ++i) s.add(g.coord(i) * f.values[static_cast<std::size_t>(i)]);
    out[0] = s.value() * g.cell_volume();
  } else {
    CompensatedSum sx, sy;
    const int n = g.points();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double v = f.values[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * j];
        sx.add(g.coord(i) * v);
        sy.add(g.coord(j) * v);
      }
    out[0] = sx.value() * g.cell_volume();
    out[1] = sy.value() * g.cell_volume();
  }
  return out;
}

namespace {

// Catmull-Rom cubic through four equally spaced samples; s in [0,1]
// between p1 and p2.
double cubic(double p0, double p1, double p2, double p3, double s) {
  double a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
  double b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
  double c = -0.5 * p0 + 0.5 * p2;
  return ((a * s + b) * s + c) * s + p1;
}

double sample_axis(const std::vector<double>& v, const Grid& src, double x) {
  // Fractional index of x in the cell-centered source lattice.
  double fi = (x + src.half_width()) / src.spacing() - 0.5;
  if (fi < -1.0 || fi > src.points()) return 0.0;
  int i1 = static_cast<int>(std::floor(fi));
  double s = fi - i1;
  auto get = [&](int i) -> double {
    if (i < 0 || i >= src.points()) return 0.0;
    return v[static_cast<std::size_t>(i)];
  };
  return cubic(get(i1 - 1), get(i1), get(i1 + 1), get(i1 + 2), s);
}

}  // namespace

ResampleResult resample(const Field& f, const Grid& target) {
  const Grid& src = f.grid;
  if (target.dim() != src.dim()) throw Error("dimension", "resample dimension mismatch");
  if (target.half_width() + 1e-12 < src.half_width())
    throw Error("domain", "target box must contain the source box");
  if (target.spacing() > 2.0 * src.spacing() * (1.0 + 1e-12))
    throw Error("resolution loss", "target grid coarser than source by more than 2x");
  check_finite(f);

  Field out(target);
  if (src.dim() == 1) {
    for (int i = 0; i < target.points(); ++i)
      out.values[static_cast<std::size_t>(i)] = sample_axis(f.values, src, target.coord(i));
  } else {
    const int ns = src.points();
    const int nt = target.points();
    // Separable pass: interpolate rows in x onto target columns, then in y.
    std::vector<double> stage(static_cast<std::size_t>(nt) * ns);
    for (int j = 0; j < ns; ++j) {
      std::vector<double> row(f.values.begin() + static_cast<std::ptrdiff_t>(j) * ns,
                              f.values.begin() + static_cast<std::ptrdiff_t>(j + 1) * ns);
      for (int i = 0; i < nt; ++i)
        stage[static_cast<std::size_t>(i) + static_cast<std::size_t>(nt) * j] =
            sample_axis(row, src, target.coord(i));
    }
    std::vector<double> col(static_cast<std::size_t>(ns));
    for (int i = 0; i < nt; ++i) {
      for (int j = 0; j < ns; ++j) col[static_cast<std::size_t>(j)] = stage[static_cast<std::size_t>(i) + static_cast<std::size_t>(nt) * j];
      for (int j = 0; j < nt; ++j)
        out.values[static_cast<std::size_t>(i) + static_cast<std::size_t>(nt) * j] =
            sample_axis(col, src, target.coord(j));
    }
  }
  out.time_tag = f.time_tag;
  ResampleResult r{std::move(out), 0.0};
  r.mass_delta = std::abs(moment0(r.field) - moment0(f));
  return r;
}

}  // namespace cdlab::grid
