#ifndef CDLAB_GRID_HPP
#define CDLAB_GRID_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdlab {

/// Error carrying a short machine-readable kind plus a human message; the
/// kind prefixes what() so logs identify the failure class.
class Error : public std::runtime_error {
public:
  Error(const std::string& kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(kind) {}
  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

namespace grid {

/// Uniform cell-centered tensor grid on [-L, L]^n, n in {1, 2}.
/// Nodes per axis: x_i = -L + (i + 1/2) h with h = 2L/N, so the node set
/// is symmetric under x -> -x and never contains the origin.
class Grid {
public:
  Grid(int dimension, double half_width, int points_per_axis);

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  int points() const { return points_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return size_; }

  /// Node coordinate along one axis (same for every axis).
  double coord(int i) const { return coords_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& coords() const { return coords_; }

  /// Cell volume h^n.
  double cell_volume() const;

  bool same_as(const Grid& other) const;

private:
  int dim_;
  double half_width_;
  int points_;
  double spacing_;
  std::size_t size_;
  std::vector<double> coords_;
};

/// Sampled real-valued function on a Grid. Values are stored row-major
/// (index = i + N*j for n = 2). Immutable by convention after it is built;
/// the solver constructs fields through the builder functions below.
struct Field {
  Grid grid;
  std::vector<double> values;
  std::optional<double> time_tag;

  explicit Field(const Grid& g, double fill = 0.0)
      : grid(g), values(g.size(), fill) {}
  Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw Error("size", "field/grid size mismatch");
  }

  double& at(std::size_t i) { return values[i]; }
  double at(std::size_t i) const { return values[i]; }
};

/// Compensated (Neumaier) accumulator; all discrete integrals in the
/// project run through this so that 1e6-term sums keep full precision.
class CompensatedSum {
public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

enum class Norm { L1, L2, Linf };

Norm norm_from_p(double p);
double norm_p_value(Norm n);
std::string norm_label(Norm n);

/// Midpoint-rule L^p norm (p in {1,2}) or max norm (p = inf).
/// Throws Error("corrupt field") on non-finite values.
double lp_norm(const Field& f, Norm p);

/// Midpoint-rule integral of f.
double moment0(const Field& f);

/// Midpoint-rule first moments (int x_i f), length n.
std::vector<double> moment1(const Field& f);

/// Sample an analytic function (coords vector of length n) onto a grid.
template <typename F>
Field sample(const Grid& g, F&& fn, std::optional<double> time_tag = {}) {
  Field out(g);
  if (g.dim() == 1) {
    for (int i = 0; i < g.points(); ++i) {
      double x[1] = {g.coord(i)};
      out.values[static_cast<std::size_t>(i)] = fn(x);
    }
  } else {
    const int n = g.points();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double x[2] = {g.coord(i), g.coord(j)};
        out.values[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * j] = fn(x);
      }
  }
  out.time_tag = time_tag;
  return out;
}

struct ResampleResult {
  Field field;
  double mass_delta;  // |moment0(out) - moment0(in)|
};

/// Cubic (Catmull-Rom) interpolation of f onto target; zero outside the
/// source box. Throws Error("resolution loss") if the target is coarser
/// than the source by more than a factor of 2.
ResampleResult resample(const Field& f, const Grid& target);

}  // namespace grid
}  // namespace cdlab

#endif
