// Short-range radial potential models: values, gradients, Hessians, decay.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "scatrel/geometry.hpp"

namespace scatrel {

enum class PotentialKind { Zero, Gaussian, CompactBump, YukawaSmoothed, RadialTabulated };

std::string to_string(PotentialKind k);
PotentialKind potential_kind_from_string(const std::string& s);

struct DecayReport {
  // max over the sample grid of |d^a V| <x>^(rho+|a|), per derivative order.
  double max_ratio[3] = {0.0, 0.0, 0.0};
  bool pass = true;
  double witness_radius = 0.0; // radius of the first violating sample, if any
  int witness_order = -1;
};

// A rotationally invariant potential V(x) = g(|x|) with the short-range
// decay bound |d^a V(x)| <= C_a <x>^(-rho-|a|).  The constants C_a are
// measured on a dense radial grid at construction so that the decay
// invariant is self-consistent by construction.
class PotentialModel {
public:
  static PotentialModel zero(int dimension, double rho = 2.0);
  static PotentialModel gaussian(double amplitude, double width, int dimension,
                                 double rho = 2.0);
  static PotentialModel compact_bump(double amplitude, double cutoff_radius,
                                     int dimension, double rho = 2.0);
  static PotentialModel yukawa_smoothed(double amplitude, double width,
                                        double smoothing, int dimension,
                                        double rho = 2.0);
  // Tabulated radial profile (r_i, v_i), r_0 = 0, cubic spline with g'(0) = 0
  // and clamped-zero tail beyond the last knot (the last value must be 0).
  static PotentialModel radial_tabulated(std::vector<double> radii,
                                         std::vector<double> values,
                                         int dimension, double rho = 2.0);

  PotentialKind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  double rho() const { return rho_; }
  double amplitude() const { return amplitude_; }
  double width() const { return width_; }
  double cutoff_radius() const { return cutoff_radius_; }
  double smoothing() const { return smoothing_; }
  std::optional<double> support_radius() const { return support_radius_; }
  const std::vector<double>& table_radii() const { return table_r_; }
  const std::vector<double>& table_values() const { return table_v_; }

  // Measured decay constants for derivative orders 0, 1, 2.
  double decay_constant(int order) const { return c_alpha_[order]; }
  void set_decay_constant(int order, double c) { c_alpha_[order] = c; }

  // Characteristic length of the interaction region (width, cutoff, ...).
  double interaction_scale() const;
  // Radius beyond which |V| and scale*|V'| both fall below `threshold`.
  double negligible_radius(double threshold) const;

  // Radial profile and its first two derivatives.
  double radial_value(double r) const;
  double radial_derivative(double r) const;
  double radial_second_derivative(double r) const;

  double eval(const Vec& x) const;
  Vec grad(const Vec& x) const;
  Mat hess(const Vec& x) const;

  DecayReport verify_decay(int sample_count) const;

private:
  PotentialModel() = default;
  void measure_decay_constants();

  PotentialKind kind_ = PotentialKind::Zero;
  int dimension_ = 2;
  double rho_ = 2.0;
  double amplitude_ = 0.0;
  double width_ = 1.0;
  double cutoff_radius_ = 0.0;
  double smoothing_ = 0.5;
  std::optional<double> support_radius_;
  double c_alpha_[3] = {0.0, 0.0, 0.0};

  // Tabulated profile: cubic spline coefficients per interval.
  std::vector<double> table_r_, table_v_, spline_b_, spline_c_, spline_d_;
};

} // namespace scatrel
