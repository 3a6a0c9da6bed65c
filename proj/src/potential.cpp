#include "scatrel/potential.hpp"

#include <algorithm>
#include <cmath>

#include "scatrel/errors.hpp"

namespace scatrel {

std::string to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::Zero: return "zero";
    case PotentialKind::Gaussian: return "gaussian";
    case PotentialKind::CompactBump: return "compact-bump";
    case PotentialKind::YukawaSmoothed: return "yukawa-smoothed";
    case PotentialKind::RadialTabulated: return "radial-tabulated";
  }
  return "unknown";
}

PotentialKind potential_kind_from_string(const std::string& s) {
  if (s == "zero") return PotentialKind::Zero;
  if (s == "gaussian") return PotentialKind::Gaussian;
  if (s == "compact-bump") return PotentialKind::CompactBump;
  if (s == "yukawa-smoothed") return PotentialKind::YukawaSmoothed;
  if (s == "radial-tabulated") return PotentialKind::RadialTabulated;
  throw DomainError("unknown potential kind: " + s);
}

PotentialModel PotentialModel::zero(int dimension, double rho) {
  PotentialModel m;
  m.kind_ = PotentialKind::Zero;
  m.dimension_ = dimension;
  m.rho_ = rho;
  m.support_radius_ = 0.0;
  return m;
}

PotentialModel PotentialModel::gaussian(double amplitude, double width,
                                        int dimension, double rho) {
  if (width <= 0.0) throw DomainError("gaussian potential needs width > 0");
  PotentialModel m;
  m.kind_ = PotentialKind::Gaussian;
  m.dimension_ = dimension;
  m.rho_ = rho;
  m.amplitude_ = amplitude;
  m.width_ = width;
  m.measure_decay_constants();
  return m;
}

PotentialModel PotentialModel::compact_bump(double amplitude, double cutoff_radius,
                                            int dimension, double rho) {
  if (cutoff_radius <= 0.0) throw DomainError("compact bump needs cutoff radius > 0");
  PotentialModel m;
  m.kind_ = PotentialKind::CompactBump;
  m.dimension_ = dimension;
  m.rho_ = rho;
  m.amplitude_ = amplitude;
  m.cutoff_radius_ = cutoff_radius;
  m.support_radius_ = cutoff_radius;
  m.measure_decay_constants();
  return m;
}

PotentialModel PotentialModel::yukawa_smoothed(double amplitude, double width,
                                               double smoothing, int dimension,
                                               double rho) {
  if (width <= 0.0 || smoothing <= 0.0)
    throw DomainError("yukawa-smoothed needs width > 0 and smoothing > 0");
  PotentialModel m;
  m.kind_ = PotentialKind::YukawaSmoothed;
  m.dimension_ = dimension;
  m.rho_ = rho;
  m.amplitude_ = amplitude;
  m.width_ = width;
  m.smoothing_ = smoothing;
  m.measure_decay_constants();
  return m;
}

PotentialModel PotentialModel::radial_tabulated(std::vector<double> radii,
                                                std::vector<double> values,
                                                int dimension, double rho) {
  if (radii.size() != values.size() || radii.size() < 4)
    throw DomainError("tabulated potential needs >= 4 (r, v) pairs");
  if (radii.front() != 0.0)
    throw DomainError("tabulated potential must start at r = 0");
  for (size_t i = 1; i < radii.size(); ++i)
    if (radii[i] <= radii[i - 1])
      throw DomainError("tabulated radii must be strictly increasing");
  if (std::abs(values.back()) > 1e-14)
    throw DomainError("tabulated potential must end at value 0 (clamped-zero tail)");

  PotentialModel m;
  m.kind_ = PotentialKind::RadialTabulated;
  m.dimension_ = dimension;
  m.rho_ = rho;
  m.support_radius_ = radii.back();
  m.table_r_ = std::move(radii);
  m.table_v_ = std::move(values);

  // Clamped cubic spline with g'(0) = 0 and g'(r_max) = 0.
  const auto& r = m.table_r_;
  const auto& v = m.table_v_;
  const int n = static_cast<int>(r.size());
  std::vector<double> h(n - 1);
  for (int i = 0; i < n - 1; ++i) h[i] = r[i + 1] - r[i];
  // Tridiagonal system for second-derivative-like coefficients c.
  std::vector<double> diag(n), sub(n), sup(n), rhs(n);
  diag[0] = 2.0 * h[0];
  sup[0] = h[0];
  rhs[0] = 3.0 * ((v[1] - v[0]) / h[0] - 0.0);
  for (int i = 1; i < n - 1; ++i) {
    sub[i] = h[i - 1];
    diag[i] = 2.0 * (h[i - 1] + h[i]);
    sup[i] = h[i];
    rhs[i] = 3.0 * ((v[i + 1] - v[i]) / h[i] - (v[i] - v[i - 1]) / h[i - 1]);
  }
  sub[n - 1] = h[n - 2];
  diag[n - 1] = 2.0 * h[n - 2];
  rhs[n - 1] = 3.0 * (0.0 - (v[n - 1] - v[n - 2]) / h[n - 2]);
  // Thomas algorithm.
  for (int i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> c(n);
  c[n - 1] = rhs[n - 1] / diag[n - 1];
  for (int i = n - 2; i >= 0; --i) c[i] = (rhs[i] - sup[i] * c[i + 1]) / diag[i];
  m.spline_b_.resize(n - 1);
  m.spline_c_.assign(c.begin(), c.end() - 1);
  m.spline_d_.resize(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    m.spline_b_[i] = (v[i + 1] - v[i]) / h[i] - h[i] * (2.0 * c[i] + c[i + 1]) / 3.0;
    m.spline_d_[i] = (c[i + 1] - c[i]) / (3.0 * h[i]);
  }
  m.measure_decay_constants();
  return m;
}

double PotentialModel::interaction_scale() const {
  switch (kind_) {
    case PotentialKind::Zero: return 1.0;
    case PotentialKind::Gaussian: return width_;
    case PotentialKind::CompactBump: return cutoff_radius_;
    case PotentialKind::YukawaSmoothed: return width_;
    case PotentialKind::RadialTabulated: return table_r_.back();
  }
  return 1.0;
}

double PotentialModel::negligible_radius(double threshold) const {
  if (kind_ == PotentialKind::Zero) return 1.0;
  if (support_radius_) return *support_radius_ + 0.5;
  const double scale = interaction_scale();
  double r = scale;
  while (r < 1e4 * scale) {
    if (std::abs(radial_value(r)) < threshold &&
        scale * std::abs(radial_derivative(r)) < threshold)
      return r;
    r *= 1.1;
  }
  return r;
}

namespace {
// Bump profile phi(u) = 1 - 1/(1 - u^2) and its u-derivatives, u in [0, 1).
inline void bump_phi(double u, double& phi, double& dphi, double& d2phi) {
  const double s = 1.0 - u * u;
  phi = 1.0 - 1.0 / s;
  dphi = -2.0 * u / (s * s);
  d2phi = -2.0 * (1.0 + 3.0 * u * u) / (s * s * s);
}
} // namespace

double PotentialModel::radial_value(double r) const {
  switch (kind_) {
    case PotentialKind::Zero: return 0.0;
    case PotentialKind::Gaussian: {
      const double u = r / width_;
      return amplitude_ * std::exp(-0.5 * u * u);
    }
    case PotentialKind::CompactBump: {
      const double u = r / cutoff_radius_;
      if (u >= 1.0) return 0.0;
      double phi, d1, d2;
      bump_phi(u, phi, d1, d2);
      return amplitude_ * std::exp(phi);
    }
    case PotentialKind::YukawaSmoothed: {
      const double mm = std::sqrt(r * r + smoothing_ * smoothing_);
      return amplitude_ * std::exp(-mm / width_) / mm;
    }
    case PotentialKind::RadialTabulated: {
      if (r >= table_r_.back()) return 0.0;
      const auto it = std::upper_bound(table_r_.begin(), table_r_.end(), r);
      const int i = std::max(0, static_cast<int>(it - table_r_.begin()) - 1);
      const double dx = r - table_r_[i];
      return table_v_[i] + dx * (spline_b_[i] + dx * (spline_c_[i] + dx * spline_d_[i]));
    }
  }
  return 0.0;
}

double PotentialModel::radial_derivative(double r) const {
  switch (kind_) {
    case PotentialKind::Zero: return 0.0;
    case PotentialKind::Gaussian: {
      const double u = r / width_;
      return -amplitude_ * (r / (width_ * width_)) * std::exp(-0.5 * u * u);
    }
    case PotentialKind::CompactBump: {
      const double u = r / cutoff_radius_;
      if (u >= 1.0) return 0.0;
      double phi, d1, d2;
      bump_phi(u, phi, d1, d2);
      return amplitude_ * std::exp(phi) * d1 / cutoff_radius_;
    }
    case PotentialKind::YukawaSmoothed: {
      const double mm = std::sqrt(r * r + smoothing_ * smoothing_);
      const double G = amplitude_ * std::exp(-mm / width_) / mm;
      const double dG = -G * (1.0 / width_ + 1.0 / mm); // dG/dm
      return dG * (r / mm);
    }
    case PotentialKind::RadialTabulated: {
      if (r >= table_r_.back()) return 0.0;
      const auto it = std::upper_bound(table_r_.begin(), table_r_.end(), r);
      const int i = std::max(0, static_cast<int>(it - table_r_.begin()) - 1);
      const double dx = r - table_r_[i];
      return spline_b_[i] + dx * (2.0 * spline_c_[i] + 3.0 * dx * spline_d_[i]);
    }
  }
  return 0.0;
}

double PotentialModel::radial_second_derivative(double r) const {
  switch (kind_) {
    case PotentialKind::Zero: return 0.0;
    case PotentialKind::Gaussian: {
      const double w2 = width_ * width_;
      const double u = r / width_;
      return amplitude_ * std::exp(-0.5 * u * u) * (r * r / (w2 * w2) - 1.0 / w2);
    }
    case PotentialKind::CompactBump: {
      const double u = r / cutoff_radius_;
      if (u >= 1.0) return 0.0;
      double phi, d1, d2;
      bump_phi(u, phi, d1, d2);
      return amplitude_ * std::exp(phi) * (d1 * d1 + d2) / (cutoff_radius_ * cutoff_radius_);
    }
    case PotentialKind::YukawaSmoothed: {
      const double s2 = smoothing_ * smoothing_;
      const double mm = std::sqrt(r * r + s2);
      const double G = amplitude_ * std::exp(-mm / width_) / mm;
      const double a = 1.0 / width_ + 1.0 / mm;
      const double dG = -G * a;
      const double d2G = G * a * a + G / (mm * mm);
      const double mp = r / mm;
      const double mpp = s2 / (mm * mm * mm);
      return d2G * mp * mp + dG * mpp;
    }
    case PotentialKind::RadialTabulated: {
      if (r >= table_r_.back()) return 0.0;
      const auto it = std::upper_bound(table_r_.begin(), table_r_.end(), r);
      const int i = std::max(0, static_cast<int>(it - table_r_.begin()) - 1);
      const double dx = r - table_r_[i];
      return 2.0 * spline_c_[i] + 6.0 * dx * spline_d_[i];
    }
  }
  return 0.0;
}

double PotentialModel::eval(const Vec& x) const {
  if (!x.allFinite()) throw DomainError("potential eval: non-finite point");
  if (static_cast<int>(x.size()) != dimension_)
    throw DomainError("potential eval: wrong dimension");
  return radial_value(x.norm());
}

Vec PotentialModel::grad(const Vec& x) const {
  if (!x.allFinite()) throw DomainError("potential grad: non-finite point");
  const double r = x.norm();
  if (r < 1e-10) return radial_second_derivative(0.0) * x;
  return (radial_derivative(r) / r) * x;
}

Mat PotentialModel::hess(const Vec& x) const {
  if (!x.allFinite()) throw DomainError("potential hess: non-finite point");
  const int n = dimension_;
  const double r = x.norm();
  if (r < 1e-10) return radial_second_derivative(0.0) * Mat::Identity(n, n);
  const Vec u = x / r;
  const double g1 = radial_derivative(r);
  const double g2 = radial_second_derivative(r);
  return g2 * (u * u.transpose()) +
         (g1 / r) * (Mat::Identity(n, n) - u * u.transpose());
}

void PotentialModel::measure_decay_constants() {
  // Dense radial grid out to where the profile is negligible; the measured
  // maxima of |g^(k)| <r>^(rho+k) become the stored constants.  Hessian and
  // gradient norms of a radial function are bounded by combinations of
  // |g'|, |g''| and |g'|/r, all covered by sampling the profile.
  const double r_max = std::max(4.0 * interaction_scale(), 10.0);
  const int samples = 4000;
  double c[3] = {0.0, 0.0, 0.0};
  for (int i = 0; i <= samples; ++i) {
    const double r = r_max * i / samples;
    const double br = std::pow(1.0 + r * r, 0.5);
    const double w0 = std::pow(br, rho_);
    const double g0 = std::abs(radial_value(r));
    const double g1 = std::abs(radial_derivative(r));
    const double g2 = std::abs(radial_second_derivative(r));
    const double g1_over_r = (r > 1e-8) ? g1 / r : std::abs(radial_second_derivative(0.0));
    c[0] = std::max(c[0], g0 * w0);
    c[1] = std::max(c[1], g1 * w0 * br);
    c[2] = std::max(c[2], std::max(g2, g1_over_r) * w0 * br * br);
  }
  // Headroom covers the grid discretization error of the maxima.
  for (int k = 0; k < 3; ++k) c_alpha_[k] = c[k] * (1.0 + 1e-3);
}

DecayReport PotentialModel::verify_decay(int sample_count) const {
  if (sample_count < 1) throw DomainError("verify_decay: sample_count >= 1 required");
  DecayReport rep;
  const double r_max = std::max(6.0 * interaction_scale(), 12.0);
  Vec dir = Vec::Zero(dimension_);
  dir[0] = 1.0;
  for (int i = 0; i < sample_count; ++i) {
    // Deterministic sample radii (offset from the constant-measurement grid).
    const double r = 1.0 + (r_max - 1.0) * (i + 0.5) / sample_count;
    const Vec x = r * dir;
    const double br = std::sqrt(1.0 + r * r);
    const double w0 = std::pow(br, rho_);
    const double ratios[3] = {
        std::abs(eval(x)) * w0,
        grad(x).norm() * w0 * br,
        hess(x).operatorNorm() * w0 * br * br,
    };
    for (int k = 0; k < 3; ++k) {
      rep.max_ratio[k] = std::max(rep.max_ratio[k], ratios[k]);
      if (ratios[k] > c_alpha_[k] + 1e-12 && rep.witness_order < 0) {
        rep.pass = false;
        rep.witness_radius = r;
        rep.witness_order = k;
      }
    }
  }
  return rep;
}

} // namespace scatrel
