#include "scatrel/relation.hpp"

#include <cmath>
#include <sstream>

#include "scatrel/errors.hpp"

namespace scatrel {

RelationSample sample_relation(const FlowIntegrator& flow, const RelationPatch& patch,
                               int n_omega, int n_z, const ShotOptions& opt) {
  if (n_omega < 3 || n_z < 3)
    throw DomainError("sample_relation: need at least 3 grid points per direction");
  if (flow.system().dimension != 2)
    throw DomainError("sample_relation: angle charts are implemented for n = 2");

  const double speed = std::sqrt(2.0 * flow.system().lambda);
  RelationSample s;
  s.n_omega = n_omega;
  s.n_z = n_z;
  s.patch = patch;
  s.lambda = flow.system().lambda;
  s.points.resize(static_cast<size_t>(n_omega) * n_z);

  std::vector<char> bad(s.points.size(), 0);
  int bad_count = 0;
  double bad_a_lo = 0.0, bad_a_hi = 0.0, bad_b_lo = 0.0, bad_b_hi = 0.0;

  Vec zc(1);
  for (int i = 0; i < n_omega; ++i) {
    const double a = patch.omega_lo +
                     (patch.omega_hi - patch.omega_lo) * i / (n_omega - 1.0);
    for (int j = 0; j < n_z; ++j) {
      const double b = patch.z_lo + (patch.z_hi - patch.z_lo) * j / (n_z - 1.0);
      zc[0] = b;
      RelationPoint& pt = s.at(i, j);
      pt.phi1 = a;
      pt.zeta1 = speed * b;
      try {
        const auto shot = shoot_coords(flow, unit_from_angle(a), zc, opt);
        pt.phi2 = angle_of(shot.datum.xi_inf);
        pt.zeta2 = -speed * (orthonormal_frame(shot.datum.xi_inf).transpose() *
                             shot.datum.x_inf)(0);
        pt.extraction_error = shot.datum.extraction_error;
      } catch (const NoAsymptoticsError&) {
        bad[i * n_z + j] = 1;
        if (bad_count == 0) {
          bad_a_lo = bad_a_hi = a;
          bad_b_lo = bad_b_hi = b;
        } else {
          bad_a_lo = std::min(bad_a_lo, a);
          bad_a_hi = std::max(bad_a_hi, a);
          bad_b_lo = std::min(bad_b_lo, b);
          bad_b_hi = std::max(bad_b_hi, b);
        }
        ++bad_count;
      }
    }
  }
  if (bad_count > 0) {
    if (10 * bad_count > static_cast<int>(s.points.size())) {
      std::ostringstream msg;
      msg << "sample_relation: " << bad_count << "/" << s.points.size()
          << " grid points have no asymptotics; bad region angle in [" << bad_a_lo
          << ", " << bad_a_hi << "], z in [" << bad_b_lo << ", " << bad_b_hi << "]";
      throw PatchError(msg.str());
    }
    std::ostringstream msg;
    msg << "sample_relation: " << bad_count
        << " trapped/undecided grid point(s); shrink the patch";
    throw PatchError(msg.str());
  }

  // Unwrap phi2 across the grid so central differences see a continuous
  // branch: row by row against the left neighbor, first column against the
  // row above.
  for (int i = 0; i < n_omega; ++i) {
    for (int j = 0; j < n_z; ++j) {
      if (i == 0 && j == 0) continue;
      const double ref = j > 0 ? s.at(i, j - 1).phi2 : s.at(i - 1, j).phi2;
      double& v = s.at(i, j).phi2;
      v = ref + wrap_angle(v - ref);
    }
  }
  return s;
}

double form_scale(const RelationSample& sample) {
  return std::sqrt(2.0 * sample.lambda);
}

double lagrangian_residual(const RelationSample& sample) {
  const int na = sample.n_omega, nb = sample.n_z;
  if (na < 3 || nb < 3)
    throw DomainError("lagrangian_residual: need at least 3 points per direction");
  const double ha = (sample.patch.omega_hi - sample.patch.omega_lo) / (na - 1.0);
  const double hb = (sample.patch.z_hi - sample.patch.z_lo) / (nb - 1.0);

  double worst = 0.0;
  for (int i = 1; i + 1 < na; ++i) {
    for (int j = 1; j + 1 < nb; ++j) {
      auto da = [&](auto field) {
        return (field(sample.at(i + 1, j)) - field(sample.at(i - 1, j))) / (2.0 * ha);
      };
      auto db = [&](auto field) {
        return (field(sample.at(i, j + 1)) - field(sample.at(i, j - 1))) / (2.0 * hb);
      };
      auto f1 = [](const RelationPoint& p) { return p.phi1; };
      auto z1 = [](const RelationPoint& p) { return p.zeta1; };
      auto f2 = [](const RelationPoint& p) { return p.phi2; };
      auto z2 = [](const RelationPoint& p) { return p.zeta2; };

      const double t2a = da(f2), t2b = db(f2);
      if (std::abs(da(f1)) + std::abs(t2a) < 1e-14 ||
          std::abs(db(z1)) + std::abs(db(z2)) + std::abs(t2b) < 1e-14)
        throw DomainError("lagrangian_residual: degenerate parametrization (collapsed tangent)");

      const double omega_val = (da(z1) * db(f1) - db(z1) * da(f1)) +
                               (da(z2) * t2b - db(z2) * t2a);
      worst = std::max(worst, std::abs(omega_val));
    }
  }
  return worst;
}

} // namespace scatrel
