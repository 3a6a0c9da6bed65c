// Sampling of the scattering relation over (omega, z) patches in angle
// coordinates on T*S^1, and the symplectic-pullback residual certifying the
// Lagrangian property of the sampled graph.
#pragma once

#include <vector>

#include "scatrel/asymptotics.hpp"

namespace scatrel {

// One relation point in angle charts: incoming circle angle phi1 with
// covector zeta1 = sqrt(2 lambda) z, outgoing angle phi2 (unwrapped across
// the grid) with the sign-twisted covector zeta2 = -sqrt(2 lambda) w.
struct RelationPoint {
  double phi1 = 0.0;
  double zeta1 = 0.0;
  double phi2 = 0.0;
  double zeta2 = 0.0;
  double extraction_error = 0.0;
};

struct RelationPatch {
  double omega_lo = 0.0, omega_hi = 0.1; // omega-angle interval
  double z_lo = 0.5, z_hi = 1.5;         // impact-parameter interval
};

struct RelationSample {
  std::vector<RelationPoint> points; // row-major: [i_omega * n_z + j_z]
  int n_omega = 0, n_z = 0;
  RelationPatch patch;
  double lambda = 0.5;
  bool twist_applied = true;

  const RelationPoint& at(int i, int j) const { return points[i * n_z + j]; }
  RelationPoint& at(int i, int j) { return points[i * n_z + j]; }
};

// Sweep the patch on an n_omega x n_z grid.  Throws PatchError when more
// than 10% of the grid has no outgoing asymptotics (trapped/undecided), with
// the offending parameter region named in the message.
RelationSample sample_relation(const FlowIntegrator& flow, const RelationPatch& patch,
                               int n_omega, int n_z, const ShotOptions& opt = {});

// Max over interior grid points of the pullback of dzeta1 ^ dphi1 +
// dzeta2 ^ dphi2 on the two coordinate tangent vectors, by central
// differences.  Zero (to second order in the step) iff the sampled graph is
// Lagrangian for the twisted form.
double lagrangian_residual(const RelationSample& sample);

// Characteristic magnitude of the symplectic form on the sample, used to
// normalize the residual: sqrt(2 lambda) (the zeta scale) per unit angle.
double form_scale(const RelationSample& sample);

} // namespace scatrel
