// Boundary-value solver: all impact parameters sent to a given outgoing
// direction, with the direction-map determinant and the conjugate-point
// index of each connecting trajectory.
#pragma once

#include <limits>
#include <vector>

#include "scatrel/asymptotics.hpp"

namespace scatrel {

struct TrajectorySolution {
  int index = 0;
  Vec z;        // impact parameter in omega^perp (ambient)
  Vec z_coords; // its coordinates in the frame of omega^perp
  Vec w;        // theta^perp component of x_inf (ambient)
  Vec w_coords; // its coordinates in the frame of theta^perp
  double sigma_hat = 0.0; // det of the chart jacobian of z -> xi_inf
  bool degenerate = false;
  int maslov = -1; // conjugate-point count; -1 when left unset (degenerate)
  double action = std::numeric_limits<double>::quiet_NaN(); // filled downstream
  double condition = 0.0; // |xi_inf(z) - theta|
  ShotResult shot;
};

struct SolveOptions {
  double search_radius = 0.0; // 0: derived from the interaction scale
  double grid_density = 4.0;  // seeds per unit length in each z direction
  double tol = 1e-8;
  double degenerate_threshold = 1e-8;
  int max_newton_iter = 40;
  bool grid_seeding = true;
  std::vector<Vec> extra_seeds; // warm starts (z-coordinates), e.g. continuation
  ShotOptions shot;
};

// Multi-start damped Newton on the chart residual frame(theta)^T xi_inf(z),
// deduplicated and sorted by |z|.  Seeds whose trajectories fail to escape
// are skipped (a warning goes to stderr).  Degenerate roots (|sigma_hat|
// below threshold) are reported with maslov left unset.
std::vector<TrajectorySolution> find_all(const FlowIntegrator& flow, const Vec& omega,
                                         const Vec& theta, const SolveOptions& opt = {});

// Conjugate points of the Jacobi fields spanned by the incoming-plane
// derivatives: sign changes of t -> det([dq(t)/dz | p(t)]).  Throws
// DegenerateEndpointError when the determinant vanishes at the final time.
int maslov_index(const FlowIntegrator& flow, const ShotResult& shot);

struct NondegeneracyReport {
  bool regular = false;
  double min_abs_sigma = std::numeric_limits<double>::infinity();
  double threshold = 0.0;
};

// theta is regular for omega iff every solution clears the threshold.
NondegeneracyReport nondegeneracy_report(const std::vector<TrajectorySolution>& solutions,
                                         double threshold = 1e-8);

} // namespace scatrel
