// Modified actions of connecting trajectories, their gradients over the
// direction pair, and the outgoing/incoming WKB phases with the leading
// transport amplitude, all via trajectory quadrature.
#pragma once

#include "scatrel/bvsolve.hpp"

namespace scatrel {

// Modified action of one connecting trajectory, reported both as the
// three-term decomposition
//   S = phi_minus_part + lagrangian_part - phi_plus_part + lambda * t0
// (incoming phase tail at the shell entry point, Lagrangian integral over
// the interaction segment, outgoing phase tail at the shell exit point) and
// as the single-integral form
//   alt_value = int (-2 V) dt over the whole trajectory - <x_inf, sqrt(2 lambda) theta>.
// The two agree identically; `consistency` records the numerical mismatch.
struct ActionRecord {
  double S = 0.0;
  double phi_minus_part = 0.0;
  double lagrangian_part = 0.0; // int of |xdot|^2/2 - V over [s_choice, s_choice + t0]
  double phi_plus_part = 0.0;
  double t0 = 0.0;       // time between the shell entry and exit crossings
  double s_choice = 0.0; // trajectory time of the shell entry crossing
  double alt_value = 0.0;
  double consistency = 0.0; // |S - alt_value|
};

struct ActionOptions {
  // Radius of the splitting shell; entry/exit points sit at shell_radius+1/2.
  // 0 selects the system's extraction radius.  The value of S is independent
  // of this choice (tested), which is what makes the decomposition honest.
  double shell_radius = 0.0;
  double tail_tol = 1e-12; // quadrature tolerance for the free-path tails
};

// Both forms of the modified action for an escaping trajectory.  `theta`
// is the outgoing direction used in the boundary pairing; pass the target
// direction of a solved boundary problem, or an empty vector to use the
// trajectory's own xi_inf.
ActionRecord action(const FlowIntegrator& flow, const ShotResult& shot,
                    const Vec& theta = Vec(), const ActionOptions& opt = {});

// Convenience overload rejecting degenerate solutions.
ActionRecord action(const FlowIntegrator& flow, const TrajectorySolution& sol,
                    const Vec& theta, const ActionOptions& opt = {});

// Single-integral form only (cheap; no backward shell extension needed).
double action_value(const FlowIntegrator& flow, const ShotResult& shot,
                    const Vec& theta = Vec(), double tail_tol = 1e-12);

// Finite-difference gradients of S over the direction pair, with one
// Richardson extrapolation in the step.  Components are taken against the
// orthonormal frames of omega^perp / theta^perp; for the graph property of
// the scattering relation they must match (sqrt(2 lambda) z_coords,
// -sqrt(2 lambda) w_coords), and `mismatch` is the worst relative deviation.
struct ActionGradients {
  Vec d_omega;
  Vec d_theta;
  Vec expected_d_omega;
  Vec expected_d_theta;
  double mismatch = 0.0;
};

// Throws RegionError if the solution branch cannot be continued smoothly
// across the difference stencil (branch jump).
ActionGradients action_gradients(const FlowIntegrator& flow, const Vec& omega,
                                 const Vec& theta, const TrajectorySolution& sol,
                                 double fd_step = 1e-4, const SolveOptions& opt = {});

// Conic outgoing (+) / incoming (-) region: |x| > R, 1/d < |xi| < d, and
// cos(angle(x, xi)) >= sigma (+) or <= -sigma (-).
struct PhaseRegion {
  double R = 10.0;
  double d = 4.0;
  double sigma = 0.2;
};

bool in_region(int sign, const PhaseRegion& region, const Vec& x, const Vec& xi);

// WKB phase at one region point: Phi(x, xi) = <c, xi> -+ int (-2V) dt along
// the unique characteristic through x with momentum asymptote xi at t -> +-inf
// (c is the asymptote's spatial offset).  grad_x is the characteristic's
// momentum at x (exact gradient); a0 is the leading transport amplitude,
// normalized to 1 at infinity.
struct WkbPhaseValue {
  double phi = 0.0;
  Vec grad_x;
  double a0 = 1.0;
  double bvp_residual = 0.0; // direction-matching residual + extraction error
};

// sign = +1 for the outgoing phase, -1 for the incoming one.  Throws
// RegionError when (x, xi) lies outside the region or no characteristic with
// the required asymptote is found.
WkbPhaseValue wkb_phase(const FlowIntegrator& flow, int sign, const Vec& x,
                        const Vec& xi, const PhaseRegion& region = {});

} // namespace scatrel
