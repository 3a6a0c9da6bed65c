// Incoming asymptotic preparation and outgoing data extraction:
// trajectories asymptotic to free flight sqrt(2 lambda) omega t + z in the
// past, with (xi_inf, x_inf) read off at two exit radii and Richardson
// extrapolated with the decay exponent 1 - rho.
#pragma once

#include <Eigen/Dense>

#include "scatrel/flow.hpp"

namespace scatrel {

struct IncomingPrep {
  Vec omega;        // unit incoming direction
  Vec z;            // impact parameter, z perp omega (ambient coordinates)
  Vec q0, p0;       // initial state at t_start
  double t_start = 0.0;
  Mat frame;        // n x (n-1) orthonormal basis of omega^perp
  Mat dq0_dz, dp0_dz; // n x (n-1), derivatives wrt z-coordinates in `frame`
  double tail_tol = 0.0; // bound on the neglected free-path tail
};

struct AsymptoticDatum {
  Vec omega, z;
  Vec xi_inf;  // unit outgoing direction
  Vec x_inf;   // asymptotic spatial offset
  TrajectoryClass classification = TrajectoryClass::Undecided;
  double extraction_error = 0.0;
};

struct ShotResult {
  IncomingPrep prep;
  Trajectory traj{2};
  double t1 = 0.0, t2 = 0.0; // outgoing crossing times of radii r1 < r2
  double r1 = 0.0, r2 = 0.0;
  AsymptoticDatum datum;
  Mat dxi_dz_ambient;   // n x (n-1)
  Mat dxinf_dz_ambient; // n x (n-1)
  Mat jac_chart;        // (n-1) x (n-1): frame(xi_inf)^T dxi/dz
};

struct ShotOptions {
  double incoming_tol = 1e-10;
  double horizon_override = 0.0; // > 0: cap on the escape time budget
};

// Initial data at finite t_start < 0 whose flow satisfies the incoming
// condition to `tol`: free flight plus one Picard iteration of the momentum
// (and induced position) integral of -grad V along the free path.  For
// compactly supported potentials t_start = -(support + 1/2)/sqrt(2 lambda)
// and the correction vanishes identically.
IncomingPrep prepare_incoming(const HamiltonianSystem& system, const Vec& omega,
                              const Vec& z, double tol);

// Shoot one trajectory from prepared incoming data through the interaction
// region and extract outgoing asymptotics plus their z-derivatives from the
// variational flow.  Throws NoAsymptoticsError if the trajectory fails to
// escape within the horizon.
ShotResult shoot(const FlowIntegrator& flow, const Vec& omega, const Vec& z,
                 const ShotOptions& opt = {});

// Convenience: z given by coordinates in the deterministic frame of omega^perp.
ShotResult shoot_coords(const FlowIntegrator& flow, const Vec& omega,
                        const Vec& z_coords, const ShotOptions& opt = {});

// Outgoing data of an already-integrated escaping trajectory.  The
// trajectory must extend beyond both extraction radii.
AsymptoticDatum extract_outgoing(const FlowIntegrator& flow, const Trajectory& traj,
                                 double r1, double r2, double rho);

// Jacobian of z -> xi_inf in orthonormal coordinates on omega^perp and on
// the tangent space at xi_inf.
Mat dxi_dz(const FlowIntegrator& flow, const Vec& omega, const Vec& z,
           const ShotOptions& opt = {});

// Default inner extraction radius for this system (outer radius is twice it).
double extraction_radius(const HamiltonianSystem& system);

} // namespace scatrel
