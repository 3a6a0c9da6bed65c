#include "scatrel/asymptotics.hpp"

#include <cmath>

#include "scatrel/errors.hpp"
#include "scatrel/quadrature.hpp"

namespace scatrel {

double extraction_radius(const HamiltonianSystem& system) {
  return 20.0 * std::max(1.0, system.potential.interaction_scale());
}

IncomingPrep prepare_incoming(const HamiltonianSystem& system, const Vec& omega,
                              const Vec& z, double tol) {
  const int n = system.dimension;
  if (system.potential.rho() <= 1.0)
    throw DomainError("prepare_incoming: decay exponent rho must exceed 1");
  if (std::abs(omega.norm() - 1.0) > 1e-10)
    throw DomainError("prepare_incoming: omega must be a unit vector");
  if (std::abs(z.dot(omega)) > 1e-10 * (1.0 + z.norm()))
    throw DomainError("prepare_incoming: z must be orthogonal to omega");

  const double speed = std::sqrt(2.0 * system.lambda);
  const auto& pot = system.potential;

  IncomingPrep prep;
  prep.omega = omega;
  prep.z = z;
  prep.frame = orthonormal_frame(omega);

  auto free_path = [&](double t) -> Vec { return speed * t * omega + z; };

  if (pot.support_radius()) {
    // Outside the support the flow is exactly free: place the start just
    // outside and skip the correction.
    prep.t_start = -(*pot.support_radius() + 0.5) / speed;
    prep.q0 = free_path(prep.t_start);
    prep.p0 = speed * omega;
    prep.dq0_dz = prep.frame;
    prep.dp0_dz = Mat::Zero(n, n - 1);
    prep.tail_tol = 0.0;
    return prep;
  }

  // Pick t_start so the neglected momentum tail along the free path is below
  // tol.  All shipped profiles decay at least exponentially, so the tail is
  // evaluated directly by quadrature rather than through the power-law bound.
  auto tail = [&](double t) {
    auto f = [&](double s) { return pot.grad(free_path(s)).norm(); };
    return simpson_tail_below(f, t, 0.1 * tol);
  };
  double t_start = -std::max(2.0 * pot.interaction_scale(), 2.0) / speed;
  int guard = 0;
  while (tail(t_start) >= tol) {
    t_start *= 1.5;
    if (++guard > 200)
      throw IntegrationError("prepare_incoming: tail bound not attainable");
  }
  prep.t_start = t_start;
  prep.tail_tol = tol;

  // One Picard iteration around free flight:
  //   p = sqrt(2 lambda) omega - int_{-inf}^{t0} grad V(free(s)) ds
  //   q = free(t0) - int_{-inf}^{t0} (t0 - s) grad V(free(s)) ds
  const double qtol = std::min(1e-13, 0.01 * tol);
  Vec dp = simpson_tail_below(
      [&](double s) -> Vec { return Vec(pot.grad(free_path(s))); }, t_start, qtol);
  Vec dq = simpson_tail_below(
      [&](double s) -> Vec { return Vec((t_start - s) * pot.grad(free_path(s))); },
      t_start, qtol);
  prep.p0 = speed * omega - dp;
  prep.q0 = free_path(t_start) - dq;

  // z-derivatives of the corrected initial data, for the variational flow.
  prep.dq0_dz = prep.frame;
  prep.dp0_dz = Mat::Zero(n, n - 1);
  for (int j = 0; j < n - 1; ++j) {
    const Vec fj = prep.frame.col(j);
    const Vec dpj = simpson_tail_below(
        [&](double s) -> Vec { return Vec(pot.hess(free_path(s)) * fj); }, t_start, qtol);
    const Vec dqj = simpson_tail_below(
        [&](double s) -> Vec { return Vec((t_start - s) * (pot.hess(free_path(s)) * fj)); },
        t_start, qtol);
    prep.dp0_dz.col(j) = -dpj;
    prep.dq0_dz.col(j) = fj - dqj;
  }
  return prep;
}

namespace {

struct Crossing {
  double t;
  Vec q, p;
  Mat M;
};

Crossing locate_crossing(const FlowIntegrator& flow, const Trajectory& traj,
                         double radius) {
  const int n = traj.dimension();
  int last_inside = -1;
  for (int i = 0; i < traj.size(); ++i)
    if (traj.q(i).norm() <= radius) last_inside = i;
  if (last_inside < 0 || last_inside + 1 >= traj.size())
    throw NoAsymptoticsError("extraction radius never crossed outgoing");
  Crossing c;
  c.t = flow.radius_crossing(traj, traj.time(last_inside), traj.time(last_inside + 1),
                             radius);
  const Vec s = flow.state_at(traj, c.t);
  c.q = Trajectory::unpack_q(s, n);
  c.p = Trajectory::unpack_p(s, n);
  c.M = Trajectory::unpack_M(s, n);
  return c;
}

double richardson_beta(double r1, double r2, double rho) {
  const double a1 = std::pow(r1, 1.0 - rho);
  const double a2 = std::pow(r2, 1.0 - rho);
  return a2 / (a1 - a2);
}

} // namespace

AsymptoticDatum extract_outgoing(const FlowIntegrator& flow, const Trajectory& traj,
                                 double r1, double r2, double rho) {
  const Crossing c1 = locate_crossing(flow, traj, r1);
  const Crossing c2 = locate_crossing(flow, traj, r2);
  const double beta = richardson_beta(r1, r2, rho);

  const Vec xi1 = c1.p.normalized(), xi2 = c2.p.normalized();
  const Vec x1 = c1.q - c1.p * c1.t, x2 = c2.q - c2.p * c2.t;

  AsymptoticDatum d;
  d.xi_inf = (xi2 + beta * (xi2 - xi1)).normalized();
  d.x_inf = x2 + beta * (x2 - x1);
  d.classification = TrajectoryClass::NonTrapped;
  const double disc = std::max((xi2 - xi1).norm(), (x2 - x1).norm());
  const double floor =
      10.0 * flow.tolerances().rel * (1.0 + c2.q.norm()) + flow.tolerances().abs;
  d.extraction_error = disc + floor;
  return d;
}

ShotResult shoot(const FlowIntegrator& flow, const Vec& omega, const Vec& z,
                 const ShotOptions& opt) {
  const auto& sys = flow.system();
  const int n = sys.dimension;
  const double speed = std::sqrt(2.0 * sys.lambda);

  ShotResult res;
  res.prep = prepare_incoming(sys, omega, z, opt.incoming_tol);

  res.r1 = std::max(extraction_radius(sys), 1.1 * res.prep.q0.norm());
  res.r2 = 2.0 * res.r1;
  const double stop_radius = std::max(1.05 * res.r2, flow.certificate_radius());
  auto stop = [&](double, const Vec& q, const Vec& p) {
    return q.norm() > stop_radius && q.dot(p) > 0.0;
  };
  const double horizon =
      opt.horizon_override > 0.0
          ? opt.horizon_override
          : 3.0 * (2.0 * stop_radius / speed + std::abs(res.prep.t_start)) + 100.0;
  bool reached = false;
  res.traj = flow.integrate_until(res.prep.q0, res.prep.p0, res.prep.t_start, +1, stop,
                                  horizon, &reached);
  if (!reached)
    throw NoAsymptoticsError("shoot: trajectory did not escape within the horizon");

  const Crossing c1 = locate_crossing(flow, res.traj, res.r1);
  const Crossing c2 = locate_crossing(flow, res.traj, res.r2);
  res.t1 = c1.t;
  res.t2 = c2.t;
  const double beta = richardson_beta(res.r1, res.r2, sys.potential.rho());

  const Vec xi1 = c1.p.normalized(), xi2 = c2.p.normalized();
  const Vec x1 = c1.q - c1.p * c1.t, x2 = c2.q - c2.p * c2.t;

  res.datum.omega = omega;
  res.datum.z = z;
  res.datum.xi_inf = (xi2 + beta * (xi2 - xi1)).normalized();
  res.datum.x_inf = x2 + beta * (x2 - x1);
  res.datum.classification = TrajectoryClass::NonTrapped;
  const double disc = std::max((xi2 - xi1).norm(), (x2 - x1).norm());
  const double floor = 10.0 * flow.tolerances().rel * (1.0 + c2.q.norm()) +
                       flow.tolerances().abs + res.prep.tail_tol;
  res.datum.extraction_error = disc + floor;

  // Push the incoming-plane derivatives through the variational flow and
  // through the extraction map, then extrapolate the same way.
  Mat d0(2 * n, n - 1);
  d0.topRows(n) = res.prep.dq0_dz;
  d0.bottomRows(n) = res.prep.dp0_dz;
  auto chart_derivs = [&](const Crossing& c) {
    const Mat d = c.M * d0;
    const Mat dq = d.topRows(n), dp = d.bottomRows(n);
    const Vec xhat = c.p.normalized();
    const Mat proj = Mat::Identity(n, n) - xhat * xhat.transpose();
    Mat dxi = proj * dp / c.p.norm();
    Mat dx = dq - dp * c.t;
    return std::make_pair(dxi, dx);
  };
  const auto [dxi1, dx1] = chart_derivs(c1);
  const auto [dxi2, dx2] = chart_derivs(c2);
  res.dxi_dz_ambient = dxi2 + beta * (dxi2 - dxi1);
  res.dxinf_dz_ambient = dx2 + beta * (dx2 - dx1);
  res.jac_chart = orthonormal_frame(res.datum.xi_inf).transpose() * res.dxi_dz_ambient;
  return res;
}

ShotResult shoot_coords(const FlowIntegrator& flow, const Vec& omega,
                        const Vec& z_coords, const ShotOptions& opt) {
  const Mat frame = orthonormal_frame(omega);
  return shoot(flow, omega, frame * z_coords, opt);
}

Mat dxi_dz(const FlowIntegrator& flow, const Vec& omega, const Vec& z,
           const ShotOptions& opt) {
  return shoot(flow, omega, z, opt).jac_chart;
}

} // namespace scatrel
