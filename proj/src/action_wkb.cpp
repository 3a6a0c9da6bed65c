#include "scatrel/action_wkb.hpp"

#include <cmath>

#include "scatrel/errors.hpp"
#include "scatrel/quadrature.hpp"

namespace scatrel {

namespace {

double quad_component(const FlowIntegrator& flow, const Trajectory& traj, double t,
                      int which) {
  const int n = traj.dimension();
  const Vec s = flow.state_at(traj, t);
  return s[2 * n + 4 * n * n + which];
}

// Integral of -2V over the incoming free tail (-inf, t_start] and the
// outgoing one [t_end, inf), along the respective asymptotes.
double incoming_tail(const PotentialModel& pot, const Vec& p_in, const Vec& offset,
                     double t_start, double tol) {
  return simpson_tail_below(
      [&](double t) { return -2.0 * pot.eval(p_in * t + offset); }, t_start, tol);
}

double outgoing_tail(const PotentialModel& pot, const Vec& p_out, const Vec& offset,
                     double t_end, double tol) {
  return simpson_tail_above(
      [&](double t) { return -2.0 * pot.eval(p_out * t + offset); }, t_end, tol);
}

Vec resolve_theta(const ShotResult& shot, const Vec& theta) {
  if (theta.size() == 0) return shot.datum.xi_inf;
  if (std::abs(theta.norm() - 1.0) > 1e-8)
    throw DomainError("action: theta must be a unit vector");
  return theta;
}

} // namespace

double action_value(const FlowIntegrator& flow, const ShotResult& shot,
                    const Vec& theta, double tail_tol) {
  const auto& sys = flow.system();
  const auto& pot = sys.potential;
  const double speed = std::sqrt(2.0 * sys.lambda);
  const Vec th = resolve_theta(shot, theta);
  const auto& traj = shot.traj;

  const double tail_in = incoming_tail(pot, speed * shot.prep.omega, shot.prep.z,
                                       shot.prep.t_start, tail_tol);
  const double tail_out = outgoing_tail(pot, speed * shot.datum.xi_inf,
                                        shot.datum.x_inf, traj.t_end(), tail_tol);
  const double quad_full = traj.quad_shell(traj.size() - 1);
  return tail_in + quad_full + tail_out - speed * shot.datum.x_inf.dot(th);
}

ActionRecord action(const FlowIntegrator& flow, const ShotResult& shot,
                    const Vec& theta, const ActionOptions& opt) {
  const auto& sys = flow.system();
  const auto& pot = sys.potential;
  const double speed = std::sqrt(2.0 * sys.lambda);
  const Vec th = resolve_theta(shot, theta);
  const auto& traj = shot.traj;

  const double r_bar = opt.shell_radius > 0.0 ? opt.shell_radius : extraction_radius(sys);
  const double r_split = r_bar + 0.5; // entry/exit points inside B(0, r_bar, r_bar+1)
  if (r_split <= shot.prep.q0.norm() + 0.5)
    throw DomainError("action: splitting shell must lie outside the prepared start point");
  if (r_split >= 0.95 * traj.q(traj.size() - 1).norm())
    throw DomainError("action: splitting shell beyond the integrated trajectory");

  const double tail_in = incoming_tail(pot, speed * shot.prep.omega, shot.prep.z,
                                       shot.prep.t_start, opt.tail_tol);
  const double tail_out = outgoing_tail(pot, speed * shot.datum.xi_inf,
                                        shot.datum.x_inf, traj.t_end(), opt.tail_tol);
  const double quad_full = traj.quad_shell(traj.size() - 1);
  const double pairing = speed * shot.datum.x_inf.dot(th);

  // The trajectory starts well inside the shell, so the entry crossing sits
  // on a backward extension of the prepared data.
  bool reached = false;
  auto stop_back = [&](double, const Vec& q, const Vec&) { return q.norm() >= r_bar + 2.0; };
  const double horizon =
      3.0 * (r_bar + 2.0) / speed + std::abs(shot.prep.t_start) + 100.0;
  const Trajectory back = flow.integrate_until(shot.prep.q0, shot.prep.p0,
                                               shot.prep.t_start, -1, stop_back,
                                               horizon, &reached);
  if (!reached)
    throw IntegrationError("action: backward shell extension did not reach the shell");
  const double tau1 = flow.radius_crossing(back, back.t_begin(), back.t_end(), r_split);

  // Outbound exit crossing, bracketed from the point of closest approach.
  int i_min = 0;
  for (int i = 1; i < traj.size(); ++i)
    if (traj.q(i).norm() < traj.q(i_min).norm()) i_min = i;
  const double tau2 = flow.radius_crossing(traj, traj.time(i_min), traj.t_end(), r_split);

  // Quadratures accumulate from t_start in both directions, so values on the
  // backward leg carry the sign of the reversed orientation.
  const double qb_shell = quad_component(flow, back, tau1, 1);
  const double qb_lagr = quad_component(flow, back, tau1, 2);
  const double qf_shell = quad_component(flow, traj, tau2, 1);
  const double qf_lagr = quad_component(flow, traj, tau2, 2);

  ActionRecord rec;
  rec.s_choice = tau1;
  rec.t0 = tau2 - tau1;
  rec.phi_minus_part = 2.0 * sys.lambda * tau1 + tail_in + qb_shell;
  rec.lagrangian_part = -qb_lagr + qf_lagr;
  rec.phi_plus_part =
      2.0 * sys.lambda * tau2 + pairing - (quad_full - qf_shell + tail_out);
  rec.S = rec.phi_minus_part + rec.lagrangian_part - rec.phi_plus_part +
          sys.lambda * rec.t0;
  rec.alt_value = tail_in + quad_full + tail_out - pairing;
  rec.consistency = std::abs(rec.S - rec.alt_value);
  return rec;
}

ActionRecord action(const FlowIntegrator& flow, const TrajectorySolution& sol,
                    const Vec& theta, const ActionOptions& opt) {
  if (sol.degenerate)
    throw DegenerateEndpointError(
        "action: degenerate solution (direction-map determinant vanishes)");
  return action(flow, sol.shot, theta, opt);
}

ActionGradients action_gradients(const FlowIntegrator& flow, const Vec& omega,
                                 const Vec& theta, const TrajectorySolution& sol,
                                 double fd_step, const SolveOptions& opt_in) {
  const auto& sys = flow.system();
  const int n = sys.dimension;
  const double speed = std::sqrt(2.0 * sys.lambda);
  if (fd_step <= 0.0 || fd_step > 0.1)
    throw DomainError("action_gradients: fd_step must lie in (0, 0.1]");

  SolveOptions opt = opt_in;
  opt.grid_seeding = false;

  // Continue the branch to the perturbed direction pair by warm-starting the
  // boundary solver at the central solution's impact parameter.
  auto branch_value = [&](const Vec& om, const Vec& th) -> double {
    SolveOptions o = opt;
    o.extra_seeds = {Vec(orthonormal_frame(om).transpose() * sol.z)};
    const auto sols = find_all(flow, om, th, o);
    const TrajectorySolution* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& s : sols) {
      const double d = (s.z - sol.z).norm();
      if (d < best_dist) {
        best_dist = d;
        best = &s;
      }
    }
    if (!best || best_dist > 0.05 * (1.0 + sol.z.norm()))
      throw RegionError("action_gradients: branch jump across the difference stencil");
    return action_value(flow, best->shot, th);
  };

  // Central differences along geodesic perturbations of the direction, with
  // one Richardson extrapolation in the step.
  auto deriv = [&](const auto& value_at) {
    auto central = [&](double h) { return (value_at(h) - value_at(-h)) / (2.0 * h); };
    const double d1 = central(fd_step);
    const double d2 = central(0.5 * fd_step);
    return (4.0 * d2 - d1) / 3.0;
  };

  const Mat frame_om = orthonormal_frame(omega);
  const Mat frame_th = orthonormal_frame(theta);

  ActionGradients g;
  g.d_omega = Vec(n - 1);
  g.d_theta = Vec(n - 1);
  for (int k = 0; k < n - 1; ++k) {
    const Vec e = frame_om.col(k);
    g.d_omega[k] = deriv([&](double h) {
      const Vec om = std::cos(h) * omega + std::sin(h) * e;
      return branch_value(om, theta);
    });
  }
  for (int k = 0; k < n - 1; ++k) {
    const Vec e = frame_th.col(k);
    g.d_theta[k] = deriv([&](double h) {
      const Vec th = std::cos(h) * theta + std::sin(h) * e;
      return branch_value(omega, th);
    });
  }

  g.expected_d_omega = speed * sol.z_coords;
  g.expected_d_theta = -speed * sol.w_coords;
  const double scale = std::max(
      {g.expected_d_omega.lpNorm<Eigen::Infinity>(),
       g.expected_d_theta.lpNorm<Eigen::Infinity>(), 1e-12});
  g.mismatch = std::max((g.d_omega - g.expected_d_omega).lpNorm<Eigen::Infinity>(),
                        (g.d_theta - g.expected_d_theta).lpNorm<Eigen::Infinity>()) /
               scale;
  return g;
}

bool in_region(int sign, const PhaseRegion& region, const Vec& x, const Vec& xi) {
  const double r = x.norm();
  const double m = xi.norm();
  if (r <= region.R) return false;
  if (m <= 1.0 / region.d || m >= region.d) return false;
  const double c = x.dot(xi) / (r * m);
  return sign > 0 ? c >= region.sigma : c <= -region.sigma;
}

WkbPhaseValue wkb_phase(const FlowIntegrator& flow, int sign, const Vec& x,
                        const Vec& xi, const PhaseRegion& region) {
  const auto& sys = flow.system();
  const auto& pot = sys.potential;
  const int n = sys.dimension;
  if (sign != 1 && sign != -1)
    throw DomainError("wkb_phase: sign must be +1 or -1");
  if (!x.allFinite() || !xi.allFinite() || x.size() != n || xi.size() != n)
    throw DomainError("wkb_phase: non-finite or mis-sized query point");
  if (!in_region(sign, region, x, xi))
    throw RegionError("wkb_phase: (x, xi) outside the configured region");

  const double s0_sq = xi.squaredNorm() - 2.0 * pot.eval(x);
  if (s0_sq <= 0.0)
    throw RegionError("wkb_phase: energy shell not attained at x");
  const double s0 = std::sqrt(s0_sq);
  const Vec xi_hat = xi.normalized();
  const Mat fr = orthonormal_frame(xi_hat);

  const double rho = pot.rho();
  const double r1 = std::max(extraction_radius(sys), 1.2 * x.norm());
  const double r2 = 2.0 * r1;
  const double stop_radius = std::max(1.05 * r2, flow.certificate_radius());
  const double horizon = 3.0 * (2.0 * stop_radius / s0) + 100.0;

  // The characteristic leg is always integrated forward in time; the
  // incoming phase uses the time-reversed trajectory (momentum negated),
  // whose outgoing direction must match -xi_hat.
  const double orient = sign > 0 ? 1.0 : -1.0;
  struct Leg {
    Trajectory traj{2};
    AsymptoticDatum datum;
  };
  auto run_leg = [&](const Vec& u) -> Leg {
    Leg leg;
    bool reached = false;
    auto stop = [&](double, const Vec& q, const Vec& p) {
      return q.norm() > stop_radius && q.dot(p) > 0.0;
    };
    leg.traj = flow.integrate_until(x, orient * s0 * u, 0.0, +1, stop, horizon, &reached);
    if (!reached)
      throw RegionError("wkb_phase: characteristic did not escape within the horizon");
    leg.datum = extract_outgoing(flow, leg.traj, r1, r2, rho);
    return leg;
  };
  auto residual = [&](const Leg& leg) -> Vec {
    return fr.transpose() * (orient * leg.datum.xi_inf);
  };

  // Newton on the momentum direction at x, finite-difference Jacobian in the
  // chart of the current iterate.
  Vec u = xi_hat;
  Leg leg = run_leg(u);
  const double dir_tol = 1e-10;
  for (int it = 0; it < 30; ++it) {
    const Vec F = residual(leg);
    const double fn = F.norm();
    if (fn <= dir_tol && orient * leg.datum.xi_inf.dot(xi_hat) > 0.0) break;
    const Mat fu = orthonormal_frame(u);
    const double delta = 1e-6;
    Mat J(n - 1, n - 1);
    for (int j = 0; j < n - 1; ++j) {
      const Vec up = (u + delta * fu.col(j)).normalized();
      J.col(j) = (residual(run_leg(up)) - F) / delta;
    }
    const Vec step = J.fullPivLu().solve(-F);
    if (!step.allFinite())
      throw RegionError("wkb_phase: direction update failed");
    double factor = 1.0;
    bool improved = false;
    for (int half = 0; half < 12; ++half) {
      const Vec un = (u + factor * fu * step).normalized();
      Leg trial = run_leg(un);
      if (residual(trial).norm() < fn) {
        u = un;
        leg = std::move(trial);
        improved = true;
        break;
      }
      factor *= 0.5;
    }
    if (!improved) break;
  }
  const Vec F_final = residual(leg);
  if (F_final.norm() > 1e-8 || orient * leg.datum.xi_inf.dot(xi_hat) <= 0.0)
    throw RegionError("wkb_phase: no characteristic with the required asymptote");

  const Vec c = leg.datum.x_inf;
  const double quad = leg.traj.quad_shell(leg.traj.size() - 1);
  const double tail = outgoing_tail(pot, xi.norm() * leg.datum.xi_inf, c,
                                    leg.traj.t_end(), 1e-12);

  WkbPhaseValue out;
  out.grad_x = s0 * u; // momentum of the characteristic at x
  out.phi = c.dot(xi) - sign * (quad + tail);
  out.bvp_residual = F_final.norm() + leg.datum.extraction_error;

  // Leading amplitude: Jacobi fields seeded at the asymptotic end with unit
  // transverse offsets and zero momentum variation, transported back to x.
  const Mat m_end = leg.traj.variational(leg.traj.size() - 1);
  Mat d_far = Mat::Zero(2 * n, n - 1);
  d_far.topRows(n) = orthonormal_frame(leg.datum.xi_inf);
  const Mat d_at_x = m_end.fullPivLu().solve(d_far);
  Mat a(n, n);
  a.leftCols(n - 1) = d_at_x.topRows(n);
  a.col(n - 1) = out.grad_x;
  const double det = std::abs(a.determinant());
  if (det < 1e-12)
    throw DegenerateEndpointError("wkb_phase: transport amplitude singular at x");
  out.a0 = std::pow(det / xi.norm(), -0.5);
  return out;
}

} // namespace scatrel
