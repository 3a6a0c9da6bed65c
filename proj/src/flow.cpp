#include "scatrel/flow.hpp"

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>
#include <cmath>

#include "scatrel/errors.hpp"

namespace scatrel {

namespace ode = boost::numeric::odeint;
using Stepper = ode::runge_kutta_dopri5<Vec, double, Vec, double, ode::vector_space_algebra>;

double HamiltonianSystem::shell_speed(const Vec& q) const {
  const double k2 = 2.0 * (lambda - potential.eval(q));
  if (k2 <= 0.0)
    throw DomainError("energy shell not attained at the requested position");
  return std::sqrt(k2);
}

void HamiltonianSystem::validate() const {
  if (lambda <= 0.0) throw DomainError("energy lambda must be positive");
  if (dimension < 2) throw DomainError("dimension must be >= 2");
  if (potential.dimension() != dimension)
    throw DomainError("potential dimension mismatch");
  // The shell is nonempty if lambda > V somewhere; check a radial scan.
  bool attained = false;
  const double r_max = std::max(4.0 * potential.interaction_scale(), 8.0);
  for (int i = 0; i <= 200; ++i) {
    const double r = r_max * i / 200.0;
    const double v = potential.radial_value(r);
    if (2.0 * (lambda - v) > 0.0) attained = true;
    // Principal-type proxy: |grad p| = |(grad V, xi)| > 0 on the shell.
    if (2.0 * (lambda - v) >= 0.0 && 2.0 * (lambda - v) < 1e-14 &&
        std::abs(potential.radial_derivative(r)) < 1e-14)
      throw DomainError("degenerate shell point: xi = 0 and grad V = 0");
  }
  if (!attained) throw DomainError("energy shell is empty for this lambda");
}

Mat Trajectory::variational(int i) const { return unpack_M(states_[i], dim_); }

Mat Trajectory::unpack_M(const Vec& s, int n) {
  return Eigen::Map<const Mat>(s.data() + 2 * n, 2 * n, 2 * n);
}

Vec Trajectory::pack(const Vec& q, const Vec& p) {
  const int n = static_cast<int>(q.size());
  Vec s = Vec::Zero(2 * n + 4 * n * n + 3);
  s.segment(0, n) = q;
  s.segment(n, n) = p;
  Eigen::Map<Mat>(s.data() + 2 * n, 2 * n, 2 * n).setIdentity();
  return s;
}

int Trajectory::bracket_index(double t) const {
  const bool fwd = forward();
  int lo = 0, hi = size() - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    const bool before = fwd ? (times_[mid] <= t) : (times_[mid] >= t);
    (before ? lo : hi) = mid;
  }
  return lo;
}

FlowIntegrator::FlowIntegrator(const HamiltonianSystem& system, Tolerances tol)
    : sys_(system), tol_(tol) {
  sys_.validate();
}

void FlowIntegrator::derivative(const Vec& state, Vec& dstate, double /*t*/) const {
  const int n = sys_.dimension;
  const Vec q = state.segment(0, n);
  const Vec p = state.segment(n, n);
  const Vec gv = sys_.potential.grad(q);
  const double v = sys_.potential.radial_value(q.norm());

  dstate.segment(0, n) = p;
  dstate.segment(n, n) = -gv;

  // Variational flow M' = A M with A = [[0, I], [-Hess V, 0]].
  const Mat hv = sys_.potential.hess(q);
  Eigen::Map<const Mat> M(state.data() + 2 * n, 2 * n, 2 * n);
  Eigen::Map<Mat> dM(dstate.data() + 2 * n, 2 * n, 2 * n);
  dM.topRows(n) = M.bottomRows(n);
  dM.bottomRows(n) = -hv * M.topRows(n);

  const int qoff = 2 * n + 4 * n * n;
  const double kin = 0.5 * p.squaredNorm();
  dstate[qoff] = kin - v - sys_.lambda;  // raw action integrand
  dstate[qoff + 1] = -2.0 * v;           // on-shell form
  dstate[qoff + 2] = kin - v;            // Lagrangian
}

Trajectory FlowIntegrator::run(const Vec& q0, const Vec& p0, double t0, int direction,
                               const std::function<bool(double, const Vec&, const Vec&)>& stop,
                               double horizon, bool* reached) const {
  if (!q0.allFinite() || !p0.allFinite())
    throw DomainError("integrate: non-finite initial state");
  const int n = sys_.dimension;
  auto rhs = [this](const Vec& s, Vec& ds, double t) { derivative(s, ds, t); };

  Trajectory traj(n);
  Vec s0 = Trajectory::pack(q0, p0);
  const double e0 = sys_.energy(q0, p0);

  auto stepper = ode::make_dense_output(tol_.abs, tol_.rel, Stepper());
  const double dt0 = direction * 1e-3;
  stepper.initialize(s0, t0, dt0);
  traj.times_.push_back(t0);
  traj.states_.push_back(s0);

  bool hit = false;
  const double t_limit = t0 + direction * horizon;
  long steps = 0;
  const long max_steps = 4000000;
  while (direction * (stepper.current_time() - t_limit) < 0.0) {
    if (++steps > max_steps)
      throw IntegrationError("integrate: step budget exhausted at t = " +
                             std::to_string(stepper.current_time()));
    if (std::abs(stepper.current_time_step()) < 1e-14 * (1.0 + std::abs(stepper.current_time())))
      throw IntegrationError("integrate: step-size underflow at t = " +
                             std::to_string(stepper.current_time()));
    // Do not step past the horizon.
    if (direction * (stepper.current_time() + stepper.current_time_step() - t_limit) > 0.0) {
      Vec s_end = stepper.current_state();
      ode::integrate_adaptive(ode::make_controlled(tol_.abs, tol_.rel, Stepper()),
                              rhs, s_end, stepper.current_time(), t_limit,
                              t_limit - stepper.current_time());
      traj.times_.push_back(t_limit);
      traj.states_.push_back(s_end);
      break;
    }
    stepper.do_step(rhs);
    traj.times_.push_back(stepper.current_time());
    traj.states_.push_back(stepper.current_state());
    const Vec& s = traj.states_.back();
    const double drift = std::abs(sys_.energy(s.segment(0, n), s.segment(n, n)) - e0);
    traj.energy_drift_ = std::max(traj.energy_drift_, drift);
    if (traj.energy_drift_ > 10.0 * tol_.energy_budget * (1.0 + std::abs(sys_.lambda)))
      throw IntegrationError("integrate: energy drift exceeded budget at t = " +
                             std::to_string(stepper.current_time()));
    if (stop && stop(stepper.current_time(), s.segment(0, n), s.segment(n, n))) {
      hit = true;
      break;
    }
  }
  if (reached) *reached = hit;
  return traj;
}

Trajectory FlowIntegrator::integrate(const Vec& q0, const Vec& p0, double t0,
                                     double t1) const {
  if (t1 == t0) throw DomainError("integrate: degenerate time span");
  const int direction = (t1 > t0) ? +1 : -1;
  return run(q0, p0, t0, direction, nullptr, std::abs(t1 - t0), nullptr);
}

Trajectory FlowIntegrator::integrate_until(
    const Vec& q0, const Vec& p0, double t0, int direction,
    const std::function<bool(double, const Vec&, const Vec&)>& stop, double horizon,
    bool* reached) const {
  return run(q0, p0, t0, direction, stop, horizon, reached);
}

Vec FlowIntegrator::state_at(const Trajectory& traj, double t) const {
  const bool fwd = traj.forward();
  const double lo = fwd ? traj.t_begin() : traj.t_end();
  const double hi = fwd ? traj.t_end() : traj.t_begin();
  if (t < lo - 1e-12 || t > hi + 1e-12)
    throw DomainError("state_at: time outside trajectory span");
  const int i = traj.bracket_index(t);
  Vec s = traj.raw_state(i);
  const double ti = traj.time(i);
  if (std::abs(t - ti) < 1e-14) return s;
  auto rhs = [this](const Vec& x, Vec& dx, double tt) { derivative(x, dx, tt); };
  ode::integrate_adaptive(ode::make_controlled(tol_.abs, tol_.rel, Stepper()), rhs, s,
                          ti, t, (t - ti));
  return s;
}

double FlowIntegrator::radius_crossing(const Trajectory& traj, double t_lo, double t_hi,
                                       double radius) const {
  const int n = sys_.dimension;
  auto f = [&](double t) {
    return state_at(traj, t).segment(0, n).norm() - radius;
  };
  double a = t_lo, b = t_hi, fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0)
    throw DomainError("radius_crossing: no sign change in bracket");
  for (int it = 0; it < 200 && std::abs(b - a) > 1e-13 * (1.0 + std::abs(a)); ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fa * fm <= 0.0) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
  }
  return 0.5 * (a + b);
}

double FlowIntegrator::certificate_radius() const {
  // Smallest grid radius R with 2(lambda - V(r)) - r |V'(r)| >= lambda/2
  // for all sampled r >= R.  Beyond R, d^2(|q|^2/2)/dt^2 = |p|^2 - <q, grad V>
  // stays positive on the shell, so an outgoing point keeps going out.
  const double r_end = std::max(sys_.potential.negligible_radius(sys_.lambda * 1e-6),
                                2.0 * sys_.potential.interaction_scale());
  const int ngrid = 2000;
  double r_cert = r_end;
  for (int i = ngrid; i >= 0; --i) {
    const double r = std::max(1.0, r_end * i / ngrid);
    const double margin = 2.0 * (sys_.lambda - sys_.potential.radial_value(r)) -
                          r * std::abs(sys_.potential.radial_derivative(r));
    if (margin < 0.5 * sys_.lambda) break;
    r_cert = r;
  }
  return std::max(r_cert, 1.0);
}

Classification FlowIntegrator::classify(const Vec& q0, const Vec& p0, double r,
                                        double t_max) const {
  if (r <= 0.0 || t_max <= 0.0) throw DomainError("classify: r > 0 and t_max > 0 required");
  const int n = sys_.dimension;
  const double r_cert = std::max(certificate_radius(), r);

  Classification result;
  result.cert_radius = r_cert;
  double t_escape = 0.0;
  bool any_trapped = false, any_undecided = false;

  for (const int dir : {+1, -1}) {
    auto stop = [&](double /*t*/, const Vec& q, const Vec& p) {
      return q.norm() > r_cert && dir * q.dot(p) > 0.0;
    };
    bool reached = false;
    const Trajectory traj = integrate_until(q0, p0, 0.0, dir, stop, t_max, &reached);
    if (!reached) {
      const double r_end = traj.q(traj.size() - 1).norm();
      if (r_end <= r_cert)
        any_trapped = true;
      else
        any_undecided = true;
      continue;
    }
    // Last sample inside radius r in this time direction.
    int last_inside = -1;
    for (int i = 0; i < traj.size(); ++i)
      if (traj.q(i).norm() <= r) last_inside = i;
    double T = 0.0;
    if (last_inside >= 0 && last_inside + 1 < traj.size())
      T = std::abs(radius_crossing(traj, traj.time(last_inside),
                                   traj.time(last_inside + 1), r));
    else if (last_inside >= 0)
      T = std::abs(traj.time(last_inside));
    t_escape = std::max(t_escape, T);
  }

  if (any_trapped)
    result.status = TrajectoryClass::Trapped;
  else if (any_undecided)
    result.status = TrajectoryClass::Undecided;
  else {
    result.status = TrajectoryClass::NonTrapped;
    result.t_escape = t_escape;
  }
  return result;
}

} // namespace scatrel
