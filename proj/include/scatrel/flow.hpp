// Hamiltonian flow of p(x,xi) = |xi|^2/2 + V(x), its variational flow, and
// trapped/non-trapped classification.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "scatrel/potential.hpp"

namespace scatrel {

struct Tolerances {
  double rel = 1e-10;
  double abs = 1e-12;
  double energy_budget = 1e-9;
};

struct HamiltonianSystem {
  PotentialModel potential;
  double lambda = 0.5;
  int dimension = 2;

  double energy(const Vec& q, const Vec& p) const {
    return 0.5 * p.squaredNorm() + potential.eval(q);
  }
  // Momentum magnitude on the energy shell at position q (throws if the
  // shell is not attained there).
  double shell_speed(const Vec& q) const;
  // lambda is attained somewhere and |grad p| > 0 on sampled shell points.
  void validate() const;
};

// Time-sampled augmented flow: (q, p), the 2n x 2n variational matrix M with
// M(t0) = I, and three running quadratures along the trajectory:
//   raw   = integral of (|p|^2/2 - V - lambda) dt
//   shell = integral of (-2 V) dt
//   lagr  = integral of (|p|^2/2 - V) dt
// Samples sit at the accepted steps of the adaptive integrator.
class Trajectory {
public:
  Trajectory(int dimension) : dim_(dimension) {}

  int dimension() const { return dim_; }
  int size() const { return static_cast<int>(times_.size()); }
  double time(int i) const { return times_[i]; }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  bool forward() const { return times_.back() >= times_.front(); }

  Vec q(int i) const { return states_[i].segment(0, dim_); }
  Vec p(int i) const { return states_[i].segment(dim_, dim_); }
  Mat variational(int i) const;
  double quad_raw(int i) const { return states_[i][2 * dim_ + 4 * dim_ * dim_]; }
  double quad_shell(int i) const { return states_[i][2 * dim_ + 4 * dim_ * dim_ + 1]; }
  double quad_lagr(int i) const { return states_[i][2 * dim_ + 4 * dim_ * dim_ + 2]; }
  const Vec& raw_state(int i) const { return states_[i]; }

  double energy_drift() const { return energy_drift_; }

  // Index of the last sample with time <= t (forward) or >= t (backward).
  int bracket_index(double t) const;

  static Vec pack(const Vec& q, const Vec& p);
  static Vec unpack_q(const Vec& s, int n) { return s.segment(0, n); }
  static Vec unpack_p(const Vec& s, int n) { return s.segment(n, n); }
  static Mat unpack_M(const Vec& s, int n);

private:
  friend class FlowIntegrator;
  int dim_;
  std::vector<double> times_;
  std::vector<Vec> states_;
  double energy_drift_ = 0.0;
};

enum class TrajectoryClass { NonTrapped, Trapped, Undecided };

struct Classification {
  TrajectoryClass status = TrajectoryClass::Undecided;
  double t_escape = 0.0;  // first time |q| exceeds r for good, when non-trapped
  double cert_radius = 0.0;
};

class FlowIntegrator {
public:
  FlowIntegrator(const HamiltonianSystem& system, Tolerances tol = {});

  const HamiltonianSystem& system() const { return sys_; }
  const Tolerances& tolerances() const { return tol_; }

  // Integrate from (q0, p0) at t0 to t1 (t1 < t0 integrates backward).
  Trajectory integrate(const Vec& q0, const Vec& p0, double t0, double t1) const;

  // Integrate forward in |t| until stop(t, q, p) holds at a step end or
  // |t - t0| exceeds horizon.  `reached` reports whether stop fired.
  Trajectory integrate_until(const Vec& q0, const Vec& p0, double t0, int direction,
                             const std::function<bool(double, const Vec&, const Vec&)>& stop,
                             double horizon, bool* reached = nullptr) const;

  // Augmented state at an arbitrary time inside the trajectory's span,
  // re-integrated from the nearest stored sample.
  Vec state_at(const Trajectory& traj, double t) const;

  // First time in [t_lo, t_hi] (sample times of traj) with |q(t)| = radius;
  // requires a sign change of |q| - radius across the bracket.
  double radius_crossing(const Trajectory& traj, double t_lo, double t_hi,
                         double radius) const;

  // Radius beyond which the outward certificate d^2(|q|^2/2)/dt^2 > 0 holds
  // on the energy shell, so an outgoing trajectory cannot turn back.
  double certificate_radius() const;

  Classification classify(const Vec& q0, const Vec& p0, double r, double t_max) const;

  // Right-hand side of the augmented system (public for tests).
  void derivative(const Vec& state, Vec& dstate, double t) const;

private:
  Trajectory run(const Vec& q0, const Vec& p0, double t0, int direction,
                 const std::function<bool(double, const Vec&, const Vec&)>& stop,
                 double horizon, bool* reached) const;

  HamiltonianSystem sys_;
  Tolerances tol_;
};

} // namespace scatrel
