#include "scatrel/bvsolve.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "scatrel/errors.hpp"

namespace scatrel {

namespace {

std::vector<Vec> seed_grid(int m, double radius, double density) {
  // Uniform grid over the ball of `radius` in R^m, `density` seeds per unit
  // length along each axis.
  std::vector<Vec> seeds;
  const double h = 1.0 / std::max(density, 0.25);
  const int k = static_cast<int>(std::ceil(radius / h));
  if (m == 1) {
    for (int i = -k; i <= k; ++i) {
      Vec s(1);
      s << i * h;
      seeds.push_back(s);
    }
    return seeds;
  }
  if (m == 2) {
    for (int i = -k; i <= k; ++i)
      for (int j = -k; j <= k; ++j) {
        Vec s(2);
        s << i * h, j * h;
        if (s.norm() <= radius + 1e-12) seeds.push_back(s);
      }
    return seeds;
  }
  throw DomainError("find_all: seeding implemented for dimensions 2 and 3 only");
}

} // namespace

std::vector<TrajectorySolution> find_all(const FlowIntegrator& flow, const Vec& omega,
                                         const Vec& theta, const SolveOptions& opt) {
  const auto& sys = flow.system();
  const int n = sys.dimension;
  if ((theta - omega).norm() < 1e-8)
    throw DomainError("find_all: outgoing direction must differ from the incoming one");
  if (std::abs(theta.norm() - 1.0) > 1e-10)
    throw DomainError("find_all: theta must be a unit vector");

  const double radius = opt.search_radius > 0.0
                            ? opt.search_radius
                            : 4.0 * std::max(1.0, sys.potential.interaction_scale());
  std::vector<Vec> seeds = opt.extra_seeds;
  if (opt.grid_seeding) {
    auto grid = seed_grid(n - 1, radius, opt.grid_density);
    seeds.insert(seeds.end(), grid.begin(), grid.end());
  }

  const Mat frame_theta = orthonormal_frame(theta);

  struct Root {
    Vec zc;
    double condition;
    ShotResult shot;
  };
  std::vector<Root> roots;
  int skipped = 0;

  // Iterates stay inside the seeded ball: outside it the direction map
  // flattens toward the identity and Newton steps grow without bound.
  const double z_bound = radius + 2.0;

  for (const Vec& seed : seeds) {
    Vec zc = seed;
    bool converged = false;
    ShotResult shot;
    try {
      shot = shoot_coords(flow, omega, zc, opt.shot);
      for (int it = 0; it < opt.max_newton_iter; ++it) {
        const Vec F = frame_theta.transpose() * shot.datum.xi_inf;
        const double fn = F.norm();
        const bool resid_ok = fn <= opt.tol && shot.datum.xi_inf.dot(theta) > 0.0;
        const Mat J = frame_theta.transpose() * shot.dxi_dz_ambient;
        const Vec step = J.fullPivLu().solve(-F);
        if (!step.allFinite()) {
          converged = resid_ok;
          break;
        }
        // Polish past the residual tolerance until the iterate itself has
        // settled, so roots from different seeds deduplicate cleanly.
        if (resid_ok && step.norm() <= opt.tol) {
          converged = true;
          break;
        }
        // Damping: halve the step until the residual decreases.
        double factor = 1.0;
        bool improved = false;
        for (int half = 0; half < 16; ++half) {
          const Vec zc_new = zc + factor * step;
          if (zc_new.norm() > z_bound) {
            factor *= 0.5;
            continue;
          }
          try {
            ShotResult trial = shoot_coords(flow, omega, zc_new, opt.shot);
            if ((frame_theta.transpose() * trial.datum.xi_inf).norm() < fn) {
              zc = zc_new;
              shot = std::move(trial);
              improved = true;
              break;
            }
          } catch (const NoAsymptoticsError&) {
            // stepped into a trapped pocket; shrink
          }
          factor *= 0.5;
        }
        if (!improved) {
          converged = resid_ok;
          break;
        }
      }
    } catch (const NoAsymptoticsError&) {
      ++skipped;
      continue;
    }
    if (!converged) continue;
    const double condition = (shot.datum.xi_inf - theta).norm();
    if (condition > opt.tol) continue;

    // Deduplicate: keep the smaller-residual representative.
    bool merged = false;
    for (auto& r : roots) {
      if ((r.zc - zc).norm() <= 10.0 * opt.tol) {
        if (condition < r.condition) r = {zc, condition, std::move(shot)};
        merged = true;
        break;
      }
    }
    if (!merged) roots.push_back({zc, condition, std::move(shot)});
  }

  if (skipped > 0)
    std::cerr << "find_all: skipped " << skipped
              << " seed(s) with no outgoing asymptotics\n";

  std::sort(roots.begin(), roots.end(),
            [](const Root& a, const Root& b) { return a.zc.norm() < b.zc.norm(); });

  std::vector<TrajectorySolution> out;
  for (auto& r : roots) {
    TrajectorySolution s;
    s.index = static_cast<int>(out.size());
    s.z_coords = r.zc;
    s.z = r.shot.prep.frame * r.zc;
    const Vec& xinf = r.shot.datum.x_inf;
    s.w_coords = frame_theta.transpose() * xinf;
    s.w = xinf - xinf.dot(theta) * theta;
    s.sigma_hat = r.shot.jac_chart.determinant();
    s.degenerate = std::abs(s.sigma_hat) < opt.degenerate_threshold;
    s.condition = r.condition;
    s.shot = std::move(r.shot);
    if (!s.degenerate) s.maslov = maslov_index(flow, s.shot);
    out.push_back(std::move(s));
  }
  return out;
}

int maslov_index(const FlowIntegrator& flow, const ShotResult& shot) {
  const int n = flow.system().dimension;
  const auto& traj = shot.traj;
  Mat d0(2 * n, n - 1);
  d0.topRows(n) = shot.prep.dq0_dz;
  d0.bottomRows(n) = shot.prep.dp0_dz;

  auto det_at = [&](const Vec& state) {
    const Mat M = Trajectory::unpack_M(state, n);
    const Mat dq = (M * d0).topRows(n);
    Mat A(n, n);
    A.leftCols(n - 1) = dq;
    A.col(n - 1) = Trajectory::unpack_p(state, n);
    return A.determinant();
  };

  // Sample at the accepted steps plus a subdivision fine enough that a
  // crossing within one step would have to be a double one.
  const int target = 2000;
  const int per_step = std::max(1, target / std::max(1, traj.size() - 1));
  std::vector<double> times;
  std::vector<double> dets;
  for (int i = 0; i + 1 < traj.size(); ++i) {
    for (int j = 0; j < per_step; ++j) {
      const double t = traj.time(i) +
                       (traj.time(i + 1) - traj.time(i)) * j / per_step;
      times.push_back(t);
      dets.push_back(det_at(j == 0 ? traj.raw_state(i) : flow.state_at(traj, t)));
    }
  }
  times.push_back(traj.time(traj.size() - 1));
  dets.push_back(det_at(traj.raw_state(traj.size() - 1)));

  double scale = 0.0;
  for (double d : dets) scale = std::max(scale, std::abs(d));
  if (scale == 0.0) throw DegenerateEndpointError("maslov_index: determinant vanishes identically");
  if (std::abs(dets.back()) < 1e-6 * scale)
    throw DegenerateEndpointError("maslov_index: conjugate point at the final time");

  int crossings = 0;
  for (size_t i = 0; i + 1 < dets.size(); ++i) {
    if (dets[i] == 0.0 || dets[i] * dets[i + 1] >= 0.0) continue;
    // Localize by bisection; a crossing that cannot be pinned down within the
    // bracket would indicate sampling noise rather than a zero.
    double lo = times[i], hi = times[i + 1];
    double flo = dets[i];
    for (int it = 0; it < 50 && hi - lo > 1e-12 * (1.0 + std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = det_at(flow.state_at(traj, mid));
      if (flo * fm <= 0.0)
        hi = mid;
      else {
        lo = mid;
        flo = fm;
      }
    }
    ++crossings;
  }
  return crossings;
}

NondegeneracyReport nondegeneracy_report(const std::vector<TrajectorySolution>& solutions,
                                         double threshold) {
  NondegeneracyReport rep;
  rep.threshold = threshold;
  rep.regular = true;
  for (const auto& s : solutions) {
    rep.min_abs_sigma = std::min(rep.min_abs_sigma, std::abs(s.sigma_hat));
    if (std::abs(s.sigma_hat) <= threshold) rep.regular = false;
  }
  return rep;
}

} // namespace scatrel
