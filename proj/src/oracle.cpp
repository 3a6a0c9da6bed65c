#include "scatrel/oracle.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <future>
#include <thread>

#include "scatrel/errors.hpp"
#include "scatrel/parallel.hpp"
#include "scatrel/quadrature.hpp"

namespace scatrel {

namespace {

using RadialState = std::array<double, 2>; // (u, u')

// Phase shift of one angular mode: integrate the regular solution of
//   u'' = (cf / r^2 + 2 V(r)/h^2 - k^2) u
// outward and match the log-derivative to the free Bessel pair at r = R.
// cf = m^2 - 1/4 (n = 2) or l(l+1) (n = 3); the regular solution grows like
// r^s with s = m + 1/2 resp. l + 1.
double mode_shift(const PotentialModel& model, double h, double k, double cf,
                  double s, int ell, int dimension, double R) {
  namespace odeint = boost::numeric::odeint;
  const double k2 = k * k;
  const double inv_h2 = 1.0 / (h * h);
  auto rhs = [&](const RadialState& y, RadialState& dy, double r) {
    dy[0] = y[1];
    dy[1] = (cf / (r * r) + 2.0 * model.radial_value(r) * inv_h2 - k2) * y[0];
  };

  // Start deep in the centrifugal region with the power-law ansatz.  For
  // large s the start radius is capped by representability; the admixture of
  // the subdominant solution it introduces dies across the forbidden region.
  const double r0 = std::max(1e-8, std::exp(std::log(1e-250) / s));
  RadialState y{std::pow(r0, s), s * std::pow(r0, s - 1.0)};

  // Geometric chunking bounds the exponential growth per chunk so the state
  // can be rescaled before it overflows (only the ray of (u, u') matters).
  auto stepper = odeint::make_controlled(1e-300, 1e-12,
                                         odeint::runge_kutta_dopri5<RadialState>());
  const double lg = std::min(0.5, 50.0 / s);
  double ra = r0;
  while (ra < R) {
    const double rb = std::min(R, ra * std::exp(lg));
    odeint::integrate_adaptive(stepper, rhs, y, ra, rb, (rb - ra) / 64.0);
    const double m = std::max(std::abs(y[0]), std::abs(y[1]));
    if (!(m > 0.0) || !std::isfinite(m))
      throw IntegrationError("oracle: radial mode integration failed");
    if (m > 1e50) {
      y[0] /= m;
      y[1] /= m;
    }
    ra = rb;
  }

  const double x = k * R;
  double F, dF, G, dG;
  if (dimension == 2) {
    const double sq = std::sqrt(R);
    F = sq * boost::math::cyl_bessel_j(ell, x);
    dF = 0.5 / sq * boost::math::cyl_bessel_j(ell, x) +
         sq * k * boost::math::cyl_bessel_j_prime(ell, x);
    G = sq * boost::math::cyl_neumann(ell, x);
    dG = 0.5 / sq * boost::math::cyl_neumann(ell, x) +
         sq * k * boost::math::cyl_neumann_prime(ell, x);
  } else {
    F = R * boost::math::sph_bessel(ell, x);
    dF = boost::math::sph_bessel(ell, x) + R * k * boost::math::sph_bessel_prime(ell, x);
    G = R * boost::math::sph_neumann(ell, x);
    dG = boost::math::sph_neumann(ell, x) + R * k * boost::math::sph_neumann_prime(ell, x);
  }

  const double num = y[1] * F - y[0] * dF;
  const double den = y[1] * G - y[0] * dG;
  double delta = std::atan2(num, den);
  // The shift only matters modulo pi; report the principal branch.
  delta -= M_PI * std::round(delta / M_PI);
  return delta;
}

double centrifugal(int ell, int dimension) {
  return dimension == 2 ? ell * ell - 0.25 : double(ell) * (ell + 1);
}

double growth_exponent(int ell, int dimension) {
  return dimension == 2 ? ell + 0.5 : ell + 1.0;
}

} // namespace

PartialWaveSolution phase_shifts(const PotentialModel& model, double lambda, double h,
                                 int lmax, double match_radius) {
  if (lambda <= 0.0 || h <= 0.0)
    throw DomainError("phase_shifts: lambda and h must be positive");
  const int n = model.dimension();
  if (n != 2 && n != 3)
    throw DomainError("phase_shifts: partial waves implemented for n = 2 and 3");

  PartialWaveSolution sol;
  sol.lambda = lambda;
  sol.h = h;
  sol.k = std::sqrt(2.0 * lambda) / h;
  sol.dimension = n;
  sol.match_radius =
      match_radius > 0.0 ? match_radius : model.negligible_radius(1e-14 * lambda);
  if (sol.match_radius > 500.0)
    throw IntegrationError("oracle: matching radius exceeds the integration budget");

  auto shift = [&](int ell) {
    return mode_shift(model, h, sol.k, centrifugal(ell, n),
                      growth_exponent(ell, n), ell, n, sol.match_radius);
  };
  auto compute_block = [&](int begin, int count) {
    std::vector<std::future<double>> futs;
    futs.reserve(count);
    for (int j = 0; j < count; ++j)
      futs.push_back(std::async(std::launch::async, shift, begin + j));
    for (auto& f : futs) sol.phase_shifts.push_back(f.get());
  };

  const double tail_tol = 1e-12;
  const int block = std::min(8, worker_threads());
  if (lmax >= 0) {
    for (int begin = 0; begin <= lmax; begin += block)
      compute_block(begin, std::min(block, lmax + 1 - begin));
  } else {
    // Extend until three consecutive shifts beyond the classical mode count
    // fall below the tail threshold.
    const int min_modes =
        static_cast<int>(sol.k * std::max(1.0, model.interaction_scale())) + 4;
    int consecutive = 0;
    while (consecutive < 3) {
      const int begin = static_cast<int>(sol.phase_shifts.size());
      if (begin > 10000)
        throw IntegrationError("oracle: partial-wave series did not converge");
      compute_block(begin, block);
      for (int j = begin; j < static_cast<int>(sol.phase_shifts.size()); ++j) {
        if (std::abs(sol.phase_shifts[j]) < tail_tol && j >= min_modes)
          ++consecutive;
        else
          consecutive = 0;
        if (consecutive >= 3) {
          sol.phase_shifts.resize(j + 1);
          break;
        }
      }
    }
  }
  sol.lmax = static_cast<int>(sol.phase_shifts.size()) - 1;
  const int tail_from = std::max(0, sol.lmax - 2);
  for (int j = tail_from; j <= sol.lmax; ++j)
    sol.tail_estimate = std::max(sol.tail_estimate, std::abs(sol.phase_shifts[j]));
  return sol;
}

std::vector<double> born_phase_shifts(const PotentialModel& model, double lambda,
                                      double h, int lmax) {
  if (lambda <= 0.0 || h <= 0.0)
    throw DomainError("born_phase_shifts: lambda and h must be positive");
  const int n = model.dimension();
  const double k = std::sqrt(2.0 * lambda) / h;
  const double R = model.negligible_radius(1e-14 * lambda);
  std::vector<double> shifts;
  shifts.reserve(lmax + 1);
  for (int ell = 0; ell <= lmax; ++ell) {
    if (n == 2) {
      auto f = [&](double r) {
        const double j = boost::math::cyl_bessel_j(ell, k * r);
        return 2.0 * model.radial_value(r) / (h * h) * j * j * r;
      };
      shifts.push_back(-0.5 * M_PI * adaptive_simpson(f, 1e-12, R, 1e-14, 32));
    } else {
      auto f = [&](double r) {
        const double j = boost::math::sph_bessel(ell, k * r);
        return 2.0 * model.radial_value(r) / (h * h) * j * j * r * r;
      };
      shifts.push_back(-k * adaptive_simpson(f, 1e-12, R, 1e-14, 32));
    }
  }
  return shifts;
}

std::complex<double> oracle_amplitude(const PartialWaveSolution& sol, double angle) {
  const std::complex<double> i(0.0, 1.0);
  std::complex<double> sum = 0.0;
  if (sol.dimension == 2) {
    for (int m = 0; m <= sol.lmax; ++m) {
      const double d = sol.phase_shifts[m];
      const double eps = m == 0 ? 1.0 : 2.0;
      sum += eps * std::exp(i * d) * std::sin(d) * std::cos(m * angle);
    }
    return std::exp(-i * (M_PI / 4.0)) * std::sqrt(2.0 / (M_PI * sol.k)) * sum;
  }
  const double c = std::cos(angle);
  for (int l = 0; l <= sol.lmax; ++l) {
    const double d = sol.phase_shifts[l];
    sum += (2.0 * l + 1.0) * std::exp(i * d) * std::sin(d) *
           boost::math::legendre_p(l, c);
  }
  return sum / sol.k;
}

std::complex<double> oracle_amplitude(const PartialWaveSolution& sol, const Vec& omega,
                                      const Vec& theta) {
  const double c = std::clamp(omega.normalized().dot(theta.normalized()), -1.0, 1.0);
  return oracle_amplitude(sol, std::acos(c));
}

OpticalReport optical_check(const PartialWaveSolution& sol) {
  OpticalReport rep;
  const double k = sol.k;
  const std::complex<double> i(0.0, 1.0);

  double sum_sq = 0.0;
  for (int l = 0; l <= sol.lmax; ++l) {
    const double s2 = std::sin(sol.phase_shifts[l]) * std::sin(sol.phase_shifts[l]);
    if (sol.dimension == 2)
      sum_sq += (l == 0 ? 1.0 : 2.0) * s2;
    else
      sum_sq += (2.0 * l + 1.0) * s2;
  }
  rep.sigma_shifts = sol.dimension == 2 ? 4.0 / k * sum_sq : 4.0 * M_PI / (k * k) * sum_sq;

  const double qtol = 1e-13 * (1.0 + std::abs(rep.sigma_shifts));
  if (sol.dimension == 2) {
    rep.sigma_integral = adaptive_simpson(
        [&](double a) { return std::norm(oracle_amplitude(sol, a)); }, 0.0,
        2.0 * M_PI, qtol, 24);
    rep.sigma_forward = std::sqrt(8.0 * M_PI / k) *
                        std::imag(std::exp(i * (M_PI / 4.0)) * oracle_amplitude(sol, 0.0));
  } else {
    rep.sigma_integral =
        2.0 * M_PI *
        adaptive_simpson(
            [&](double a) { return std::norm(oracle_amplitude(sol, a)) * std::sin(a); },
            0.0, M_PI, qtol, 24);
    rep.sigma_forward = 4.0 * M_PI / k * std::imag(oracle_amplitude(sol, 0.0));
  }

  // Absolute floor keeps the relative defect meaningful for near-zero
  // cross-sections (free potential).
  const double denom = std::abs(rep.sigma_shifts) + 1e-12;
  rep.quadrature_defect = std::max(std::abs(rep.sigma_integral - rep.sigma_shifts),
                                   std::abs(rep.sigma_forward - rep.sigma_shifts)) /
                          denom;
  // Crude bound on the cross-section carried by the truncated modes.
  const double per_mode = sol.dimension == 2 ? 8.0 / k : 8.0 * M_PI / (k * k) * sol.lmax;
  rep.tail_term = per_mode * (sol.lmax + 1) * sol.tail_estimate * sol.tail_estimate / denom;
  rep.defect = rep.quadrature_defect + rep.tail_term;
  rep.tail_flagged = rep.tail_term > std::max(rep.quadrature_defect, 1e-12);
  return rep;
}

} // namespace scatrel
