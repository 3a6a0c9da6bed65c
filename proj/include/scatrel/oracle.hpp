// Exact quantum scattering amplitude for radial potentials (n = 2 and 3) by
// partial-wave phase shifts: ground truth for the semiclassical synthesis.
#pragma once

#include <complex>
#include <vector>

#include "scatrel/potential.hpp"

namespace scatrel {

struct PartialWaveSolution {
  double lambda = 0.5;
  double h = 0.1;
  double k = 0.0; // sqrt(2 lambda) / h
  int dimension = 2;
  int lmax = 0;
  std::vector<double> phase_shifts; // delta_l, l = 0..lmax
  double tail_estimate = 0.0;       // bound on the neglected shifts
  double match_radius = 0.0;
};

// Radial Schroedinger integration of each angular mode, matched to the free
// Bessel pair where the potential is negligible (1e-14 of lambda).  With
// lmax < 0 the mode count extends automatically until the shifts fall below
// the tail threshold.  match_radius = 0 selects the radius automatically;
// throws IntegrationError when the required radius exceeds the budget.
PartialWaveSolution phase_shifts(const PotentialModel& model, double lambda,
                                 double h, int lmax = -1, double match_radius = 0.0);

// First Born approximation of the shifts (independent 1-D quadratures of V
// against squared Bessel functions).
std::vector<double> born_phase_shifts(const PotentialModel& model, double lambda,
                                      double h, int lmax);

// Partial-wave series at the given scattering angle (angle between the
// incoming and outgoing directions).
std::complex<double> oracle_amplitude(const PartialWaveSolution& sol, double angle);
std::complex<double> oracle_amplitude(const PartialWaveSolution& sol, const Vec& omega,
                                      const Vec& theta);

// Unitarity proxy: the total cross-section from the shifts against both the
// angular quadrature of |f|^2 and the forward-amplitude relation.  `defect`
// includes the series-truncation term; `tail_flagged` reports when that term
// dominates the quadrature discrepancy.
struct OpticalReport {
  double sigma_shifts = 0.0;
  double sigma_integral = 0.0;
  double sigma_forward = 0.0;
  double quadrature_defect = 0.0; // relative
  double tail_term = 0.0;         // relative
  double defect = 0.0;            // quadrature_defect + tail_term
  bool tail_flagged = false;
};

OpticalReport optical_check(const PartialWaveSolution& sol);

} // namespace scatrel
