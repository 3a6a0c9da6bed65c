#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "scatrel/errors.hpp"
#include "scatrel/geometry.hpp"
#include "scatrel/oracle.hpp"

using namespace scatrel;

TEST_CASE("zero potential: all phase shifts vanish") {
  for (int n : {2, 3}) {
    const auto sol = phase_shifts(PotentialModel::zero(n), 0.5, 0.1);
    for (double d : sol.phase_shifts) CHECK(std::abs(d) <= 1e-11);
    CHECK(std::abs(oracle_amplitude(sol, 0.7)) <= 1e-10);
    CHECK(optical_check(sol).defect <= 1e-10);
  }
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(phase_shifts(PotentialModel::zero(2), -1.0, 0.1), DomainError);
  CHECK_THROWS_AS(phase_shifts(PotentialModel::zero(2), 0.5, 0.0), DomainError);
}

TEST_CASE("weak coupling: shifts follow the Born quadrature quadratically") {
  for (int n : {2, 3}) {
    double previous = 0.0;
    for (const double amp : {1e-3, 1e-2}) {
      const auto model = PotentialModel::gaussian(amp, 1.0, n);
      const auto sol = phase_shifts(model, 0.5, 0.1);
      const auto born = born_phase_shifts(model, 0.5, 0.1, sol.lmax);
      double worst = 0.0, largest = 0.0;
      for (int l = 0; l <= sol.lmax; ++l) {
        worst = std::max(worst, std::abs(sol.phase_shifts[l] - born[l]));
        largest = std::max(largest, std::abs(born[l]));
      }
      INFO("n = ", n, ", A = ", amp, ": worst defect = ", worst,
           ", largest born shift = ", largest);
      CHECK(worst <= 3.0 * largest * largest);
      if (previous > 0.0) {
        // second-order smallness: x10 in amplitude, ~x100 in the defect
        CHECK(worst / previous >= 50.0);
        CHECK(worst / previous <= 200.0);
      }
      previous = worst;
    }
  }
}

TEST_CASE("shifts are stable under doubling the matching radius") {
  const auto model = PotentialModel::gaussian(0.1, 1.0, 2);
  const auto sol = phase_shifts(model, 0.5, 0.1);
  const auto wide = phase_shifts(model, 0.5, 0.1, sol.lmax, 2.0 * sol.match_radius);
  for (int l = 0; l <= sol.lmax; ++l)
    CHECK(std::abs(sol.phase_shifts[l] - wide.phase_shifts[l]) < 1e-10);
}

TEST_CASE("optical relation holds at converged mode counts") {
  for (int n : {2, 3}) {
    const auto sol = phase_shifts(PotentialModel::gaussian(0.1, 1.0, n), 0.5, 0.1);
    const auto rep = optical_check(sol);
    INFO("n = ", n, ": defect = ", rep.defect);
    CHECK(rep.defect <= 1e-8);
    CHECK(!rep.tail_flagged);
    CHECK(rep.sigma_shifts > 0.0);
  }
}

TEST_CASE("truncating the series inflates the reported defect") {
  const auto model = PotentialModel::gaussian(0.6, 1.0, 2);
  const auto full = phase_shifts(model, 0.5, 0.05);
  const auto cut = phase_shifts(model, 0.5, 0.05, full.lmax / 2);
  const auto rep_full = optical_check(full);
  const auto rep_cut = optical_check(cut);
  INFO("full defect = ", rep_full.defect, ", truncated defect = ", rep_cut.defect);
  CHECK(rep_cut.defect > 100.0 * rep_full.defect);
  CHECK(rep_cut.tail_flagged);
}

TEST_CASE("reciprocity of the directional amplitude") {
  const auto sol = phase_shifts(PotentialModel::gaussian(0.1, 1.0, 2), 0.5, 0.1);
  for (double a : {0.3, 1.1, 2.5}) {
    const Vec omega = unit_from_angle(0.2);
    const Vec theta = unit_from_angle(0.2 + a);
    const auto fwd = oracle_amplitude(sol, omega, theta);
    const auto rev = oracle_amplitude(sol, Vec(-theta), Vec(-omega));
    CHECK(std::abs(fwd - rev) <= 1e-10 * (1.0 + std::abs(fwd)));
  }
}

TEST_CASE("weak-coupling amplitude follows the gaussian transform ratio") {
  // First Born approximation: amplitude proportional to the potential's
  // Fourier transform at momentum transfer q = 2k sin(angle/2); for the
  // width-1 gaussian that is exp(-q^2/2).
  const double amp = 1e-3, lambda = 0.5, h = 0.1;
  const auto sol = phase_shifts(PotentialModel::gaussian(amp, 1.0, 2), lambda, h);
  const double k = sol.k;
  auto transfer = [&](double a) { return 2.0 * k * std::sin(0.5 * a); };
  const double a_ref = 0.08;
  const double f_ref = std::abs(oracle_amplitude(sol, a_ref));
  for (double a : {0.16, 0.24}) {
    const double measured = std::abs(oracle_amplitude(sol, a)) / f_ref;
    const double q2 = transfer(a) * transfer(a) - transfer(a_ref) * transfer(a_ref);
    const double born_ratio = std::exp(-0.5 * q2);
    INFO("angle ", a, ": measured ratio ", measured, " vs born ", born_ratio);
    CHECK(std::abs(measured / born_ratio - 1.0) <= 0.05);
  }
}

TEST_CASE("phase shifts vary smoothly in h") {
  const auto model = PotentialModel::gaussian(0.1, 1.0, 2);
  std::vector<double> prev;
  for (double h : {0.2, 0.14, 0.1}) {
    const auto sol = phase_shifts(model, 0.5, h);
    if (!prev.empty())
      for (int l = 0; l < 6; ++l) {
        double d = sol.phase_shifts[l] - prev[l];
        d -= M_PI * std::round(d / M_PI); // shifts live modulo pi
        CHECK(std::abs(d) <= 0.6);
      }
    prev = sol.phase_shifts;
  }
}
