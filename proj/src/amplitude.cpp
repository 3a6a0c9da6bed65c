#include "scatrel/amplitude.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

#include "scatrel/errors.hpp"
#include "scatrel/fitting.hpp"
#include "scatrel/parallel.hpp"

namespace scatrel {

namespace {

void check_h_grid(const std::vector<double>& h_values) {
  if (h_values.empty()) throw DomainError("amplitude: empty h grid");
  for (size_t i = 0; i < h_values.size(); ++i) {
    if (h_values[i] <= 0.0) throw DomainError("amplitude: h must be positive");
    if (i > 0 && h_values[i] >= h_values[i - 1])
      throw DomainError("amplitude: h grid must be strictly decreasing");
  }
}

double angular_separation(double omega, double theta) {
  return std::abs(wrap_angle(theta - omega));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::complex<double> branch_sum(const std::vector<BranchDatum>& branches, double h) {
  std::complex<double> sum = 0.0;
  for (const auto& b : branches)
    sum += std::pow(std::abs(b.sigma_hat), -0.5) *
           std::exp(std::complex<double>(0.0, b.action / h - 0.5 * M_PI * b.maslov));
  return sum;
}

AmplitudeGrid synthesize(const FlowIntegrator& flow,
                         const std::vector<double>& omega_angles,
                         const std::vector<double>& theta_angles,
                         const std::vector<double>& h_values,
                         const SynthesisOptions& opt) {
  if (flow.system().dimension != 2)
    throw DomainError("synthesize: angular grids require dimension 2");
  if (omega_angles.empty() || theta_angles.empty())
    throw DomainError("synthesize: empty angular grid");
  check_h_grid(h_values);

  AmplitudeGrid g;
  g.lambda = flow.system().lambda;
  g.dimension = 2;
  g.source = KernelSource::Semiclassical;
  g.h_values = h_values;
  g.omega_angles = omega_angles;
  g.theta_angles = theta_angles;
  g.diag_mask_deg = opt.diag_mask_deg;
  g.modulus_h_power = 0.0;
  g.normalization =
      "trajectory sum |sigma_hat|^{-1/2} exp(i S/h - i mu pi/2); h-flat modulus";
  g.flags.assign(g.pairs(), EntryFlag::Shadow);
  g.branches.resize(g.pairs());
  g.kernel.assign(h_values.size() * g.pairs(), 0.0);

  const double mask_rad = opt.diag_mask_deg * M_PI / 180.0;
  std::vector<std::pair<size_t, size_t>> work;
  for (size_t iw = 0; iw < omega_angles.size(); ++iw)
    for (size_t it = 0; it < theta_angles.size(); ++it) {
      if (angular_separation(omega_angles[iw], theta_angles[it]) < mask_rad)
        g.flags[g.pair_index(iw, it)] = EntryFlag::DiagonalMask;
      else
        work.emplace_back(iw, it);
    }

  // The classical solve per pair is h-independent; it runs once and its
  // branch data feeds every h below.  Pairs are independent.
  auto solve_pair = [&](size_t iw, size_t it) {
    const Vec omega = unit_from_angle(omega_angles[iw]);
    const Vec theta = unit_from_angle(theta_angles[it]);
    const auto sols = find_all(flow, omega, theta, opt.solve);
    const size_t pi = g.pair_index(iw, it);
    if (sols.empty()) {
      g.flags[pi] = EntryFlag::Shadow;
      return;
    }
    for (const auto& s : sols)
      if (s.degenerate) {
        g.flags[pi] = EntryFlag::Degenerate;
        return;
      }
    auto& list = g.branches[pi];
    list.reserve(sols.size());
    for (const auto& s : sols) {
      BranchDatum b;
      b.z_coords = s.z_coords;
      b.sigma_hat = s.sigma_hat;
      b.maslov = s.maslov;
      b.action = action_value(flow, s.shot, theta, opt.tail_tol);
      list.push_back(std::move(b));
    }
    g.flags[pi] = EntryFlag::Filled;
  };

  const size_t block = worker_threads();
  for (size_t begin = 0; begin < work.size(); begin += block) {
    std::vector<std::future<void>> futs;
    const size_t end = std::min(work.size(), begin + block);
    for (size_t j = begin; j < end; ++j)
      futs.push_back(std::async(std::launch::async, solve_pair, work[j].first,
                                work[j].second));
    for (auto& f : futs) f.get();
  }

  for (size_t ih = 0; ih < h_values.size(); ++ih)
    for (const auto& [iw, it] : work) {
      const size_t pi = g.pair_index(iw, it);
      if (g.flags[pi] == EntryFlag::Filled)
        g.kernel[g.index(ih, iw, it)] = branch_sum(g.branches[pi], h_values[ih]);
    }
  return g;
}

AmplitudeGrid oracle_grid(const PotentialModel& model, double lambda,
                          const std::vector<double>& omega_angles,
                          const std::vector<double>& theta_angles,
                          const std::vector<double>& h_values,
                          double diag_mask_deg) {
  if (model.dimension() != 2)
    throw DomainError("oracle_grid: angular grids require dimension 2");
  if (omega_angles.empty() || theta_angles.empty())
    throw DomainError("oracle_grid: empty angular grid");
  check_h_grid(h_values);

  AmplitudeGrid g;
  g.lambda = lambda;
  g.dimension = 2;
  g.source = KernelSource::Oracle;
  g.h_values = h_values;
  g.omega_angles = omega_angles;
  g.theta_angles = theta_angles;
  g.diag_mask_deg = diag_mask_deg;
  // The partial-wave amplitude is h-flat in modulus: |f|^2 tends to the
  // classical differential cross-section, same convention as the trajectory
  // sum up to one constant.
  g.modulus_h_power = 0.0;
  g.normalization = "partial-wave amplitude; h-flat modulus";
  g.flags.assign(g.pairs(), EntryFlag::Filled);
  g.kernel.assign(h_values.size() * g.pairs(), 0.0);

  const double mask_rad = diag_mask_deg * M_PI / 180.0;
  for (size_t iw = 0; iw < omega_angles.size(); ++iw)
    for (size_t it = 0; it < theta_angles.size(); ++it)
      if (angular_separation(omega_angles[iw], theta_angles[it]) < mask_rad)
        g.flags[g.pair_index(iw, it)] = EntryFlag::DiagonalMask;

  for (size_t ih = 0; ih < h_values.size(); ++ih) {
    const auto sol = phase_shifts(model, lambda, h_values[ih]);
    for (size_t iw = 0; iw < omega_angles.size(); ++iw)
      for (size_t it = 0; it < theta_angles.size(); ++it) {
        if (g.flags[g.pair_index(iw, it)] != EntryFlag::Filled) continue;
        const double sep = angular_separation(omega_angles[iw], theta_angles[it]);
        g.kernel[g.index(ih, iw, it)] = oracle_amplitude(sol, sep);
      }
  }
  return g;
}

ComparisonReport compare_to_oracle(const AmplitudeGrid& semiclassical,
                                   const AmplitudeGrid& oracle) {
  if (semiclassical.omega_angles != oracle.omega_angles ||
      semiclassical.theta_angles != oracle.theta_angles ||
      semiclassical.h_values.size() != oracle.h_values.size())
    throw DomainError("compare_to_oracle: grids do not match");
  for (size_t i = 0; i < oracle.h_values.size(); ++i)
    if (std::abs(semiclassical.h_values[i] - oracle.h_values[i]) > 1e-14)
      throw DomainError("compare_to_oracle: h grids do not match");

  std::vector<size_t> shared;
  for (size_t pi = 0; pi < oracle.pairs(); ++pi)
    if (semiclassical.flags[pi] == EntryFlag::Filled &&
        oracle.flags[pi] == EntryFlag::Filled)
      shared.push_back(pi);
  if (shared.empty())
    throw DomainError("compare_to_oracle: no pair filled in both grids");

  ComparisonReport rep;
  rep.h_values = oracle.h_values;
  const size_t np = oracle.pairs();

  // Reduce both kernels to the h-flat convention, then fix one complex
  // constant by least squares at the largest h.
  auto flat = [&](const AmplitudeGrid& g, size_t ih, size_t pi) {
    return g.kernel[ih * np + pi] *
           std::pow(g.h_values[ih], -g.modulus_h_power);
  };
  std::complex<double> num = 0.0;
  double den = 0.0;
  for (size_t pi : shared) {
    const auto s = flat(semiclassical, 0, pi);
    num += flat(oracle, 0, pi) * std::conj(s);
    den += std::norm(s);
  }
  if (den == 0.0) throw DomainError("compare_to_oracle: semiclassical kernel is zero");
  rep.constant = num / den;

  for (size_t ih = 0; ih < oracle.h_values.size(); ++ih) {
    double err = 0.0, ref = 0.0;
    for (size_t pi : shared) {
      err += std::norm(rep.constant * flat(semiclassical, ih, pi) - flat(oracle, ih, pi));
      ref += std::norm(flat(oracle, ih, pi));
    }
    rep.rel_error.push_back(std::sqrt(err / std::max(ref, 1e-300)));
  }
  return rep;
}

MicrolocalFit microlocal_fit(const AmplitudeGrid& grid, const Mat& branch_action,
                             const MicrolocalOptions& opt) {
  const size_t nw = grid.omega_angles.size(), nt = grid.theta_angles.size();
  if (branch_action.rows() != static_cast<Eigen::Index>(nw) ||
      branch_action.cols() != static_cast<Eigen::Index>(nt))
    throw DomainError("microlocal_fit: action table does not match the grid");

  std::vector<std::pair<size_t, size_t>> used;
  for (size_t iw = 0; iw < nw; ++iw)
    for (size_t it = 0; it < nt; ++it)
      if (grid.flag(iw, it) == EntryFlag::Filled) used.emplace_back(iw, it);
  if (used.size() < 4)
    throw PatchError("microlocal_fit: patch too sparse for the oscillatory fit");

  const size_t nh = grid.h_values.size();
  MicrolocalFit fit;
  fit.h_values = grid.h_values;

  // r(omega, theta; h) with the branch phase and the convention's h-power
  // removed; one dense patch per h.
  std::vector<Eigen::MatrixXcd> resid(nh, Eigen::MatrixXcd::Zero(nw, nt));
  for (size_t ih = 0; ih < nh; ++ih) {
    const double h = grid.h_values[ih];
    const double scale = std::pow(h, -grid.modulus_h_power);
    for (const auto& [iw, it] : used)
      resid[ih](iw, it) = grid.at(ih, iw, it) * scale *
                          std::exp(std::complex<double>(0.0, -branch_action(iw, it) / h));

    std::vector<double> mods;
    mods.reserve(used.size());
    for (const auto& [iw, it] : used) mods.push_back(std::abs(resid[ih](iw, it)));
    const double lo = *std::min_element(mods.begin(), mods.end());
    const double hi = *std::max_element(mods.begin(), mods.end());
    fit.modulus_level.push_back(median(mods));
    fit.modulus_contrast.push_back((hi - lo) / std::max(hi + lo, 1e-300));

    double worst = 0.0;
    auto deriv = [&](size_t iw1, size_t it1, size_t iw2, size_t it2, double step) {
      if (grid.flag(iw1, it1) != EntryFlag::Filled ||
          grid.flag(iw2, it2) != EntryFlag::Filled)
        return;
      const double d =
          std::abs(std::arg(resid[ih](iw2, it2) * std::conj(resid[ih](iw1, it1))));
      worst = std::max(worst, d / std::abs(step));
    };
    for (size_t iw = 0; iw < nw; ++iw)
      for (size_t it = 0; it + 1 < nt; ++it)
        deriv(iw, it, iw, it + 1, grid.theta_angles[it + 1] - grid.theta_angles[it]);
    for (size_t iw = 0; iw + 1 < nw; ++iw)
      for (size_t it = 0; it < nt; ++it)
        deriv(iw, it, iw + 1, it, grid.omega_angles[iw + 1] - grid.omega_angles[iw]);
    fit.phase_derivative.push_back(worst);
  }

  for (const auto& [iw, it] : used) {
    double lo = 1e300, hi = 0.0;
    for (size_t ih = 0; ih < nh; ++ih) {
      const double m = std::abs(resid[ih](iw, it));
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    fit.pair_contrast =
        std::max(fit.pair_contrast, (hi - lo) / std::max(hi + lo, 1e-300));
  }

  const double spatial =
      *std::max_element(fit.modulus_contrast.begin(), fit.modulus_contrast.end());
  if (spatial > opt.beating_threshold || fit.pair_contrast > opt.beating_threshold)
    throw PatchError(
        "microlocal_fit: multi-branch contamination (modulus beating on the patch)");

  fit.modulus_h_slope = loglog_slope(fit.h_values, fit.modulus_level, &fit.modulus_scatter);
  const double pd_max =
      *std::max_element(fit.phase_derivative.begin(), fit.phase_derivative.end());
  fit.phase_slope =
      pd_max < 1e-10 ? 0.0 : loglog_slope(fit.h_values, fit.phase_derivative, nullptr);
  return fit;
}

} // namespace scatrel
