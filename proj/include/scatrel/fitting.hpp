// Small shared fitting helpers.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace scatrel {

// Least-squares slope of log y against log h; scatter (optional) is the rms
// residual of the fit in log space.
inline double loglog_slope(const std::vector<double>& h, const std::vector<double>& y,
                           double* scatter = nullptr) {
  const size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> lx(n), ly(n);
  for (size_t i = 0; i < n; ++i) {
    lx[i] = std::log(h[i]);
    ly[i] = std::log(std::max(y[i], 1e-300));
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  if (scatter) {
    double ss = 0;
    for (size_t i = 0; i < n; ++i) {
      const double r = ly[i] - slope * lx[i] - icpt;
      ss += r * r;
    }
    *scatter = std::sqrt(ss / n);
  }
  return slope;
}

} // namespace scatrel
