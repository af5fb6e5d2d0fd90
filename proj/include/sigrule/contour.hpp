#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "sigrule/errors.hpp"
#include "sigrule/significance.hpp"
#include "sigrule/table.hpp"

// Grids of t-hat = t / sqrt(n) over (frequency, confidence) for fixed P(Y), or
// over (frequency, gamma). Only points with a valid table and t-hat > 0 are
// kept.

namespace sigrule {

enum class ContourMode { frcf, frgamma };

struct ContourPoint {
  double x = 0;  // P(X,Y)
  double y = 0;  // P(Y|X) or gamma
  double t_hat = 0;
};

struct ContourGrid {
  ContourMode mode = ContourMode::frcf;
  double fixed = 0;  // P(Y) for frcf, gamma_max for frgamma
  std::size_t resolution = 0;
  std::vector<ContourPoint> points;
};

namespace detail {

inline std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void require_resolution(std::size_t r) {
  if (r < 1 || r > 100000) throw usage_error("resolution must lie in [1, 100000]");
}

}  // namespace detail

/// fr and cf each take the values i / resolution, i = 1..resolution.
inline ContourGrid contour_frcf(double p_y, std::size_t resolution) {
  if (!(p_y > 0 && p_y < 1)) throw usage_error("P(Y) must lie strictly inside (0,1)");
  detail::require_resolution(resolution);
  ContourGrid g{ContourMode::frcf, p_y, resolution, {}};
  const double r = static_cast<double>(resolution);
  for (std::size_t i = 1; i <= resolution; ++i) {
    const double fr = static_cast<double>(i) / r;
    if (fr > p_y) break;
    for (std::size_t j = 1; j <= resolution; ++j) {
      const double cf = static_cast<double>(j) / r;
      if (!(cf > p_y) || fr > cf) continue;
      const double p_x = fr / cf;
      if (1 - p_x - p_y + fr < 0) continue;  // P(~X,~Y)
      const double t = t_hat_frequency_confidence(fr, cf, p_y);
      if (t > 0) g.points.push_back({fr, cf, t});
    }
  }
  return g;
}

/// fr = i / resolution and gamma = 1 + (gamma_max - 1) j / resolution, over
/// the domain fr * gamma <= 1.
inline ContourGrid contour_frgamma(double gamma_max, std::size_t resolution) {
  if (!(gamma_max > 1) || !std::isfinite(gamma_max)) throw usage_error("gamma-max must exceed 1");
  detail::require_resolution(resolution);
  ContourGrid g{ContourMode::frgamma, gamma_max, resolution, {}};
  const double r = static_cast<double>(resolution);
  for (std::size_t i = 1; i <= resolution; ++i) {
    const double fr = static_cast<double>(i) / r;
    for (std::size_t j = 1; j <= resolution; ++j) {
      const double gamma = 1 + (gamma_max - 1) * static_cast<double>(j) / r;
      if (fr * gamma > 1) continue;
      const double t = t_hat_frequency_gamma(fr, gamma);
      if (t > 0) g.points.push_back({fr, gamma, t});
    }
  }
  return g;
}

/// An exact table realizing a grid point at data size n. For frgamma only the
/// product P(X)P(Y) = fr / gamma is determined; P(X) = P(Y) is used.
inline ProbabilityTable contour_table(const ContourGrid& g, const ContourPoint& p, double n) {
  if (g.mode == ContourMode::frcf) {
    const double p_x = p.x / p.y;
    return ProbabilityTable::from_marginals(p_x, g.fixed, p.x - p_x * g.fixed, n);
  }
  const double p_x = std::sqrt(p.x / p.y);
  return ProbabilityTable::from_marginals(p_x, p_x, p.x - p_x * p_x, n);
}

inline void write_contour(std::ostream& out, const ContourGrid& g) {
  if (g.mode == ContourMode::frcf) {
    out << "# mode=frcf fixed=py:" << detail::format_g17(g.fixed) << ",resolution:" << g.resolution
        << " columns=fr,cf,t_hat\n";
  } else {
    out << "# mode=frgamma fixed=gamma_max:" << detail::format_g17(g.fixed) << ",resolution:" << g.resolution
        << " columns=fr,gamma,t_hat\n";
  }
  for (const ContourPoint& p : g.points) {
    out << detail::format_g17(p.x) << ' ' << detail::format_g17(p.y) << ' ' << detail::format_g17(p.t_hat) << '\n';
  }
}

}  // namespace sigrule
