#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "epr/errors.hpp"

namespace epr {

// MADN scale constant: sigma = MAD / 0.675.
inline constexpr double kMadnConstant = 0.675;

// Tail probabilities for the two thresholds: intra-database expansion uses a
// 1e-6 false-positive tail, relocalization a far looser 5% tail.
inline constexpr double kDefaultPDb = 1.0 - 1e-6;
inline constexpr double kDefaultPReloc = 0.95;

namespace detail {

// Acklam's rational approximation to the standard-normal quantile, folded to
// the lower half: q in (0, 0.5] yields z <= 0 with Phi(z) ~ q, |error| < 1.2e-9.
inline double acklam_estimate(double q) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  if (q < 0.02425) {
    const double u = std::sqrt(-2.0 * std::log(q));
    return (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
           ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  const double r = q - 0.5;
  const double s = r * r;
  return (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r /
         (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
}

}  // namespace detail

// Standard-normal quantile: z with Phi(z) = p. Acklam estimate plus one
// Newton step on the tail CDF; the step is evaluated on the folded upper
// tail where erfc loses no precision, keeping absolute error well under 1e-8
// across p in [1e-9, 1 - 1e-9].
inline double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw domain_error("probability must lie strictly in (0, 1)");
  const bool lower = p < 0.5;
  const double q = lower ? p : 1.0 - p;  // exact: p >= 0.5 makes 1 - p exact
  double z = -detail::acklam_estimate(q);
  const double tail = 0.5 * std::erfc(z / std::numbers::sqrt2);
  const double density = std::exp(-0.5 * z * z) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
  z += (tail - q) / density;
  return lower ? -z : z;
}

// Median / normalized-MAD location and scale; resistant to a minority of
// same-place outliers in a sample dominated by different-place similarities.
struct RobustFit {
  double mu = 0.0;
  double sigma = 0.0;
};

namespace detail {

// Median with the even-length convention: mean of the two central order
// statistics. Consumes its argument.
inline double median_inplace(std::vector<double>& values) {
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace detail

inline RobustFit robust_fit(std::vector<double> samples) {
  if (samples.empty()) throw domain_error("robust_fit needs a nonempty sample");
  for (double x : samples) {
    if (!std::isfinite(x)) throw domain_error("robust_fit sample contains a non-finite value");
  }
  RobustFit fit;
  std::vector<double> deviations = samples;
  fit.mu = detail::median_inplace(samples);
  for (double& x : deviations) x = std::abs(x - fit.mu);
  fit.sigma = detail::median_inplace(deviations) / kMadnConstant;
  return fit;
}

struct ThresholdModel {
  double mu = 0.0;
  double sigma = 0.0;
  double probability = 0.0;
  double theta = 0.0;
};

inline ThresholdModel autotune(std::vector<double> samples, double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw domain_error("probability must lie strictly in (0, 1)");
  const RobustFit fit = robust_fit(std::move(samples));
  ThresholdModel model;
  model.mu = fit.mu;
  model.sigma = fit.sigma;
  model.probability = p;
  model.theta = fit.mu + fit.sigma * normal_quantile(p);
  return model;
}

}  // namespace epr
