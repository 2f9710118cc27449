#include "qrng/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "qrng/error.hpp"

namespace qrng::special {

namespace {

/// ln Q(a, x) by the Lentz continued fraction; valid for x > a + 1.
double log_igamc_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return -x + a * std::log(x) - std::lgamma(a) + std::log(h);
}

}  // namespace

double igamc(double a, double x) {
  if (!(a > 0.0) || std::isnan(x)) throw Error(Errc::invalid_argument, "igamc requires a > 0");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(a, x);
}

double log10_igamc(double a, double x) {
  const double q = igamc(a, x);
  if (q > 1e-300) return std::log10(q);
  return log_igamc_cf(a, x) / std::numbers::ln10;
}

double chi2_sf(double chi2, double dof) { return igamc(dof / 2.0, chi2 / 2.0); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace qrng::special
