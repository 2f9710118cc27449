#pragma once

namespace qrng::special {

/// Regularized upper incomplete gamma Q(a, x).
double igamc(double a, double x);

/// log10 Q(a, x), finite even where Q underflows double precision.
double log10_igamc(double a, double x);

/// Upper-tail probability of a chi-square variate with `dof` degrees of freedom.
double chi2_sf(double chi2, double dof);

double normal_cdf(double z);

}  // namespace qrng::special
