#pragma once

namespace rdmono {

double norm_pdf(double x);
double norm_cdf(double x);
/// 1 - Phi(x), computed without cancellation.
double norm_sf(double x);
double norm_quantile(double p);

/// 1 - alpha quantile of |Z| with Z ~ N(t, 1).
double cv_alpha(double t, double alpha);

} // namespace rdmono
