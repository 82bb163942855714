#pragma once

namespace imputereg {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile, accurate to about 1e-15 relative on (0, 1).
/// Acklam's rational approximation followed by one Halley refinement step.
double normal_quantile(double prob);

/// Acklam's rational approximation alone (relative error below 1.2e-9).
/// This is the transform used to draw normals in simulations; it is frozen
/// so simulated datasets stay reproducible.
double normal_quantile_approx(double prob);

}  // namespace imputereg
