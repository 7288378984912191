#pragma once

namespace cpmon {

/// Digamma function psi(z) = Gamma'(z) / Gamma(z) for real z > 0.
///
/// The argument is shifted upward with psi(z) = psi(z + 1) - 1/z until it
/// clears the asymptotic cutoff, then the Bernoulli-number series is used.
/// Absolute error is below 1e-13 on [0.5, 1e6].
///
/// Throws DomainError for z <= 0 or non-finite z.
double digamma(double z);

/// psi(z) - ln(z), evaluated without cancellation for large z.
/// Used by the null-expectation formulas, where both terms grow like ln z
/// but their difference is O(1/z).
double digamma_minus_log(double z);

/// ln Gamma(z) for real z > 0 (Stirling series after upward shift).
double log_gamma(double z);

} // namespace cpmon
