#include "cpmon/special_functions.hpp"

#include "cpmon/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace cpmon {
namespace {

constexpr double kAsymptoticCutoff = 10.0;

void require_positive(double z, const char* name) {
    if (!std::isfinite(z) || z <= 0.0) {
        throw DomainError(std::string(name) + ": argument must be finite and positive, got " +
                          std::to_string(z));
    }
}

// psi(z) - ln z - ( -1/(2z) ) for z >= cutoff: -sum B_2n / (2n z^2n).
double digamma_series_tail(double z) {
    const double r = 1.0 / (z * z);
    // Horner form of -1/12 r + 1/120 r^2 - 1/252 r^3 + 1/240 r^4 - 1/132 r^5
    //                + 691/32760 r^6 - 1/12 r^7
    return r * (-1.0 / 12.0 +
                r * (1.0 / 120.0 +
                     r * (-1.0 / 252.0 +
                          r * (1.0 / 240.0 +
                               r * (-1.0 / 132.0 + r * (691.0 / 32760.0 + r * (-1.0 / 12.0)))))));
}

} // namespace

double digamma(double z) {
    require_positive(z, "digamma");
    double shift = 0.0;
    while (z < kAsymptoticCutoff) {
        shift -= 1.0 / z;
        z += 1.0;
    }
    return shift + std::log(z) - 0.5 / z + digamma_series_tail(z);
}

double digamma_minus_log(double z) {
    require_positive(z, "digamma_minus_log");
    if (z < kAsymptoticCutoff) {
        return digamma(z) - std::log(z);
    }
    return -0.5 / z + digamma_series_tail(z);
}

double log_gamma(double z) {
    require_positive(z, "log_gamma");
    // ln Gamma(z) = ln Gamma(z + n) - ln(z (z+1) ... (z+n-1))
    double product = 1.0;
    while (z < kAsymptoticCutoff) {
        product *= z;
        z += 1.0;
    }
    const double r = 1.0 / (z * z);
    // 1/(12z) - 1/(360z^3) + 1/(1260z^5) - 1/(1680z^7) + 1/(1188z^9) - 691/(360360z^11) + 1/(156z^13)
    const double series =
        (1.0 / 12.0 +
         r * (-1.0 / 360.0 +
              r * (1.0 / 1260.0 +
                   r * (-1.0 / 1680.0 +
                        r * (1.0 / 1188.0 + r * (-691.0 / 360360.0 + r * (1.0 / 156.0))))))) /
        z;
    const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
    return (z - 0.5) * std::log(z) - z + half_log_two_pi + series - std::log(product);
}

} // namespace cpmon
