#pragma once

#include <cmath>
#include <stdexcept>

namespace pdp {

// psi(x) = Gamma'(x)/Gamma(x) for x > 0.
//
// Upward recurrence psi(x) = psi(x+1) - 1/x shifts the argument to >= 10,
// then the asymptotic expansion with Bernoulli terms through x^-12 applies;
// the first dropped term is below 1e-15 at the shift point.
inline double digamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::domain_error("digamma: argument must be positive and finite");
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double z = 1.0 / (x * x);
    const double tail =
        z * (1.0 / 12.0 -
             z * (1.0 / 120.0 -
                  z * (1.0 / 252.0 -
                       z * (1.0 / 240.0 -
                            z * (1.0 / 132.0 - z * (691.0 / 32760.0))))));
    return acc + std::log(x) - 0.5 / x - tail;
}

// psi'(x) for x > 0, by the matching recurrence psi'(x) = psi'(x+1) + 1/x^2
// and the asymptotic series through x^-13.
inline double trigamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::domain_error("trigamma: argument must be positive and finite");
    double acc = 0.0;
    while (x < 10.0) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double z = inv * inv;
    const double series =
        z * (1.0 / 6.0 -
             z * (1.0 / 30.0 -
                  z * (1.0 / 42.0 -
                       z * (1.0 / 30.0 -
                            z * (5.0 / 66.0 - z * (691.0 / 2730.0))))));
    return acc + inv + 0.5 * z + inv * series;
}

struct BetaParams {
    double a;
    double b;

    BetaParams(double a_, double b_) : a(a_), b(b_) {
        if (!(a > 0.0) || !std::isfinite(a) || !(b > 0.0) || !std::isfinite(b))
            throw std::invalid_argument("BetaParams: shapes must be positive");
    }
};

struct BetaLogMoments {
    double m1;  // E[-log X]
    double m2;  // E[(log X)^2]
    double mx;  // E[-X log X]
};

inline BetaLogMoments beta_log_moments(const BetaParams& p) {
    const double s = p.a + p.b;
    const double m1 = digamma(s) - digamma(p.a);
    const double m2 = (trigamma(p.a) - trigamma(s)) + m1 * m1;
    const double mx = p.a / s * (digamma(s + 1.0) - digamma(p.a + 1.0));
    return {m1, m2, mx};
}

// E[X^m] = prod_{r=0}^{m-1} (a+r)/(a+b+r). Long products go through
// log-gamma to avoid underflow.
inline double beta_power_moment(const BetaParams& p, long m) {
    if (m < 1) throw std::invalid_argument("beta_power_moment: m must be >= 1");
    if (m <= 32) {
        double prod = 1.0;
        for (long r = 0; r < m; ++r)
            prod *= (p.a + static_cast<double>(r)) / (p.a + p.b + static_cast<double>(r));
        return prod;
    }
    const double md = static_cast<double>(m);
    return std::exp(std::lgamma(p.a + md) - std::lgamma(p.a) +
                    std::lgamma(p.a + p.b) - std::lgamma(p.a + p.b + md));
}

// E[X^kappa] for real kappa > 0, as a ratio of gamma functions.
inline double beta_power_moment_real(const BetaParams& p, double kappa) {
    if (!(kappa > 0.0))
        throw std::invalid_argument("beta_power_moment_real: exponent must be positive");
    return std::exp(std::lgamma(p.a + kappa) - std::lgamma(p.a) +
                    std::lgamma(p.a + p.b) - std::lgamma(p.a + p.b + kappa));
}

}  // namespace pdp
