#pragma once

// Test-only oracles, independent of the implementation paths they check:
// tanh-sinh quadrature in long double, the Euler constant by series, digamma
// and trigamma by integral representation, and exhaustive abundance-vector
// enumeration.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "pdp/partition.hpp"
#include "pdp/rng.hpp"

namespace oracle {

// Integral of f over (0, 1); handles integrable endpoint singularities.
// f receives the abscissa and its exact complement, f(x, 1-x), so endpoint
// factors like (1-x)^(b-1) keep full precision.
template <typename F>
long double integrate01(F f) {
    const long double pi_half = 1.57079632679489661923L;
    auto node = [&](long double u, long double& t, long double& tm, long double& w) {
        const long double s = pi_half * std::sinh(u);
        const long double e = std::exp(-2.0L * s);
        t = 1.0L / (1.0L + e);           // (1 + tanh s)/2
        tm = e / (1.0L + e);             // (1 - tanh s)/2
        const long double sech = 2.0L / (std::exp(s) + std::exp(-s));
        w = pi_half * 0.5L * std::cosh(u) * sech * sech;
    };
    long double t, tm, w;
    node(0.0L, t, tm, w);
    long double total = f(t, tm) * w;
    for (std::int64_t k = 1; k <= 6; ++k) {
        node(static_cast<long double>(k), t, tm, w);
        // near-endpoint nodes stay in: a singular integrand can make
        // f * w significant even when w alone is tiny; x may round to 1
        // there, which is harmless because f sees the exact complement
        if (tm > 0.0L) {
            total += f(t, tm) * w;
            total += f(tm, t) * w;
        }
    }
    long double integral = total;
    long double h = 1.0L;
    for (int level = 1; level <= 12; ++level) {
        h *= 0.5L;
        for (std::int64_t k = 1; k * h <= 6.5L; k += 2) {
            node(h * static_cast<long double>(k), t, tm, w);
            if (tm > 0.0L) {
                total += f(t, tm) * w;
                total += f(tm, t) * w;
            }
        }
        const long double next = h * total;
        if (level > 5 && std::abs(next - integral) < 1e-17L * std::abs(next))
            return next;
        integral = next;
    }
    return integral;
}

// Euler-Mascheroni constant from the harmonic-number series with
// Euler-Maclaurin correction terms.
inline long double euler_gamma() {
    const int n = 1000;
    long double h = 0.0L;
    for (int k = n; k >= 1; --k) h += 1.0L / static_cast<long double>(k);
    const long double nn = static_cast<long double>(n);
    return h - std::log(nn) - 1.0L / (2.0L * nn) + 1.0L / (12.0L * nn * nn) -
           1.0L / (120.0L * nn * nn * nn * nn) +
           1.0L / (252.0L * nn * nn * nn * nn * nn * nn);
}

// psi(y) via -gamma + int_0^1 (1 - t^(y-1))/(1 - t) dt for y >= 1, shifted
// down once for y < 1.
inline long double digamma(long double y) {
    if (y < 1.0L) return digamma(y + 1.0L) - 1.0L / y;
    const long double p = y - 1.0L;
    const long double value = integrate01([&](long double t, long double tm) {
        // 1 - t^p = -expm1(p log1p(-(1-t))), exact up to both endpoints
        return -std::expm1(p * std::log1p(-tm)) / tm;
    });
    return value - euler_gamma();
}

// psi'(y) via int_0^1 t^(y-1) (-ln t)/(1 - t) dt for y >= 1.
inline long double trigamma(long double y) {
    if (y < 1.0L) return trigamma(y + 1.0L) + 1.0L / (y * y);
    const long double p = y - 1.0L;
    return integrate01([&](long double t, long double tm) {
        return std::pow(t, p) * (-std::log1p(-tm)) / tm;
    });
}

inline long double log_beta(long double a, long double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// E[f(X)] for X ~ Beta(a, b), by quadrature against the density; the
// integrand receives (x, 1-x).
template <typename F>
long double beta_mean(long double a, long double b, F f) {
    const long double norm = std::exp(-log_beta(a, b));
    return integrate01([&](long double x, long double xm) {
        return f(x, xm) * norm * std::pow(x, a - 1.0L) * std::pow(xm, b - 1.0L);
    });
}

// All abundance vectors (ordered compositions) of n, smallest n first.
inline void for_each_composition(
    std::int64_t n, const std::function<void(const std::vector<std::int64_t>&)>& fn) {
    std::vector<std::int64_t> parts;
    std::function<void(std::int64_t)> rec = [&](std::int64_t left) {
        if (left == 0) {
            fn(parts);
            return;
        }
        for (std::int64_t first = 1; first <= left; ++first) {
            parts.push_back(first);
            rec(left - first);
            parts.pop_back();
        }
    };
    rec(n);
}

inline pdp::PdpParams random_params(pdp::RandomStream& stream,
                                    double alpha_max = 0.9) {
    const double alpha = alpha_max * stream.uniform();
    const double theta = -alpha + 0.1 + 3.0 * stream.uniform();
    return pdp::PdpParams(alpha, theta);
}

}  // namespace oracle
