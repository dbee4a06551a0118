#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace pdp {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stream seed for item `index` under `master`: the index-th output of the
// splitmix64 sequence started at `master`. Distinct indexes give distinct
// seeds, so per-trajectory / per-sample streams never overlap.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master + index * 0x9E3779B97F4A7C15ULL;
    return splitmix64_next(state);
}

class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64_next(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~static_cast<result_type>(0); }

    result_type operator()() {
        const std::uint64_t out = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return out;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

namespace detail {

// Marsaglia-Tsang ziggurat layers for the standard normal, 128 strips.
struct ZigguratTables {
    std::uint32_t kn[128];
    double wn[128];
    double fn[128];

    ZigguratTables() {
        const double m1 = 2147483648.0;  // 2^31
        double dn = 3.442619855899;
        double tn = dn;
        const double vn = 9.91256303526217e-3;
        const double q = vn / std::exp(-0.5 * dn * dn);
        kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
        kn[1] = 0;
        wn[0] = q / m1;
        wn[127] = dn / m1;
        fn[0] = 1.0;
        fn[127] = std::exp(-0.5 * dn * dn);
        for (int i = 126; i >= 1; --i) {
            dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
            kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
            tn = dn;
            fn[i] = std::exp(-0.5 * dn * dn);
            wn[i] = dn / m1;
        }
    }
};

inline const ZigguratTables& ziggurat() {
    static const ZigguratTables tables;
    return tables;
}

}  // namespace detail

// Seeded variate stream. All samplers are hand-rolled so that results are
// bit-exact for a fixed build regardless of the standard library.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // (0, 1]
    double uniform_pos() {
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    double exponential() { return -std::log(uniform_pos()); }

    double normal() {
        const auto& z = detail::ziggurat();
        for (;;) {
            // Strip index and magnitude come from disjoint bits of one draw.
            const std::uint64_t u = engine_();
            const std::uint32_t iz = static_cast<std::uint32_t>(u) & 127u;
            const auto hz = static_cast<std::int32_t>(
                static_cast<std::uint32_t>(u >> 16));
            const auto mag =
                static_cast<std::uint64_t>(std::abs(static_cast<std::int64_t>(hz)));
            if (mag < z.kn[iz]) return hz * z.wn[iz];

            if (iz == 0) {
                const double r = 3.442619855899;
                double x, y;
                do {
                    x = -std::log(uniform_pos()) / r;
                    y = -std::log(uniform_pos());
                } while (y + y < x * x);
                return hz > 0 ? r + x : -r - x;
            }
            const double x = hz * z.wn[iz];
            if (z.fn[iz] + uniform() * (z.fn[iz - 1] - z.fn[iz]) <
                std::exp(-0.5 * x * x))
                return x;
        }
    }

    // Marsaglia-Tsang squeeze/rejection for shape >= 1, with the standard
    // boost G(a) = G(a+1) * U^(1/a) below 1. Shapes 1 and 1/2 take their
    // exact special cases (exponential, half chi-square).
    double gamma(double shape) {
        if (!(shape > 0.0))
            throw std::invalid_argument("gamma: shape must be positive");
        if (shape == 1.0) return exponential();
        if (shape == 0.5) {
            const double z = normal();
            return 0.5 * z * z;
        }
        if (shape < 1.0)
            return gamma_ge1(shape + 1.0) * std::pow(uniform_pos(), 1.0 / shape);
        return gamma_ge1(shape);
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        const double s = x + y;
        if (s <= 0.0) return 0.5;
        return x / s;
    }

private:
    double gamma_ge1(double shape) {
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    Xoshiro256pp engine_;
};

}  // namespace pdp
