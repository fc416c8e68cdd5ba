#pragma once

#include "g2lab/chart.hpp"

#include <cstdint>

namespace g2lab {

/// xorshift64* generator. Deliberately self-contained so that verification
/// reports are reproducible across platforms and implementations:
///   x ^= x >> 12; x ^= x << 25; x ^= x >> 27; return x * 0x2545F4914F6CDD1D.
/// A zero seed is replaced by the fixed constant 0x9E3779B97F4A7C15.
class Xorshift {
public:
    explicit Xorshift(std::uint64_t seed = 1) : x_(seed ? seed : 0x9E3779B97F4A7C15ull) {}

    std::uint64_t next_u64() {
        x_ ^= x_ >> 12;
        x_ ^= x_ << 25;
        x_ ^= x_ >> 27;
        return x_ * 0x2545F4914F6CDD1Dull;
    }

    /// Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0, n).
    int below(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

private:
    std::uint64_t x_;
};

/// Axis-aligned sampling box with the relative shrink margin the samplers use
/// to stay away from singular loci.
struct SampleBox {
    std::vector<std::pair<double, double>> ranges;
    double margin = 1e-3;

    Point sample(Xorshift& rng) const {
        Point p(ranges.size());
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            double lo = ranges[i].first, hi = ranges[i].second;
            double pad = margin * (hi - lo);
            p[i] = rng.uniform(lo + pad, hi - pad);
        }
        return p;
    }
};

} // namespace g2lab
