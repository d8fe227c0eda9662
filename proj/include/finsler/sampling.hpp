#pragma once

#include <cstdint>
#include <cmath>

#include "finsler/linalg.hpp"

namespace finsler {

/// Deterministic sample generator. Uses splitmix64 for pseudo-random draws;
/// identical output on every platform for a given seed (no std:: distribution
/// involved, so reports stay byte-identical across toolchains).
class SampleGen {
public:
    explicit SampleGen(std::uint64_t seed = 42) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// point in an axis-aligned box
    Vec in_box(const std::vector<std::pair<double, double>>& box) {
        Vec x(box.size());
        for (std::size_t i = 0; i < box.size(); ++i)
            x[i] = uniform(box[i].first, box[i].second);
        return x;
    }

    /// direction on the euclidean unit sphere (Marsaglia-free: normalize a
    /// cube sample, rejecting near-zero draws)
    Vec unit_direction(int n) {
        for (;;) {
            Vec y(n);
            for (int i = 0; i < n; ++i) y[i] = 2.0 * uniform() - 1.0;
            const double r = norm(y);
            if (r > 0.1) {
                for (double& v : y) v /= r;
                return y;
            }
        }
    }

private:
    std::uint64_t state_;
};

} // namespace finsler
