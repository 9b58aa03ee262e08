#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>

namespace metarl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded random source. The variate transforms (uniform, Gaussian) are
/// implemented here rather than via std::*_distribution so that frozen
/// expected values in tests hold on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes two uniforms per call.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    double normal(double stddev) { return stddev * normal(); }

    /// Uniform index in [0, n). n must be positive.
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    /// Derives an independent child stream; advances this stream by one draw.
    Rng fork(std::uint64_t tag) { return Rng(splitmix64(next_u64() ^ splitmix64(tag))); }

private:
    std::mt19937_64 engine_;
};

}  // namespace metarl
