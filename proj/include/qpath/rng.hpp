#pragma once

#include <cstdint>
#include <random>

namespace qpath {

// splitmix64 (Vigna); used only to mix stream keys and seed material.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent random stream for one trajectory, derived deterministically
/// from (master seed, stream index). The Gaussian transform is coded here
/// (Box-Muller) so the variate sequence is fixed by this library, not by
/// the standard library's distribution implementation.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index) {
        std::uint64_t s = master_seed ^ (0xd1b54a32d192ed03ULL * (stream_index + 1));
        std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
        gen_.seed(seq);
    }

    /// Uniform on [0, 1).
    double uniform() {
        return (gen_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; pairs are generated together.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace qpath
