#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vscdyn {

/// Portable normal deviates: std::mt19937_64 (sequence fixed by the C++
/// standard) seeded through std::seed_seq from (seed, stream), with 53-bit
/// uniforms and the Box-Muller transform. Library distributions are avoided
/// because their output is implementation-defined.
class NormalRng {
public:
    static constexpr std::string_view algorithm = "mt19937_64+seed_seq(seed,stream)+box-muller/v1";

    explicit NormalRng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Uniform on (0, 1).
    double uniform();
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace vscdyn
