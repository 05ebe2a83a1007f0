#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace autolaw {

std::uint64_t fnv1a64(std::string_view text) noexcept;
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Deterministic random stream (xoshiro256**), identical output on every
/// platform. Standard-library distributions are implementation-defined, so
/// bounded integers and unit reals are derived here.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) noexcept;

    /// Stream keyed by a root seed and any number of string labels, so
    /// per-example and per-juror draws never depend on processing order.
    template <typename... Labels>
    static RngStream derive(std::uint64_t seed, const Labels&... labels) {
        std::uint64_t h = splitmix64(seed);
        ((h = splitmix64(h ^ fnv1a64(std::string_view(labels)))), ...);
        return RngStream(h);
    }

    std::uint64_t next_u64() noexcept;
    /// Uniform in [0, 1).
    double uniform() noexcept;
    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept;
    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::uint64_t s_[4];
};

}  // namespace autolaw
