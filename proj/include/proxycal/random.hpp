#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace proxycal {

/// SplitMix64 finalizer; used both for key derivation and for seeding streams.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Deterministic random stream addressed by a master seed and a key path,
/// e.g. Stream(seed, {replicate, domain}). Two streams with the same address
/// produce identical sequences, independent of which other streams were
/// created before, so work can be scheduled in any order.
///
/// The generator is xoshiro256** seeded from the hashed address. Normals use
/// the Marsaglia polar method; the spare variate is kept, so the sequence of
/// normals depends only on the call order within one stream.
class Stream {
public:
    using result_type = std::uint64_t;

    Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept;

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;
    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t index(std::uint64_t n) noexcept;
    double normal() noexcept;

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace proxycal
