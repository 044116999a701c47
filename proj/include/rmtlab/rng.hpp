#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace rmtlab {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Stateless: the output is a pure function of the
/// 128-bit counter and the 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer, used to fold structured stream ids into 64 bits.
std::uint64_t mix64(std::uint64_t x);

/// Folds an ordered list of ids into one 64-bit stream id.
std::uint64_t stream_id(std::initializer_list<std::uint64_t> ids);

/// A counter-based substream. Every (seed, stream) pair names an independent
/// sequence; position within the sequence is an explicit block counter, so
/// two substreams never share state and draw order across substreams is
/// irrelevant.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1), 52 bits of resolution.
    double uniform();
    /// Standard normal via inverse CDF of uniform().
    double normal();

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
};

/// Single uniform in (0, 1) addressed by (seed, stream, index) without
/// constructing a stream.
double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

/// Maps 64 random bits to (0, 1) exclusive.
inline double bits_to_open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Standard normal quantile.
double normal_quantile(double u);

}  // namespace rmtlab
