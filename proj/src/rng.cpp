#include "rmtlab/rng.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>

namespace rmtlab {

namespace {

constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;
constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

std::array<std::uint32_t, 4> counter_words(std::uint64_t block, std::uint64_t stream) {
    return {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
            static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
}

std::array<std::uint32_t, 2> key_words(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kMulA, ctr[0], lo0, hi0);
        mulhilo(kMulB, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t stream_id(std::initializer_list<std::uint64_t> ids) {
    std::uint64_t h = 0x243F6A8885A308D3ull;
    for (auto id : ids) h = mix64(h ^ mix64(id));
    return h;
}

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t stream)
    : key_(key_words(seed)), stream_(stream) {}

std::uint64_t CounterStream::next_u64() {
    if (used_ >= 4) {
        buffer_ = philox4x32(counter_words(block_++, stream_), key_);
        used_ = 0;
    }
    const std::uint64_t hi = buffer_[used_];
    const std::uint64_t lo = buffer_[used_ + 1];
    used_ += 2;
    return (hi << 32) | lo;
}

double CounterStream::uniform() { return bits_to_open_unit(next_u64()); }

double CounterStream::normal() { return normal_quantile(uniform()); }

double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const auto block = philox4x32(counter_words(index / 2, stream), key_words(seed));
    const int off = static_cast<int>(index % 2) * 2;
    const std::uint64_t bits = (static_cast<std::uint64_t>(block[off]) << 32) | block[off + 1];
    return bits_to_open_unit(bits);
}

double normal_quantile(double u) {
    // erfc_inv keeps full relative accuracy in both tails.
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

}  // namespace rmtlab
