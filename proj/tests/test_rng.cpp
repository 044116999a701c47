#include "rmtlab/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace rmtlab;

TEST_CASE("philox matches the published known-answer vectors") {
    using B = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter streams are pure functions of seed and stream") {
    CounterStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    std::set<std::uint64_t> seen;
    for (int k = 0; k < 100; ++k) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        seen.insert(x);
        seen.insert(c.next_u64());
        seen.insert(d.next_u64());
    }
    CHECK(seen.size() == 300);
}

TEST_CASE("uniform_at agrees with the sequential stream") {
    CounterStream s(9, 3);
    for (std::uint64_t k = 0; k < 20; ++k) CHECK(uniform_at(9, 3, k) == s.uniform());
}

TEST_CASE("uniforms stay inside the open unit interval") {
    CHECK(bits_to_open_unit(0) > 0.0);
    CHECK(bits_to_open_unit(~0ull) < 1.0);
    CounterStream s(1, 1);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sq += u * u;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(sq / n - mean * mean - 1.0 / 12.0) < 2e-3);
}

TEST_CASE("normal quantile") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-12));
    for (double u : {0.01, 0.2, 0.37, 0.9}) CHECK(normal_quantile(u) == doctest::Approx(-normal_quantile(1.0 - u)).epsilon(1e-13));
}

TEST_CASE("stream ids depend on order") {
    CHECK(stream_id({1, 2}) != stream_id({2, 1}));
    CHECK(stream_id({1, 2}) == stream_id({1, 2}));
}
