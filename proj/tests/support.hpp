#pragma once

// Seeded generators for property tests. Each test names its own stream so
// adding a test never changes the instances another test sees.

#include "rmtlab/ensemble.hpp"
#include "rmtlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace testgen {

class Gen {
public:
    explicit Gen(std::uint64_t tag) : stream_(0x5eedull, rmtlab::stream_id({0x74657374ull, tag})) {}

    double uniform(double a = 0.0, double b = 1.0) { return a + (b - a) * stream_.uniform(); }
    double normal() { return stream_.normal(); }
    std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
        const auto span = static_cast<double>(hi - lo + 1);
        return lo + std::min(hi - lo, static_cast<std::size_t>(stream_.uniform() * span));
    }
    std::uint64_t seed() { return stream_.next_u64(); }

    rmtlab::HermitianMatrix hermitian(std::size_t n, bool real = false) {
        const auto m = static_cast<Eigen::Index>(n);
        rmtlab::HermitianMatrix a(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            a(i, i) = normal();
            for (Eigen::Index j = i + 1; j < m; ++j) {
                a(i, j) = {normal(), real ? 0.0 : normal()};
                a(j, i) = std::conj(a(i, j));
            }
        }
        return a;
    }

    // Mean-zero unit-variance law on k points with probabilities bounded away from 0.
    rmtlab::AtomDistribution discrete_atom(std::size_t k) {
        std::vector<double> x(k), p(k);
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            x[j] = uniform(-2.0, 2.0);
            p[j] = uniform(0.1, 1.0);
            total += p[j];
        }
        double mean = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            p[j] /= total;
            mean += p[j] * x[j];
        }
        double var = 0.0;
        for (std::size_t j = 0; j < k; ++j) var += p[j] * (x[j] - mean) * (x[j] - mean);
        std::vector<rmtlab::AtomPoint> pts;
        for (std::size_t j = 0; j < k; ++j) pts.push_back({(x[j] - mean) / std::sqrt(var), p[j]});
        return rmtlab::AtomDistribution::discrete(pts);
    }

    std::vector<double> sorted_spectrum(std::size_t n, double spread = 1.0) {
        std::vector<double> v(n);
        for (auto& x : v) x = spread * normal();
        std::sort(v.begin(), v.end());
        return v;
    }

private:
    rmtlab::CounterStream stream_;
};

}  // namespace testgen
