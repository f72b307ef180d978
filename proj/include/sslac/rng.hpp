#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sslac {

// Named deterministic random stream. All randomness in a run fans out from
// one master seed through derive(), so split/init/noise/batch draws stay
// independent and reproducible.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    static RngStream derive(std::uint64_t master_seed, std::string_view name) {
        // FNV-1a over the stream name, mixed with the master seed.
        std::uint64_t h = 14695981039346656037ull;
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return RngStream(master_seed ^ h);
    }

    std::uint64_t next_u64() { return gen_(); }

    // Unbiased integer in [0, n).
    std::size_t index(std::size_t n) {
        std::uniform_int_distribution<std::size_t> d(0, n - 1);
        return d(gen_);
    }

    double uniform(double lo = 0.0, double hi = 1.0) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(gen_);
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        std::normal_distribution<double> d(mean, stddev);
        return d(gen_);
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

}  // namespace sslac
