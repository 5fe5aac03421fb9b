#pragma once

// Shared error types, seeded randomness, and small numeric helpers used
// across the library.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace boss {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input or contract violation (bad dimensions, invalid distribution, ...).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

// File or stream failure.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

// Numerical breakdown (non-finite loss, violated internal identity).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(what) {}
};

inline void ensure(bool condition, const std::string& message) {
    if (!condition) throw ValidationError(message);
}

inline bool all_finite(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

inline uint64_t split_mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Counter-based seed derivation: stream `index` of master seed `seed`.
// Distinct indices give statistically independent streams, so sequences
// can be generated out of order or in parallel.
inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
    return split_mix64(split_mix64(seed) ^ split_mix64(index + 1));
}

// Deterministic random source. Double extraction and the normal sampler
// are written out explicitly so results do not depend on the standard
// library's distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(split_mix64(seed)) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Standard normal via Box-Muller, second value cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
        double u2 = next_double();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    // Draw an index from an unnormalized-tolerant probability vector.
    int categorical(std::span<const double> probs) {
        double u = next_double();
        double cumulative = 0.0;
        for (size_t i = 0; i < probs.size(); ++i) {
            cumulative += probs[i];
            if (u < cumulative) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline double log_sum_exp(std::span<const double> values) {
    double max_value = -std::numeric_limits<double>::infinity();
    for (double v : values) max_value = std::max(max_value, v);
    if (!std::isfinite(max_value)) return max_value;
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - max_value);
    return max_value + std::log(sum);
}

}  // namespace boss
