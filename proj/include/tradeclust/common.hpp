#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace tradeclust {

// Thrown for malformed configuration, contract violations and bad arguments.
// The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for defective input data (bad CSV rows, duplicate keys, empty files).
// The CLI maps this to exit code 3.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Index of the (row, col) cell, row > col, in a packed lower triangle
// stored row-major: (1,0), (2,0), (2,1), (3,0), ...
inline std::size_t tri_index(std::size_t row, std::size_t col) {
    return row * (row - 1) / 2 + col;
}

inline std::size_t tri_size(std::size_t n) { return n * (n - 1) / 2; }

// Deterministic RNG wrapper. std::mt19937_64 is bit-exact by the standard;
// the distribution helpers below avoid std::uniform_*_distribution, whose
// output is implementation-defined and would break cross-platform
// reproducibility of seeded streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform integer in [0, bound), bound > 0. Rejection sampling keeps the
    // draw unbiased.
    std::uint64_t uniform_u64(std::uint64_t bound) {
        if (bound == 0) throw ValidationError("uniform_u64: bound must be > 0");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    std::size_t uniform_index(std::size_t bound) {
        return static_cast<std::size_t>(uniform_u64(bound));
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform_real() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform_real() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// FNV-1a 64-bit; used for input/output digests in run manifests.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t seed = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a_file(const std::string& path);

// Shortest decimal that round-trips a double (printf "%.17g" trimmed).
std::string format_double(double x);

// Writes content to path atomically (temp file in the same directory, then
// rename).
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace tradeclust
