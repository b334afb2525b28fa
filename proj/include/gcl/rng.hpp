#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace gcl {

// Splittable counter-based PRNG.
//
// Each stream is a (key, counter) pair; draw i of a stream is a fixed avalanche
// hash of key + i*gamma (the SplitMix64 output function). Draws therefore depend
// only on the seed, the split labels and the draw index, never on global state.
// Child streams derived by split() are keyed by hashing the parent key with the
// label, so subsystems (augmentation, mixup, init, ...) own streams that cannot
// interfere with each other no matter how many values each consumes.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(mix64(seed + kGamma)), ctr_(0) {}

    std::uint64_t key() const { return key_; }

    std::uint64_t next_u64() { return mix64(key_ + (ctr_++) * kGamma); }

    // Uniform on [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; never zero, safe under log().
    double next_double_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return next_double() < p; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller (one value per call, fixed draw count of 2).
    double normal() {
        const double u1 = next_double_open();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Gamma(shape, 1) by Marsaglia-Tsang, with the usual boost for shape < 1.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = next_double_open();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_double_open();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        if (a == 1.0 && b == 1.0) return next_double();
        for (;;) {
            const double x = gamma(a);
            const double y = gamma(b);
            if (x + y > 0.0) return x / (x + y);
        }
    }

    // Fisher-Yates shuffle of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

    // Independent child stream named by a label.
    Rng split(std::string_view label) const {
        return Rng(mix64(key_ ^ mix64(fnv1a(label) + kGamma2)), RawKey{});
    }

    // Independent child stream named by a label and an index (epochs, runs, ...).
    Rng split(std::string_view label, std::uint64_t index) const {
        const std::uint64_t h = mix64(fnv1a(label) + kGamma2);
        return Rng(mix64(key_ ^ h ^ mix64(index + kGamma)), RawKey{});
    }

private:
    struct RawKey {};
    Rng(std::uint64_t key, RawKey) : key_(key), ctr_(0) {}

    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t kGamma2 = 0xD1B54A32D192ED03ull;

    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xCBF29CE484222325ull;
        for (const char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ull;
        }
        return h;
    }

    std::uint64_t key_;
    std::uint64_t ctr_;
};

} // namespace gcl
