#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace qaforge {

// Deterministic RNG wrapper. std::mt19937_64 output is pinned by the standard,
// but the std distributions are not, so sampling helpers live here instead.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Unbiased integer in [0, n), rejection sampled.
    uint64_t below(uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below(0)");
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    // Uniform in [0, 1).
    double real() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Index drawn proportionally to weights (all > 0).
    size_t weighted(const std::vector<double>& weights) {
        double total = 0;
        for (double w : weights) total += w;
        if (total <= 0) throw std::invalid_argument("Rng::weighted: non-positive total");
        double r = real() * total;
        double acc = 0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (r < acc) return i;
        }
        return weights.size() - 1;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace qaforge
