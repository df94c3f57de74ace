#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mwsumm {

// Deterministic sampling helpers. std::mt19937_64 output is pinned by the
// standard, but std::uniform_int_distribution and std::shuffle are not, so
// seeded runs would not be reproducible across standard libraries. These
// helpers define the full sampling path.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound) by rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // First k elements of a random permutation of [0, n). k must be <= n.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        if (k > n) k = n;
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
            std::size_t j = i + static_cast<std::size_t>(next_below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace mwsumm
