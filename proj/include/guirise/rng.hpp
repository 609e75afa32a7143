#pragma once

#include <cstdint>
#include <vector>

namespace guirise {

// Splitmix64 generator. std::mt19937 plus the standard distributions are
// implementation-defined, which would break the bit-identical-rerun
// guarantee, so all randomness in the project flows through this.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Rejection-free modulo bias is irrelevant at our n.
    uint64_t next_below(uint64_t n) { return n ? next_u64() % n : 0; }

    // Uniform integer in [lo, hi], inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(next_below(static_cast<uint64_t>(hi - lo + 1)));
    }

    // Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[next_below(v.size())];
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = next_below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

// Hash-mixes a stream of values into one seed; used to derive independent
// per-(iteration, episode, step, member) seeds from the root seed.
inline uint64_t mix_seed(uint64_t a) {
    a = (a ^ (a >> 30)) * 0xbf58476d1ce4e5b9ULL;
    a = (a ^ (a >> 27)) * 0x94d049bb133111ebULL;
    return a ^ (a >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) { return mix_seed(a * 0x9e3779b97f4a7c15ULL + b + 0x2545f4914f6cdd1dULL); }

template <typename... Rest>
inline uint64_t mix_seed(uint64_t a, uint64_t b, Rest... rest) {
    return mix_seed(mix_seed(a, b), static_cast<uint64_t>(rest)...);
}

} // namespace guirise
