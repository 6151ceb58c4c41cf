#ifndef SUBFOREST_SAMPLING_HPP
#define SUBFOREST_SAMPLING_HPP

#include <cstdint>
#include <cstddef>
#include <vector>

namespace subforest {

// Counter-based generator: the i-th output is finalize(state0 + i * gamma)
// where finalize is the splitmix64 mixing function (Vigna 2015, public
// domain; also Steele/Lea/Flood 2014). The whole random layer is built on
// this one primitive so that every artifact is bit-reproducible across
// platforms and thread counts.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t initial_state) : state_(initial_state) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // Uniform on [0,1), 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), unbiased (Lemire's multiply-shift with
    // rejection). n must be >= 1.
    std::uint64_t next_below(std::uint64_t n);

    // Standard normal via Box-Muller; the spare deviate is cached in the
    // generator state, so copies of an Rng replay identically.
    double next_gaussian();

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Realizes the per-tree / per-repetition randomness Theta_j: each
// (master_seed, stream_id) pair is hashed to its own position on the
// generator orbit. Pure function, no global state.
Rng derive_stream(std::uint64_t master_seed, std::uint64_t stream_id);

// Nested derivation for harnesses that need a seed per (repetition, role)
// pair; forwards to derive_stream twice.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t hi, std::uint64_t lo);

// a_n distinct indices in [0, n), every a_n-subset equally likely.
// Partial Fisher-Yates over an index array.
std::vector<std::size_t> subsample_without_replacement(std::size_t n, std::size_t a_n, Rng& g);

// n i.i.d. uniform indices in [0, n), i.e. a bootstrap sample.
std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& g);

} // namespace subforest

#endif
