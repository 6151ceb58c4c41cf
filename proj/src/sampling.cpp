#include "subforest/sampling.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace subforest {

std::uint64_t Rng::next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be >= 1");
    while (true) {
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        std::uint64_t lo = static_cast<std::uint64_t>(m);
        if (lo >= n || lo >= (-n) % n) return static_cast<std::uint64_t>(m >> 64);
    }
}

double Rng::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0,1] keeps the log finite.
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

Rng derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    // Two independent whitenings, xored. For a fixed seed distinct stream
    // ids map to distinct initial states (mix64 is a bijection).
    std::uint64_t s = mix64(master_seed ^ 0x5851f42d4c957f2dULL);
    std::uint64_t t = mix64(stream_id ^ 0x14057b7ef767814fULL);
    return Rng(s ^ t);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t hi, std::uint64_t lo) {
    return derive_stream(derive_stream(master_seed, hi).next_u64(), lo).next_u64();
}

std::vector<std::size_t> subsample_without_replacement(std::size_t n, std::size_t a_n, Rng& g) {
    if (a_n == 0 || a_n > n)
        throw std::invalid_argument("subsample_without_replacement: need 1 <= a_n <= n");
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < a_n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(g.next_below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(a_n);
    return pool;
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& g) {
    if (n == 0) throw std::invalid_argument("bootstrap_sample: n must be >= 1");
    std::vector<std::size_t> out(n);
    for (auto& v : out) v = static_cast<std::size_t>(g.next_below(n));
    return out;
}

} // namespace subforest
