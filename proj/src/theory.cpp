#include "subforest/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "subforest/median_tree.hpp"
#include "subforest/sampling.hpp"

namespace subforest {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void check_dimension(std::size_t d) {
    if (d < 1) throw std::invalid_argument("theory: d must be >= 1");
}

double weight_of(std::size_t d, const TheoryOptions& opts) {
    const auto dd = static_cast<double>(d);
    return opts.weight == ApproxWeight::linear_d ? dd : dd * std::sqrt(dd);
}

double constant_of(std::size_t d, const TheoryOptions& opts) {
    return opts.constant_override.value_or(lemma_constant(d));
}

} // namespace

double beta_of(std::size_t d) {
    check_dimension(d);
    return 1.0 - 3.0 / (4.0 * static_cast<double>(d));
}

double lemma_constant(std::size_t d) {
    check_dimension(d);
    return std::exp(12.0 / (4.0 * static_cast<double>(d) - 3.0));
}

double estimation_term(double n, double sigma2, double k) {
    return 2.0 * sigma2 * std::exp2(k) / n;
}

double approximation_term(std::size_t d, double sigma2, double L, double k,
                          const TheoryOptions& opts) {
    (void)sigma2;
    return weight_of(d, opts) * L * L * constant_of(d, opts) * std::pow(beta_of(d), k);
}

double risk_bound(std::size_t d, double n, double sigma2, double L, double k,
                  const TheoryOptions& opts) {
    check_dimension(d);
    if (n < 1.0 || sigma2 < 0.0 || L < 0.0 || k < 0.0)
        throw std::invalid_argument("theory: invalid bound inputs");
    return estimation_term(n, sigma2, k) + approximation_term(d, sigma2, L, k, opts);
}

double c3_constant(std::size_t d, double sigma2, double L, const TheoryOptions& opts) {
    check_dimension(d);
    if (!(sigma2 > 0.0) || !(L > 0.0))
        throw std::invalid_argument("theory: C3 requires sigma2 > 0 and L > 0");
    const double beta = beta_of(d);
    return std::log(-weight_of(d, opts) * L * L * constant_of(d, opts) * std::log(beta) /
                    (2.0 * sigma2 * kLn2));
}

DepthChoice optimal_depth(std::size_t d, double n, double sigma2, double L,
                          const TheoryOptions& opts) {
    if (n < 1.0) throw std::invalid_argument("theory: n must be >= 1");
    const double beta = beta_of(d);
    const double c3 = c3_constant(d, sigma2, L, opts);
    DepthChoice choice;
    choice.k_real = (std::log(n) + c3) / (kLn2 - std::log(beta));

    const double lo = std::max(0.0, std::floor(choice.k_real));
    const double hi = std::max(0.0, std::ceil(choice.k_real));
    const double bound_lo = risk_bound(d, n, sigma2, L, lo, opts);
    const double bound_hi = risk_bound(d, n, sigma2, L, hi, opts);
    choice.k_int = static_cast<long>(bound_lo <= bound_hi ? lo : hi);
    return choice;
}

SubsampleSize min_subsample_size(std::size_t d, double n, double sigma2, double L,
                                 const TheoryOptions& opts) {
    if (n < 1.0) throw std::invalid_argument("theory: n must be >= 1");
    const double beta = beta_of(d);
    const double c3 = c3_constant(d, sigma2, L, opts);
    SubsampleSize s;
    s.exponent = kLn2 / (kLn2 - std::log(beta));
    // a_n = 4 * 2^(k_n) with k_n at its optimum, i.e. 4 * e^(C3 * exponent) * n^exponent
    s.c4 = 4.0 * std::exp(c3 * s.exponent);
    s.raw = s.c4 * std::pow(n, s.exponent);
    s.clamped = s.raw > n;
    s.value = s.clamped ? n : s.raw;
    return s;
}

double rate_exponent(std::size_t d) {
    const double beta = beta_of(d);
    return std::log(beta) / (kLn2 - std::log(beta));
}

double centred_rate_exponent(std::size_t d) {
    check_dimension(d);
    return -3.0 / (4.0 * static_cast<double>(d) * kLn2 + 3.0);
}

double exact_side_second_moment(std::span<const std::size_t> counts, std::size_t d) {
    check_dimension(d);
    if (counts.empty()) throw std::invalid_argument("theory: count chain must hold n_0");
    if (counts.back() < 1) throw std::invalid_argument("theory: counts must be >= 1");
    const auto dd = static_cast<double>(d);
    double product = 1.0;
    for (std::size_t j = 1; j < counts.size(); ++j) {
        const auto prev = static_cast<double>(counts[j - 1]);
        const auto cur = static_cast<double>(counts[j]);
        if (2 * counts[j] > counts[j - 1])
            throw std::invalid_argument("theory: chain violates n_j <= n_{j-1}/2 at level " +
                                        std::to_string(j));
        // second moment of Beta(n_j + 1, n_{j-1} - n_j), mixed with the
        // (d-1)/d chance that this level split another axis
        const double beta_m2 = (cur + 1.0) * (cur + 2.0) / ((prev + 1.0) * (prev + 2.0));
        product *= (dd - 1.0) / dd + beta_m2 / dd;
    }
    return product;
}

namespace {

struct TrialResult {
    double squared_side = 1.0;
    std::vector<std::size_t> chain;
};

TrialResult run_trial(std::size_t a_n, std::size_t k, std::size_t d, std::uint64_t master_seed,
                      std::uint64_t trial, DescentMode mode) {
    Rng g = derive_stream(master_seed, trial);
    std::vector<double> points(a_n * d);
    for (auto& v : points) v = g.next_unit();

    std::vector<std::size_t> alive(a_n);
    for (std::size_t i = 0; i < a_n; ++i) alive[i] = i;

    TrialResult res;
    res.chain.reserve(k + 1);
    res.chain.push_back(a_n);
    double lo0 = 0.0, hi0 = 1.0;
    std::vector<double> column;
    for (std::size_t level = 0; level < k; ++level) {
        const auto dim = static_cast<std::size_t>(g.next_below(d));
        const bool go_left_by_coin = (g.next_u64() & 1ULL) == 0;
        column.resize(alive.size());
        for (std::size_t i = 0; i < alive.size(); ++i) column[i] = points[alive[i] * d + dim];
        const double cut = empirical_median(column).second;

        std::vector<std::size_t> side;
        const bool go_left = mode == DescentMode::random_path ? go_left_by_coin : (0.5 <= cut);
        for (auto idx : alive) {
            const double v = points[idx * d + dim];
            if (go_left ? v < cut : v > cut) side.push_back(idx);
        }
        if (side.empty())
            throw std::runtime_error("lemma mc: side emptied by ties (duplicate coordinates)");
        if (dim == 0) {
            if (go_left)
                hi0 = cut;
            else
                lo0 = cut;
        }
        alive.swap(side);
        res.chain.push_back(alive.size());
    }
    res.squared_side = (hi0 - lo0) * (hi0 - lo0);
    return res;
}

} // namespace

LemmaMcResult mc_side_second_moment(std::size_t a_n, std::size_t k, std::size_t d,
                                    std::size_t trials, std::uint64_t master_seed,
                                    DescentMode mode, int threads,
                                    std::vector<std::vector<std::size_t>>* chains_out,
                                    std::vector<double>* squared_sides_out) {
    check_dimension(d);
    if (trials < 1) throw std::invalid_argument("lemma mc: trials must be >= 1");
    MedianTreeParams{a_n, k}.validate();

    std::vector<double> v2(trials), exact(trials);
    std::vector<std::vector<std::size_t>> chains(trials);
    const auto count = static_cast<std::ptrdiff_t>(trials);
    std::string first_error;
#ifdef _OPENMP
    const int num = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(num)
#else
    (void)threads;
#endif
    for (std::ptrdiff_t t = 0; t < count; ++t) {
        try {
            auto r = run_trial(a_n, k, d, master_seed, static_cast<std::uint64_t>(t), mode);
            v2[static_cast<std::size_t>(t)] = r.squared_side;
            exact[static_cast<std::size_t>(t)] = exact_side_second_moment(r.chain, d);
            chains[static_cast<std::size_t>(t)] = std::move(r.chain);
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) throw std::runtime_error(first_error);

    LemmaMcResult res;
    res.trials = trials;
    double sum = 0.0, exact_sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        sum += v2[t];
        exact_sum += exact[t];
    }
    res.estimate = sum / static_cast<double>(trials);
    res.exact_chain_average = exact_sum / static_cast<double>(trials);
    double ss = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const double r = v2[t] - res.estimate;
        ss += r * r;
    }
    res.std_error = trials > 1
                        ? std::sqrt(ss / static_cast<double>(trials - 1) /
                                    static_cast<double>(trials))
                        : 0.0;
    res.lemma_bound = lemma_constant(d) * std::pow(beta_of(d), static_cast<double>(k));
    if (chains_out) *chains_out = std::move(chains);
    if (squared_sides_out) *squared_sides_out = std::move(v2);
    return res;
}

} // namespace subforest
