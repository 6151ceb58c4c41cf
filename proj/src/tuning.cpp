#include "subforest/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "subforest/sampling.hpp"

namespace subforest {

std::string to_string(SweepParameter p) {
    return p == SweepParameter::maxnodes ? "maxnodes" : "sampsize";
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
    if (s == "maxnodes") return SweepParameter::maxnodes;
    if (s == "sampsize") return SweepParameter::sampsize;
    throw std::invalid_argument("unknown sweep parameter '" + s + "'");
}

namespace {

std::size_t train_size_of(const SweepSpec& spec) {
    return static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(spec.n)));
}

void validate_spec(const SweepSpec& spec) {
    if (spec.repetitions < 1) throw std::invalid_argument("sweep: repetitions >= 1");
    if (spec.grid.empty()) throw std::invalid_argument("sweep: empty grid");
    if (!std::is_sorted(spec.grid.begin(), spec.grid.end()) ||
        std::adjacent_find(spec.grid.begin(), spec.grid.end()) != spec.grid.end())
        throw std::invalid_argument("sweep: grid must be strictly increasing");
    const std::size_t train_size = train_size_of(spec);
    for (auto v : spec.grid) {
        if (spec.parameter == SweepParameter::maxnodes && (v < 2 || v > train_size))
            throw std::invalid_argument("sweep: maxnodes value " + std::to_string(v) +
                                        " not admissible for train size " +
                                        std::to_string(train_size));
        if (spec.parameter == SweepParameter::sampsize && (v < 1 || v > train_size))
            throw std::invalid_argument("sweep: sampsize value " + std::to_string(v) +
                                        " not admissible for train size " +
                                        std::to_string(train_size));
    }
}

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

Moments moments(std::span<const double> xs) {
    Moments m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return m;
}

} // namespace

SweepResult run_sweep(const SweepSpec& spec, int threads) {
    validate_spec(spec);

    SweepResult result;
    result.grid = spec.grid;
    result.risks.assign(spec.grid.size(), std::vector<double>(spec.repetitions, 0.0));
    result.reference_risks.assign(spec.repetitions, 0.0);

    for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
        const auto data = generate_model(spec.model, spec.n,
                                         derive_seed(spec.master_seed, rep, sweep_seed_data),
                                         spec.noise_interpretation);
        const auto [train, test] = split_train_test(
            data, spec.train_fraction, derive_seed(spec.master_seed, rep, sweep_seed_split));

        // reference: plain bootstrap forest, same split
        ForestConfig ref = spec.base;
        ref.resample = Resample::bootstrap;
        ref.sample_size.reset();
        ref.maxnodes.reset();
        ref.master_seed = derive_seed(spec.master_seed, rep, sweep_seed_reference);
        result.reference_risks[rep] =
            empirical_l2_risk(train_forest(train, ref, threads), test, threads);

        for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
            ForestConfig cfg = spec.base;
            cfg.master_seed = derive_seed(spec.master_seed, rep, sweep_seed_grid_base + gi);
            if (spec.parameter == SweepParameter::maxnodes) {
                cfg.resample = Resample::none; // pruned regime: every tree sees all data
                cfg.sample_size.reset();
                cfg.maxnodes = spec.grid[gi];
            } else {
                cfg.resample = Resample::subsample;
                cfg.sample_size = spec.grid[gi];
                cfg.maxnodes.reset();
            }
            result.risks[gi][rep] =
                empirical_l2_risk(train_forest(train, cfg, threads), test, threads);
        }
    }

    result.mean_risk.resize(spec.grid.size());
    result.std_risk.resize(spec.grid.size());
    for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
        auto m = moments(result.risks[gi]);
        result.mean_risk[gi] = m.mean;
        result.std_risk[gi] = m.sd;
    }
    auto ref_m = moments(result.reference_risks);
    result.reference_mean_risk = ref_m.mean;
    result.reference_std_risk = ref_m.sd;
    result.optimum = extract_optimum(result.grid, result.mean_risk);
    return result;
}

std::size_t extract_optimum(std::span<const std::size_t> grid,
                            std::span<const double> mean_risk, double tolerance_fraction) {
    if (grid.empty() || grid.size() != mean_risk.size())
        throw std::invalid_argument("extract_optimum: empty or mismatched result");
    const double lo = *std::min_element(mean_risk.begin(), mean_risk.end());
    const double hi = *std::max_element(mean_risk.begin(), mean_risk.end());
    const double threshold = tolerance_fraction * (hi - lo);
    if (threshold <= 0.0) return grid[0]; // degenerate spread
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::abs(mean_risk[i] - lo) < threshold) return grid[i];
    return grid[grid.size() - 1]; // unreachable: the minimum itself qualifies
}

std::vector<double> default_grid_fractions(SweepParameter p) {
    std::vector<double> out;
    const double start = p == SweepParameter::maxnodes ? 0.05 : 0.1;
    for (double f = start; f < 1.0 + 1e-9; f += p == SweepParameter::maxnodes ? 0.05 : 0.1)
        out.push_back(f);
    return out;
}

std::vector<std::size_t> grid_from_fractions(SweepParameter p, std::span<const double> fractions,
                                             std::size_t train_size) {
    std::vector<std::size_t> grid;
    for (double f : fractions) {
        auto v = static_cast<std::size_t>(std::llround(f * static_cast<double>(train_size)));
        v = std::max<std::size_t>(v, p == SweepParameter::maxnodes ? 2 : 1);
        v = std::min(v, train_size);
        grid.push_back(v);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

std::vector<ProportionalityRow> proportionality_study(const ModelSpec& model,
                                                      std::span<const std::size_t> n_list,
                                                      const SweepSpec& spec_template,
                                                      std::span<const double> grid_fractions,
                                                      int threads) {
    std::vector<ProportionalityRow> rows;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        SweepSpec spec = spec_template;
        spec.model = model;
        spec.n = n_list[i];
        const auto train_size = static_cast<std::size_t>(
            std::llround(spec.train_fraction * static_cast<double>(spec.n)));
        spec.grid = grid_from_fractions(spec.parameter, grid_fractions, train_size);
        // one independent sub-experiment per sample size
        spec.master_seed = derive_seed(spec_template.master_seed, 0x6e5f73697a65ULL, n_list[i]);
        const auto result = run_sweep(spec, threads);
        rows.push_back({spec.n, result.optimum,
                        static_cast<double>(result.optimum) / static_cast<double>(spec.n)});
    }
    return rows;
}

} // namespace subforest
