#ifndef SUBFOREST_TUNING_HPP
#define SUBFOREST_TUNING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "subforest/dataset.hpp"
#include "subforest/forest.hpp"

namespace subforest {

enum class SweepParameter { maxnodes, sampsize };

std::string to_string(SweepParameter p);
SweepParameter sweep_parameter_from_string(const std::string& s);

// One experiment: per repetition, draw a fresh dataset from the model,
// split it 80/20, train one forest per grid value plus the reference
// bootstrap forest on the same split, and score everything on the test
// part. Grid values are absolute counts: leaves per tree for maxnodes
// (trained with resample=none), subsample size a_n for sampsize (trained
// with resample=subsample). Both are measured against the training split.
struct SweepSpec {
    ModelSpec model;
    std::size_t n = 0; // dataset size before the split
    double train_fraction = 0.8;
    NoiseInterpretation noise_interpretation = NoiseInterpretation::variance;
    ForestConfig base; // kind/num_trees/mtry/nodesize shared by all forests
    SweepParameter parameter = SweepParameter::maxnodes;
    std::vector<std::size_t> grid;
    std::size_t repetitions = 50;
    std::uint64_t master_seed = 0;
};

struct SweepResult {
    std::vector<std::size_t> grid;
    std::vector<double> mean_risk;
    std::vector<double> std_risk;
    double reference_mean_risk = 0.0;
    double reference_std_risk = 0.0;
    std::size_t optimum = 0; // a grid value
    // per-repetition detail, [grid point][repetition]
    std::vector<std::vector<double>> risks;
    std::vector<double> reference_risks;
};

// Roles for derive_seed(master_seed, repetition, role); public so that
// paired reruns outside the sweep can reproduce any of its forests.
enum SweepSeedRole : std::uint64_t {
    sweep_seed_data = 0,
    sweep_seed_split = 1,
    sweep_seed_reference = 2,
    sweep_seed_grid_base = 3, // + grid index
};

SweepResult run_sweep(const SweepSpec& spec, int threads = 0);

// Smallest grid value whose mean risk sits within tolerance_fraction of
// the min-max risk spread of the minimum; smallest grid value when the
// spread is degenerate.
std::size_t extract_optimum(std::span<const std::size_t> grid,
                            std::span<const double> mean_risk,
                            double tolerance_fraction = 0.05);

// Grid fractions used when no explicit grid is given: maxnodes as
// {0.05,...,1.0} of the training size, sampsize as {0.1,...,1.0} of it.
std::vector<double> default_grid_fractions(SweepParameter p);
std::vector<std::size_t> grid_from_fractions(SweepParameter p, std::span<const double> fractions,
                                             std::size_t train_size);

struct ProportionalityRow {
    std::size_t n = 0;
    std::size_t optimum = 0;
    double ratio = 0.0; // optimum / n
};

// The optimum-vs-n study: run_sweep + extract_optimum for each n, grids
// rescaled per n from the fractions.
std::vector<ProportionalityRow> proportionality_study(const ModelSpec& model,
                                                      std::span<const std::size_t> n_list,
                                                      const SweepSpec& spec_template,
                                                      std::span<const double> grid_fractions,
                                                      int threads = 0);

} // namespace subforest

#endif
