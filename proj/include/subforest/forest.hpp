#ifndef SUBFOREST_FOREST_HPP
#define SUBFOREST_FOREST_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subforest/dataset.hpp"
#include "subforest/tree.hpp"

namespace subforest {

enum class TreeKind { cart, median };
enum class Resample { bootstrap, subsample, none };

std::string to_string(TreeKind k);
std::string to_string(Resample r);
TreeKind tree_kind_from_string(const std::string& s);
Resample resample_from_string(const std::string& s);

// Tuning knobs. Only the fields relevant to the tree kind may be set;
// validation rejects the rest. Unset cart fields fall back to the standard
// defaults (M=500, bootstrap, mtry=ceil(d/3), nodesize=5, no leaf cap).
struct ForestConfig {
    TreeKind kind = TreeKind::cart;
    std::size_t num_trees = 500;
    Resample resample = Resample::bootstrap;
    std::optional<std::size_t> sample_size; // a_n, subsample only
    std::optional<std::size_t> mtry;        // cart
    std::optional<std::size_t> nodesize;    // cart
    std::optional<std::size_t> maxnodes;    // cart
    std::optional<std::size_t> depth;       // k_n, median
    std::uint64_t master_seed = 0;
};

// Config with defaults filled in for a concrete (n, d); throws on any
// inadmissible combination.
struct ResolvedConfig {
    TreeKind kind;
    std::size_t num_trees;
    Resample resample;
    std::size_t sample_size; // n for bootstrap / none
    std::size_t mtry = 0;
    std::size_t nodesize = 0;
    std::optional<std::size_t> maxnodes;
    std::size_t depth = 0;
    std::uint64_t master_seed;
};

ResolvedConfig resolve_config(const ForestConfig& config, std::size_t n, std::size_t d);

struct Forest {
    ResolvedConfig config;
    std::size_t train_n = 0;
    std::size_t train_d = 0;
    std::vector<RegressionTree> trees;
};

// Tree j is grown from the index sample drawn on stream (master_seed, j),
// so the result is independent of thread count and scheduling. threads = 0
// uses all available cores.
Forest train_forest(const Dataset& train, const ForestConfig& config, int threads = 0);

// Plain sequential reference; bit-identical to train_forest by contract.
Forest train_forest_serial(const Dataset& train, const ForestConfig& config);

// Mean of the tree predictions, summed in tree order.
double predict_forest(const Forest& forest, std::span<const double> x);

std::vector<double> predict_batch(const Forest& forest, const Dataset& points,
                                  int threads = 0);

// Mean over the test set of (prediction - response)^2.
double empirical_l2_risk(const Forest& forest, const Dataset& test, int threads = 0);

void serialize_forest(const Forest& forest, std::ostream& out);
void save_forest(const Forest& forest, const std::string& path);
Forest load_forest(const std::string& path);

} // namespace subforest

#endif
