#ifndef SUBFOREST_CART_HPP
#define SUBFOREST_CART_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "subforest/dataset.hpp"
#include "subforest/sampling.hpp"
#include "subforest/tree.hpp"

namespace subforest {

struct Split {
    std::size_t dim = 0;
    double threshold = 0.0;
    double gain = 0.0; // parent sum-of-squares minus children sum-of-squares
};

// Variance-minimizing split over the given rows (duplicates allowed, they
// carry bootstrap multiplicity). Candidate thresholds are the midpoints
// between consecutive distinct values of each candidate dimension; ties are
// broken toward the lower dimension index, then the lower threshold.
// Returns nullopt when every candidate dimension is constant on the node.
// candidate_dims must be sorted ascending for the tie rule to apply.
std::optional<Split> best_split(const Dataset& data, std::span<const std::size_t> rows,
                                std::span<const std::size_t> candidate_dims);

struct CartParams {
    std::size_t mtry = 1;
    std::size_t nodesize = 5;
    std::optional<std::size_t> maxnodes;
};

// Breiman-style recursive growth. Without maxnodes, a node is split while
// it holds >= nodesize points and any candidate dimension admits a split
// (zero-gain splits included). With maxnodes, growth is best-first: the
// leaf with the largest positive gain is split until the leaf budget is
// reached or no eligible leaf remains; zero-gain splits are never taken in
// this regime. mtry dimensions are redrawn at every node from g.
RegressionTree grow_cart_tree(const Dataset& data, std::vector<std::size_t> rows,
                              const CartParams& params, Rng& g);

} // namespace subforest

#endif
