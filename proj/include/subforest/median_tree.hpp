#ifndef SUBFOREST_MEDIAN_TREE_HPP
#define SUBFOREST_MEDIAN_TREE_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "subforest/dataset.hpp"
#include "subforest/sampling.hpp"
#include "subforest/tree.hpp"

namespace subforest {

struct MedianTreeParams {
    std::size_t sample_size = 0; // a_n
    std::size_t depth = 0;       // k_n, cuts per cell

    // a_n * 2^-k_n >= 4 and a_n >= 4
    void validate() const;
};

// Rank and value of the empirical median: the order statistic X_(l) with
// F_n(X_(l-1)) <= 1/2 < F_n(X_(l)), i.e. l = floor(n/2) + 1 (1-based).
std::pair<std::size_t, double> empirical_median(std::vector<double> values);

// Perfect binary tree of depth k_n. Every node cuts at the empirical
// median of one uniformly drawn coordinate; the data point(s) sitting at
// the median value are dropped, strictly smaller values go left and
// strictly larger go right. Query-time routing sends values equal to the
// cut left. rows must hold exactly a_n distinct row indices.
RegressionTree grow_median_tree(const Dataset& data, std::vector<std::size_t> rows,
                                const MedianTreeParams& params, Rng& g);

} // namespace subforest

#endif
