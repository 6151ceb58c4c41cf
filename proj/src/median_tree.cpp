#include "subforest/median_tree.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace subforest {

void MedianTreeParams::validate() const {
    if (sample_size < 4) throw std::invalid_argument("median tree: a_n must be >= 4");
    if (depth >= 62 || sample_size < (std::size_t{4} << depth))
        throw std::invalid_argument("median tree: constraint a_n * 2^-k >= 4 violated (a_n=" +
                                    std::to_string(sample_size) +
                                    ", k=" + std::to_string(depth) + ")");
}

std::pair<std::size_t, double> empirical_median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("empirical_median: empty list");
    std::sort(values.begin(), values.end());
    const std::size_t rank = values.size() / 2 + 1; // 1-based
    return {rank, values[rank - 1]};
}

namespace {

struct MedianGrow {
    const Dataset& data;
    std::size_t target_depth;
    Rng& g;
    RegressionTree& tree;

    void grow(std::size_t id, std::vector<std::size_t> rows, std::size_t depth) {
        if (depth == target_depth) {
            if (rows.empty())
                throw std::runtime_error("median tree: empty leaf at depth " +
                                         std::to_string(depth));
            std::sort(rows.begin(), rows.end());
            double sum = 0.0;
            for (auto r : rows) sum += data.responses[r];
            tree.nodes()[id].leaf_mean = sum / static_cast<double>(rows.size());
            return;
        }

        const auto dim = static_cast<std::size_t>(g.next_below(data.d()));
        std::vector<double> values(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) values[i] = data.features(rows[i], dim);
        const double cut = empirical_median(values).second;

        std::vector<std::size_t> left, right;
        for (auto r : rows) {
            const double v = data.features(r, dim);
            if (v < cut)
                left.push_back(r);
            else if (v > cut)
                right.push_back(r);
            // points at the cut value are removed, not sent down
        }
        if (left.empty() || right.empty())
            throw std::runtime_error("median tree: node emptied by ties at depth " +
                                     std::to_string(depth) + " on dimension " +
                                     std::to_string(dim));

        auto& node = tree.nodes()[id];
        node.split_dim = static_cast<std::int32_t>(dim);
        node.threshold = cut;
        const auto make_child = [&](std::size_t count) {
            TreeNode child;
            child.parent = static_cast<std::int32_t>(id);
            child.count = count;
            tree.nodes().push_back(child);
            return tree.nodes().size() - 1;
        };
        const std::size_t lid = make_child(left.size());
        const std::size_t rid = make_child(right.size());
        tree.nodes()[id].left = static_cast<std::int32_t>(lid);
        tree.nodes()[id].right = static_cast<std::int32_t>(rid);
        grow(lid, std::move(left), depth + 1);
        grow(rid, std::move(right), depth + 1);
    }
};

} // namespace

RegressionTree grow_median_tree(const Dataset& data, std::vector<std::size_t> rows,
                                const MedianTreeParams& params, Rng& g) {
    params.validate();
    if (rows.size() != params.sample_size)
        throw std::invalid_argument("grow_median_tree: |rows| must equal a_n");

    RegressionTree tree(data.d());
    TreeNode root;
    root.count = rows.size();
    tree.nodes().push_back(root);
    MedianGrow ctx{data, params.depth, g, tree};
    ctx.grow(0, std::move(rows), 0);
    return tree;
}

} // namespace subforest
