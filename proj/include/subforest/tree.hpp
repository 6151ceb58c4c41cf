#ifndef SUBFOREST_TREE_HPP
#define SUBFOREST_TREE_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace subforest {

// One node of a binary partition tree over [0,1]^d. Nodes are stored in
// creation order; index 0 is the root. Leaves have left == right == -1.
struct TreeNode {
    std::int32_t parent = -1;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t split_dim = -1;  // -1 on leaves
    double threshold = 0.0;       // query routing: x[dim] <= threshold goes left
    double leaf_mean = 0.0;       // 0 on internal nodes
    std::uint64_t count = 0;      // data points routed through the node
};

class RegressionTree {
public:
    RegressionTree() = default;
    explicit RegressionTree(std::size_t dimension) : dimension_(dimension) {}

    std::size_t dimension() const { return dimension_; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::vector<TreeNode>& nodes() { return nodes_; }

    bool is_leaf(std::size_t id) const { return nodes_[id].left < 0; }
    std::size_t leaf_count() const;

    // Leaf whose cell contains x; rejects points outside [0,1]^d.
    std::size_t leaf_for(std::span<const double> x) const;
    double predict(std::span<const double> x) const;

    // Cell bounds are not materialized per node (prohibitive at large d);
    // this reconstructs them by replaying the splits on the root-to-node
    // path.
    struct Cell {
        std::vector<double> lo, hi;
    };
    Cell cell_of(std::size_t id) const;

    // Line-oriented text form: one "id parent dim threshold mean count"
    // row per node, full double precision. Stable across runs and thread
    // counts, which makes it usable for byte-exact golden files.
    void serialize(std::ostream& out) const;
    static RegressionTree parse(std::istream& in, std::size_t dimension,
                                std::size_t node_count);

private:
    std::size_t dimension_ = 0;
    std::vector<TreeNode> nodes_;
};

} // namespace subforest

#endif
