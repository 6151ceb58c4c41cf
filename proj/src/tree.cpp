#include "subforest/tree.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace subforest {

std::size_t RegressionTree::leaf_count() const {
    std::size_t c = 0;
    for (const auto& n : nodes_)
        if (n.left < 0) ++c;
    return c;
}

std::size_t RegressionTree::leaf_for(std::span<const double> x) const {
    if (x.size() != dimension_)
        throw std::invalid_argument("predict: point dimension mismatch");
    for (double v : x)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("predict: point outside [0,1]^d");
    std::size_t id = 0;
    while (nodes_[id].left >= 0) {
        const auto& n = nodes_[id];
        id = x[static_cast<std::size_t>(n.split_dim)] <= n.threshold
                 ? static_cast<std::size_t>(n.left)
                 : static_cast<std::size_t>(n.right);
    }
    return id;
}

double RegressionTree::predict(std::span<const double> x) const {
    return nodes_[leaf_for(x)].leaf_mean;
}

RegressionTree::Cell RegressionTree::cell_of(std::size_t id) const {
    Cell cell;
    cell.lo.assign(dimension_, 0.0);
    cell.hi.assign(dimension_, 1.0);
    // collect the path root -> id, then apply the splits top-down
    std::vector<std::size_t> path;
    for (std::size_t cur = id; cur != 0; cur = static_cast<std::size_t>(nodes_[cur].parent))
        path.push_back(cur);
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        const auto& par = nodes_[static_cast<std::size_t>(nodes_[*it].parent)];
        auto dim = static_cast<std::size_t>(par.split_dim);
        if (static_cast<std::size_t>(par.left) == *it)
            cell.hi[dim] = par.threshold;
        else
            cell.lo[dim] = par.threshold;
    }
    return cell;
}

void RegressionTree::serialize(std::ostream& out) const {
    char buf[40];
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        const auto& n = nodes_[id];
        out << id << ' ' << n.parent << ' ' << n.split_dim << ' ';
        std::snprintf(buf, sizeof buf, "%.17g", n.threshold);
        out << buf << ' ';
        std::snprintf(buf, sizeof buf, "%.17g", n.leaf_mean);
        out << buf << ' ' << n.count << '\n';
    }
}

RegressionTree RegressionTree::parse(std::istream& in, std::size_t dimension,
                                     std::size_t node_count) {
    RegressionTree tree(dimension);
    tree.nodes_.resize(node_count);
    for (std::size_t i = 0; i < node_count; ++i) {
        std::size_t id = 0;
        TreeNode n;
        if (!(in >> id >> n.parent >> n.split_dim >> n.threshold >> n.leaf_mean >> n.count))
            throw std::runtime_error("tree parse: truncated node list");
        if (id != i) throw std::runtime_error("tree parse: node ids out of order");
        tree.nodes_[i] = n;
    }
    // rebuild child links from the parent column
    for (std::size_t i = 1; i < node_count; ++i) {
        auto p = static_cast<std::size_t>(tree.nodes_[i].parent);
        if (p >= node_count) throw std::runtime_error("tree parse: bad parent id");
        if (tree.nodes_[p].left < 0)
            tree.nodes_[p].left = static_cast<std::int32_t>(i);
        else if (tree.nodes_[p].right < 0)
            tree.nodes_[p].right = static_cast<std::int32_t>(i);
        else
            throw std::runtime_error("tree parse: node has more than two children");
    }
    for (auto& n : tree.nodes_) {
        if (n.split_dim < 0) {
            n.left = n.right = -1;
        } else if (n.left < 0 || n.right < 0) {
            throw std::runtime_error("tree parse: internal node missing a child");
        }
    }
    return tree;
}

} // namespace subforest
