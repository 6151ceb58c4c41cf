#include "subforest/cart.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace subforest {

namespace {

// Midpoint that is guaranteed to route lo left and hi right even when the
// two values are adjacent doubles (the midpoint can round up to hi; fall
// back to lo itself, routing is "<= threshold goes left").
double admissible_threshold(double lo, double hi) {
    double mid = lo + (hi - lo) / 2.0;
    return mid < hi ? mid : lo;
}

struct ValueEntry {
    double value;
    std::size_t row;
};

// Two-pass summed within-child squared deviations for one candidate split,
// iterating the rows in the order given. Used to settle near-ties with
// arithmetic that does not depend on which dimension proposed the split.
double children_sse(const Dataset& data, std::span<const std::size_t> rows, std::size_t dim,
                    double threshold) {
    double sum_left = 0.0, sum_right = 0.0;
    std::size_t n_left = 0, n_right = 0;
    for (auto r : rows) {
        if (data.features(r, dim) <= threshold) {
            sum_left += data.responses[r];
            ++n_left;
        } else {
            sum_right += data.responses[r];
            ++n_right;
        }
    }
    const double mean_left = sum_left / static_cast<double>(n_left);
    const double mean_right = sum_right / static_cast<double>(n_right);
    double sse = 0.0;
    for (auto r : rows) {
        const double m = data.features(r, dim) <= threshold ? mean_left : mean_right;
        sse += (data.responses[r] - m) * (data.responses[r] - m);
    }
    return sse;
}

} // namespace

std::optional<Split> best_split(const Dataset& data, std::span<const std::size_t> in_rows,
                                std::span<const std::size_t> candidate_dims) {
    const std::size_t c = in_rows.size();
    if (c < 2) throw std::invalid_argument("best_split: node needs at least 2 points");
    if (candidate_dims.empty()) throw std::invalid_argument("best_split: no candidate dims");

    // All arithmetic below iterates the rows in ascending row order, so the
    // selected split cannot depend on how the caller permuted its sample.
    std::vector<std::size_t> rows(in_rows.begin(), in_rows.end());
    std::sort(rows.begin(), rows.end());

    // Centre responses on the node mean; split selection is invariant to
    // the shift and the scan sums stay well conditioned.
    double mean = 0.0;
    for (auto r : rows) mean += data.responses[r];
    mean /= static_cast<double>(c);
    double node_ss = 0.0;
    for (auto r : rows) {
        const double y = data.responses[r] - mean;
        node_ss += y * y;
    }

    // All responses identical: every split has zero gain, the tie rule
    // selects the lowest candidate dimension at its lowest admissible
    // threshold.
    bool constant_y = true;
    for (auto r : rows)
        if (data.responses[r] != data.responses[rows[0]]) {
            constant_y = false;
            break;
        }

    std::vector<ValueEntry> order(c);
    struct Candidate {
        double score;
        std::size_t dim;
        double threshold;
    };
    std::vector<Candidate> candidates;
    double best_score = 0.0;
    bool found = false;

    for (auto dim : candidate_dims) {
        for (std::size_t i = 0; i < c; ++i) order[i] = {data.features(rows[i], dim), rows[i]};
        std::sort(order.begin(), order.end(), [](const ValueEntry& a, const ValueEntry& b) {
            if (a.value != b.value) return a.value < b.value;
            return a.row < b.row;
        });
        if (order.front().value == order.back().value) continue; // constant dimension

        if (constant_y) {
            const auto next_distinct =
                std::upper_bound(order.begin(), order.end(), order[0].value,
                                 [](double v, const ValueEntry& e) { return v < e.value; });
            return Split{dim, admissible_threshold(order[0].value, next_distinct->value), 0.0};
        }

        double left_sum = 0.0;
        for (std::size_t i = 0; i + 1 < c; ++i) {
            left_sum += data.responses[order[i].row] - mean;
            if (order[i + 1].value == order[i].value) continue;
            const double nl = static_cast<double>(i + 1);
            const double nr = static_cast<double>(c - i - 1);
            // maximizing this score is equivalent to minimizing the summed
            // within-child squared deviations
            const double right_sum = 0.0 - left_sum;
            const double score = left_sum * left_sum / nl + right_sum * right_sum / nr;
            candidates.push_back({score, dim, admissible_threshold(order[i].value,
                                                                   order[i + 1].value)});
            if (!found || score > best_score) {
                found = true;
                best_score = score;
            }
        }
    }
    if (!found) return std::nullopt;

    // Mathematically tied candidates can carry different rounding noise
    // from the prefix scan (mirrored partitions, equal-variance splits).
    // Settle everything within a whisker of the best by the two-pass
    // criterion, lowest dimension then lowest threshold first.
    const double eps = 1e-9 * node_ss + 1e-300;
    Split best{0, 0.0, 0.0};
    double best_sse = 0.0;
    bool have = false;
    for (const auto& cand : candidates) {
        if (cand.score < best_score - eps) continue;
        const double sse = children_sse(data, rows, cand.dim, cand.threshold);
        if (!have || sse < best_sse) {
            have = true;
            best_sse = sse;
            best = {cand.dim, cand.threshold, 0.0};
        }
    }

    // Gain recomputed from scratch against the parent's sum of squares.
    double sse_parent = 0.0;
    for (auto r : rows) {
        const double y = data.responses[r];
        sse_parent += (y - mean) * (y - mean);
    }
    best.gain = std::max(0.0, sse_parent - best_sse);
    return best;
}

namespace {

struct GrowContext {
    const Dataset& data;
    const CartParams& params;
    Rng& g;
    RegressionTree& tree;
    std::vector<std::size_t>& rows;
    std::vector<std::size_t> scratch{};

    std::vector<std::size_t> draw_dims() {
        auto dims = subsample_without_replacement(data.d(), params.mtry, g);
        std::sort(dims.begin(), dims.end());
        return dims;
    }

    std::size_t create_node(std::int32_t parent, std::size_t begin, std::size_t end) {
        TreeNode n;
        n.parent = parent;
        n.count = end - begin;
        tree.nodes().push_back(n);
        return tree.nodes().size() - 1;
    }

    void finish_leaf(std::size_t id, std::size_t begin, std::size_t end) {
        scratch.assign(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                       rows.begin() + static_cast<std::ptrdiff_t>(end));
        std::sort(scratch.begin(), scratch.end());
        double sum = 0.0;
        for (auto r : scratch) sum += data.responses[r];
        tree.nodes()[id].leaf_mean = sum / static_cast<double>(scratch.size());
    }

    // Stable partition of rows[begin,end) on the split; returns the start
    // of the right block.
    std::size_t apply_split(const Split& s, std::size_t begin, std::size_t end) {
        auto mid = std::stable_partition(
            rows.begin() + static_cast<std::ptrdiff_t>(begin),
            rows.begin() + static_cast<std::ptrdiff_t>(end),
            [&](std::size_t r) { return data.features(r, s.dim) <= s.threshold; });
        return static_cast<std::size_t>(mid - rows.begin());
    }
};

void grow_depth_first(GrowContext& ctx, std::size_t id, std::size_t begin, std::size_t end) {
    const std::size_t c = end - begin;
    if (c < 2 || c < ctx.params.nodesize) {
        ctx.finish_leaf(id, begin, end);
        return;
    }
    auto dims = ctx.draw_dims();
    auto split = best_split(ctx.data, {ctx.rows.data() + begin, c}, dims);
    if (!split) {
        ctx.finish_leaf(id, begin, end);
        return;
    }
    const std::size_t mid = ctx.apply_split(*split, begin, end);
    auto& node = ctx.tree.nodes()[id];
    node.split_dim = static_cast<std::int32_t>(split->dim);
    node.threshold = split->threshold;
    const std::size_t left = ctx.create_node(static_cast<std::int32_t>(id), begin, mid);
    const std::size_t right = ctx.create_node(static_cast<std::int32_t>(id), mid, end);
    ctx.tree.nodes()[id].left = static_cast<std::int32_t>(left);
    ctx.tree.nodes()[id].right = static_cast<std::int32_t>(right);
    grow_depth_first(ctx, left, begin, mid);
    grow_depth_first(ctx, right, mid, end);
}

struct Candidate {
    double gain;
    std::size_t node_id;
    std::size_t begin, end;
    Split split;
};

struct CandidateOrder {
    bool operator()(const Candidate& a, const Candidate& b) const {
        if (a.gain != b.gain) return a.gain < b.gain; // max-heap on gain
        return a.node_id > b.node_id;                 // then earliest node
    }
};

void grow_best_first(GrowContext& ctx, std::size_t max_leaves) {
    std::priority_queue<Candidate, std::vector<Candidate>, CandidateOrder> frontier;

    // evaluates a fresh leaf: nodes meeting the size rule draw their mtry
    // dimensions (in creation order, keeping the stream deterministic) and
    // are queued when they admit a positive-gain split
    auto consider = [&](std::size_t id, std::size_t begin, std::size_t end) {
        const std::size_t c = end - begin;
        if (c < 2 || c < ctx.params.nodesize) return;
        auto dims = ctx.draw_dims();
        auto split = best_split(ctx.data, {ctx.rows.data() + begin, c}, dims);
        if (split && split->gain > 0.0) frontier.push({split->gain, id, begin, end, *split});
    };

    consider(0, 0, ctx.rows.size());
    std::size_t leaves = 1;
    while (leaves < max_leaves && !frontier.empty()) {
        Candidate cand = frontier.top();
        frontier.pop();
        const std::size_t mid = ctx.apply_split(cand.split, cand.begin, cand.end);
        auto& node = ctx.tree.nodes()[cand.node_id];
        node.split_dim = static_cast<std::int32_t>(cand.split.dim);
        node.threshold = cand.split.threshold;
        node.leaf_mean = 0.0;
        const std::size_t left =
            ctx.create_node(static_cast<std::int32_t>(cand.node_id), cand.begin, mid);
        const std::size_t right =
            ctx.create_node(static_cast<std::int32_t>(cand.node_id), mid, cand.end);
        ctx.tree.nodes()[cand.node_id].left = static_cast<std::int32_t>(left);
        ctx.tree.nodes()[cand.node_id].right = static_cast<std::int32_t>(right);
        ++leaves;
        consider(left, cand.begin, mid);
        consider(right, mid, cand.end);
    }

    // finalize leaf statistics
    std::vector<std::pair<std::size_t, std::pair<std::size_t, std::size_t>>> spans;
    spans.push_back({0, {0, ctx.rows.size()}});
    for (std::size_t i = 0; i < spans.size(); ++i) {
        auto [id, range] = spans[i];
        const auto& n = ctx.tree.nodes()[id];
        if (n.left < 0) {
            ctx.finish_leaf(id, range.first, range.second);
        } else {
            // recover the child ranges by re-partitioning; stable, so this
            // reproduces the exact layout used during growth
            Split s{static_cast<std::size_t>(n.split_dim), n.threshold, 0.0};
            const std::size_t mid = ctx.apply_split(s, range.first, range.second);
            spans.push_back({static_cast<std::size_t>(n.left), {range.first, mid}});
            spans.push_back({static_cast<std::size_t>(n.right), {mid, range.second}});
        }
    }
}

} // namespace

RegressionTree grow_cart_tree(const Dataset& data, std::vector<std::size_t> rows,
                              const CartParams& params, Rng& g) {
    if (rows.empty()) throw std::invalid_argument("grow_cart_tree: empty index list");
    if (params.mtry < 1 || params.mtry > data.d())
        throw std::invalid_argument("grow_cart_tree: need 1 <= mtry <= d");
    if (params.nodesize < 1) throw std::invalid_argument("grow_cart_tree: nodesize >= 1");
    if (params.maxnodes && *params.maxnodes < 2)
        throw std::invalid_argument("grow_cart_tree: maxnodes >= 2");

    RegressionTree tree(data.d());
    GrowContext ctx{data, params, g, tree, rows};
    ctx.create_node(-1, 0, rows.size());
    if (params.maxnodes)
        grow_best_first(ctx, *params.maxnodes);
    else
        grow_depth_first(ctx, 0, 0, rows.size());
    return tree;
}

} // namespace subforest
