#include "subforest/forest.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "subforest/cart.hpp"
#include "subforest/median_tree.hpp"
#include "subforest/sampling.hpp"

namespace subforest {

std::string to_string(TreeKind k) { return k == TreeKind::cart ? "cart" : "median"; }

std::string to_string(Resample r) {
    switch (r) {
        case Resample::bootstrap: return "bootstrap";
        case Resample::subsample: return "subsample";
        default: return "none";
    }
}

TreeKind tree_kind_from_string(const std::string& s) {
    if (s == "cart") return TreeKind::cart;
    if (s == "median") return TreeKind::median;
    throw std::invalid_argument("unknown tree kind '" + s + "'");
}

Resample resample_from_string(const std::string& s) {
    if (s == "bootstrap") return Resample::bootstrap;
    if (s == "subsample") return Resample::subsample;
    if (s == "none") return Resample::none;
    throw std::invalid_argument("unknown resample mode '" + s + "'");
}

ResolvedConfig resolve_config(const ForestConfig& config, std::size_t n, std::size_t d) {
    if (n == 0 || d == 0) throw std::invalid_argument("forest: empty training set");
    if (config.num_trees == 0) throw std::invalid_argument("forest: need at least one tree");

    ResolvedConfig r;
    r.kind = config.kind;
    r.num_trees = config.num_trees;
    r.resample = config.resample;
    r.master_seed = config.master_seed;

    if (config.sample_size && config.resample != Resample::subsample)
        throw std::invalid_argument("forest: sampsize is only valid with resample=subsample");
    if (config.resample == Resample::subsample) {
        if (!config.sample_size)
            throw std::invalid_argument("forest: resample=subsample requires sampsize");
        if (*config.sample_size == 0 || *config.sample_size > n)
            throw std::invalid_argument("forest: need 1 <= sampsize <= n");
        r.sample_size = *config.sample_size;
    } else {
        r.sample_size = n;
    }

    if (config.kind == TreeKind::cart) {
        if (config.depth)
            throw std::invalid_argument("forest: depth is a median-forest parameter");
        r.mtry = config.mtry.value_or((d + 2) / 3); // ceil(d/3)
        if (r.mtry < 1 || r.mtry > d) throw std::invalid_argument("forest: need 1 <= mtry <= d");
        r.nodesize = config.nodesize.value_or(5);
        if (r.nodesize < 1) throw std::invalid_argument("forest: nodesize >= 1");
        r.maxnodes = config.maxnodes;
        if (r.maxnodes && *r.maxnodes < 2) throw std::invalid_argument("forest: maxnodes >= 2");
    } else {
        if (config.mtry || config.nodesize || config.maxnodes)
            throw std::invalid_argument(
                "forest: mtry/nodesize/maxnodes are cart-forest parameters");
        if (config.resample == Resample::bootstrap)
            throw std::invalid_argument("forest: median forests subsample without replacement");
        if (!config.depth) throw std::invalid_argument("forest: median forests require depth");
        r.depth = *config.depth;
        MedianTreeParams{r.sample_size, r.depth}.validate();
    }
    return r;
}

namespace {

RegressionTree grow_one(const Dataset& train, const ResolvedConfig& cfg, std::size_t tree_id) {
    // Sampling and growth run on separate sub-streams of (seed, tree).
    // This keeps the node-level randomness identical across resampling
    // modes, so drawing the full sample without replacement reproduces the
    // resample-free forest exactly.
    Rng sampling = derive_stream(derive_seed(cfg.master_seed, tree_id, 0), 0);
    Rng growth = derive_stream(derive_seed(cfg.master_seed, tree_id, 1), 0);
    std::vector<std::size_t> rows;
    switch (cfg.resample) {
        case Resample::bootstrap: rows = bootstrap_sample(train.n(), sampling); break;
        case Resample::subsample:
            rows = subsample_without_replacement(train.n(), cfg.sample_size, sampling);
            break;
        case Resample::none:
            rows.resize(train.n());
            std::iota(rows.begin(), rows.end(), std::size_t{0});
            break;
    }
    if (cfg.kind == TreeKind::cart) {
        CartParams params{cfg.mtry, cfg.nodesize, cfg.maxnodes};
        return grow_cart_tree(train, std::move(rows), params, growth);
    }
    MedianTreeParams params{cfg.sample_size, cfg.depth};
    return grow_median_tree(train, std::move(rows), params, growth);
}

Forest train_impl(const Dataset& train, const ForestConfig& config, int threads,
                  bool parallel) {
    Forest forest;
    forest.config = resolve_config(config, train.n(), train.d());
    forest.train_n = train.n();
    forest.train_d = train.d();
    forest.trees.resize(forest.config.num_trees);

    const auto count = static_cast<std::ptrdiff_t>(forest.config.num_trees);
    std::string first_error;

#ifdef _OPENMP
    if (parallel) {
        const int num = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(num)
        for (std::ptrdiff_t j = 0; j < count; ++j) {
            try {
                forest.trees[static_cast<std::size_t>(j)] =
                    grow_one(train, forest.config, static_cast<std::size_t>(j));
            } catch (const std::exception& e) {
#pragma omp critical
                if (first_error.empty()) first_error = e.what();
            }
        }
        if (!first_error.empty()) throw std::runtime_error(first_error);
        return forest;
    }
#else
    (void)threads;
    (void)parallel;
#endif
    for (std::ptrdiff_t j = 0; j < count; ++j)
        forest.trees[static_cast<std::size_t>(j)] =
            grow_one(train, forest.config, static_cast<std::size_t>(j));
    return forest;
}

} // namespace

Forest train_forest(const Dataset& train, const ForestConfig& config, int threads) {
    return train_impl(train, config, threads, true);
}

Forest train_forest_serial(const Dataset& train, const ForestConfig& config) {
    return train_impl(train, config, 1, false);
}

double predict_forest(const Forest& forest, std::span<const double> x) {
    double sum = 0.0;
    for (const auto& tree : forest.trees) sum += tree.predict(x);
    return sum / static_cast<double>(forest.trees.size());
}

std::vector<double> predict_batch(const Forest& forest, const Dataset& points, int threads) {
    if (points.d() != forest.train_d)
        throw std::invalid_argument("predict: dimension mismatch");
    std::vector<double> out(points.n());
    const auto count = static_cast<std::ptrdiff_t>(points.n());
    std::string first_error;
#ifdef _OPENMP
    const int num = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(num)
#else
    (void)threads;
#endif
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            out[static_cast<std::size_t>(i)] =
                predict_forest(forest, points.features.row(static_cast<std::size_t>(i)));
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) throw std::invalid_argument(first_error);
    return out;
}

double empirical_l2_risk(const Forest& forest, const Dataset& test, int threads) {
    if (test.n() == 0) throw std::invalid_argument("risk: empty test set");
    auto preds = predict_batch(forest, test, threads);
    // fixed-order accumulation keeps the value independent of threads
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double r = preds[i] - test.responses[i];
        sum += r * r;
    }
    return sum / static_cast<double>(preds.size());
}

void serialize_forest(const Forest& forest, std::ostream& out) {
    const auto& c = forest.config;
    out << "subforest-forest 1\n";
    out << "kind " << to_string(c.kind) << '\n';
    out << "trees " << c.num_trees << '\n';
    out << "resample " << to_string(c.resample) << '\n';
    out << "sample_size " << c.sample_size << '\n';
    out << "mtry " << c.mtry << '\n';
    out << "nodesize " << c.nodesize << '\n';
    out << "maxnodes " << (c.maxnodes ? static_cast<long long>(*c.maxnodes) : -1) << '\n';
    out << "depth " << c.depth << '\n';
    out << "master_seed " << c.master_seed << '\n';
    out << "n_train " << forest.train_n << '\n';
    out << "d " << forest.train_d << '\n';
    for (std::size_t j = 0; j < forest.trees.size(); ++j) {
        out << "tree " << j << " nodes " << forest.trees[j].nodes().size() << '\n';
        forest.trees[j].serialize(out);
    }
    out << "end\n";
}

void save_forest(const Forest& forest, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("forest: cannot write " + path);
    serialize_forest(forest, out);
    if (!out) throw std::runtime_error("forest: write failed for " + path);
}

namespace {

std::string expect_key(std::istream& in, const std::string& key) {
    std::string k, v;
    if (!(in >> k >> v) || k != key)
        throw std::runtime_error("forest parse: expected key '" + key + "'");
    return v;
}

} // namespace

Forest load_forest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("forest: cannot open " + path);
    std::string magic, version;
    if (!(in >> magic >> version) || magic != "subforest-forest" || version != "1")
        throw std::runtime_error("forest: not a subforest-forest v1 file: " + path);

    Forest f;
    f.config.kind = tree_kind_from_string(expect_key(in, "kind"));
    f.config.num_trees = std::stoull(expect_key(in, "trees"));
    f.config.resample = resample_from_string(expect_key(in, "resample"));
    f.config.sample_size = std::stoull(expect_key(in, "sample_size"));
    f.config.mtry = std::stoull(expect_key(in, "mtry"));
    f.config.nodesize = std::stoull(expect_key(in, "nodesize"));
    const long long mx = std::stoll(expect_key(in, "maxnodes"));
    if (mx >= 0) f.config.maxnodes = static_cast<std::size_t>(mx);
    f.config.depth = std::stoull(expect_key(in, "depth"));
    f.config.master_seed = std::stoull(expect_key(in, "master_seed"));
    f.train_n = std::stoull(expect_key(in, "n_train"));
    f.train_d = std::stoull(expect_key(in, "d"));

    f.trees.reserve(f.config.num_trees);
    for (std::size_t j = 0; j < f.config.num_trees; ++j) {
        std::string kw;
        std::size_t id = 0, nodes = 0;
        std::string nodes_kw;
        if (!(in >> kw >> id >> nodes_kw >> nodes) || kw != "tree" || nodes_kw != "nodes" ||
            id != j)
            throw std::runtime_error("forest parse: bad tree header");
        f.trees.push_back(RegressionTree::parse(in, f.train_d, nodes));
    }
    std::string kw;
    if (!(in >> kw) || kw != "end") throw std::runtime_error("forest parse: missing end marker");
    return f;
}

} // namespace subforest
