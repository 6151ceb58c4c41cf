// subforest: train and score CART / median regression forests, evaluate the
// depth/subsampling risk-bound calculator, and drive the tuning harness.
// Every subcommand writes its artifacts plus a manifest that reproduces the
// run bit-for-bit (see --from-manifest).

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "manifest.hpp"
#include "subforest/dataset.hpp"
#include "subforest/forest.hpp"
#include "subforest/median_tree.hpp"
#include "subforest/sampling.hpp"
#include "subforest/theory.hpp"
#include "subforest/tuning.hpp"

namespace sf = subforest;
using sf::cli::format_double;
using sf::cli::Manifest;

namespace {

int run_cli(std::vector<std::string> args);

// ---------------------------------------------------------------------------
// small shared helpers

sf::NoiseInterpretation noise_interpretation_from(const std::string& s) {
    if (s == "variance") return sf::NoiseInterpretation::variance;
    if (s == "sd") return sf::NoiseInterpretation::sd;
    throw CLI::ValidationError("--noise-interpretation", "must be 'variance' or 'sd'");
}

void require_seed_in_ci(const CLI::App* sub) {
    const char* ci = std::getenv("CI");
    if (ci == nullptr || *ci == '\0') return;
    if (sub->count("--seed") == 0)
        throw std::runtime_error("--seed is required when the CI environment variable is set");
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::string manifest_path_for(const std::string& artifact) { return artifact + ".manifest"; }

// key = value files; '#' starts a comment line
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        if (trimmed.empty() || trimmed[0] == '#') continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: malformed line " + std::to_string(line_no) +
                                     " in " + path);
        auto strip = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            const auto last = s.find_last_not_of(" \t");
            s.erase(last == std::string::npos ? 0 : last + 1);
            return s;
        };
        entries.emplace_back(strip(trimmed.substr(0, eq)), strip(trimmed.substr(eq + 1)));
    }
    return entries;
}

// flags given on the command line win over config-file values
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw std::runtime_error("--config needs a file path");
            config_path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                       args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (config_path.empty()) return args;

    auto given = [&](const std::string& key) {
        const std::string flag = "--" + key;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    for (const auto& [key, value] : read_config_file(config_path))
        if (!given(key)) args.push_back("--" + key + "=" + value);
    return args;
}

std::string join_unsigned(const std::vector<std::size_t>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(xs[i]);
    }
    return out;
}

double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += std::log(xs[i]);
        my += std::log(ys[i]);
    }
    mx /= n;
    my /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = std::log(xs[i]) - mx;
        num += dx * (std::log(ys[i]) - my);
        den += dx * dx;
    }
    return num / den;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOpts {
    int model = 1;
    std::size_t n = 0;
    double noise_scale = 1.0;
    std::string noise_interpretation = "variance";
    std::uint64_t seed = 0;
    std::string out;
    std::string noise_out;
};

void register_generate(CLI::App& app) {
    auto opts = std::make_shared<GenerateOpts>();
    auto* sub = app.add_subcommand("generate", "draw a synthetic dataset from models 1..8");
    sub->add_option("--model", opts->model, "model id, 1..8")->required();
    sub->add_option("--n", opts->n, "observations (default: the model's own n)");
    sub->add_option("--noise-scale", opts->noise_scale, "noise multiplier, 1 = nominal");
    sub->add_option("--noise-interpretation", opts->noise_interpretation,
                    "read N(0,0.5) as 'variance' or 'sd'");
    sub->add_option("--seed", opts->seed, "master seed");
    sub->add_option("--out", opts->out, "output dataset CSV")->required();
    sub->add_option("--noise-out", opts->noise_out, "also write the realized noise column");
    sub->callback([opts, sub]() {
        require_seed_in_ci(sub);
        const auto ni = noise_interpretation_from(opts->noise_interpretation);
        const auto spec = sf::paper_model(opts->model, opts->noise_scale);
        const std::size_t n = opts->n == 0 ? spec.n_default : opts->n;

        std::vector<double> noise;
        const auto data = sf::generate_model(spec, n, opts->seed, ni,
                                             opts->noise_out.empty() ? nullptr : &noise);
        sf::write_csv(data, opts->out);
        if (!opts->noise_out.empty()) {
            auto out = open_output(opts->noise_out);
            out << "noise\n";
            for (double v : noise) out << format_double(v) << '\n';
        }

        Manifest m("generate");
        m.set_integer("model", opts->model);
        m.set_unsigned("n", n);
        m.set("noise-scale", opts->noise_scale);
        m.set("noise-interpretation", opts->noise_interpretation);
        m.set_unsigned("seed", opts->seed);
        m.set("out", opts->out);
        if (!opts->noise_out.empty()) m.set("noise-out", opts->noise_out);
        m.add_output("dataset", opts->out);
        if (!opts->noise_out.empty()) m.add_output("noise", opts->noise_out);
        m.write(manifest_path_for(opts->out));
    });
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
    std::string data;
    std::string kind;
    std::size_t trees = 500;
    std::string resample; // defaulted per kind
    std::size_t sampsize = 0;
    std::size_t mtry = 0;
    std::size_t nodesize = 0;
    std::size_t maxnodes = 0;
    std::size_t depth = 0;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;
};

void register_train(CLI::App& app) {
    auto opts = std::make_shared<TrainOpts>();
    auto* sub = app.add_subcommand("train", "train a forest on a dataset CSV");
    sub->add_option("--data", opts->data, "training dataset CSV")->required();
    sub->add_option("--kind", opts->kind, "cart | median")->required();
    sub->add_option("--trees", opts->trees, "number of trees M");
    sub->add_option("--resample", opts->resample,
                    "bootstrap | subsample | none (default: bootstrap for cart, none for median)");
    sub->add_option("--sampsize", opts->sampsize, "a_n for resample=subsample");
    sub->add_option("--mtry", opts->mtry, "cart: split dimensions per node");
    sub->add_option("--nodesize", opts->nodesize, "cart: stop splitting below this count");
    sub->add_option("--maxnodes", opts->maxnodes, "cart: leaf budget (best-first growth)");
    sub->add_option("--depth", opts->depth, "median: cuts per cell k_n");
    sub->add_option("--seed", opts->seed, "master seed");
    sub->add_option("--threads", opts->threads, "worker threads, 0 = all");
    sub->add_option("--out", opts->out, "output forest file")->required();
    sub->callback([opts, sub]() {
        require_seed_in_ci(sub);
        sf::ForestConfig config;
        config.kind = sf::tree_kind_from_string(opts->kind);
        config.num_trees = opts->trees;
        if (sub->count("--resample"))
            config.resample = sf::resample_from_string(opts->resample);
        else
            config.resample = config.kind == sf::TreeKind::cart ? sf::Resample::bootstrap
                                                                : sf::Resample::none;
        if (sub->count("--sampsize")) config.sample_size = opts->sampsize;
        if (sub->count("--mtry")) config.mtry = opts->mtry;
        if (sub->count("--nodesize")) config.nodesize = opts->nodesize;
        if (sub->count("--maxnodes")) config.maxnodes = opts->maxnodes;
        if (sub->count("--depth")) config.depth = opts->depth;
        config.master_seed = opts->seed;

        const auto data = sf::read_csv(opts->data);
        const auto forest = sf::train_forest(data, config, opts->threads);
        sf::save_forest(forest, opts->out);

        Manifest m("train");
        m.set("data", opts->data);
        m.set("kind", sf::to_string(forest.config.kind));
        m.set_unsigned("trees", forest.config.num_trees);
        m.set("resample", sf::to_string(forest.config.resample));
        if (forest.config.resample == sf::Resample::subsample)
            m.set_unsigned("sampsize", forest.config.sample_size);
        if (forest.config.kind == sf::TreeKind::cart) {
            m.set_unsigned("mtry", forest.config.mtry);
            m.set_unsigned("nodesize", forest.config.nodesize);
            if (forest.config.maxnodes) m.set_unsigned("maxnodes", *forest.config.maxnodes);
        } else {
            m.set_unsigned("depth", forest.config.depth);
        }
        m.set_unsigned("seed", opts->seed);
        m.set_integer("threads", opts->threads);
        m.set("out", opts->out);
        m.add_output("forest", opts->out);
        m.write(manifest_path_for(opts->out));
    });
}

// ---------------------------------------------------------------------------
// predict / risk

struct PredictOpts {
    std::string forest;
    std::string data;
    int threads = 0;
    std::uint64_t seed = 0; // recorded only; prediction is deterministic
    std::string out;
};

void register_predict(CLI::App& app) {
    auto opts = std::make_shared<PredictOpts>();
    auto* sub = app.add_subcommand("predict", "forest predictions for a dataset CSV");
    sub->add_option("--forest", opts->forest, "forest file from train")->required();
    sub->add_option("--data", opts->data, "dataset CSV (the y column is ignored)")->required();
    sub->add_option("--threads", opts->threads, "worker threads, 0 = all");
    sub->add_option("--seed", opts->seed, "recorded in the manifest; predict is deterministic");
    sub->add_option("--out", opts->out, "output predictions CSV")->required();
    sub->callback([opts]() {
        const auto forest = sf::load_forest(opts->forest);
        const auto data = sf::read_csv(opts->data);
        const auto preds = sf::predict_batch(forest, data, opts->threads);
        auto out = open_output(opts->out);
        out << "y_hat\n";
        for (double v : preds) out << format_double(v) << '\n';

        Manifest m("predict");
        m.set("forest", opts->forest);
        m.set("data", opts->data);
        m.set_integer("threads", opts->threads);
        m.set_unsigned("seed", opts->seed);
        m.set("out", opts->out);
        m.add_output("predictions", opts->out);
        m.write(manifest_path_for(opts->out));
    });
}

void register_risk(CLI::App& app) {
    auto opts = std::make_shared<PredictOpts>();
    auto* sub = app.add_subcommand("risk", "empirical L2 risk of a forest on a test CSV");
    sub->add_option("--forest", opts->forest, "forest file from train")->required();
    sub->add_option("--data", opts->data, "test dataset CSV")->required();
    sub->add_option("--threads", opts->threads, "worker threads, 0 = all");
    sub->add_option("--seed", opts->seed, "recorded in the manifest; risk is deterministic");
    sub->add_option("--out", opts->out, "optional single-value CSV");
    sub->callback([opts]() {
        const auto forest = sf::load_forest(opts->forest);
        const auto data = sf::read_csv(opts->data);
        const double risk = sf::empirical_l2_risk(forest, data, opts->threads);
        std::cout << "risk = " << format_double(risk) << '\n';
        if (!opts->out.empty()) {
            auto out = open_output(opts->out);
            out << "risk\n" << format_double(risk) << '\n';
            Manifest m("risk");
            m.set("forest", opts->forest);
            m.set("data", opts->data);
            m.set_integer("threads", opts->threads);
            m.set_unsigned("seed", opts->seed);
            m.set("out", opts->out);
            m.add_output("risk", opts->out);
            m.write(manifest_path_for(opts->out));
        }
    });
}

// ---------------------------------------------------------------------------
// sweep / optimal

struct SweepOpts {
    int model = 1;
    std::size_t n = 0;
    std::string param = "maxnodes";
    std::vector<double> grid_fractions;
    std::vector<std::size_t> grid_values;
    std::size_t reps = 50;
    std::size_t trees = 500;
    std::size_t mtry = 0;
    std::size_t nodesize = 0;
    double noise_scale = 1.0;
    std::string noise_interpretation = "variance";
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;
    std::vector<std::size_t> n_list; // optimal only
};

void fill_sweep_spec(const CLI::App* sub, const SweepOpts& o, sf::SweepSpec& spec) {
    spec.model = sf::paper_model(o.model, o.noise_scale);
    spec.n = o.n == 0 ? spec.model.n_default : o.n;
    spec.train_fraction = o.train_fraction;
    spec.noise_interpretation = noise_interpretation_from(o.noise_interpretation);
    spec.parameter = sf::sweep_parameter_from_string(o.param);
    spec.base.kind = sf::TreeKind::cart;
    spec.base.num_trees = o.trees;
    if (sub->count("--mtry")) spec.base.mtry = o.mtry;
    if (sub->count("--nodesize")) spec.base.nodesize = o.nodesize;
    spec.repetitions = o.reps;
    spec.master_seed = o.seed;
}

void add_sweep_options(CLI::App* sub, SweepOpts& o) {
    sub->add_option("--model", o.model, "model id, 1..8")->required();
    sub->add_option("--param", o.param, "maxnodes | sampsize")->required();
    sub->add_option("--grid", o.grid_fractions, "grid as fractions of the training size")
        ->delimiter(',');
    sub->add_option("--reps", o.reps, "repetitions to average over");
    sub->add_option("--trees", o.trees, "trees per forest M");
    sub->add_option("--mtry", o.mtry, "cart mtry (default ceil(d/3))");
    sub->add_option("--nodesize", o.nodesize, "cart nodesize (default 5)");
    sub->add_option("--noise-scale", o.noise_scale, "noise multiplier");
    sub->add_option("--noise-interpretation", o.noise_interpretation, "'variance' or 'sd'");
    sub->add_option("--train-fraction", o.train_fraction, "training share of each dataset");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--threads", o.threads, "worker threads, 0 = all");
    sub->add_option("--out", o.out, "output CSV")->required();
}

void register_sweep(CLI::App& app) {
    auto opts = std::make_shared<SweepOpts>();
    auto* sub = app.add_subcommand("sweep", "risk over a maxnodes or sampsize grid");
    add_sweep_options(sub, *opts);
    sub->add_option("--n", opts->n, "dataset size (default: the model's own n)");
    sub->add_option("--grid-values", opts->grid_values, "grid as absolute values")
        ->delimiter(',');
    sub->callback([opts, sub]() {
        require_seed_in_ci(sub);
        sf::SweepSpec spec;
        fill_sweep_spec(sub, *opts, spec);
        const auto train_size = static_cast<std::size_t>(
            std::llround(spec.train_fraction * static_cast<double>(spec.n)));
        if (!opts->grid_values.empty())
            spec.grid = opts->grid_values;
        else if (!opts->grid_fractions.empty())
            spec.grid = sf::grid_from_fractions(spec.parameter, opts->grid_fractions, train_size);
        else
            spec.grid = sf::grid_from_fractions(
                spec.parameter, sf::default_grid_fractions(spec.parameter), train_size);

        const auto result = sf::run_sweep(spec, opts->threads);

        auto resolved = sf::resolve_config(spec.base, train_size, spec.model.d);
        auto out = open_output(opts->out);
        out << "# optimum = " << result.optimum << '\n';
        out << "# reference_std_risk = " << format_double(result.reference_std_risk) << '\n';
        out << "parameter_value,mean_risk,std_risk,reference_risk,n,model_id,repetitions,M,seed\n";
        for (std::size_t i = 0; i < result.grid.size(); ++i) {
            out << result.grid[i] << ',' << format_double(result.mean_risk[i]) << ','
                << format_double(result.std_risk[i]) << ','
                << format_double(result.reference_mean_risk) << ',' << spec.n << ','
                << spec.model.model_id << ',' << spec.repetitions << ',' << spec.base.num_trees
                << ',' << spec.master_seed << '\n';
        }
        out.close();

        Manifest m("sweep");
        m.set_integer("model", opts->model);
        m.set_unsigned("n", spec.n);
        m.set("param", opts->param);
        m.set("grid-values", join_unsigned(spec.grid));
        m.set_unsigned("reps", spec.repetitions);
        m.set_unsigned("trees", spec.base.num_trees);
        m.set_unsigned("mtry", resolved.mtry);
        m.set_unsigned("nodesize", resolved.nodesize);
        m.set("noise-scale", opts->noise_scale);
        m.set("noise-interpretation", opts->noise_interpretation);
        m.set("train-fraction", opts->train_fraction);
        m.set_unsigned("seed", spec.master_seed);
        m.set_integer("threads", opts->threads);
        m.set("out", opts->out);
        m.add_output("sweep", opts->out);
        m.write(manifest_path_for(opts->out));
    });
}

void register_optimal(CLI::App& app) {
    auto opts = std::make_shared<SweepOpts>();
    opts->n_list = {100, 200, 300, 400};
    auto* sub = app.add_subcommand(
        "optimal", "optimum parameter value per sample size (proportionality study)");
    add_sweep_options(sub, *opts);
    sub->add_option("--n-list", opts->n_list, "sample sizes to study")->delimiter(',');
    sub->callback([opts, sub]() {
        require_seed_in_ci(sub);
        sf::SweepSpec spec;
        fill_sweep_spec(sub, *opts, spec);
        spec.n = opts->n_list.empty() ? 0 : opts->n_list.front();
        const auto fractions = opts->grid_fractions.empty()
                                   ? sf::default_grid_fractions(spec.parameter)
                                   : opts->grid_fractions;
        const auto rows =
            sf::proportionality_study(spec.model, opts->n_list, spec, fractions, opts->threads);

        auto out = open_output(opts->out);
        out << "n,optimum,ratio\n";
        for (const auto& r : rows)
            out << r.n << ',' << r.optimum << ',' << format_double(r.ratio) << '\n';
        out.close();

        Manifest m("optimal");
        m.set_integer("model", opts->model);
        m.set("param", opts->param);
        m.set("n-list", join_unsigned(opts->n_list));
        std::string frac;
        for (std::size_t i = 0; i < fractions.size(); ++i)
            frac += (i ? "," : "") + format_double(fractions[i]);
        m.set("grid", frac);
        m.set_unsigned("reps", spec.repetitions);
        m.set_unsigned("trees", spec.base.num_trees);
        m.set("noise-scale", opts->noise_scale);
        m.set("noise-interpretation", opts->noise_interpretation);
        m.set("train-fraction", opts->train_fraction);
        m.set_unsigned("seed", spec.master_seed);
        m.set_integer("threads", opts->threads);
        m.set("out", opts->out);
        m.add_output("summary", opts->out);
        m.write(manifest_path_for(opts->out));
    });
}

// ---------------------------------------------------------------------------
// bound

struct BoundOpts {
    std::size_t d = 1;
    double sigma2 = 1.0;
    double L = 1.0;
    double n = 1024;
    std::size_t k_max = 30;
    std::string approx_weight = "d";
    std::uint64_t seed = 0; // recorded only; the table is closed-form
    std::string out;
};

void register_bound(CLI::App& app) {
    auto opts = std::make_shared<BoundOpts>();
    auto* sub = app.add_subcommand("bound", "risk-bound table and its constants");
    sub->add_option("--d", opts->d, "dimension")->required();
    sub->add_option("--sigma2", opts->sigma2, "noise variance bound")->required();
    sub->add_option("--L", opts->L, "Lipschitz constant")->required();
    sub->add_option("--n", opts->n, "sample size")->required();
    sub->add_option("--k-max", opts->k_max, "tabulate depths 0..k_max");
    sub->add_option("--approx-weight", opts->approx_weight,
                    "approximation-term weight: 'd' or 'd32' (d^(3/2))");
    sub->add_option("--seed", opts->seed, "recorded in the manifest; bound is closed-form");
    sub->add_option("--out", opts->out, "output CSV")->required();
    sub->callback([opts]() {
        if (!(opts->sigma2 > 0.0) || !(opts->L > 0.0))
            throw std::runtime_error("bound: sigma2 and L must be positive");
        sf::TheoryOptions theory;
        if (opts->approx_weight == "d32")
            theory.weight = sf::ApproxWeight::d_three_halves;
        else if (opts->approx_weight != "d")
            throw std::runtime_error("bound: --approx-weight must be 'd' or 'd32'");

        const double beta = sf::beta_of(opts->d);
        const double C = sf::lemma_constant(opts->d);
        const double c3 = sf::c3_constant(opts->d, opts->sigma2, opts->L, theory);
        const auto depth = sf::optimal_depth(opts->d, opts->n, opts->sigma2, opts->L, theory);
        const auto sub_size =
            sf::min_subsample_size(opts->d, opts->n, opts->sigma2, opts->L, theory);

        auto out = open_output(opts->out);
        out << "# beta = " << format_double(beta) << '\n';
        out << "# C = " << format_double(C) << '\n';
        out << "# C3 = " << format_double(c3) << '\n';
        out << "# C4 = " << format_double(sub_size.c4) << '\n';
        out << "# subsample_exponent = " << format_double(sub_size.exponent) << '\n';
        out << "# a_n_min = " << format_double(sub_size.value) << '\n';
        out << "# a_n_min_raw = " << format_double(sub_size.raw) << '\n';
        if (sub_size.clamped)
            out << "# warning = a_n_min exceeded n and was clamped to n\n";
        out << "# k_star_real = " << format_double(depth.k_real) << '\n';
        out << "# k_star_int = " << depth.k_int << '\n';
        out << "# rate_exponent = " << format_double(sf::rate_exponent(opts->d)) << '\n';
        out << "# centred_rate_exponent = " << format_double(sf::centred_rate_exponent(opts->d))
            << '\n';
        out << "k,bound,estimation_term,approximation_term\n";
        for (std::size_t k = 0; k <= opts->k_max; ++k) {
            const auto kd = static_cast<double>(k);
            out << k << ','
                << format_double(sf::risk_bound(opts->d, opts->n, opts->sigma2, opts->L, kd,
                                                theory))
                << ',' << format_double(sf::estimation_term(opts->n, opts->sigma2, kd)) << ','
                << format_double(sf::approximation_term(opts->d, opts->sigma2, opts->L, kd,
                                                        theory))
                << '\n';
        }
        out.close();

        Manifest m("bound");
        m.set_unsigned("d", opts->d);
        m.set("sigma2", opts->sigma2);
        m.set("L", opts->L);
        m.set("n", opts->n);
        m.set_unsigned("k-max", opts->k_max);
        m.set("approx-weight", opts->approx_weight);
        m.set_unsigned("seed", opts->seed);
        m.set("out", opts->out);
        m.add_output("bound", opts->out);
        m.write(manifest_path_for(opts->out));
    });
}

// ---------------------------------------------------------------------------
// verify-lemma

struct LemmaOpts {
    std::size_t d = 1;
    std::size_t k = 1;
    std::size_t a_n = 0;
    std::size_t trials = 10000;
    std::string descent = "path";
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;
    std::string chains_out;
};

void register_verify_lemma(CLI::App& app) {
    auto opts = std::make_shared<LemmaOpts>();
    auto* sub = app.add_subcommand(
        "verify-lemma", "Monte-Carlo check of the cell-side second-moment bound");
    sub->add_option("--d", opts->d, "dimension")->required();
    sub->add_option("--k", opts->k, "tree depth")->required();
    sub->add_option("--a-n", opts->a_n, "points per tree")->required();
    sub->add_option("--trials", opts->trials, "Monte-Carlo trees");
    sub->add_option("--descent", opts->descent,
                    "'path' (uniform root-to-leaf path; matches the beta product exactly) or "
                    "'point' (cell of the cube center)");
    sub->add_option("--seed", opts->seed, "master seed");
    sub->add_option("--threads", opts->threads, "worker threads, 0 = all");
    sub->add_option("--out", opts->out, "summary CSV")->required();
    sub->add_option("--chains-out", opts->chains_out, "per-trial count chains CSV");
    sub->callback([opts, sub]() {
        require_seed_in_ci(sub);
        sf::DescentMode mode;
        if (opts->descent == "path")
            mode = sf::DescentMode::random_path;
        else if (opts->descent == "point")
            mode = sf::DescentMode::fixed_center;
        else
            throw std::runtime_error("verify-lemma: --descent must be 'path' or 'point'");

        std::vector<std::vector<std::size_t>> chains;
        std::vector<double> sides;
        const auto res = sf::mc_side_second_moment(
            opts->a_n, opts->k, opts->d, opts->trials, opts->seed, mode, opts->threads,
            opts->chains_out.empty() ? nullptr : &chains,
            opts->chains_out.empty() ? nullptr : &sides);

        const double se_distance =
            res.std_error > 0.0 ? (res.estimate - res.exact_chain_average) / res.std_error : 0.0;
        const bool bound_ok = res.estimate <= res.lemma_bound + 3.0 * res.std_error;

        auto out = open_output(opts->out);
        out << "d,k,a_n,trials,descent,estimate,std_error,exact_chain_average,lemma_bound,"
               "se_distance,bound_ok\n";
        out << opts->d << ',' << opts->k << ',' << opts->a_n << ',' << opts->trials << ','
            << opts->descent << ',' << format_double(res.estimate) << ','
            << format_double(res.std_error) << ',' << format_double(res.exact_chain_average)
            << ',' << format_double(res.lemma_bound) << ',' << format_double(se_distance) << ','
            << (bound_ok ? 1 : 0) << '\n';
        out.close();

        if (!opts->chains_out.empty()) {
            auto chains_file = open_output(opts->chains_out);
            chains_file << "trial,squared_side";
            for (std::size_t j = 0; j <= opts->k; ++j) chains_file << ",n" << j;
            chains_file << '\n';
            for (std::size_t t = 0; t < chains.size(); ++t) {
                chains_file << t << ',' << format_double(sides[t]);
                for (auto c : chains[t]) chains_file << ',' << c;
                chains_file << '\n';
            }
        }

        std::cout << "estimate = " << format_double(res.estimate)
                  << " +- " << format_double(res.std_error)
                  << ", exact chain average = " << format_double(res.exact_chain_average)
                  << ", bound C*beta^k = " << format_double(res.lemma_bound) << '\n';

        Manifest m("verify-lemma");
        m.set_unsigned("d", opts->d);
        m.set_unsigned("k", opts->k);
        m.set_unsigned("a-n", opts->a_n);
        m.set_unsigned("trials", opts->trials);
        m.set("descent", opts->descent);
        m.set_unsigned("seed", opts->seed);
        m.set_integer("threads", opts->threads);
        m.set("out", opts->out);
        if (!opts->chains_out.empty()) m.set("chains-out", opts->chains_out);
        m.add_output("summary", opts->out);
        if (!opts->chains_out.empty()) m.add_output("chains", opts->chains_out);
        m.write(manifest_path_for(opts->out));
    });
}

// ---------------------------------------------------------------------------
// rate-study

struct RateOpts {
    std::vector<std::size_t> n_list = {256, 512, 1024, 2048, 4096};
    double sigma = 0.1;
    double lipschitz = 4.0;
    std::size_t reps = 20;
    std::size_t trees = 1;
    std::size_t test_points = 2000;
    std::string depth_rule = "effective";
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;
};

// y = tilde(x)^2 on [0,1], plus N(0, sigma^2)
sf::Dataset rate_dataset(std::size_t n, double sigma, std::uint64_t seed, bool noiseless) {
    sf::Dataset data;
    data.features = sf::Matrix(n, 1);
    data.responses.resize(n);
    sf::Rng g = sf::derive_stream(seed, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = g.next_unit();
        data.features(i, 0) = x;
        const double t = sf::tilde_transform(x);
        data.responses[i] = t * t + (noiseless ? 0.0 : sigma * g.next_gaussian());
    }
    return data;
}

void register_rate_study(CLI::App& app) {
    auto opts = std::make_shared<RateOpts>();
    auto* sub = app.add_subcommand(
        "rate-study", "log-log rate of the median-forest risk against the sample size");
    sub->add_option("--n-list", opts->n_list, "sample sizes")->delimiter(',');
    sub->add_option("--sigma", opts->sigma, "noise standard deviation");
    sub->add_option("--L", opts->lipschitz, "Lipschitz constant fed to the depth rule");
    sub->add_option("--reps", opts->reps, "repetitions per sample size");
    sub->add_option("--trees", opts->trees, "trees per forest (in d=1 all trees coincide)");
    sub->add_option("--test-points", opts->test_points, "fresh query points per repetition");
    sub->add_option("--depth-rule", opts->depth_rule,
                    "'effective' drops the proof-slack constant C from the depth formula "
                    "(desk-scale n); 'paper' keeps it");
    sub->add_option("--seed", opts->seed, "master seed");
    sub->add_option("--threads", opts->threads, "worker threads, 0 = all");
    sub->add_option("--out", opts->out, "output CSV")->required();
    sub->callback([opts, sub]() {
        require_seed_in_ci(sub);
        if (opts->n_list.size() < 2) throw std::runtime_error("rate-study: need >= 2 sizes");
        sf::TheoryOptions theory;
        if (opts->depth_rule == "effective")
            theory.constant_override = 1.0;
        else if (opts->depth_rule != "paper")
            throw std::runtime_error("rate-study: --depth-rule must be 'effective' or 'paper'");
        const double sigma2 = opts->sigma * opts->sigma;

        auto out = open_output(opts->out);
        std::vector<double> xs, ys;
        std::ostringstream rows;
        rows << "n,k,k_real,clipped,mean_risk,std_risk\n";
        for (std::size_t idx = 0; idx < opts->n_list.size(); ++idx) {
            const std::size_t n = opts->n_list[idx];
            const auto choice = sf::optimal_depth(1, static_cast<double>(n), sigma2,
                                                  opts->lipschitz, theory);
            // feasibility: a_n 2^-k >= 4 with a_n = n
            long k_cap = 0;
            while ((std::size_t{4} << (k_cap + 1)) <= n) ++k_cap;
            const long k = std::min<long>(std::max<long>(choice.k_int, 0), k_cap);

            std::vector<double> risks(opts->reps);
            for (std::size_t rep = 0; rep < opts->reps; ++rep) {
                const auto train = rate_dataset(
                    n, opts->sigma, sf::derive_seed(opts->seed, idx, 3 * rep), false);
                const auto truth = rate_dataset(opts->test_points, opts->sigma,
                                                sf::derive_seed(opts->seed, idx, 3 * rep + 1),
                                                true);
                sf::ForestConfig cfg;
                cfg.kind = sf::TreeKind::median;
                cfg.num_trees = opts->trees;
                cfg.resample = sf::Resample::none;
                cfg.depth = static_cast<std::size_t>(k);
                cfg.master_seed = sf::derive_seed(opts->seed, idx, 3 * rep + 2);
                const auto forest = sf::train_forest(train, cfg, opts->threads);
                // risk against the noise-free regression function
                const auto preds = sf::predict_batch(forest, truth, opts->threads);
                double sum = 0.0;
                for (std::size_t i = 0; i < preds.size(); ++i) {
                    const double r = preds[i] - truth.responses[i];
                    sum += r * r;
                }
                risks[rep] = sum / static_cast<double>(preds.size());
            }
            double mean = 0.0;
            for (double r : risks) mean += r;
            mean /= static_cast<double>(opts->reps);
            double sd = 0.0;
            if (opts->reps > 1) {
                for (double r : risks) sd += (r - mean) * (r - mean);
                sd = std::sqrt(sd / static_cast<double>(opts->reps - 1));
            }
            rows << n << ',' << k << ',' << format_double(choice.k_real) << ','
                 << (k != choice.k_int ? 1 : 0) << ',' << format_double(mean) << ','
                 << format_double(sd) << '\n';
            xs.push_back(static_cast<double>(n));
            ys.push_back(mean);
        }
        const double slope = fit_loglog_slope(xs, ys);
        out << "# slope = " << format_double(slope) << '\n';
        out << rows.str();
        out.close();
        std::cout << "slope = " << format_double(slope) << '\n';

        Manifest m("rate-study");
        m.set("n-list", join_unsigned(opts->n_list));
        m.set("sigma", opts->sigma);
        m.set("L", opts->lipschitz);
        m.set_unsigned("reps", opts->reps);
        m.set_unsigned("trees", opts->trees);
        m.set_unsigned("test-points", opts->test_points);
        m.set("depth-rule", opts->depth_rule);
        m.set_unsigned("seed", opts->seed);
        m.set_integer("threads", opts->threads);
        m.set("out", opts->out);
        m.add_output("rates", opts->out);
        m.write(manifest_path_for(opts->out));
    });
}

// ---------------------------------------------------------------------------

int run_cli(std::vector<std::string> args) {
    if (!args.empty() && (args[0] == "--from-manifest" || args[0].rfind("--from-manifest=", 0) == 0)) {
        std::string path;
        if (args[0] == "--from-manifest") {
            if (args.size() < 2) throw std::runtime_error("--from-manifest needs a file path");
            path = args[1];
        } else {
            path = args[0].substr(std::string("--from-manifest=").size());
        }
        return run_cli(Manifest::read(path).to_argv());
    }

    args = apply_config_file(std::move(args));

    CLI::App app{"regression forests with subsampling/pruning control, risk-bound "
                 "calculator, and tuning harness"};
    app.require_subcommand(1);
    register_generate(app);
    register_train(app);
    register_predict(app);
    register_risk(app);
    register_sweep(app);
    register_optimal(app);
    register_bound(app);
    register_verify_lemma(app);
    register_rate_study(app);

    std::vector<const char*> argv;
    argv.push_back("subforest");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run_cli(std::move(args));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
