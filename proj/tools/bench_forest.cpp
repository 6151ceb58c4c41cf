// Compares the OpenMP training path against the serial reference on a
// medium workload and checks that both produce the same forest byte for
// byte. Usage: bench_forest [trees] [n] [model]

#include <chrono>
#include <iostream>
#include <sstream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "subforest/dataset.hpp"
#include "subforest/forest.hpp"

namespace sf = subforest;

namespace {

template <typename F>
double time_seconds(F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

std::string fingerprint(const sf::Forest& forest) {
    std::ostringstream out;
    sf::serialize_forest(forest, out);
    return out.str();
}

} // namespace

int main(int argc, char** argv) {
    std::size_t trees = argc > 1 ? std::stoull(argv[1]) : 200;
    std::size_t n = argc > 2 ? std::stoull(argv[2]) : 500;
    int model = argc > 3 ? std::stoi(argv[3]) : 1;

    const auto spec = sf::paper_model(model);
    const auto data = sf::generate_model(spec, n, 42);

    sf::ForestConfig config;
    config.kind = sf::TreeKind::cart;
    config.num_trees = trees;
    config.master_seed = 7;

    sf::Forest serial, parallel;
    const double t_serial = time_seconds([&] { serial = sf::train_forest_serial(data, config); });
#ifdef _OPENMP
    const int threads = omp_get_max_threads();
#else
    const int threads = 1;
#endif
    const double t_parallel = time_seconds([&] { parallel = sf::train_forest(data, config, 0); });

    const bool identical = fingerprint(serial) == fingerprint(parallel);
    std::cout << "model " << model << ", n = " << n << ", d = " << spec.d << ", trees = "
              << trees << '\n';
    std::cout << "serial reference: " << t_serial << " s\n";
    std::cout << "openmp (" << threads << " threads): " << t_parallel << " s\n";
    std::cout << "speedup: " << (t_parallel > 0 ? t_serial / t_parallel : 0.0) << "x\n";
    std::cout << "identical serialization: " << (identical ? "yes" : "NO") << '\n';
    return identical ? 0 : 1;
}
