#ifndef SUBFOREST_DATASET_HPP
#define SUBFOREST_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace subforest {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

enum class NoiseKind { none, gaussian, bernoulli_indicator };

// How "N(0, 0.5)" is read: second argument as a variance (the dominant
// convention) or as a standard deviation.
enum class NoiseInterpretation { variance, sd };

struct ModelSpec {
    int model_id = 1;
    std::size_t n_default = 0;
    std::size_t d = 0;
    NoiseKind noise_kind = NoiseKind::none;
    double noise_scale = 1.0; // 1.0 = nominal noise; >1 inflates it
};

// The built-in regression models 1..8 with their (n, d) table.
ModelSpec paper_model(int model_id, double noise_scale = 1.0);

struct Dataset {
    Matrix features;                  // n x d, every entry in [0,1]
    std::vector<double> responses;    // length n
    std::optional<ModelSpec> origin;  // nullopt for external data

    std::size_t n() const { return features.rows(); }
    std::size_t d() const { return features.cols(); }
};

// x in [0,1] -> 2(x - 0.5) in [-1,1].
inline double tilde_transform(double x) { return 2.0 * (x - 0.5); }

// Noise-free regression value of model `model_id` at a feature row.
double model_regression_value(int model_id, std::span<const double> row);

// Draws n i.i.d. uniform rows on [0,1]^d and attaches responses per the
// model formula. If realized_noise is non-null it receives the per-row
// noise term, so responses[i] - (*realized_noise)[i] is the noise-free
// value. Deterministic given (spec, n, seed).
Dataset generate_model(const ModelSpec& spec, std::size_t n, std::uint64_t seed,
                       NoiseInterpretation ni = NoiseInterpretation::variance,
                       std::vector<double>* realized_noise = nullptr);

// Uniform random partition into (train, test); train size = round(f * n).
std::pair<Dataset, Dataset> split_train_test(const Dataset& data, double train_fraction,
                                             std::uint64_t seed);

// CSV with header x1,...,xd,y; '.' decimal point, LF line endings.
// Values are written with 17 significant digits so read(write(D)) == D.
Dataset read_csv(const std::string& path);
void write_csv(const Dataset& data, const std::string& path);

} // namespace subforest

#endif
