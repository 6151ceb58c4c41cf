#include "subforest/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "subforest/sampling.hpp"

namespace subforest {

ModelSpec paper_model(int model_id, double noise_scale) {
    if (noise_scale < 0.0) throw std::invalid_argument("noise_scale must be >= 0");
    ModelSpec s;
    s.model_id = model_id;
    s.noise_scale = noise_scale;
    switch (model_id) {
        case 1: s.n_default = 800; s.d = 50;   s.noise_kind = NoiseKind::none; break;
        case 2: s.n_default = 600; s.d = 100;  s.noise_kind = NoiseKind::gaussian; break;
        case 3: s.n_default = 600; s.d = 100;  s.noise_kind = NoiseKind::gaussian; break;
        case 4: s.n_default = 600; s.d = 100;  s.noise_kind = NoiseKind::gaussian; break;
        case 5: s.n_default = 700; s.d = 20;   s.noise_kind = NoiseKind::gaussian; break;
        case 6: s.n_default = 500; s.d = 30;   s.noise_kind = NoiseKind::bernoulli_indicator; break;
        case 7: s.n_default = 600; s.d = 300;  s.noise_kind = NoiseKind::gaussian; break;
        case 8: s.n_default = 500; s.d = 1000; s.noise_kind = NoiseKind::none; break;
        default: throw std::invalid_argument("unknown model id " + std::to_string(model_id));
    }
    return s;
}

double model_regression_value(int model_id, std::span<const double> row) {
    auto t = [&](std::size_t i) { return tilde_transform(row[i]); };
    constexpr double two_pi = 2.0 * std::numbers::pi;
    switch (model_id) {
        case 1:
            return t(0) * t(0) + std::exp(-t(1) * t(1));
        case 2:
            return t(0) * t(1) + t(2) * t(2) - t(3) * t(6) + t(7) * t(9) - t(5) * t(5);
        case 3:
            return -std::sin(2.0 * t(0)) + t(1) * t(1) + t(2) - std::exp(-t(3));
        case 4: {
            double s3 = std::sin(two_pi * t(2));
            double s4 = std::sin(two_pi * t(3));
            double c4 = std::cos(two_pi * t(3));
            return t(0) + (2.0 * t(1) - 1.0) * (2.0 * t(1) - 1.0) + s3 / (2.0 - s3)
                 + s4 + 2.0 * c4 + 3.0 * s4 * s4 + 4.0 * c4 * c4;
        }
        case 5: {
            double ind1 = t(0) > 0.0 ? 1.0 : 0.0;
            double ind2 = (t(3) + t(5) - t(7) - t(8)) > (1.0 + t(9)) ? 1.0 : 0.0;
            return ind1 + t(1) * t(1) * t(1) + ind2 + std::exp(-t(1) * t(1));
        }
        case 6: {
            double s = 0.0;
            for (std::size_t k = 0; k < 10; ++k)
                if (t(k) * t(k) * t(k) < 0.0) s += 1.0;
            return s;
        }
        case 7:
            return t(0) * t(0) + t(1) * t(1) * t(2) * std::exp(-std::abs(t(3)))
                 + t(5) - t(7);
        case 8:
            return t(0) + 3.0 * t(2) * t(2) - 2.0 * std::exp(-t(4)) + t(5);
        default:
            throw std::invalid_argument("unknown model id " + std::to_string(model_id));
    }
}

Dataset generate_model(const ModelSpec& spec, std::size_t n, std::uint64_t seed,
                       NoiseInterpretation ni, std::vector<double>* realized_noise) {
    if (n == 0) throw std::invalid_argument("generate_model: n must be >= 1");
    if (spec.model_id < 1 || spec.model_id > 8)
        throw std::invalid_argument("unknown model id " + std::to_string(spec.model_id));
    if (spec.noise_scale < 0.0) throw std::invalid_argument("noise_scale must be >= 0");

    const double gaussian_sd =
        (ni == NoiseInterpretation::variance ? std::sqrt(0.5) : 0.5) * spec.noise_scale;

    Dataset out;
    out.features = Matrix(n, spec.d);
    out.responses.resize(n);
    out.origin = spec;
    if (realized_noise) realized_noise->assign(n, 0.0);

    Rng g = derive_stream(seed, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < spec.d; ++j) out.features(i, j) = g.next_unit();
        double noise = 0.0;
        switch (spec.noise_kind) {
            case NoiseKind::none: break;
            case NoiseKind::gaussian:
                noise = gaussian_sd * g.next_gaussian();
                break;
            case NoiseKind::bernoulli_indicator:
                // one fresh standard normal per observation
                noise = (g.next_gaussian() > 1.25 ? -spec.noise_scale : 0.0);
                break;
        }
        out.responses[i] = model_regression_value(spec.model_id, out.features.row(i)) + noise;
        if (realized_noise) (*realized_noise)[i] = noise;
    }
    return out;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& data, double train_fraction,
                                             std::uint64_t seed) {
    const std::size_t n = data.n();
    if (n < 2) throw std::invalid_argument("split_train_test: need n >= 2");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("split_train_test: train_fraction must be in (0,1)");
    const auto train_size =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    if (train_size == 0 || train_size == n)
        throw std::invalid_argument("split_train_test: a part would be empty");

    Rng g = derive_stream(seed, 0);
    std::vector<std::size_t> train_idx = subsample_without_replacement(n, train_size, g);
    std::sort(train_idx.begin(), train_idx.end());

    std::vector<char> in_train(n, 0);
    for (auto i : train_idx) in_train[i] = 1;

    auto take = [&](bool member) {
        Dataset part;
        std::size_t count = member ? train_size : n - train_size;
        part.features = Matrix(count, data.d());
        part.responses.resize(count);
        part.origin = data.origin;
        std::size_t r = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<bool>(in_train[i]) != member) continue;
            for (std::size_t j = 0; j < data.d(); ++j) part.features(r, j) = data.features(i, j);
            part.responses[r] = data.responses[i];
            ++r;
        }
        return part;
    };
    return {take(true), take(false)};
}

namespace {

double parse_field(const std::string& field, std::size_t line_no) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw std::runtime_error("csv: malformed numeric field '" + field + "' at line " +
                                 std::to_string(line_no));
    return v;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

Dataset read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw std::runtime_error("csv: empty file " + path);
    const std::size_t columns = split_line(line).size();
    if (columns < 2) throw std::runtime_error("csv: need at least one feature column and y");
    const std::size_t d = columns - 1;

    std::vector<double> values;
    std::size_t n = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != columns)
            throw std::runtime_error("csv: row " + std::to_string(line_no) + " has " +
                                     std::to_string(fields.size()) + " columns, expected " +
                                     std::to_string(columns));
        for (std::size_t j = 0; j < columns; ++j) {
            double v = parse_field(fields[j], line_no);
            if (j < d && !(v >= 0.0 && v <= 1.0))
                throw std::runtime_error("csv: feature outside [0,1] at row " +
                                         std::to_string(line_no) + " column " +
                                         std::to_string(j + 1));
            values.push_back(v);
        }
        ++n;
    }
    if (n == 0) throw std::runtime_error("csv: no data rows in " + path);

    Dataset out;
    out.features = Matrix(n, d);
    out.responses.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) out.features(i, j) = values[i * columns + j];
        out.responses[i] = values[i * columns + d];
    }
    return out;
}

void write_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary); // binary: LF endings everywhere
    if (!out) throw std::runtime_error("csv: cannot write " + path);
    for (std::size_t j = 0; j < data.d(); ++j) out << 'x' << (j + 1) << ',';
    out << "y\n";
    char buf[40];
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t j = 0; j < data.d(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", data.features(i, j));
            out << buf << ',';
        }
        std::snprintf(buf, sizeof buf, "%.17g", data.responses[i]);
        out << buf << '\n';
    }
    if (!out) throw std::runtime_error("csv: write failed for " + path);
}

} // namespace subforest
