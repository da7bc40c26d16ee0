#pragma once

#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/core/matrix.hpp>
#include <abmsurrogate/core/random.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace abmsurrogate::analysis {

struct SplitIndices {
    std::vector<std::size_t> trainIdx;
    std::vector<std::size_t> valIdx;
    std::vector<std::size_t> testIdx;
};

/// round(fraction * n) with halves rounded up, for fraction = 1/5.
constexpr std::size_t fifth_rounded(std::size_t n) { return (2 * n + 5) / 10; }

/// Seeded shuffle; the first 20% (rounded) is the test set, 20% of the
/// remainder the validation set, and the rest the training set.
inline SplitIndices split_dataset(std::size_t n, std::uint64_t seed) {
    require(n >= 5, "split_dataset needs at least 5 rows, got " + std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span(order));
    const std::size_t n_test = fifth_rounded(n);
    const std::size_t n_val = fifth_rounded(n - n_test);
    SplitIndices s;
    s.testIdx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.valIdx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                    order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
    s.trainIdx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), order.end());
    return s;
}

/// Per-column z-score transform using the sample (n - 1) standard deviation.
struct Standardizer {
    Vector mean;
    Vector stddev;

    [[nodiscard]] Eigen::Index dimension() const { return mean.size(); }

    [[nodiscard]] Matrix transform(const Matrix& x) const {
        require(x.cols() == mean.size(), "standardizer expects " + std::to_string(mean.size()) +
                                              " columns, got " + std::to_string(x.cols()));
        return ((x.rowwise() - mean.transpose()).array().rowwise() / stddev.transpose().array()).matrix();
    }

    [[nodiscard]] Matrix inverse(const Matrix& z) const {
        require(z.cols() == mean.size(), "standardizer dimension mismatch");
        return ((z.array().rowwise() * stddev.transpose().array()).matrix()).rowwise() + mean.transpose();
    }

    /// Fits column statistics. With `allow_constant`, zero-variance columns
    /// get a unit scale instead of raising.
    static Standardizer fit(const Matrix& x, bool allow_constant = false) {
        require(x.rows() >= 2, "standardize needs at least 2 rows");
        Standardizer s;
        s.mean = x.colwise().mean().transpose();
        s.stddev.resize(x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double ss = (x.col(j).array() - s.mean(j)).square().sum();
            const double sd = std::sqrt(ss / static_cast<double>(x.rows() - 1));
            if (!(sd > 0.0) || !std::isfinite(sd)) {
                if (!allow_constant) throw DataError("column " + std::to_string(j) + " is constant");
                s.stddev(j) = 1.0;
            } else {
                s.stddev(j) = sd;
            }
        }
        return s;
    }
};

struct StandardizeResult {
    Standardizer standardizer;
    Matrix transformed;
};

inline StandardizeResult standardize(const Matrix& data) {
    auto s = Standardizer::fit(data);
    Matrix z = s.transform(data);
    return {std::move(s), std::move(z)};
}

/// Mean of squared differences.
inline double mse(std::span<const double> actual, std::span<const double> predicted) {
    require(actual.size() == predicted.size(), "mse: length mismatch (" + std::to_string(actual.size()) +
                                                   " vs " + std::to_string(predicted.size()) + ")");
    require(!actual.empty(), "mse: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i];
        sum += e * e;
    }
    return sum / static_cast<double>(actual.size());
}

inline double mse(const Vector& actual, const Vector& predicted) {
    return mse(std::span<const double>(actual.data(), static_cast<std::size_t>(actual.size())),
               std::span<const double>(predicted.data(), static_cast<std::size_t>(predicted.size())));
}

/// Coefficient of determination, reported alongside MSE.
inline double r_squared(const Vector& actual, const Vector& predicted) {
    require(actual.size() == predicted.size() && actual.size() > 0, "r_squared: bad lengths");
    const double ss_res = (actual - predicted).squaredNorm();
    const double ss_tot = (actual.array() - actual.mean()).square().sum();
    return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
}

/// Log-scale relative scores in [0, 1]; with `lower_is_better` the smallest
/// value maps to 1 and the largest to 0. A zero span maps everything to 1.
inline std::vector<double> relative_scores(std::span<const double> values, bool lower_is_better = true) {
    require(values.size() >= 2, "relative_scores needs at least 2 values");
    for (double v : values) {
        require(v > 0.0 && std::isfinite(v), "relative_scores requires positive finite values");
    }
    double lo = std::log(values[0]);
    double hi = lo;
    for (double v : values) {
        lo = std::min(lo, std::log(v));
        hi = std::max(hi, std::log(v));
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) {
        if (hi - lo <= 0.0) {
            out.push_back(1.0);
            continue;
        }
        const double s = lower_is_better ? (hi - std::log(v)) / (hi - lo) : (std::log(v) - lo) / (hi - lo);
        out.push_back(std::clamp(s, 0.0, 1.0));
    }
    return out;
}

}  // namespace abmsurrogate::analysis
