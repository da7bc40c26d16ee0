#pragma once

// Correlation-matrix PCA with Kaiser / cumulative-variance retention and the
// loading-correlation significance rule.

#include <abmsurrogate/analysis/statistics.hpp>
#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/core/matrix.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace abmsurrogate::analysis {

inline constexpr double kKaiserThreshold = 1.0;
inline constexpr double kCumulativeVarianceTarget = 0.70;
inline constexpr double kSignificantLoading = 0.5;

struct PcaResult {
    Vector eigenvalues;  // descending
    Matrix loadings;     // d x d, orthonormal columns
    Matrix scores;       // n x d
    std::size_t retainedCount = 0;
    Vector cumulativeVarianceFraction;
};

/// max(#{lambda > 1}, smallest k whose cumulative variance fraction reaches 70%).
inline std::size_t retained_components(const Vector& eigenvalues) {
    const double total = eigenvalues.sum();
    std::size_t kaiser = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (eigenvalues(i) > kKaiserThreshold) ++kaiser;
    }
    std::size_t cumulative_k = static_cast<std::size_t>(eigenvalues.size());
    if (total > 0.0) {
        double running = 0.0;
        for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
            running += eigenvalues(i);
            // tolerance absorbs rounding in sums such as 0.7 * 10 ones
            if (running / total >= kCumulativeVarianceTarget - 1e-12) {
                cumulative_k = static_cast<std::size_t>(i + 1);
                break;
            }
        }
    }
    return std::max(kaiser, cumulative_k);
}

inline std::size_t retained_components(const PcaResult& result) { return retained_components(result.eigenvalues); }

/// Variables whose correlation with the component (loading * sqrt(lambda)) exceeds 0.5 in magnitude.
inline std::vector<std::size_t> significant_loadings(const PcaResult& result, std::size_t component) {
    require(component < static_cast<std::size_t>(result.eigenvalues.size()), "component index out of range");
    const auto c = static_cast<Eigen::Index>(component);
    const double scale = std::sqrt(std::max(0.0, result.eigenvalues(c)));
    std::vector<std::size_t> out;
    for (Eigen::Index v = 0; v < result.loadings.rows(); ++v) {
        if (std::abs(result.loadings(v, c) * scale) > kSignificantLoading) out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

/// Correlation of every variable with each component (the factor-map coordinates).
inline Matrix loading_correlations(const PcaResult& result) {
    return result.loadings * result.eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

inline PcaResult pca_decompose(const Matrix& data) {
    require(data.rows() > data.cols(), "pca needs more rows than columns");
    const auto [standardizer, z] = standardize(data);
    const auto n = static_cast<double>(data.rows());
    const Matrix corr = (z.transpose() * z) / (n - 1.0);

    Eigen::SelfAdjointEigenSolver<Matrix> solver(corr);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    const auto d = corr.rows();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        return solver.eigenvalues()(a) > solver.eigenvalues()(b);
    });

    PcaResult r;
    r.eigenvalues.resize(d);
    r.loadings.resize(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const auto src = order[static_cast<std::size_t>(k)];
        r.eigenvalues(k) = std::max(0.0, solver.eigenvalues()(src));
        Vector v = solver.eigenvectors().col(src);
        Eigen::Index pivot = 0;
        v.cwiseAbs().maxCoeff(&pivot);
        if (v(pivot) < 0.0) v = -v;
        r.loadings.col(k) = v;
    }
    r.scores = z * r.loadings;
    r.cumulativeVarianceFraction.resize(d);
    const double total = r.eigenvalues.sum();
    double running = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
        running += r.eigenvalues(k);
        r.cumulativeVarianceFraction(k) = total > 0.0 ? running / total : 0.0;
    }
    r.retainedCount = retained_components(r.eigenvalues);
    return r;
}

}  // namespace abmsurrogate::analysis
