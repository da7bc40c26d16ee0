#pragma once

#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/core/matrix.hpp>

#include <algorithm>
#include <utility>
#include <vector>

namespace abmsurrogate::surrogates {

/// k-nearest-neighbour regression on standardized features. Distance ties
/// are broken by the lower training row index.
struct KnnModel {
    Matrix storedZ;
    Vector storedY;
    int k = 5;

    [[nodiscard]] std::vector<std::size_t> neighbours(const RowVector& query) const {
        const auto n = static_cast<std::size_t>(storedZ.rows());
        std::vector<std::pair<double, std::size_t>> dist(n);
        for (std::size_t i = 0; i < n; ++i) {
            dist[i] = {(storedZ.row(static_cast<Eigen::Index>(i)) - query).squaredNorm(), i};
        }
        const auto kk = static_cast<std::size_t>(k);
        std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk - 1), dist.end());
        std::vector<std::size_t> idx(kk);
        for (std::size_t i = 0; i < kk; ++i) idx[i] = dist[i].second;
        std::sort(idx.begin(), idx.end());
        return idx;
    }

    [[nodiscard]] Vector predict(const Matrix& z) const {
        Vector out(z.rows());
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            double sum = 0.0;
            for (auto i : neighbours(z.row(r))) sum += storedY(static_cast<Eigen::Index>(i));
            out(r) = sum / static_cast<double>(k);
        }
        return out;
    }
};

inline KnnModel fit_knn_standardized(const Matrix& z, const Vector& y, int k) {
    require(k >= 1 && k <= z.rows(), "knn: k = " + std::to_string(k) + " outside [1, " +
                                         std::to_string(z.rows()) + "]");
    return KnnModel{z, y, k};
}

}  // namespace abmsurrogate::surrogates
