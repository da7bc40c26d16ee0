#pragma once

#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/core/matrix.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace abmsurrogate::surrogates {

struct Dataset {
    Matrix X;  // n x d
    Vector y;  // n
    std::vector<std::string> featureNames;

    Dataset() = default;
    Dataset(Matrix x, Vector target, std::vector<std::string> names = {})
        : X(std::move(x)), y(std::move(target)), featureNames(std::move(names)) {
        if (featureNames.empty()) {
            for (Eigen::Index j = 0; j < X.cols(); ++j) featureNames.push_back("x" + std::to_string(j + 1));
        }
        validate();
    }

    [[nodiscard]] Eigen::Index rows() const { return X.rows(); }
    [[nodiscard]] Eigen::Index dimension() const { return X.cols(); }

    void validate() const {
        require(X.rows() == y.size(), "dataset has " + std::to_string(X.rows()) + " feature rows but " +
                                          std::to_string(y.size()) + " targets");
        require(static_cast<Eigen::Index>(featureNames.size()) == X.cols(), "feature name count mismatch");
        require(X.allFinite() && y.allFinite(), "dataset contains non-finite entries");
    }

    [[nodiscard]] Dataset subset(const std::vector<std::size_t>& rows_idx) const {
        Dataset out;
        out.X.resize(static_cast<Eigen::Index>(rows_idx.size()), X.cols());
        out.y.resize(static_cast<Eigen::Index>(rows_idx.size()));
        for (std::size_t i = 0; i < rows_idx.size(); ++i) {
            require(rows_idx[i] < static_cast<std::size_t>(X.rows()), "subset index out of range");
            out.X.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows_idx[i]));
            out.y(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(rows_idx[i]));
        }
        out.featureNames = featureNames;
        return out;
    }
};

}  // namespace abmsurrogate::surrogates
