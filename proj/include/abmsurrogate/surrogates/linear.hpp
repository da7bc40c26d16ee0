#pragma once

#include <abmsurrogate/core/matrix.hpp>

#include <Eigen/QR>

namespace abmsurrogate::surrogates {

/// Least-squares linear predictor on standardized features.
/// coefficients(0) is the intercept; coefficients(1..d) the slopes.
struct LinearModel {
    Vector coefficients;
    bool rankDeficient = false;

    [[nodiscard]] Vector predict(const Matrix& z) const {
        return (z * coefficients.tail(coefficients.size() - 1)).array() + coefficients(0);
    }
};

/// Solves min ||[1 Z] w - y|| through a complete orthogonal decomposition,
/// which yields the minimum-norm solution when the design is rank deficient.
inline LinearModel fit_linear_standardized(const Matrix& z, const Vector& y) {
    Matrix design(z.rows(), z.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(z.cols()) = z;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
    LinearModel m;
    m.coefficients = cod.solve(y);
    m.rankDeficient = cod.rank() < design.cols();
    return m;
}

}  // namespace abmsurrogate::surrogates
