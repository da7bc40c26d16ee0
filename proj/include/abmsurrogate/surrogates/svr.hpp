#pragma once

// Epsilon-insensitive support vector regression trained by sequential
// minimal optimisation with second-order working-set selection.
//
// The dual is written over 2n variables a = (alpha, alpha*):
//   min 0.5 a^T Q a + p^T a   s.t.  sum_t s_t a_t = 0,  0 <= a_t <= C
// with s = (+1.., -1..), p = (eps - y, eps + y) and Q_tu = s_t s_u K(t mod n, u mod n).

#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/core/text.hpp>
#include <abmsurrogate/core/matrix.hpp>
#include <abmsurrogate/surrogates/hyperparams.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace abmsurrogate::surrogates {

inline double svr_kernel(SvrKernel kind, double gamma, const RowVector& a, const RowVector& b) {
    if (kind == SvrKernel::linear) return a.dot(b);
    return std::exp(-gamma * (a - b).squaredNorm());
}

struct SvrModel {
    SvrKernel kernel = SvrKernel::rbf;
    double gamma = 0.0;
    double C = 10.0;
    double epsilon = 0.1;
    Matrix supportVectors;       // standardized features
    Vector dualCoefficients;     // alpha - alpha*, each in [-C, C]
    double bias = 0.0;
    double targetMean = 0.0;
    double targetScale = 1.0;
    double objective = 0.0;      // dual objective at termination
    double kktViolation = 0.0;
    long long iterations = 0;

    [[nodiscard]] Vector predict(const Matrix& z) const {
        Vector out(z.rows());
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            double f = bias;
            for (Eigen::Index i = 0; i < supportVectors.rows(); ++i) {
                f += dualCoefficients(i) * svr_kernel(kernel, gamma, supportVectors.row(i), z.row(r));
            }
            out(r) = targetMean + targetScale * f;
        }
        return out;
    }
};

inline double svr_effective_gamma(const SvrParams& p, Eigen::Index d) {
    return p.gamma > 0.0 ? p.gamma : 1.0 / static_cast<double>(d);
}

/// Fits on standardized features. Throws NumericalError, carrying the
/// achieved KKT violation, when the iteration cap is reached first.
inline SvrModel fit_svr_standardized(const Matrix& z, const Vector& y, SvrKernel kernel, const SvrParams& params) {
    require(params.C > 0.0, "svr: C must be > 0");
    require(params.epsilon >= 0.0, "svr: epsilon must be >= 0");
    require(params.tolerance > 0.0, "svr: tolerance must be > 0");
    const auto n = z.rows();
    require(n >= 1, "svr needs at least one row");

    SvrModel m;
    m.kernel = kernel;
    m.gamma = svr_effective_gamma(params, z.cols());
    m.C = params.C;
    m.epsilon = params.epsilon;
    if (params.standardizeTarget && n >= 2) {
        m.targetMean = y.mean();
        const double sd = std::sqrt((y.array() - m.targetMean).square().sum() / static_cast<double>(n - 1));
        m.targetScale = sd > 0.0 ? sd : 1.0;
    }
    const Vector yt = ((y.array() - m.targetMean) / m.targetScale).matrix();

    Matrix k(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) k(i, j) = k(j, i) = svr_kernel(kernel, m.gamma, z.row(i), z.row(j));
    }

    const Eigen::Index l = 2 * n;
    const double c = params.C;
    auto sign = [n](Eigen::Index t) { return t < n ? 1.0 : -1.0; };
    auto q = [&](Eigen::Index t, Eigen::Index u) { return sign(t) * sign(u) * k(t % n, u % n); };
    Vector a = Vector::Zero(l);
    Vector p(l);
    for (Eigen::Index i = 0; i < n; ++i) {
        p(i) = params.epsilon - yt(i);
        p(i + n) = params.epsilon + yt(i);
    }
    Vector g = p;
    const long long cap = params.maxIterations > 0
                              ? params.maxIterations
                              : std::max<long long>(10'000'000LL, 100LL * static_cast<long long>(n));
    constexpr double kTau = 1e-12;

    bool converged = false;
    long long iter = 0;
    double violation = std::numeric_limits<double>::infinity();
    for (; iter < cap; ++iter) {
        // i: maximal violating index from the "up" set
        double gmax = -std::numeric_limits<double>::infinity();
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < l; ++t) {
            if (sign(t) > 0) {
                if (a(t) < c && -g(t) >= gmax) gmax = -g(t), i = t;
            } else if (a(t) > 0 && g(t) >= gmax) {
                gmax = g(t), i = t;
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        Eigen::Index j = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < l; ++t) {
            if (sign(t) > 0) {
                if (a(t) <= 0) continue;
                gmax2 = std::max(gmax2, g(t));
                const double diff = gmax + g(t);
                if (diff > 0 && i >= 0) {
                    const double quad = std::max(q(i, i) + q(t, t) - 2.0 * sign(i) * q(i, t), kTau);
                    const double obj = -diff * diff / quad;
                    if (obj <= best) best = obj, j = t;
                }
            } else {
                if (a(t) >= c) continue;
                gmax2 = std::max(gmax2, -g(t));
                const double diff = gmax - g(t);
                if (diff > 0 && i >= 0) {
                    const double quad = std::max(q(i, i) + q(t, t) + 2.0 * sign(i) * q(i, t), kTau);
                    const double obj = -diff * diff / quad;
                    if (obj <= best) best = obj, j = t;
                }
            }
        }
        violation = gmax + gmax2;
        if (violation < params.tolerance || j < 0) {
            converged = true;
            break;
        }

        const double ai_old = a(i);
        const double aj_old = a(j);
        if (sign(i) != sign(j)) {
            const double quad = std::max(q(i, i) + q(j, j) + 2.0 * q(i, j), kTau);
            const double delta = (-g(i) - g(j)) / quad;
            const double diff = a(i) - a(j);
            a(i) += delta;
            a(j) += delta;
            if (diff > 0) {
                if (a(j) < 0) a(j) = 0, a(i) = diff;
            } else if (a(i) < 0) {
                a(i) = 0, a(j) = -diff;
            }
            if (diff > 0) {
                if (a(i) > c) a(i) = c, a(j) = c - diff;
            } else if (a(j) > c) {
                a(j) = c, a(i) = c + diff;
            }
        } else {
            const double quad = std::max(q(i, i) + q(j, j) - 2.0 * q(i, j), kTau);
            const double delta = (g(i) - g(j)) / quad;
            const double sum = a(i) + a(j);
            a(i) -= delta;
            a(j) += delta;
            if (sum > c) {
                if (a(i) > c) a(i) = c, a(j) = sum - c;
            } else if (a(j) < 0) {
                a(j) = 0, a(i) = sum;
            }
            if (sum > c) {
                if (a(j) > c) a(j) = c, a(i) = sum - c;
            } else if (a(i) < 0) {
                a(i) = 0, a(j) = sum;
            }
        }
        const double di = a(i) - ai_old;
        const double dj = a(j) - aj_old;
        for (Eigen::Index t = 0; t < l; ++t) g(t) += q(i, t) * di + q(j, t) * dj;
    }
    m.iterations = iter;
    m.kktViolation = violation;
    if (!converged) {
        throw NumericalError("svr: no convergence after " + std::to_string(iter) +
                             " iterations, KKT violation " + format_number(violation));
    }

    // bias from free variables, else the midpoint of the feasible interval
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int free_count = 0;
    for (Eigen::Index t = 0; t < l; ++t) {
        const double yg = sign(t) * g(t);
        if (a(t) >= c) {
            if (sign(t) < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (a(t) <= 0) {
            if (sign(t) > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++free_count;
            sum_free += yg;
        }
    }
    const double rho = free_count > 0 ? sum_free / free_count : 0.5 * (ub + lb);
    m.bias = -rho;
    m.objective = 0.5 * a.dot(g + p);

    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (a(i) - a(i + n) != 0.0) support.push_back(i);
    }
    m.supportVectors.resize(static_cast<Eigen::Index>(support.size()), z.cols());
    m.dualCoefficients.resize(static_cast<Eigen::Index>(support.size()));
    for (std::size_t s = 0; s < support.size(); ++s) {
        const auto idx = support[s];
        m.supportVectors.row(static_cast<Eigen::Index>(s)) = z.row(idx);
        m.dualCoefficients(static_cast<Eigen::Index>(s)) = a(idx) - a(idx + n);
    }
    return m;
}

}  // namespace abmsurrogate::surrogates
