#pragma once

// Gaussian-process regression with a constant mean and an anisotropic
// squared-exponential kernel plus nugget:
//
//   k(a, b) = s2 * exp(-0.5 * sum_k (a_k - b_k)^2 / l_k^2) + nugget * [a == b]
//
// Hyperparameters are optimised in log space by maximising the log marginal
// likelihood with the mean constant profiled out (generalised least squares).

#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/core/matrix.hpp>
#include <abmsurrogate/core/random.hpp>
#include <abmsurrogate/surrogates/hyperparams.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numbers>

namespace abmsurrogate::surrogates {

struct GpModel {
    Vector lengthscales;  // standardized feature units
    double signalVariance = 1.0;
    double nugget = 1e-6;
    double jitter = 0.0;  // extra diagonal added only if the factorisation needed it
    Matrix trainingZ;
    Matrix cholFactor;  // lower triangular L with L L^T = K + (nugget + jitter) I
    Vector alphaWeights;
    double meanConstant = 0.0;
    double targetMean = 0.0;   // target standardization (identity when disabled)
    double targetScale = 1.0;
    double logMarginalLikelihood = 0.0;

    [[nodiscard]] Vector kernel_vector(const RowVector& z) const {
        Vector k(trainingZ.rows());
        const Vector inv_l2 = lengthscales.array().square().inverse();
        for (Eigen::Index i = 0; i < trainingZ.rows(); ++i) {
            const double d2 = ((trainingZ.row(i) - z).array().square() * inv_l2.transpose().array()).sum();
            k(i) = signalVariance * std::exp(-0.5 * d2);
        }
        return k;
    }

    /// Posterior mean and variance in target units at a standardized input.
    [[nodiscard]] std::pair<double, double> posterior(const RowVector& z) const {
        const Vector k = kernel_vector(z);
        const double mean = meanConstant + k.dot(alphaWeights);
        const Vector v = cholFactor.triangularView<Eigen::Lower>().solve(k);
        const double var = std::max(0.0, signalVariance + nugget - v.squaredNorm());
        return {targetMean + targetScale * mean, targetScale * targetScale * var};
    }

    [[nodiscard]] Vector predict(const Matrix& z) const {
        Vector out(z.rows());
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            out(r) = targetMean + targetScale * (meanConstant + kernel_vector(z.row(r)).dot(alphaWeights));
        }
        return out;
    }
};

namespace gp_detail {

inline Matrix signal_kernel(const Matrix& z, const Vector& lengthscales, double signal_variance) {
    const auto n = z.rows();
    const Vector inv_l2 = lengthscales.array().square().inverse();
    Matrix k(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        k(j, j) = signal_variance;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double d2 = ((z.row(i) - z.row(j)).array().square() * inv_l2.transpose().array()).sum();
            k(i, j) = k(j, i) = signal_variance * std::exp(-0.5 * d2);
        }
    }
    return k;
}

}  // namespace gp_detail

/// Layout of the hyperparameter vector: [log l_1..log l_d, log s2, log nugget].
inline Vector gp_pack(const Vector& lengthscales, double signal_variance, double nugget) {
    Vector theta(lengthscales.size() + 2);
    theta.head(lengthscales.size()) = lengthscales.array().log().matrix();
    theta(lengthscales.size()) = std::log(signal_variance);
    theta(lengthscales.size() + 1) = std::log(nugget);
    return theta;
}

/// Profiled log marginal likelihood; fills the analytic gradient with
/// respect to theta when `gradient` is non-null. Returns -inf when the
/// kernel matrix is not numerically positive definite.
inline double gp_log_marginal_likelihood(const Matrix& z, const Vector& y, const Vector& theta,
                                         Vector* gradient = nullptr) {
    const auto d = z.cols();
    const auto n = z.rows();
    require(theta.size() == d + 2, "gp: hyperparameter vector has wrong length");
    const Vector lengthscales = theta.head(d).array().exp().matrix();
    const double s2 = std::exp(theta(d));
    const double nugget = std::exp(theta(d + 1));

    const Matrix kf = gp_detail::signal_kernel(z, lengthscales, s2);
    Matrix k = kf;
    k.diagonal().array() += nugget;
    Eigen::LLT<Matrix> llt(k);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Vector ones = Vector::Ones(n);
    const Vector kinv_one = llt.solve(ones);
    const Vector kinv_y = llt.solve(y);
    const double beta = ones.dot(kinv_y) / ones.dot(kinv_one);
    const Vector alpha = llt.solve((y.array() - beta).matrix());
    const Matrix& l = llt.matrixLLT();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    const double lml = -0.5 * (y.array() - beta).matrix().dot(alpha) - 0.5 * logdet -
                       0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    if (gradient != nullptr) {
        // dL/dtheta_j = 0.5 * tr((alpha alpha^T - K^-1) dK/dtheta_j); the profiled
        // mean contributes nothing because beta is stationary.
        Matrix w = llt.solve(Matrix::Identity(n, n));
        w = alpha * alpha.transpose() - w;
        gradient->setZero(d + 2);
        const Vector inv_l2 = lengthscales.array().square().inverse();
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = j + 1; i < n; ++i) {
                const double wk = w(i, j) * kf(i, j);  // counted twice by symmetry
                for (Eigen::Index c = 0; c < d; ++c) {
                    const double diff = z(i, c) - z(j, c);
                    (*gradient)(c) += wk * diff * diff * inv_l2(c);
                }
                (*gradient)(d) += wk;
            }
        }
        (*gradient)(d) += 0.5 * (w.diagonal().array() * kf.diagonal().array()).sum();
        (*gradient)(d + 1) = 0.5 * nugget * w.trace();
    }
    return lml;
}

namespace gp_detail {

struct Bounds {
    Vector lower;
    Vector upper;
};

inline Bounds default_bounds(Eigen::Index d) {
    Bounds b{Vector(d + 2), Vector(d + 2)};
    b.lower.head(d).setConstant(std::log(1e-2));
    b.upper.head(d).setConstant(std::log(1e3));
    b.lower(d) = std::log(1e-4);
    b.upper(d) = std::log(1e3);
    b.lower(d + 1) = std::log(1e-10);
    b.upper(d + 1) = std::log(10.0);
    return b;
}

/// Projected L-BFGS minimisation of f within box bounds.
inline Vector minimise_box(const std::function<double(const Vector&, Vector*)>& f, Vector x, const Bounds& bounds,
                           int max_iterations, double* best_value) {
    auto project = [&](Vector v) { return v.cwiseMax(bounds.lower).cwiseMin(bounds.upper); };
    x = project(std::move(x));
    Vector g;
    double fx = f(x, &g);
    if (!std::isfinite(fx)) {
        *best_value = fx;
        return x;
    }
    std::deque<std::pair<Vector, Vector>> memory;
    constexpr std::size_t kMemory = 7;
    for (int it = 0; it < max_iterations; ++it) {
        Vector q = g;
        std::vector<double> alphas;
        for (auto m = memory.rbegin(); m != memory.rend(); ++m) {
            const double a = m->first.dot(q) / m->second.dot(m->first);
            alphas.push_back(a);
            q -= a * m->second;
        }
        if (!memory.empty()) {
            const auto& [s, yv] = memory.back();
            q *= s.dot(yv) / yv.squaredNorm();
        } else {
            q /= std::max(1.0, g.lpNorm<Eigen::Infinity>());
        }
        std::size_t ai = alphas.size();
        for (const auto& [s, yv] : memory) {
            const double b = yv.dot(q) / yv.dot(s);
            q += s * (alphas[--ai] - b);
        }
        Vector dir = -q;
        if (g.dot(dir) >= 0.0) {
            memory.clear();
            dir = -g / std::max(1.0, g.lpNorm<Eigen::Infinity>());
        }

        double t = 1.0;
        bool accepted = false;
        Vector x_new, g_new;
        double f_new = fx;
        for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
            x_new = project(x + t * dir);
            const Vector step = x_new - x;
            if (step.lpNorm<Eigen::Infinity>() < 1e-12) break;
            f_new = f(x_new, &g_new);
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * g.dot(step)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (memory.empty()) break;
            memory.clear();
            continue;
        }
        const Vector s = x_new - x;
        const Vector yv = g_new - g;
        const double improvement = fx - f_new;
        x = x_new;
        g = g_new;
        fx = f_new;
        if (s.dot(yv) > 1e-12) {
            memory.emplace_back(s, yv);
            if (memory.size() > kMemory) memory.pop_front();
        }
        const Vector projected = project(x - g) - x;
        if (projected.lpNorm<Eigen::Infinity>() < 1e-6 || improvement < 1e-10 * (1.0 + std::abs(fx))) break;
    }
    *best_value = fx;
    return x;
}

}  // namespace gp_detail

/// Fits the GP on standardized features. With `params.optimize` the
/// hyperparameters maximise the marginal likelihood from `restarts` starting
/// points (the first at the configured initial values).
inline GpModel fit_gp_standardized(const Matrix& z, const Vector& y, const GpParams& params, std::uint64_t seed) {
    require(z.rows() >= 2, "gp needs at least 2 rows");
    require(z.rows() <= params.maxRows, "gp: " + std::to_string(z.rows()) + " rows exceed the cap of " +
                                            std::to_string(params.maxRows));
    require(params.lengthscaleInit > 0.0 && params.signalVarianceInit > 0.0 && params.nuggetInit > 0.0,
            "gp: initial hyperparameters must be positive");
    const auto d = z.cols();

    GpModel m;
    m.trainingZ = z;
    if (params.standardizeTarget) {
        m.targetMean = y.mean();
        const double sd = std::sqrt((y.array() - m.targetMean).square().sum() / std::max<double>(1, y.size() - 1));
        m.targetScale = sd > 0.0 ? sd : 1.0;
    }
    const Vector yt = ((y.array() - m.targetMean) / m.targetScale).matrix();

    Vector theta = gp_pack(Vector::Constant(d, params.lengthscaleInit), params.signalVarianceInit, params.nuggetInit);
    if (params.optimize) {
        const auto bounds = gp_detail::default_bounds(d);
        auto objective = [&](const Vector& t, Vector* grad) {
            const double lml = gp_log_marginal_likelihood(z, yt, t, grad);
            if (grad != nullptr) *grad = -*grad;
            return -lml;
        };
        double best = std::numeric_limits<double>::infinity();
        Vector best_theta = theta;
        for (int r = 0; r < std::max(1, params.restarts); ++r) {
            Vector start = theta;
            if (r > 0) {
                Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
                for (Eigen::Index c = 0; c < d; ++c) start(c) += rng.uniform(-1.5, 1.5);
                start(d) += rng.uniform(-1.0, 1.0);
            }
            double value = 0.0;
            Vector found = gp_detail::minimise_box(objective, start, bounds, params.maxIterations, &value);
            if (std::isfinite(value) && value < best) {
                best = value;
                best_theta = found;
            }
        }
        if (!std::isfinite(best)) throw NumericalError("gp: marginal likelihood is not finite at any start");
        theta = best_theta;
    }

    m.lengthscales = theta.head(d).array().exp().matrix();
    m.signalVariance = std::exp(theta(d));
    m.nugget = std::exp(theta(d + 1));

    const Matrix kf = gp_detail::signal_kernel(z, m.lengthscales, m.signalVariance);
    const double mean_diag = m.signalVariance + m.nugget;
    Eigen::LLT<Matrix> llt;
    for (double jitter = 0.0;; jitter = jitter == 0.0 ? 1e-10 * mean_diag : jitter * 10.0) {
        if (jitter > 1e-2 * mean_diag) {
            throw NumericalError("gp: kernel matrix not positive definite after jitter escalation");
        }
        Matrix k = kf;
        k.diagonal().array() += m.nugget + jitter;
        llt.compute(k);
        if (llt.info() == Eigen::Success) {
            m.jitter = jitter;
            break;
        }
    }
    m.cholFactor = llt.matrixL();
    const Vector ones = Vector::Ones(z.rows());
    m.meanConstant = ones.dot(llt.solve(yt)) / ones.dot(llt.solve(ones));
    m.alphaWeights = llt.solve((yt.array() - m.meanConstant).matrix());
    m.logMarginalLikelihood = gp_log_marginal_likelihood(z, yt, theta, nullptr);
    return m;
}

}  // namespace abmsurrogate::surrogates
