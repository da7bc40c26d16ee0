#pragma once

// Fully connected regression network:
//   input -> batch-norm -> tanh -> H x (dense(width) -> tanh) -> batch-norm -> tanh -> dense(1)
// trained with Adam on mean squared error plus an L2 penalty on the dense
// weight matrices. Targets are standardized internally.

#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/core/matrix.hpp>
#include <abmsurrogate/core/random.hpp>
#include <abmsurrogate/core/text.hpp>
#include <abmsurrogate/surrogates/hyperparams.hpp>

#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

namespace abmsurrogate::surrogates {

/// Offsets of each block inside the flat parameter vector.
struct MlpLayout {
    Eigen::Index inputDim = 0;
    Eigen::Index width = 0;
    int hiddenLayers = 0;

    MlpLayout() = default;
    MlpLayout(Eigen::Index d, Eigen::Index w, int h) : inputDim(d), width(w), hiddenLayers(h) {}

    [[nodiscard]] Eigen::Index layer_input(int l) const { return l == 0 ? inputDim : width; }
    [[nodiscard]] Eigen::Index gamma1() const { return 0; }
    [[nodiscard]] Eigen::Index beta1() const { return inputDim; }
    [[nodiscard]] Eigen::Index weight(int l) const {
        Eigen::Index o = 2 * inputDim;
        for (int k = 0; k < l; ++k) o += width * layer_input(k) + width;
        return o;
    }
    [[nodiscard]] Eigen::Index bias(int l) const { return weight(l) + width * layer_input(l); }
    [[nodiscard]] Eigen::Index gamma2() const { return weight(hiddenLayers); }
    [[nodiscard]] Eigen::Index beta2() const { return gamma2() + width; }
    [[nodiscard]] Eigen::Index outWeight() const { return beta2() + width; }
    [[nodiscard]] Eigen::Index outBias() const { return outWeight() + width; }
    [[nodiscard]] Eigen::Index size() const { return outBias() + 1; }
};

struct MlpModel {
    MlpLayout layout;
    Vector parameters;
    Vector runningMean1, runningVar1, runningMean2, runningVar2;
    double batchNormEpsilon = 1e-5;
    double targetMean = 0.0;
    double targetScale = 1.0;
    double validationMse = 0.0;
    std::vector<std::pair<int, double>> gridValidationMse;  // (hidden layers, validation MSE)

    [[nodiscard]] int hiddenLayers() const { return layout.hiddenLayers; }
    [[nodiscard]] Eigen::Index hiddenWidth() const { return layout.width; }

    /// Inference with running batch-norm statistics.
    [[nodiscard]] Vector predict(const Matrix& z) const {
        using Map = Eigen::Map<const Matrix>;
        using VMap = Eigen::Map<const Vector>;
        const auto& L = layout;
        const double* p = parameters.data();
        Matrix h = z.transpose();
        const auto bn = [&](Matrix& a, const Vector& mean, const Vector& var, Eigen::Index go, Eigen::Index bo) {
            const Eigen::Index k = a.rows();
            const Vector scale = VMap(p + go, k).array() / (var.array() + batchNormEpsilon).sqrt();
            a = ((a.colwise() - mean).array().colwise() * scale.array()).colwise() + VMap(p + bo, k).array();
            a = a.array().tanh();
        };
        bn(h, runningMean1, runningVar1, L.gamma1(), L.beta1());
        for (int l = 0; l < L.hiddenLayers; ++l) {
            Matrix a = Map(p + L.weight(l), L.width, L.layer_input(l)) * h;
            a.colwise() += VMap(p + L.bias(l), L.width);
            h = a.array().tanh();
        }
        bn(h, runningMean2, runningVar2, L.gamma2(), L.beta2());
        const Vector out = (VMap(p + L.outWeight(), L.width).transpose() * h).transpose().array() + p[L.outBias()];
        return (out.array() * targetScale + targetMean).matrix();
    }
};

namespace mlp_detail {

struct BatchNormCache {
    Matrix xhat;
    Vector invStd;
    Vector mean;
    Vector var;  // biased batch variance
};

inline Matrix bn_forward(const Matrix& x, const double* gamma, const double* beta, double eps, BatchNormCache& c) {
    const auto m = static_cast<double>(x.cols());
    c.mean = x.rowwise().mean();
    const Matrix centred = x.colwise() - c.mean;
    c.var = centred.array().square().rowwise().sum() / m;
    c.invStd = (c.var.array() + eps).rsqrt();
    c.xhat = centred.array().colwise() * c.invStd.array();
    const Eigen::Map<const Vector> g(gamma, x.rows());
    const Eigen::Map<const Vector> b(beta, x.rows());
    return (c.xhat.array().colwise() * g.array()).colwise() + b.array();
}

/// Returns dL/dx given dL/dy; accumulates the gamma and beta gradients.
inline Matrix bn_backward(const Matrix& dy, const double* gamma, const BatchNormCache& c, double* dgamma,
                          double* dbeta) {
    const auto k = dy.rows();
    const auto m = static_cast<double>(dy.cols());
    Eigen::Map<Vector>(dgamma, k) += (dy.array() * c.xhat.array()).rowwise().sum().matrix();
    Eigen::Map<Vector>(dbeta, k) += dy.rowwise().sum();
    const Matrix dxhat = dy.array().colwise() * Eigen::Map<const Vector>(gamma, k).array();
    const Vector sum_dxhat = dxhat.rowwise().sum();
    const Vector sum_dxhat_xhat = (dxhat.array() * c.xhat.array()).rowwise().sum();
    Matrix dx = (m * dxhat.array() - c.xhat.array().colwise() * sum_dxhat_xhat.array()).colwise() -
                sum_dxhat.array();
    return dx.array().colwise() * (c.invStd.array() / m);
}

}  // namespace mlp_detail

/// Training-mode objective for one batch: batch statistics in both
/// batch-norm layers, loss = mean((f - y)^2) + (l2 / 2) * sum ||W||^2.
class MlpObjective {
public:
    MlpObjective(MlpLayout layout, double l2, double eps) : L_(layout), l2_(l2), eps_(eps) {}

    /// `x` holds one sample per column. Writes the gradient into `grad` and,
    /// when non-null, the batch means/variances of both batch-norm layers.
    double loss_and_gradient(const Vector& theta, const Matrix& x, const Vector& y, Vector& grad,
                             std::vector<mlp_detail::BatchNormCache>* stats = nullptr) {
        using Map = Eigen::Map<const Matrix>;
        using VMap = Eigen::Map<const Vector>;
        const double* p = theta.data();
        const auto m = static_cast<double>(x.cols());
        const int H = L_.hiddenLayers;
        grad.setZero(L_.size());

        mlp_detail::BatchNormCache bn1, bn2;
        std::vector<Matrix> h(static_cast<std::size_t>(H) + 1);
        h[0] = mlp_detail::bn_forward(x, p + L_.gamma1(), p + L_.beta1(), eps_, bn1).array().tanh();
        for (int l = 0; l < H; ++l) {
            Matrix a = Map(p + L_.weight(l), L_.width, L_.layer_input(l)) * h[static_cast<std::size_t>(l)];
            a.colwise() += VMap(p + L_.bias(l), L_.width);
            h[static_cast<std::size_t>(l) + 1] = a.array().tanh();
        }
        const Matrix t =
            mlp_detail::bn_forward(h[static_cast<std::size_t>(H)], p + L_.gamma2(), p + L_.beta2(), eps_, bn2)
                .array()
                .tanh();
        const VMap w_out(p + L_.outWeight(), L_.width);
        const Vector out = (w_out.transpose() * t).transpose().array() + p[L_.outBias()];
        const Vector resid = out - y;

        double penalty = w_out.squaredNorm();
        for (int l = 0; l < H; ++l) penalty += VMap(p + L_.weight(l), L_.width * L_.layer_input(l)).squaredNorm();
        const double loss = resid.squaredNorm() / m + 0.5 * l2_ * penalty;

        const Vector dout = 2.0 * resid / m;
        Eigen::Map<Vector>(grad.data() + L_.outWeight(), L_.width) = t * dout + l2_ * w_out;
        grad(L_.outBias()) = dout.sum();
        Matrix dv = (w_out * dout.transpose()).array() * (1.0 - t.array().square());
        Matrix dh = mlp_detail::bn_backward(dv, p + L_.gamma2(), bn2, grad.data() + L_.gamma2(),
                                            grad.data() + L_.beta2());
        for (int l = H - 1; l >= 0; --l) {
            const auto& hin = h[static_cast<std::size_t>(l)];
            const auto& hout = h[static_cast<std::size_t>(l) + 1];
            const Matrix da = dh.array() * (1.0 - hout.array().square());
            const Map w(p + L_.weight(l), L_.width, L_.layer_input(l));
            Eigen::Map<Matrix>(grad.data() + L_.weight(l), L_.width, L_.layer_input(l)) =
                da * hin.transpose() + l2_ * w;
            Eigen::Map<Vector>(grad.data() + L_.bias(l), L_.width) = da.rowwise().sum();
            dh = w.transpose() * da;
        }
        const Matrix du = dh.array() * (1.0 - h[0].array().square());
        mlp_detail::bn_backward(du, p + L_.gamma1(), bn1, grad.data() + L_.gamma1(), grad.data() + L_.beta1());
        if (stats != nullptr) *stats = {std::move(bn1), std::move(bn2)};
        return loss;
    }

private:
    MlpLayout L_;
    double l2_;
    double eps_;
};

/// Glorot-uniform dense weights, zero biases, unit batch-norm scales.
inline Vector mlp_initial_parameters(const MlpLayout& L, Rng& rng) {
    Vector theta = Vector::Zero(L.size());
    theta.segment(L.gamma1(), L.inputDim).setOnes();
    theta.segment(L.gamma2(), L.width).setOnes();
    auto glorot = [&](Eigen::Index offset, Eigen::Index fan_out, Eigen::Index fan_in) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (Eigen::Index i = 0; i < fan_out * fan_in; ++i) theta(offset + i) = rng.uniform(-limit, limit);
    };
    for (int l = 0; l < L.hiddenLayers; ++l) glorot(L.weight(l), L.width, L.layer_input(l));
    glorot(L.outWeight(), 1, L.width);
    return theta;
}

/// Splits a shuffled order into batches of `batch` rows; a trailing batch of
/// one row is merged into its predecessor so batch-norm always sees >= 2 rows.
inline std::vector<std::pair<std::size_t, std::size_t>> mlp_batches(std::size_t n, std::size_t batch) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t start = 0; start < n; start += batch) out.emplace_back(start, std::min(n, start + batch));
    if (out.size() > 1 && out.back().second - out.back().first == 1) {
        out[out.size() - 2].second = n;
        out.pop_back();
    }
    return out;
}

/// Trains one network with a fixed hidden-layer count on standardized
/// features and standardized targets.
inline MlpModel train_mlp_fixed(const Matrix& z, const Vector& y_std, int hidden_layers, const MlpParams& hp,
                                std::uint64_t seed) {
    require(hidden_layers >= 1, "mlp needs at least one hidden layer");
    require(hp.hiddenWidth >= 1 && hp.epochs >= 0 && hp.batchSize >= 1, "mlp: invalid hyperparameters");
    require(hp.learningRate > 0.0 && hp.l2 >= 0.0, "mlp: invalid learning rate or penalty");
    require(z.rows() >= 2, "mlp needs at least 2 training rows");
    const MlpLayout L(z.cols(), hp.hiddenWidth, hidden_layers);
    Rng rng(seed);
    MlpModel m;
    m.layout = L;
    m.batchNormEpsilon = hp.batchNormEpsilon;
    m.parameters = mlp_initial_parameters(L, rng);
    m.runningMean1 = Vector::Zero(L.inputDim);
    m.runningVar1 = Vector::Ones(L.inputDim);
    m.runningMean2 = Vector::Zero(L.width);
    m.runningVar2 = Vector::Ones(L.width);

    MlpObjective objective(L, hp.l2, hp.batchNormEpsilon);
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;
    Vector moment1 = Vector::Zero(L.size());
    Vector moment2 = Vector::Zero(L.size());
    Vector grad(L.size());
    double power1 = 1.0, power2 = 1.0;

    const auto n = static_cast<std::size_t>(z.rows());
    const std::size_t batch = std::min<std::size_t>(n, static_cast<std::size_t>(hp.batchSize));
    const auto batches = mlp_batches(n, batch);
    const Matrix zt = z.transpose();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<mlp_detail::BatchNormCache> stats;
    const double mom = hp.batchNormMomentum;

    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        rng.shuffle(std::span(order));
        for (const auto& [begin, end] : batches) {
            const auto bs = static_cast<Eigen::Index>(end - begin);
            Matrix xb(L.inputDim, bs);
            Vector yb(bs);
            for (Eigen::Index c = 0; c < bs; ++c) {
                const auto row = static_cast<Eigen::Index>(order[begin + static_cast<std::size_t>(c)]);
                xb.col(c) = zt.col(row);
                yb(c) = y_std(row);
            }
            const double loss = objective.loss_and_gradient(m.parameters, xb, yb, grad, &stats);
            if (!std::isfinite(loss) || !grad.allFinite()) {
                throw NumericalError("mlp: non-finite loss " + format_number(loss) + " at epoch " +
                                     std::to_string(epoch) + " with " + std::to_string(hidden_layers) +
                                     " hidden layers");
            }
            power1 *= kBeta1;
            power2 *= kBeta2;
            moment1 = kBeta1 * moment1 + (1.0 - kBeta1) * grad;
            moment2 = kBeta2 * moment2 + (1.0 - kBeta2) * grad.cwiseAbs2();
            const double step = hp.learningRate * std::sqrt(1.0 - power2) / (1.0 - power1);
            m.parameters.array() -= step * moment1.array() / (moment2.array().sqrt() + kAdamEps);

            const double unbias = static_cast<double>(bs) / static_cast<double>(bs - 1);
            m.runningMean1 = mom * m.runningMean1 + (1.0 - mom) * stats[0].mean;
            m.runningVar1 = mom * m.runningVar1 + (1.0 - mom) * unbias * stats[0].var;
            m.runningMean2 = mom * m.runningMean2 + (1.0 - mom) * stats[1].mean;
            m.runningVar2 = mom * m.runningVar2 + (1.0 - mom) * unbias * stats[1].var;
        }
    }
    return m;
}

/// Grid search over hidden-layer counts; each candidate is trained on the
/// training rows and scored by validation MSE in target units. The best
/// candidate (first on ties) is returned.
inline MlpModel fit_mlp_standardized(const Matrix& z_train, const Vector& y_train, const Matrix& z_val,
                                     const Vector& y_val, const MlpParams& hp, std::uint64_t seed) {
    require(z_train.cols() == z_val.cols(), "mlp: train and validation dimensions differ");
    require(!hp.hiddenLayerGrid.empty(), "mlp: empty hidden-layer grid");
    require(z_val.rows() >= 1, "mlp needs at least one validation row");
    const double mean = y_train.mean();
    double sd = std::sqrt((y_train.array() - mean).square().sum() / std::max<double>(1, y_train.size() - 1));
    if (!(sd > 0.0)) sd = 1.0;
    const Vector y_std = ((y_train.array() - mean) / sd).matrix();

    MlpModel best;
    std::vector<std::pair<int, double>> grid;
    for (int h : hp.hiddenLayerGrid) {
        MlpModel cand = train_mlp_fixed(z_train, y_std, h, hp, derive_seed(seed, static_cast<std::uint64_t>(h)));
        cand.targetMean = mean;
        cand.targetScale = sd;
        const Vector pred = cand.predict(z_val);
        const double val_mse = (pred - y_val).squaredNorm() / static_cast<double>(y_val.size());
        cand.validationMse = val_mse;
        grid.emplace_back(h, val_mse);
        if (grid.size() == 1 || val_mse < best.validationMse) best = std::move(cand);
    }
    best.gridValidationMse = grid;
    return best;
}

}  // namespace abmsurrogate::surrogates
