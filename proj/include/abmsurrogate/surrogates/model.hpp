#pragma once

#include <abmsurrogate/analysis/statistics.hpp>
#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/surrogates/dataset.hpp>
#include <abmsurrogate/surrogates/gp.hpp>
#include <abmsurrogate/surrogates/hyperparams.hpp>
#include <abmsurrogate/surrogates/knn.hpp>
#include <abmsurrogate/surrogates/linear.hpp>
#include <abmsurrogate/surrogates/mlp.hpp>
#include <abmsurrogate/surrogates/svr.hpp>
#include <abmsurrogate/surrogates/tree.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace abmsurrogate::surrogates {

enum class Method { mlp, svrLinear, svrRbf, forest, linear, gbt, knn, gp, tree };

struct MethodInfo {
    Method method;
    std::string_view id;
    std::string_view displayName;
};

inline constexpr std::array<MethodInfo, 9> kMethods{{
    {Method::mlp, "mlp", "Neural Network"},
    {Method::svrLinear, "svr_linear", "Linear SVM"},
    {Method::svrRbf, "svr_rbf", "Non-Linear SVM"},
    {Method::forest, "forest", "Random Forest"},
    {Method::linear, "linear", "Linear Regression"},
    {Method::gbt, "gbt", "Gradient Boosted Trees"},
    {Method::knn, "knn", "K-Nearest Neighbours"},
    {Method::gp, "gp", "Gaussian Process"},
    {Method::tree, "tree", "Decision Trees"},
}};

inline const MethodInfo& method_info(Method m) {
    for (const auto& info : kMethods) {
        if (info.method == m) return info;
    }
    throw DataError("unknown method");
}

inline std::string method_id(Method m) { return std::string(method_info(m).id); }
inline std::string method_display_name(Method m) { return std::string(method_info(m).displayName); }

/// Accepts either the short id ("gbt") or the display name, case-insensitively.
inline Method parse_method(std::string_view text) {
    auto lower = [](std::string_view s) {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
        return out;
    };
    const std::string key = lower(trim(text));
    for (const auto& info : kMethods) {
        if (key == info.id || key == lower(info.displayName)) return info.method;
    }
    throw DataError("unknown method '" + std::string(text) + "'");
}

using ModelVariant = std::variant<LinearModel, TreeModel, ForestModel, GbtModel, KnnModel, GpModel, SvrModel, MlpModel>;

/// A fitted surrogate together with the feature standardizer used at fit
/// time. Immutable once constructed.
class TrainedModel {
public:
    TrainedModel(Method method, analysis::Standardizer standardizer, std::vector<std::string> feature_names,
                 ModelVariant model)
        : method_(method),
          standardizer_(std::move(standardizer)),
          featureNames_(std::move(feature_names)),
          model_(std::move(model)) {
        require(static_cast<Eigen::Index>(featureNames_.size()) == standardizer_.dimension(),
                "feature names do not match model dimension");
    }

    [[nodiscard]] Method method() const { return method_; }
    [[nodiscard]] const analysis::Standardizer& standardizer() const { return standardizer_; }
    [[nodiscard]] const std::vector<std::string>& featureNames() const { return featureNames_; }
    [[nodiscard]] const ModelVariant& variant() const { return model_; }
    [[nodiscard]] Eigen::Index dimension() const { return standardizer_.dimension(); }

    template <class T>
    [[nodiscard]] const T& as() const {
        const T* p = std::get_if<T>(&model_);
        if (p == nullptr) throw DataError("model is a " + method_display_name(method_) + ", not the requested kind");
        return *p;
    }

    [[nodiscard]] Matrix standardize(const Matrix& x) const {
        require(x.cols() == dimension(), "model expects " + std::to_string(dimension()) + " features, got " +
                                             std::to_string(x.cols()));
        require(x.allFinite(), "prediction input contains non-finite values");
        return standardizer_.transform(x);
    }

    [[nodiscard]] Vector predict(const Matrix& x) const {
        const Matrix z = standardize(x);
        return std::visit([&](const auto& m) -> Vector { return m.predict(z); }, model_);
    }

private:
    Method method_;
    analysis::Standardizer standardizer_;
    std::vector<std::string> featureNames_;
    ModelVariant model_;
};

namespace detail {

inline analysis::Standardizer feature_standardizer(const Dataset& train) {
    return analysis::Standardizer::fit(train.X, /*allow_constant=*/true);
}

}  // namespace detail

inline TrainedModel fit_linear(const Dataset& train) {
    auto s = detail::feature_standardizer(train);
    auto m = fit_linear_standardized(s.transform(train.X), train.y);
    return {Method::linear, std::move(s), train.featureNames, std::move(m)};
}

inline TrainedModel fit_decision_tree(const Dataset& train, const HyperParams& hp) {
    auto s = detail::feature_standardizer(train);
    auto m = fit_tree_standardized(s.transform(train.X), train.y, hp.tree);
    return {Method::tree, std::move(s), train.featureNames, std::move(m)};
}

inline TrainedModel fit_random_forest(const Dataset& train, const HyperParams& hp) {
    auto s = detail::feature_standardizer(train);
    auto m = fit_forest_standardized(s.transform(train.X), train.y, hp.forest, hp.seed);
    return {Method::forest, std::move(s), train.featureNames, std::move(m)};
}

inline TrainedModel fit_gbt(const Dataset& train, const HyperParams& hp) {
    auto s = detail::feature_standardizer(train);
    auto m = fit_gbt_standardized(s.transform(train.X), train.y, hp.gbt);
    return {Method::gbt, std::move(s), train.featureNames, std::move(m)};
}

inline TrainedModel fit_knn(const Dataset& train, const HyperParams& hp) {
    auto s = detail::feature_standardizer(train);
    auto m = fit_knn_standardized(s.transform(train.X), train.y, hp.knn.k);
    return {Method::knn, std::move(s), train.featureNames, std::move(m)};
}

inline TrainedModel fit_gp(const Dataset& train, const HyperParams& hp) {
    auto s = detail::feature_standardizer(train);
    auto m = fit_gp_standardized(s.transform(train.X), train.y, hp.gp, hp.seed);
    return {Method::gp, std::move(s), train.featureNames, std::move(m)};
}

inline TrainedModel fit_svr(const Dataset& train, const HyperParams& hp, SvrKernel kernel) {
    auto s = detail::feature_standardizer(train);
    auto m = fit_svr_standardized(s.transform(train.X), train.y, kernel, hp.svr);
    return {kernel == SvrKernel::linear ? Method::svrLinear : Method::svrRbf, std::move(s), train.featureNames,
            std::move(m)};
}

inline TrainedModel fit_mlp(const Dataset& train, const Dataset& val, const HyperParams& hp) {
    require(train.dimension() == val.dimension(), "mlp: train and validation dimensions differ");
    auto s = detail::feature_standardizer(train);
    auto m = fit_mlp_standardized(s.transform(train.X), train.y, s.transform(val.X), val.y, hp.mlp, hp.seed);
    return {Method::mlp, std::move(s), train.featureNames, std::move(m)};
}

/// Fits any method. Only the MLP looks at the validation rows.
inline TrainedModel fit(Method method, const Dataset& train, const Dataset& val, const HyperParams& hp) {
    switch (method) {
        case Method::linear: return fit_linear(train);
        case Method::tree: return fit_decision_tree(train, hp);
        case Method::forest: return fit_random_forest(train, hp);
        case Method::gbt: return fit_gbt(train, hp);
        case Method::knn: return fit_knn(train, hp);
        case Method::gp: return fit_gp(train, hp);
        case Method::svrLinear: return fit_svr(train, hp, SvrKernel::linear);
        case Method::svrRbf: return fit_svr(train, hp, SvrKernel::rbf);
        case Method::mlp: return fit_mlp(train, val, hp);
    }
    throw DataError("unknown method");
}

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
};

/// Predictive mean and variance of a GP surrogate at one input point.
inline Posterior gp_posterior(const TrainedModel& model, const RowVector& x) {
    const auto& gp = model.as<GpModel>();
    const Matrix z = model.standardize(Matrix(x));
    const auto [mean, var] = gp.posterior(z.row(0));
    return {mean, var};
}

}  // namespace abmsurrogate::surrogates
