#pragma once

#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/core/text.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace abmsurrogate::surrogates {

struct TreeParams {
    int maxDepth = 12;
    int minLeaf = 5;
};

struct ForestParams {
    int nTrees = 200;
    bool bootstrap = true;
    int featureSubset = 0;  // 0 selects max(1, floor(d / 3))
    TreeParams tree{};
};

struct GbtParams {
    int nStages = 300;
    double shrinkage = 0.1;
    TreeParams tree{3, 1};
};

struct KnnParams {
    int k = 5;
};

struct GpParams {
    double lengthscaleInit = 1.0;  // in standardized feature units
    double signalVarianceInit = 1.0;
    double nuggetInit = 1e-6;
    bool optimize = true;
    int restarts = 3;
    int maxIterations = 100;
    int maxRows = 2000;
    bool standardizeTarget = true;
};

enum class SvrKernel { linear, rbf };

struct SvrParams {
    double C = 10.0;
    double epsilon = 0.1;
    double gamma = 0.0;  // 0 selects 1 / d
    double tolerance = 1e-3;
    long long maxIterations = 0;  // 0 selects max(10^7, 100 n)
    bool standardizeTarget = true;
};

struct MlpParams {
    double learningRate = 0.0003;
    double l2 = 0.03;
    int epochs = 15000;
    int hiddenWidth = 50;
    std::vector<int> hiddenLayerGrid{1, 2, 4, 8};
    int batchSize = 64;
    double batchNormMomentum = 0.9;
    double batchNormEpsilon = 1e-5;
};

struct HyperParams {
    TreeParams tree{};
    ForestParams forest{};
    GbtParams gbt{};
    KnnParams knn{};
    GpParams gp{};
    SvrParams svr{};
    MlpParams mlp{};
    std::uint64_t seed = 0;

    /// Applies `method.field = value` overrides, e.g. `mlp.epochs = 2000`.
    /// Keys outside the known set are rejected.
    void apply(const KeyValueConfig& kv) {
        for (const auto& [key, value] : kv.entries()) {
            const auto dot = key.find('.');
            if (dot == std::string::npos) continue;
            const std::string group = key.substr(0, dot);
            const std::string field = key.substr(dot + 1);
            if (group != "tree" && group != "forest" && group != "gbt" && group != "knn" && group != "gp" &&
                group != "svr" && group != "mlp") {
                continue;
            }
            if (!set(group, field, value)) throw DataError("unknown hyperparameter '" + key + "'");
        }
    }

private:
    static int as_int(const std::string& v) { return static_cast<int>(parse_number(v)); }
    static bool as_bool(const std::string& v) {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw DataError("expected boolean, got '" + v + "'");
    }

    bool set(const std::string& g, const std::string& f, const std::string& v) {
        if (g == "tree") {
            if (f == "maxDepth") return tree.maxDepth = as_int(v), true;
            if (f == "minLeaf") return tree.minLeaf = as_int(v), true;
        } else if (g == "forest") {
            if (f == "nTrees") return forest.nTrees = as_int(v), true;
            if (f == "bootstrap") return forest.bootstrap = as_bool(v), true;
            if (f == "featureSubset") return forest.featureSubset = as_int(v), true;
            if (f == "maxDepth") return forest.tree.maxDepth = as_int(v), true;
            if (f == "minLeaf") return forest.tree.minLeaf = as_int(v), true;
        } else if (g == "gbt") {
            if (f == "nStages") return gbt.nStages = as_int(v), true;
            if (f == "shrinkage") return gbt.shrinkage = parse_number(v), true;
            if (f == "maxDepth") return gbt.tree.maxDepth = as_int(v), true;
            if (f == "minLeaf") return gbt.tree.minLeaf = as_int(v), true;
        } else if (g == "knn") {
            if (f == "k") return knn.k = as_int(v), true;
        } else if (g == "gp") {
            if (f == "lengthscaleInit") return gp.lengthscaleInit = parse_number(v), true;
            if (f == "signalVarianceInit") return gp.signalVarianceInit = parse_number(v), true;
            if (f == "nuggetInit") return gp.nuggetInit = parse_number(v), true;
            if (f == "optimize") return gp.optimize = as_bool(v), true;
            if (f == "restarts") return gp.restarts = as_int(v), true;
            if (f == "maxIterations") return gp.maxIterations = as_int(v), true;
            if (f == "maxRows") return gp.maxRows = as_int(v), true;
            if (f == "standardizeTarget") return gp.standardizeTarget = as_bool(v), true;
        } else if (g == "svr") {
            if (f == "C") return svr.C = parse_number(v), true;
            if (f == "epsilon") return svr.epsilon = parse_number(v), true;
            if (f == "gamma") return svr.gamma = parse_number(v), true;
            if (f == "tolerance") return svr.tolerance = parse_number(v), true;
            if (f == "maxIterations") return svr.maxIterations = static_cast<long long>(parse_number(v)), true;
            if (f == "standardizeTarget") return svr.standardizeTarget = as_bool(v), true;
        } else if (g == "mlp") {
            if (f == "learningRate") return mlp.learningRate = parse_number(v), true;
            if (f == "l2") return mlp.l2 = parse_number(v), true;
            if (f == "epochs") return mlp.epochs = as_int(v), true;
            if (f == "hiddenWidth") return mlp.hiddenWidth = as_int(v), true;
            if (f == "batchSize") return mlp.batchSize = as_int(v), true;
            if (f == "hiddenLayerGrid") {
                mlp.hiddenLayerGrid.clear();
                for (const auto& item : split(v, ',')) mlp.hiddenLayerGrid.push_back(as_int(item));
                return true;
            }
        }
        return false;
    }
};

}  // namespace abmsurrogate::surrogates
