#pragma once

// Versioned JSON model files. Doubles are written in shortest round-trip
// form, so a saved and reloaded model predicts bit-identically.

#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/surrogates/model.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>

namespace abmsurrogate::surrogates {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelFormatName = "abmsurrogate-model";

namespace io {

using nlohmann::json;

inline json vec(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

inline Vector vec(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline json mat(const Matrix& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Matrix mat(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    require(static_cast<Eigen::Index>(data.size()) == rows * cols, "model file: matrix size mismatch");
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    }
    return m;
}

inline json tree(const TreeModel& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return nodes;
}

inline TreeModel tree(const json& j) {
    TreeModel t;
    for (const auto& n : j) {
        t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                           n.at(4).get<double>()});
    }
    for (const auto& n : t.nodes) {
        if (!n.leaf()) {
            require(n.left > 0 && n.right > 0 && static_cast<std::size_t>(std::max(n.left, n.right)) < t.nodes.size(),
                    "model file: tree child index out of range");
        }
    }
    require(!t.nodes.empty(), "model file: empty tree");
    return t;
}

inline json body(const LinearModel& m) { return {{"coefficients", vec(m.coefficients)}, {"rankDeficient", m.rankDeficient}}; }
inline json body(const TreeModel& m) { return {{"nodes", tree(m)}}; }
inline json body(const ForestModel& m) {
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(tree(t));
    return {{"featureSubsetSize", m.featureSubsetSize}, {"trees", trees}};
}
inline json body(const GbtModel& m) {
    json stages = json::array();
    for (const auto& t : m.stages) stages.push_back(tree(t));
    return {{"baseValue", m.baseValue}, {"shrinkage", m.shrinkage}, {"stages", stages}, {"trainLoss", m.trainLoss}};
}
inline json body(const KnnModel& m) { return {{"k", m.k}, {"storedZ", mat(m.storedZ)}, {"storedY", vec(m.storedY)}}; }
inline json body(const GpModel& m) {
    return {{"lengthscales", vec(m.lengthscales)}, {"signalVariance", m.signalVariance},
            {"nugget", m.nugget},                  {"jitter", m.jitter},
            {"trainingZ", mat(m.trainingZ)},       {"cholFactor", mat(m.cholFactor)},
            {"alphaWeights", vec(m.alphaWeights)}, {"meanConstant", m.meanConstant},
            {"targetMean", m.targetMean},          {"targetScale", m.targetScale},
            {"logMarginalLikelihood", m.logMarginalLikelihood}};
}
inline json body(const SvrModel& m) {
    return {{"kernel", m.kernel == SvrKernel::linear ? "linear" : "rbf"},
            {"gamma", m.gamma},
            {"C", m.C},
            {"epsilon", m.epsilon},
            {"supportVectors", mat(m.supportVectors)},
            {"dualCoefficients", vec(m.dualCoefficients)},
            {"bias", m.bias},
            {"targetMean", m.targetMean},
            {"targetScale", m.targetScale},
            {"objective", m.objective},
            {"kktViolation", m.kktViolation},
            {"iterations", m.iterations}};
}
inline json body(const MlpModel& m) {
    json grid = json::array();
    for (const auto& [h, v] : m.gridValidationMse) grid.push_back({h, v});
    return {{"inputDim", m.layout.inputDim},
            {"hiddenWidth", m.layout.width},
            {"hiddenLayers", m.layout.hiddenLayers},
            {"parameters", vec(m.parameters)},
            {"runningMean1", vec(m.runningMean1)},
            {"runningVar1", vec(m.runningVar1)},
            {"runningMean2", vec(m.runningMean2)},
            {"runningVar2", vec(m.runningVar2)},
            {"batchNormEpsilon", m.batchNormEpsilon},
            {"targetMean", m.targetMean},
            {"targetScale", m.targetScale},
            {"validationMse", m.validationMse},
            {"gridValidationMse", grid}};
}

inline ModelVariant body(Method method, const json& j) {
    switch (method) {
        case Method::linear: return LinearModel{vec(j.at("coefficients")), j.at("rankDeficient").get<bool>()};
        case Method::tree: return tree(j.at("nodes"));
        case Method::forest: {
            ForestModel m;
            m.featureSubsetSize = j.at("featureSubsetSize").get<int>();
            for (const auto& t : j.at("trees")) m.trees.push_back(tree(t));
            require(!m.trees.empty(), "model file: forest without trees");
            return m;
        }
        case Method::gbt: {
            GbtModel m;
            m.baseValue = j.at("baseValue").get<double>();
            m.shrinkage = j.at("shrinkage").get<double>();
            for (const auto& t : j.at("stages")) m.stages.push_back(tree(t));
            m.trainLoss = j.at("trainLoss").get<std::vector<double>>();
            return m;
        }
        case Method::knn: return KnnModel{mat(j.at("storedZ")), vec(j.at("storedY")), j.at("k").get<int>()};
        case Method::gp: {
            GpModel m;
            m.lengthscales = vec(j.at("lengthscales"));
            m.signalVariance = j.at("signalVariance").get<double>();
            m.nugget = j.at("nugget").get<double>();
            m.jitter = j.at("jitter").get<double>();
            m.trainingZ = mat(j.at("trainingZ"));
            m.cholFactor = mat(j.at("cholFactor"));
            m.alphaWeights = vec(j.at("alphaWeights"));
            m.meanConstant = j.at("meanConstant").get<double>();
            m.targetMean = j.at("targetMean").get<double>();
            m.targetScale = j.at("targetScale").get<double>();
            m.logMarginalLikelihood = j.at("logMarginalLikelihood").get<double>();
            return m;
        }
        case Method::svrLinear:
        case Method::svrRbf: {
            SvrModel m;
            m.kernel = j.at("kernel").get<std::string>() == "linear" ? SvrKernel::linear : SvrKernel::rbf;
            m.gamma = j.at("gamma").get<double>();
            m.C = j.at("C").get<double>();
            m.epsilon = j.at("epsilon").get<double>();
            m.supportVectors = mat(j.at("supportVectors"));
            m.dualCoefficients = vec(j.at("dualCoefficients"));
            m.bias = j.at("bias").get<double>();
            m.targetMean = j.at("targetMean").get<double>();
            m.targetScale = j.at("targetScale").get<double>();
            m.objective = j.at("objective").get<double>();
            m.kktViolation = j.at("kktViolation").get<double>();
            m.iterations = j.at("iterations").get<long long>();
            return m;
        }
        case Method::mlp: {
            MlpModel m;
            m.layout = MlpLayout(j.at("inputDim").get<Eigen::Index>(), j.at("hiddenWidth").get<Eigen::Index>(),
                                 j.at("hiddenLayers").get<int>());
            m.parameters = vec(j.at("parameters"));
            require(m.parameters.size() == m.layout.size(), "model file: network parameter count mismatch");
            m.runningMean1 = vec(j.at("runningMean1"));
            m.runningVar1 = vec(j.at("runningVar1"));
            m.runningMean2 = vec(j.at("runningMean2"));
            m.runningVar2 = vec(j.at("runningVar2"));
            m.batchNormEpsilon = j.at("batchNormEpsilon").get<double>();
            m.targetMean = j.at("targetMean").get<double>();
            m.targetScale = j.at("targetScale").get<double>();
            m.validationMse = j.at("validationMse").get<double>();
            for (const auto& g : j.at("gridValidationMse")) {
                m.gridValidationMse.emplace_back(g.at(0).get<int>(), g.at(1).get<double>());
            }
            return m;
        }
    }
    throw DataError("model file: unknown method");
}

}  // namespace io

inline nlohmann::json model_to_json(const TrainedModel& model) {
    nlohmann::json j;
    j["format"] = kModelFormatName;
    j["version"] = kModelFormatVersion;
    j["method"] = method_id(model.method());
    j["featureNames"] = model.featureNames();
    j["standardizer"] = {{"mean", io::vec(model.standardizer().mean)}, {"stddev", io::vec(model.standardizer().stddev)}};
    j["model"] = std::visit([](const auto& m) { return io::body(m); }, model.variant());
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    try {
        require(j.at("format").get<std::string>() == kModelFormatName, "not a model file");
        const int version = j.at("version").get<int>();
        require(version == kModelFormatVersion, "unsupported model file version " + std::to_string(version));
        const Method method = parse_method(j.at("method").get<std::string>());
        analysis::Standardizer s;
        s.mean = io::vec(j.at("standardizer").at("mean"));
        s.stddev = io::vec(j.at("standardizer").at("stddev"));
        require(s.mean.size() == s.stddev.size() && (s.stddev.array() > 0.0).all(), "model file: bad standardizer");
        return TrainedModel(method, std::move(s), j.at("featureNames").get<std::vector<std::string>>(),
                            io::body(method, j.at("model")));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

inline void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file '" + path + "'");
    out << model_to_json(model).dump() << '\n';
    if (!out) throw DataError("failed writing model file '" + path + "'");
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model file '" + path + "' is not valid JSON: " + e.what());
    }
    return model_from_json(j);
}

}  // namespace abmsurrogate::surrogates
