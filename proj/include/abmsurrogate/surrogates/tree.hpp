#pragma once

// CART regression trees (greedy variance reduction) and the ensembles built
// from them: random forests and gradient-boosted trees.

#include <abmsurrogate/core/matrix.hpp>
#include <abmsurrogate/core/random.hpp>
#include <abmsurrogate/surrogates/hyperparams.hpp>

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

namespace abmsurrogate::surrogates {

/// Sum in index order; shared by every mean so reductions agree bit for bit.
inline double plain_mean(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

inline double plain_mean(const Vector& v) {
    return plain_mean(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    [[nodiscard]] bool leaf() const { return feature < 0; }
};

struct TreeModel {
    std::vector<TreeNode> nodes;

    template <class Row>
    [[nodiscard]] double predict_row(const Row& z) const {
        int i = 0;
        while (!nodes[static_cast<std::size_t>(i)].leaf()) {
            const auto& node = nodes[static_cast<std::size_t>(i)];
            i = z(node.feature) <= node.threshold ? node.left : node.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }

    [[nodiscard]] Vector predict(const Matrix& z) const {
        Vector out(z.rows());
        for (Eigen::Index r = 0; r < z.rows(); ++r) out(r) = predict_row(z.row(r));
        return out;
    }

    [[nodiscard]] int depth() const { return depth_from(0); }

private:
    [[nodiscard]] int depth_from(int i) const {
        const auto& node = nodes[static_cast<std::size_t>(i)];
        if (node.leaf()) return 0;
        return 1 + std::max(depth_from(node.left), depth_from(node.right));
    }
};

namespace detail {

class TreeBuilder {
public:
    TreeBuilder(const Matrix& z, const Vector& target, TreeParams params, int feature_subset, Rng* rng)
        : z_(z), y_(target), params_(params), subset_(feature_subset), rng_(rng) {
        features_.resize(static_cast<std::size_t>(z.cols()));
        std::iota(features_.begin(), features_.end(), 0);
    }

    TreeModel build(std::vector<std::size_t> rows) {
        TreeModel tree;
        grow(tree, std::move(rows), 0);
        return tree;
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double score = 0.0;  // sum_L^2/n_L + sum_R^2/n_R, larger is better
    };

    int grow(TreeModel& tree, std::vector<std::size_t> rows, int depth) {
        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        std::vector<double> values(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) values[i] = y_(static_cast<Eigen::Index>(rows[i]));
        tree.nodes[static_cast<std::size_t>(index)].value = plain_mean(values);

        const auto n = static_cast<int>(rows.size());
        if (depth >= params_.maxDepth || n < 2 * std::max(1, params_.minLeaf)) return index;
        const Split best = best_split(rows);
        if (best.feature < 0) return index;

        std::vector<std::size_t> left, right;
        for (auto r : rows) {
            (z_(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(tree, std::move(left), depth + 1);
        const int r = grow(tree, std::move(right), depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(index)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return index;
    }

    std::vector<int> candidate_features() {
        const auto d = static_cast<int>(features_.size());
        if (subset_ <= 0 || subset_ >= d || rng_ == nullptr) return features_;
        std::vector<int> pool = features_;
        for (int i = 0; i < subset_; ++i) {
            const auto j = i + static_cast<int>(rng_->below(static_cast<std::uint64_t>(d - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        pool.resize(static_cast<std::size_t>(subset_));
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    Split best_split(const std::vector<std::size_t>& rows) {
        const std::size_t n = rows.size();
        const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.minLeaf));
        double total = 0.0;
        for (auto r : rows) total += y_(static_cast<Eigen::Index>(r));
        const double parent = total * total / static_cast<double>(n);

        Split best;
        best.score = parent;
        std::vector<std::pair<double, double>> sorted(n);  // (feature value, target)
        for (int f : candidate_features()) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto r = static_cast<Eigen::Index>(rows[i]);
                sorted[i] = {z_(r, f), y_(r)};
            }
            std::sort(sorted.begin(), sorted.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            double left_sum = 0.0;
            for (std::size_t i = 1; i < n; ++i) {
                left_sum += sorted[i - 1].second;
                if (i < min_leaf || n - i < min_leaf) continue;
                if (!(sorted[i - 1].first < sorted[i].first)) continue;
                const double right_sum = total - left_sum;
                const double score = left_sum * left_sum / static_cast<double>(i) +
                                     right_sum * right_sum / static_cast<double>(n - i);
                if (score > best.score + 1e-12 * std::abs(best.score) + 1e-300) {
                    best.feature = f;
                    best.threshold = 0.5 * (sorted[i - 1].first + sorted[i].first);
                    best.score = score;
                }
            }
        }
        return best;
    }

    const Matrix& z_;
    const Vector& y_;
    TreeParams params_;
    int subset_;
    Rng* rng_;
    std::vector<int> features_;
};

inline std::vector<std::size_t> all_rows(Eigen::Index n) {
    std::vector<std::size_t> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

}  // namespace detail

inline TreeModel fit_tree_standardized(const Matrix& z, const Vector& y, const TreeParams& params) {
    return detail::TreeBuilder(z, y, params, 0, nullptr).build(detail::all_rows(z.rows()));
}

struct ForestModel {
    std::vector<TreeModel> trees;
    int featureSubsetSize = 0;

    [[nodiscard]] Vector predict(const Matrix& z) const {
        Vector out = Vector::Zero(z.rows());
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            double sum = 0.0;
            for (const auto& t : trees) sum += t.predict_row(z.row(r));
            out(r) = sum / static_cast<double>(trees.size());
        }
        return out;
    }
};

inline int forest_feature_subset(const ForestParams& params, Eigen::Index d) {
    if (params.featureSubset > 0) return std::min<int>(params.featureSubset, static_cast<int>(d));
    return std::max(1, static_cast<int>(d) / 3);
}

/// Bagged trees; tree t draws its bootstrap sample and split features from a
/// stream derived from (seed, t).
inline ForestModel fit_forest_standardized(const Matrix& z, const Vector& y, const ForestParams& params,
                                           std::uint64_t seed) {
    require(params.nTrees >= 1, "forest needs at least one tree");
    ForestModel forest;
    forest.featureSubsetSize = forest_feature_subset(params, z.cols());
    forest.trees.reserve(static_cast<std::size_t>(params.nTrees));
    const auto n = static_cast<std::uint64_t>(z.rows());
    for (int t = 0; t < params.nTrees; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> rows;
        if (params.bootstrap) {
            rows.resize(n);
            for (auto& r : rows) r = rng.below(n);
        } else {
            rows = detail::all_rows(z.rows());
        }
        forest.trees.push_back(
            detail::TreeBuilder(z, y, params.tree, forest.featureSubsetSize, &rng).build(std::move(rows)));
    }
    return forest;
}

struct GbtModel {
    double baseValue = 0.0;
    double shrinkage = 0.1;
    std::vector<TreeModel> stages;
    std::vector<double> trainLoss;  // training MSE after 0..nStages stages

    [[nodiscard]] Vector predict(const Matrix& z) const {
        Vector out(z.rows());
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            double f = baseValue;
            for (const auto& t : stages) f += shrinkage * t.predict_row(z.row(r));
            out(r) = f;
        }
        return out;
    }
};

/// Least-squares boosting: start from mean(y), fit each stage to the current
/// residuals and add shrinkage * stage.
inline GbtModel fit_gbt_standardized(const Matrix& z, const Vector& y, const GbtParams& params) {
    require(params.nStages >= 0, "nStages must be >= 0");
    require(params.shrinkage > 0.0, "shrinkage must be > 0");
    GbtModel m;
    m.baseValue = plain_mean(y);
    m.shrinkage = params.shrinkage;
    Vector fitted = Vector::Constant(y.size(), m.baseValue);
    m.trainLoss.push_back((y - fitted).squaredNorm() / static_cast<double>(y.size()));
    for (int s = 0; s < params.nStages; ++s) {
        const Vector residual = y - fitted;
        m.stages.push_back(fit_tree_standardized(z, residual, params.tree));
        for (Eigen::Index r = 0; r < z.rows(); ++r) fitted(r) += m.shrinkage * m.stages.back().predict_row(z.row(r));
        m.trainLoss.push_back((y - fitted).squaredNorm() / static_cast<double>(y.size()));
    }
    return m;
}

}  // namespace abmsurrogate::surrogates
