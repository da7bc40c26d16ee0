#pragma once

// Monte Carlo main effects of a fitted surrogate: for each input i and grid
// value g, the average prediction with x_i = g and the other inputs drawn
// uniformly over their ranges.

#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/core/random.hpp>
#include <abmsurrogate/design/design.hpp>
#include <abmsurrogate/design/sobol.hpp>
#include <abmsurrogate/surrogates/model.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace abmsurrogate::analysis {

/// quasi: Sobol' points with a seeded random shift (mod 1); pseudo: plain uniforms.
enum class SamplingScheme { quasi, pseudo };

struct MainEffectCurve {
    std::size_t parameterIndex = 0;
    std::string name;
    std::vector<double> gridValues;      // parameter units, ascending
    std::vector<double> effectValues;    // mean prediction at each grid value
    std::vector<double> standardErrors;  // sd of the predictions / sqrt(nMC)
};

struct MainEffectsResult {
    std::vector<MainEffectCurve> curves;
    double overallMean = 0.0;
    double overallVariance = 0.0;
    std::size_t samples = 0;
};

/// nMC points in the unit cube. Every grid value of every parameter reuses
/// this sample, so curve differences are free of sampling noise in the other
/// coordinates.
inline Matrix unit_sample(std::size_t n, std::size_t d, std::uint64_t seed, SamplingScheme scheme) {
    Matrix u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Rng rng(seed);
    if (scheme == SamplingScheme::pseudo) {
        for (Eigen::Index r = 0; r < u.rows(); ++r) {
            for (Eigen::Index c = 0; c < u.cols(); ++c) u(r, c) = rng.uniform();
        }
        return u;
    }
    std::vector<double> shift(d);
    for (auto& s : shift) s = rng.uniform();
    for (std::size_t r = 0; r < n; ++r) {
        const auto p = design::sobol_point(r + 1, d);
        for (std::size_t c = 0; c < d; ++c) {
            double v = p[c] + shift[c];
            if (v >= 1.0) v -= 1.0;
            u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    return u;
}

namespace detail {

// Shifted by the first value, so constant inputs come out exact.
inline double shifted_mean(const Vector& v) { return v(0) + (v.array() - v(0)).sum() / static_cast<double>(v.size()); }

inline double shifted_variance(const Vector& v) {
    const double k = v(0);
    const double s = (v.array() - k).sum();
    const double ss = (v.array() - k).square().sum();
    const auto n = static_cast<double>(v.size());
    return std::max(0.0, (ss - s * s / n) / (n - 1.0));
}

}  // namespace detail

inline MainEffectsResult main_effects(const surrogates::TrainedModel& model, const design::ParamRanges& ranges,
                                      std::size_t grid_size, std::size_t n_mc, std::uint64_t seed,
                                      SamplingScheme scheme = SamplingScheme::quasi) {
    require(grid_size >= 2, "main_effects: grid size must be >= 2");
    require(n_mc >= 100, "main_effects: need at least 100 Monte Carlo points");
    require(static_cast<Eigen::Index>(ranges.size()) == model.dimension(),
            "main_effects: ranges have " + std::to_string(ranges.size()) + " parameters, model expects " +
                std::to_string(model.dimension()));
    const std::size_t d = ranges.size();
    const Matrix base = design::scale_design(
        design::UnitDesign{unit_sample(n_mc, d, seed, scheme), design::DesignMethod::lptau, seed}, ranges);

    MainEffectsResult out;
    out.samples = n_mc;
    const Vector overall = model.predict(base);
    out.overallMean = detail::shifted_mean(overall);
    out.overallVariance = detail::shifted_variance(overall);

    for (std::size_t i = 0; i < d; ++i) {
        MainEffectCurve curve;
        curve.parameterIndex = i;
        curve.name = ranges[i].name;
        const double lo = ranges[i].lower;
        const double hi = ranges[i].upper;
        Matrix x = base;
        for (std::size_t k = 0; k < grid_size; ++k) {
            const double g = k + 1 == grid_size
                                 ? hi
                                 : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid_size - 1);
            x.col(static_cast<Eigen::Index>(i)).setConstant(g);
            const Vector pred = model.predict(x);
            const double mean = detail::shifted_mean(pred);
            const double var = detail::shifted_variance(pred);
            curve.gridValues.push_back(g);
            curve.effectValues.push_back(mean);
            curve.standardErrors.push_back(std::sqrt(var / static_cast<double>(n_mc)));
        }
        out.curves.push_back(std::move(curve));
    }
    return out;
}

}  // namespace abmsurrogate::analysis
