#include <abmsurrogate/analysis/main_effects.hpp>
#include <abmsurrogate/analysis/pca.hpp>
#include <abmsurrogate/analysis/statistics.hpp>

#include <oracles.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

using namespace abmsurrogate;
using namespace abmsurrogate::analysis;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// n rows inside the canonical ranges with y = 3 + sum_j b_j x_j + noise.
surrogates::Dataset linear_policy_data(Eigen::Index n, std::uint64_t seed) {
    const auto ranges = design::ParamRanges::canonical();
    Rng rng(seed);
    Matrix x(n, 10);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = 3.0;
        for (Eigen::Index j = 0; j < 10; ++j) {
            const auto& r = ranges[static_cast<std::size_t>(j)];
            x(i, j) = r.lower + rng.uniform() * (r.upper - r.lower);
            y(i) += static_cast<double>(j + 1) * (x(i, j) - r.lower) / (r.upper - r.lower);
        }
        y(i) += 0.1 * rng.normal();
    }
    return {x, y, ranges.names()};
}

}  // namespace

TEST_CASE("split sizes follow the twenty percent rule") {
    const auto a = split_dataset(200, 1);
    REQUIRE(a.trainIdx.size() == 128);
    REQUIRE(a.valIdx.size() == 32);
    REQUIRE(a.testIdx.size() == 40);
    const auto b = split_dataset(400, 1);
    REQUIRE(b.trainIdx.size() == 256);
    REQUIRE(b.valIdx.size() == 64);
    REQUIRE(b.testIdx.size() == 80);
    for (std::size_t n = 5; n <= 600; ++n) {
        const auto s = split_dataset(n, n);
        const auto test = static_cast<std::size_t>(std::floor(0.2 * static_cast<double>(n) + 0.5));
        const auto val = static_cast<std::size_t>(std::floor(0.2 * static_cast<double>(n - test) + 0.5));
        REQUIRE(s.testIdx.size() == test);
        REQUIRE(s.valIdx.size() == val);
        std::set<std::size_t> all(s.trainIdx.begin(), s.trainIdx.end());
        all.insert(s.valIdx.begin(), s.valIdx.end());
        all.insert(s.testIdx.begin(), s.testIdx.end());
        REQUIRE(all.size() == n);
        REQUIRE(*all.rbegin() == n - 1);
    }
    REQUIRE_THROWS_AS(split_dataset(4, 0), DataError);
}

TEST_CASE("splits repeat for a seed and change with it") {
    const auto a = split_dataset(100, 9);
    const auto b = split_dataset(100, 9);
    const auto c = split_dataset(100, 10);
    REQUIRE(a.testIdx == b.testIdx);
    REQUIRE(a.trainIdx == b.trainIdx);
    REQUIRE(a.testIdx != c.testIdx);
}

TEST_CASE("standardize uses the sample standard deviation") {
    Matrix x(3, 1);
    x << 1, 2, 3;
    const auto [s, z] = standardize(x);
    REQUIRE(z(0, 0) == -1.0);
    REQUIRE(z(1, 0) == 0.0);
    REQUIRE(z(2, 0) == 1.0);
    Matrix constant = Matrix::Ones(4, 2);
    constant(0, 0) = 2.0;
    REQUIRE_THROWS_AS(standardize(constant), DataError);
    REQUIRE_NOTHROW(Standardizer::fit(constant, true));
}

TEST_CASE("standardized columns have zero mean and unit sample variance") {
    Rng rng(3);
    Matrix x(200, 6);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 50.0 + 20.0 * rng.normal();
    const auto [s, z] = standardize(x);
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        REQUIRE(std::abs(z.col(j).mean()) <= 1e-12);
        REQUIRE(z.col(j).squaredNorm() / 199.0 == Catch::Approx(1.0).epsilon(1e-12));
    }
    REQUIRE((s.inverse(z) - x).cwiseAbs().maxCoeff() <= 1e-12 * x.cwiseAbs().maxCoeff());
}

TEST_CASE("mse examples and oracle agreement") {
    REQUIRE(mse(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
    REQUIRE(mse(vec({0, 0}), vec({1, 3})) == 5.0);
    REQUIRE_THROWS_AS(mse(vec({1}), vec({1, 2})), DataError);
    Rng rng(4);
    Vector a(500), b(500);
    for (Eigen::Index i = 0; i < 500; ++i) a(i) = rng.normal() * 100.0, b(i) = rng.normal() * 100.0;
    const double expected = oracle::two_pass_mse({a.data(), a.data() + 500}, {b.data(), b.data() + 500});
    REQUIRE(mse(a, b) == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("perfectly correlated pair gives eigenvalues two and zero") {
    Rng rng(5);
    Matrix x(50, 2);
    for (Eigen::Index i = 0; i < 50; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = 3.0 * x(i, 0) + 1.0;
    }
    const auto r = pca_decompose(x);
    REQUIRE(r.eigenvalues(0) == Catch::Approx(2.0).margin(1e-10));
    REQUIRE(r.eigenvalues(1) == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(significant_loadings(r, 0) == std::vector<std::size_t>{0, 1});
    REQUIRE(significant_loadings(r, 1).empty());
}

TEST_CASE("pca of independent columns has eigenvalues near one") {
    Rng rng(6);
    Matrix x(10000, 5);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    const auto r = pca_decompose(x);
    for (Eigen::Index k = 0; k < 5; ++k) REQUIRE(std::abs(r.eigenvalues(k) - 1.0) < 0.1);
}

TEST_CASE("pca invariants on correlated data") {
    Rng rng(7);
    Matrix x(300, 6);
    for (Eigen::Index i = 0; i < 300; ++i) {
        const double f = rng.normal();
        for (Eigen::Index j = 0; j < 6; ++j) x(i, j) = (j < 3 ? f : -0.5 * f) + 0.7 * rng.normal() + j;
    }
    const auto r = pca_decompose(x);
    REQUIRE(r.eigenvalues.sum() == Catch::Approx(6.0).margin(1e-8));
    REQUIRE((r.loadings.transpose() * r.loadings - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
    const auto [s, z] = standardize(x);
    REQUIRE((r.scores * r.loadings.transpose() - z).cwiseAbs().maxCoeff() < 1e-8);
    for (Eigen::Index k = 1; k < 6; ++k) REQUIRE(r.eigenvalues(k) <= r.eigenvalues(k - 1));
    for (Eigen::Index k = 0; k < 6; ++k) {
        Eigen::Index p = 0;
        r.loadings.col(k).cwiseAbs().maxCoeff(&p);
        REQUIRE(r.loadings(p, k) > 0.0);
    }
    REQUIRE(r.cumulativeVarianceFraction(5) == Catch::Approx(1.0).epsilon(1e-12));
    REQUIRE(pca_decompose(x).loadings == r.loadings);
}

TEST_CASE("retention combines the Kaiser and seventy percent rules") {
    // both rules agree
    REQUIRE(retained_components(vec({2.5, 1.2, 0.8, 0.5})) == 2);
    // the 70% rule dominates
    REQUIRE(retained_components(vec({1.1, 1.05, 1.0, 1.0, 0.98, 0.97, 0.95, 0.95})) == 6);
    // Kaiser dominates
    REQUIRE(retained_components(vec({5.0, 1.2, 1.1, 0.1})) == 3);
    // all ones: Kaiser keeps none, 70% keeps ceil(0.7 d)
    for (int d = 1; d <= 20; ++d) {
        REQUIRE(retained_components(Vector::Ones(d)) == static_cast<std::size_t>(std::ceil(0.7 * d - 1e-9)));
    }
}

TEST_CASE("inflating the leading eigenvalue never raises the retained count") {
    Rng rng(8);
    for (int trial = 0; trial < 500; ++trial) {
        const auto d = static_cast<Eigen::Index>(2 + rng.below(10));
        Vector e(d);
        for (Eigen::Index i = 0; i < d; ++i) e(i) = 3.0 * rng.uniform();
        std::sort(e.data(), e.data() + d, std::greater<>());
        const auto before = retained_components(e);
        e(0) += 3.0 * rng.uniform();
        REQUIRE(retained_components(e) <= before);
    }
}

TEST_CASE("relative scores map log values onto the unit interval") {
    const std::vector<double> published{0.224, 37.02};
    REQUIRE(relative_scores(published) == std::vector<double>{1.0, 0.0});
    const auto three = relative_scores(std::vector<double>{1.0, 10.0, 100.0});
    REQUIRE(three[0] == 1.0);
    REQUIRE(three[1] == Catch::Approx(0.5).epsilon(1e-15));
    REQUIRE(three[2] == 0.0);
    REQUIRE(relative_scores(std::vector<double>{3.0, 3.0, 3.0}) == std::vector<double>{1.0, 1.0, 1.0});
    REQUIRE(relative_scores(std::vector<double>{1.0, 10.0}, false) == std::vector<double>{0.0, 1.0});
    REQUIRE_THROWS_AS(relative_scores(std::vector<double>{1.0, 0.0}), DataError);
    REQUIRE_THROWS_AS(relative_scores(std::vector<double>{1.0}), DataError);
}

TEST_CASE("relative scores are invariant under rescaling") {
    Rng rng(9);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> v(6), w(6);
        const double c = std::exp(4.0 * rng.normal());
        for (std::size_t i = 0; i < 6; ++i) v[i] = std::exp(3.0 * rng.normal()), w[i] = c * v[i];
        const auto a = relative_scores(v);
        const auto b = relative_scores(w);
        for (std::size_t i = 0; i < 6; ++i) REQUIRE(a[i] == Catch::Approx(b[i]).margin(1e-12));
    }
}

TEST_CASE("main effects of a constant model are flat") {
    const auto data = linear_policy_data(50, 10);
    surrogates::HyperParams hp;
    hp.tree.maxDepth = 0;
    const auto model = surrogates::fit_decision_tree(data, hp);
    const double c = surrogates::plain_mean(data.y);
    const auto me = main_effects(model, design::ParamRanges::canonical(), 5, 200, 1);
    REQUIRE(me.overallVariance == 0.0);
    REQUIRE(me.overallMean == c);
    for (const auto& curve : me.curves) {
        for (double v : curve.effectValues) REQUIRE(v == c);
    }
}

TEST_CASE("main effects of a linear model are affine with the fitted slope") {
    const auto data = linear_policy_data(300, 11);
    const auto model = surrogates::fit_linear(data);
    const auto ranges = design::ParamRanges::canonical();
    const auto me = main_effects(model, ranges, 6, 500, 2);
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < data.X.rows(); ++i) rows.emplace_back(data.X.row(i).data(), data.X.row(i).data() + 10);
    // raw-unit coefficients from the normal equations
    oracle::Rows xr(static_cast<std::size_t>(data.X.rows()), std::vector<double>(10));
    for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
        for (Eigen::Index j = 0; j < 10; ++j) xr[i][j] = data.X(i, j);
    }
    const auto beta = oracle::normal_equations(xr, {data.y.data(), data.y.data() + data.y.size()});
    double centre = beta[0];
    for (std::size_t j = 0; j < 10; ++j) centre += beta[j + 1] * 0.5 * (ranges[j].lower + ranges[j].upper);
    for (const auto& curve : me.curves) {
        const std::size_t i = curve.parameterIndex;
        REQUIRE(curve.gridValues.front() == ranges[i].lower);
        REQUIRE(curve.gridValues.back() == ranges[i].upper);
        REQUIRE(std::is_sorted(curve.gridValues.begin(), curve.gridValues.end()));
        for (std::size_t k = 1; k < curve.gridValues.size(); ++k) {
            const double slope = (curve.effectValues[k] - curve.effectValues[0]) /
                                 (curve.gridValues[k] - curve.gridValues[0]);
            REQUIRE(slope == Catch::Approx(beta[i + 1]).epsilon(1e-7));
        }
        // closed-form expectation: other coordinates average to their midpoints
        for (std::size_t k = 0; k < curve.gridValues.size(); ++k) {
            const double mid = 0.5 * (ranges[i].lower + ranges[i].upper);
            const double expected = centre + beta[i + 1] * (curve.gridValues[k] - mid);
            REQUIRE(std::abs(curve.effectValues[k] - expected) <= 3.0 * curve.standardErrors[k]);
        }
    }
}

TEST_CASE("main-effect sampling error shrinks by about root two when samples double") {
    const auto data = linear_policy_data(200, 12);
    const auto model = surrogates::fit_linear(data);
    const auto ranges = design::ParamRanges::canonical();
    auto spread = [&](std::size_t n) {
        std::vector<double> v;
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            v.push_back(main_effects(model, ranges, 2, n, seed, SamplingScheme::pseudo).curves[0].effectValues[0]);
        }
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    const double ratio = spread(200) / spread(400);
    INFO("ratio " << ratio);
    REQUIRE(ratio > 1.2);
    REQUIRE(ratio < 1.7);
    const auto a = main_effects(model, ranges, 2, 200, 1, SamplingScheme::pseudo);
    const auto b = main_effects(model, ranges, 2, 800, 1, SamplingScheme::pseudo);
    REQUIRE(b.curves[3].standardErrors[0] < a.curves[3].standardErrors[0]);
}

TEST_CASE("a parameter the model ignores has a flat curve") {
    // y depends on the first two parameters only; the fitted tree never splits elsewhere
    const auto ranges = design::ParamRanges::canonical();
    Rng rng(13);
    Matrix x(200, 10);
    Vector y(200);
    for (Eigen::Index i = 0; i < 200; ++i) {
        for (Eigen::Index j = 0; j < 10; ++j) {
            const auto& r = ranges[static_cast<std::size_t>(j)];
            x(i, j) = r.lower + rng.uniform() * (r.upper - r.lower);
        }
        y(i) = x(i, 0) > 0.4 ? 10.0 : 0.0;
        y(i) += x(i, 1) > 0.001 ? 5.0 : 0.0;
    }
    surrogates::HyperParams hp;
    hp.tree.maxDepth = 3;
    hp.tree.minLeaf = 5;
    const auto model = surrogates::fit_decision_tree({x, y, ranges.names()}, hp);
    const auto me = main_effects(model, ranges, 5, 300, 3);
    for (std::size_t i = 2; i < 10; ++i) {
        const auto& e = me.curves[i].effectValues;
        REQUIRE(*std::max_element(e.begin(), e.end()) - *std::min_element(e.begin(), e.end()) <=
                3.0 * me.curves[i].standardErrors[0]);
    }
    const auto& first = me.curves[0].effectValues;
    REQUIRE(first.back() - first.front() > 5.0);
}

TEST_CASE("main effects validate their arguments and repeat for a seed") {
    const auto data = linear_policy_data(40, 14);
    const auto model = surrogates::fit_linear(data);
    const auto ranges = design::ParamRanges::canonical();
    REQUIRE_THROWS_AS(main_effects(model, ranges, 1, 200, 0), DataError);
    REQUIRE_THROWS_AS(main_effects(model, ranges, 5, 99, 0), DataError);
    std::vector<design::ParamRange> three(ranges.ranges().begin(), ranges.ranges().begin() + 3);
    REQUIRE_THROWS_AS(main_effects(model, design::ParamRanges(three), 5, 200, 0), DataError);
    const auto a = main_effects(model, ranges, 4, 150, 5);
    const auto b = main_effects(model, ranges, 4, 150, 5);
    REQUIRE(a.curves[2].effectValues == b.curves[2].effectValues);
    REQUIRE(a.overallMean == b.overallMean);
}

TEST_CASE("quasi sample stays in the unit cube") {
    const Matrix u = unit_sample(1000, 10, 3, SamplingScheme::quasi);
    REQUIRE(u.minCoeff() >= 0.0);
    REQUIRE(u.maxCoeff() < 1.0);
    for (Eigen::Index j = 0; j < 10; ++j) REQUIRE(std::abs(u.col(j).mean() - 0.5) < 0.01);
}
