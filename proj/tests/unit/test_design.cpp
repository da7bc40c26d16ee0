#include <abmsurrogate/design/design.hpp>
#include <abmsurrogate/design/sobol.hpp>

#include <oracles.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

using namespace abmsurrogate;
using namespace abmsurrogate::design;

namespace {

oracle::Rows to_rows(const Matrix& m) {
    oracle::Rows out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    }
    return out;
}

bool latin(const Matrix& x) {
    const auto n = x.rows();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        std::set<long> bins;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (x(i, j) < 0.0 || x(i, j) >= 1.0) return false;
            bins.insert(static_cast<long>(std::floor(x(i, j) * static_cast<double>(n))));
        }
        if (bins.size() != static_cast<std::size_t>(n)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("first coordinate is the radical inverse of the Gray code") {
    for (std::uint64_t i = 1; i <= 4096; ++i) {
        REQUIRE(sobol_point(i, 1)[0] == oracle::radical_inverse(oracle::gray(i)));
    }
    REQUIRE(sobol_point(1, 10) == std::vector<double>(10, 0.5));
}

TEST_CASE("leading points match the reference listing") {
    // Published Joe-Kuo output, Gray-code order, first three dimensions.
    const std::vector<std::array<double, 3>> expected{
        {0.5, 0.5, 0.5},       {0.75, 0.25, 0.25},    {0.25, 0.75, 0.75},
        {0.375, 0.375, 0.625}, {0.875, 0.875, 0.125}, {0.625, 0.125, 0.875},
        {0.125, 0.625, 0.375}, {0.1875, 0.3125, 0.9375}, {0.6875, 0.8125, 0.4375},
    };
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const auto p = sobol_point(i + 1, 3);
        for (int j = 0; j < 3; ++j) REQUIRE(p[j] == expected[i][j]);
    }
}

TEST_CASE("first two dimensions form a (0,m,2)-net") {
    for (unsigned m = 1; m <= 10; ++m) {
        const std::uint64_t n = std::uint64_t{1} << m;
        // index 0 is the origin; points 1..n-1 plus the origin form the net
        std::vector<std::array<double, 2>> pts{{0.0, 0.0}};
        for (std::uint64_t i = 1; i < n; ++i) {
            const auto p = sobol_point(i, 2);
            pts.push_back({p[0], p[1]});
        }
        for (unsigned a = 0; a <= m; ++a) {
            const double cx = std::ldexp(1.0, static_cast<int>(a));
            const double cy = std::ldexp(1.0, static_cast<int>(m - a));
            std::set<std::pair<long, long>> cells;
            for (const auto& p : pts) cells.insert({static_cast<long>(p[0] * cx), static_cast<long>(p[1] * cy)});
            REQUIRE(cells.size() == n);
        }
    }
}

TEST_CASE("sobol points stay inside the open unit cube") {
    for (std::uint64_t i = 1; i < 5000; ++i) {
        for (double v : sobol_point(i, kSobolMaxDimension)) {
            REQUIRE(v > 0.0);
            REQUIRE(v < 1.0);
        }
    }
    REQUIRE_THROWS_AS(sobol_point(0, 2), DataError);
    REQUIRE_THROWS_AS(sobol_point(1, kSobolMaxDimension + 1), DataError);
}

TEST_CASE("lptau designs are prefixes of each other") {
    const auto big = generate_design(DesignMethod::lptau, 1600, 10);
    for (std::size_t n : {200u, 400u, 800u}) {
        const auto small = generate_design(DesignMethod::lptau, n, 10);
        REQUIRE(small.points == big.points.topRows(static_cast<Eigen::Index>(n)));
    }
}

TEST_CASE("lptau has lower discrepancy than random designs") {
    const std::size_t n = 256, d = 10;
    const double sobol = oracle::centred_l2_discrepancy(to_rows(generate_design(DesignMethod::lptau, n, d).points));
    Rng rng(5);
    int beaten = 0;
    for (int t = 0; t < 20; ++t) {
        Matrix x(n, d);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.uniform();
        }
        if (sobol < oracle::centred_l2_discrepancy(to_rows(x))) ++beaten;
    }
    REQUIRE(beaten == 20);
}

TEST_CASE("maximin LHS keeps one point per stratum and improves separation") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto raw = latin_hypercube(50, 10, seed);
        REQUIRE(latin(raw));
        const auto lhs = generate_design(DesignMethod::maximinLHS, 50, 10, seed);
        REQUIRE(latin(lhs.points));
        REQUIRE(min_pairwise_distance(lhs.points) >= min_pairwise_distance(raw));
    }
}

TEST_CASE("LHS is deterministic in its seed") {
    const auto a = generate_design(DesignMethod::maximinLHS, 30, 4, 9);
    const auto b = generate_design(DesignMethod::maximinLHS, 30, 4, 9);
    const auto c = generate_design(DesignMethod::maximinLHS, 30, 4, 10);
    REQUIRE(a.points == b.points);
    REQUIRE(a.points != c.points);
}

TEST_CASE("design sizes and method names are validated") {
    REQUIRE_THROWS_AS(generate_design(DesignMethod::lptau, 1, 3), DataError);
    REQUIRE_THROWS_AS(generate_design(DesignMethod::lptau, 5, 0), DataError);
    REQUIRE(parse_design_method("lptau") == DesignMethod::lptau);
    REQUIRE(parse_design_method("lhs") == DesignMethod::maximinLHS);
    REQUIRE_THROWS_AS(parse_design_method("grid"), DataError);
}

TEST_CASE("scaling maps the unit cube onto the ranges and back") {
    const auto ranges = ParamRanges::canonical();
    const auto unit = generate_design(DesignMethod::lptau, 64, ranges.size());
    const auto scaled = scale_design(unit, ranges);
    for (Eigen::Index i = 0; i < scaled.rows(); ++i) {
        for (std::size_t j = 0; j < ranges.size(); ++j) {
            const double v = scaled(i, static_cast<Eigen::Index>(j));
            REQUIRE(v >= ranges[j].lower);
            REQUIRE(v <= ranges[j].upper);
        }
    }
    REQUIRE(unscale_design(scaled, ranges).isApprox(unit.points, 1e-12));
    const auto wrong = generate_design(DesignMethod::lptau, 4, 3);
    REQUIRE_THROWS_AS(scale_design(wrong, ranges), DataError);
}

TEST_CASE("ranges files round-trip and reject malformed rows") {
    const auto canonical = ParamRanges::canonical();
    std::ostringstream out;
    canonical.write(out);
    std::istringstream in(out.str());
    const auto back = ParamRanges::parse(in);
    REQUIRE(back.names() == canonical.names());
    for (std::size_t j = 0; j < back.size(); ++j) {
        REQUIRE(back[j].lower == canonical[j].lower);
        REQUIRE(back[j].upper == canonical[j].upper);
        REQUIRE(back[j].defaultValue == canonical[j].defaultValue);
    }
    std::istringstream short_row("x 1 2\n");
    REQUIRE_THROWS_AS(ParamRanges::parse(short_row), DataError);
    std::istringstream inverted("x 1 3 2\n");
    REQUIRE_THROWS_AS(ParamRanges::parse(inverted), DataError);
    std::istringstream empty("# nothing\n");
    REQUIRE_THROWS_AS(ParamRanges::parse(empty), DataError);
}

TEST_CASE("shipped ranges file equals the canonical table") {
    const auto shipped = ParamRanges::load(std::string(ABMSURROGATE_SOURCE_DIR) + "/config/ranges.txt");
    std::ostringstream a, b;
    shipped.write(a);
    ParamRanges::canonical().write(b);
    REQUIRE(a.str() == b.str());
}
