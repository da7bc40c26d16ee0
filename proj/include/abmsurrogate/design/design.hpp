#pragma once

// Space-filling experimental designs on the unit hypercube and their mapping
// to parameter units.

#include <abmsurrogate/abm/params.hpp>
#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/core/matrix.hpp>
#include <abmsurrogate/core/random.hpp>
#include <abmsurrogate/core/text.hpp>
#include <abmsurrogate/design/sobol.hpp>

#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace abmsurrogate::design {

struct ParamRange {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    double defaultValue = 0.0;
};

class ParamRanges {
public:
    ParamRanges() = default;

    explicit ParamRanges(std::vector<ParamRange> ranges) : ranges_(std::move(ranges)) {
        require(!ranges_.empty(), "parameter ranges must not be empty");
        for (const auto& r : ranges_) {
            require(std::isfinite(r.lower) && std::isfinite(r.upper) && r.lower < r.upper,
                    "range for '" + r.name + "' must satisfy lower < upper");
        }
    }

    /// The ten policy parameters with their study bounds.
    static ParamRanges canonical() {
        std::vector<ParamRange> r;
        for (const auto& info : abm::kPolicyTable) {
            r.push_back({std::string(info.name), info.lower, info.upper, info.defaultValue});
        }
        return ParamRanges(std::move(r));
    }

    /// Whitespace-separated `name default lower upper` rows; '#' starts a comment.
    static ParamRanges parse(std::istream& in, std::string_view source = "ranges") {
        std::vector<ParamRange> r;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            auto body = std::string(trim(std::string_view(line).substr(0, line.find('#'))));
            if (body.empty()) continue;
            std::istringstream fields(body);
            std::string name, def, lo, hi, extra;
            if (!(fields >> name >> def >> lo >> hi) || (fields >> extra)) {
                throw DataError(std::string(source) + ":" + std::to_string(line_no) +
                                ": expected 'name default lower upper'");
            }
            r.push_back({name, parse_number(lo, name), parse_number(hi, name), parse_number(def, name)});
        }
        return ParamRanges(std::move(r));
    }

    static ParamRanges load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open ranges file '" + path + "'");
        return parse(in, path);
    }

    void write(std::ostream& out) const {
        out << "# name default lower upper\n";
        for (const auto& r : ranges_) {
            out << r.name << ' ' << format_number(r.defaultValue) << ' ' << format_number(r.lower) << ' '
                << format_number(r.upper) << '\n';
        }
    }

    [[nodiscard]] std::size_t size() const { return ranges_.size(); }
    [[nodiscard]] const ParamRange& operator[](std::size_t i) const { return ranges_[i]; }
    [[nodiscard]] const std::vector<ParamRange>& ranges() const { return ranges_; }

    [[nodiscard]] std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& r : ranges_) out.push_back(r.name);
        return out;
    }

private:
    std::vector<ParamRange> ranges_;
};

enum class DesignMethod { lptau, maximinLHS };

inline DesignMethod parse_design_method(std::string_view name) {
    if (name == "lptau" || name == "sobol") return DesignMethod::lptau;
    if (name == "lhs" || name == "maximinLHS" || name == "maximin_lhs") return DesignMethod::maximinLHS;
    throw DataError("unknown design method '" + std::string(name) + "' (expected lptau or lhs)");
}

struct UnitDesign {
    Matrix points;  // n x d, entries in [0, 1]
    DesignMethod method = DesignMethod::lptau;
    std::optional<std::uint64_t> seed;  // maximin LHS only
};

inline constexpr int kMaximinProposals = 10'000;

/// Smallest Euclidean distance between two rows.
inline double min_pairwise_distance(const Matrix& points) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
            best = std::min(best, (points.row(i) - points.row(j)).squaredNorm());
        }
    }
    return std::sqrt(best);
}

/// Random Latin hypercube: each column places one point in every stratum [k/n, (k+1)/n).
inline Matrix latin_hypercube(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0));
    Matrix x(n, d);
    std::vector<std::size_t> perm(n);
    for (std::size_t c = 0; c < d; ++c) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng.shuffle(std::span(perm));
        for (std::size_t r = 0; r < n; ++r) {
            x(r, c) = (static_cast<double>(perm[r]) + rng.uniform()) / static_cast<double>(n);
        }
    }
    return x;
}

/// Pairwise-swap hill climbing on the minimum inter-point distance. A swap
/// within one column preserves the Latin stratification; swaps that would
/// lower the minimum distance are rejected.
inline Matrix maximin_improve(Matrix x, int proposals, std::uint64_t seed) {
    const auto n = x.rows();
    if (n < 3) return x;
    Rng rng(derive_seed(seed, 1));
    Matrix dist2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist2(i, i) = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = i + 1; j < n; ++j) dist2(i, j) = dist2(j, i) = (x.row(i) - x.row(j)).squaredNorm();
    }
    std::vector<double> row_min(n);
    std::vector<Eigen::Index> row_arg(n);
    auto refresh_row = [&](Eigen::Index i) { row_min[i] = dist2.row(i).minCoeff(&row_arg[i]); };
    for (Eigen::Index i = 0; i < n; ++i) refresh_row(i);

    std::vector<double> new1(n), new2(n);
    for (int it = 0; it < proposals; ++it) {
        const auto worst = static_cast<Eigen::Index>(
            std::min_element(row_min.begin(), row_min.end()) - row_min.begin());
        const double current = row_min[worst];
        const Eigen::Index r1 = rng.bernoulli(0.5) ? worst : row_arg[worst];
        Eigen::Index r2 = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - 1)));
        if (r2 >= r1) ++r2;
        const auto c = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(x.cols())));
        const double a = x(r1, c);
        const double b = x(r2, c);

        double candidate = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == r1 || j == r2) {
                new1[j] = new2[j] = dist2(r1, r2);
                continue;
            }
            const double xj = x(j, c);
            new1[j] = dist2(r1, j) - (a - xj) * (a - xj) + (b - xj) * (b - xj);
            new2[j] = dist2(r2, j) - (b - xj) * (b - xj) + (a - xj) * (a - xj);
            candidate = std::min({candidate, new1[j], new2[j]});
        }
        candidate = std::min(candidate, dist2(r1, r2));
        for (Eigen::Index i = 0; i < n && candidate >= current; ++i) {
            if (i == r1 || i == r2) continue;
            if (row_arg[i] != r1 && row_arg[i] != r2) {
                candidate = std::min(candidate, row_min[i]);
                continue;
            }
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j != r1 && j != r2) candidate = std::min(candidate, dist2(i, j));
            }
        }
        if (candidate < current) continue;

        std::swap(x(r1, c), x(r2, c));
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == r1 || j == r2) continue;
            dist2(r1, j) = dist2(j, r1) = new1[j];
            dist2(r2, j) = dist2(j, r2) = new2[j];
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i == r1 || i == r2 || row_arg[i] == r1 || row_arg[i] == r2 || dist2(i, r1) < row_min[i] ||
                dist2(i, r2) < row_min[i]) {
                refresh_row(i);
            }
        }
    }
    return x;
}

/// First n Sobol' points (lptau, seed ignored) or a seeded maximin LHS.
inline UnitDesign generate_design(DesignMethod method, std::size_t n, std::size_t d, std::uint64_t seed = 0) {
    require(n >= 2, "design needs at least 2 runs");
    require(d >= 1, "design needs at least 1 dimension");
    UnitDesign out;
    out.method = method;
    if (method == DesignMethod::lptau) {
        out.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = sobol_point(i + 1, d);
            for (std::size_t j = 0; j < d; ++j) out.points(i, j) = p[j];
        }
    } else {
        out.seed = seed;
        out.points = maximin_improve(latin_hypercube(n, d, seed), kMaximinProposals, seed);
    }
    return out;
}

inline UnitDesign generate_design(DesignMethod method, std::size_t n, const ParamRanges& ranges,
                                  std::uint64_t seed = 0) {
    return generate_design(method, n, ranges.size(), seed);
}

/// Affine map of every entry to lower + u * (upper - lower).
inline Matrix scale_design(const UnitDesign& design, const ParamRanges& ranges) {
    require(static_cast<std::size_t>(design.points.cols()) == ranges.size(),
            "design has " + std::to_string(design.points.cols()) + " columns but " +
                std::to_string(ranges.size()) + " ranges were given");
    Matrix out = design.points;
    for (std::size_t j = 0; j < ranges.size(); ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        out.col(col) = (ranges[j].lower + (ranges[j].upper - ranges[j].lower) * design.points.col(col).array()).matrix();
    }
    return out;
}

inline Matrix unscale_design(const Matrix& values, const ParamRanges& ranges) {
    require(static_cast<std::size_t>(values.cols()) == ranges.size(), "dimension mismatch in unscale_design");
    Matrix out = values;
    for (std::size_t j = 0; j < ranges.size(); ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        out.col(col) = ((values.col(col).array() - ranges[j].lower) / (ranges[j].upper - ranges[j].lower)).matrix();
    }
    return out;
}

inline void write_design_csv(std::ostream& out, const Matrix& values, const std::vector<std::string>& names) {
    require(static_cast<std::size_t>(values.cols()) == names.size(), "design/name count mismatch");
    out << join(names) << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (j) out << ',';
            out << format_number(values(i, j));
        }
        out << '\n';
    }
}

struct NamedMatrix {
    std::vector<std::string> names;
    Matrix values;
};

inline NamedMatrix read_design_csv(const std::string& path) {
    const auto table = read_csv(path);
    NamedMatrix out{table.header, Matrix(static_cast<Eigen::Index>(table.rows.size()),
                                         static_cast<Eigen::Index>(table.header.size()))};
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        for (std::size_t j = 0; j < table.header.size(); ++j) {
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                parse_number(table.rows[i][j], path);
        }
    }
    return out;
}

}  // namespace abmsurrogate::design
