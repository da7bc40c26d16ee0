#pragma once

// Sobol' low-discrepancy sequence (the "LP-tau" sequence) with the Joe-Kuo
// direction numbers (new-joe-kuo-6.21201), Gray-code ordering, no scrambling.

#include <abmsurrogate/core/error.hpp>

#include <array>
#include <cstdint>
#include <vector>

namespace abmsurrogate::design {

namespace detail {

struct SobolPolynomial {
    unsigned degree;
    unsigned coefficients;  // interior bits of the primitive polynomial
    std::array<std::uint32_t, 8> initial;
};

// Dimensions 2..21. Dimension 1 uses m_k = 1 for every k.
inline constexpr std::array<SobolPolynomial, 20> kJoeKuo{{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
}};

inline constexpr unsigned kBits = 32;

using DirectionTable = std::array<std::array<std::uint32_t, kBits>, kJoeKuo.size() + 1>;

constexpr DirectionTable make_directions() {
    DirectionTable v{};
    for (unsigned k = 0; k < kBits; ++k) v[0][k] = 1U << (kBits - 1 - k);
    for (std::size_t dim = 1; dim < v.size(); ++dim) {
        const auto& poly = kJoeKuo[dim - 1];
        const unsigned s = poly.degree;
        auto& dir = v[dim];
        for (unsigned k = 0; k < kBits && k < s; ++k) dir[k] = poly.initial[k] << (kBits - 1 - k);
        for (unsigned k = s; k < kBits; ++k) {
            dir[k] = dir[k - s] ^ (dir[k - s] >> s);
            for (unsigned j = 1; j < s; ++j) {
                dir[k] ^= ((poly.coefficients >> (s - 1 - j)) & 1U) * dir[k - j];
            }
        }
    }
    return v;
}

inline constexpr DirectionTable kDirections = make_directions();

}  // namespace detail

inline constexpr std::size_t kSobolMaxDimension = detail::kDirections.size();

/// The `index`-th Sobol' point (1-based; the all-zero point at index 0 is
/// never returned). Every coordinate lies strictly inside (0, 1).
inline std::vector<double> sobol_point(std::uint64_t index, std::size_t dim) {
    require(index >= 1, "Sobol index must be >= 1");
    require(index < (std::uint64_t{1} << detail::kBits), "Sobol index exceeds 2^32 - 1");
    if (dim == 0 || dim > kSobolMaxDimension) {
        throw DataError("unsupported Sobol dimension " + std::to_string(dim) + " (max " +
                        std::to_string(kSobolMaxDimension) + ")");
    }
    const std::uint64_t gray = index ^ (index >> 1);
    std::vector<double> point(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        std::uint32_t x = 0;
        for (unsigned bit = 0; bit < detail::kBits; ++bit) {
            if ((gray >> bit) & 1U) x ^= detail::kDirections[j][bit];
        }
        point[j] = static_cast<double>(x) * 0x1.0p-32;
    }
    return point;
}

}  // namespace abmsurrogate::design
