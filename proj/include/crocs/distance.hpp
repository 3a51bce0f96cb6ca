#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "crocs/types.hpp"

namespace crocs {

/// Profile-to-profile dissimilarity selector. Window radius is in sampling
/// intervals: radius 2 at half-hourly phi=48 is the 1-hour band (DTW-2).
struct DistanceKind {
    enum class Type { Euclidean, Dtw };
    Type type = Type::Dtw;
    std::size_t window_radius = 2;

    static DistanceKind euclidean() { return {Type::Euclidean, 0}; }
    static DistanceKind dtw(std::size_t radius) { return {Type::Dtw, radius}; }
};

inline double euclidean(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("euclidean: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

/// Dynamic time warping under a Sakoe-Chiba band |i-j| <= window_radius with
/// steps {(1,0),(0,1),(1,1)} and squared-difference cell cost. Returns the
/// square root of the accumulated cost, so radius 0 coincides with euclidean
/// and values share the same unit scale.
inline double dtw(std::span<const double> a, std::span<const double> b, std::size_t window_radius) {
    if (a.size() != b.size()) throw std::invalid_argument("dtw: length mismatch");
    const std::size_t n = a.size();
    if (n == 0) return 0.0;
    if (window_radius == 0) return euclidean(a, b);

    constexpr double inf = std::numeric_limits<double>::infinity();
    // Two rolling rows over the band, padded one cell on each side so the
    // band-edge reads fall on inf instead of branching.
    const std::size_t width = 2 * window_radius + 3;
    std::vector<double> prev(width, inf), curr(width, inf);

    auto col_of = [&](std::size_t i, std::size_t j) {
        // j is within [i - r, i + r]; map to [1, width - 2].
        return j + window_radius + 1 - i;
    };

    {
        const std::size_t j_hi = std::min(n - 1, window_radius);
        for (std::size_t j = 0; j <= j_hi; ++j) {
            const double diff = a[0] - b[j];
            const double cost = diff * diff;
            prev[col_of(0, j)] = (j == 0) ? cost : cost + prev[col_of(0, j - 1)];
        }
    }
    for (std::size_t i = 1; i < n; ++i) {
        std::fill(curr.begin(), curr.end(), inf);
        const std::size_t j_lo = (i > window_radius) ? i - window_radius : 0;
        const std::size_t j_hi = std::min(n - 1, i + window_radius);
        for (std::size_t j = j_lo; j <= j_hi; ++j) {
            const std::size_t c = col_of(i, j);
            // prev row is offset one column to the right of curr.
            const double up = prev[c + 1];        // (i-1, j)
            const double diag = prev[c];          // (i-1, j-1)
            const double left = curr[c - 1];      // (i, j-1)
            const double best = std::min(diag, std::min(up, left));
            const double diff = a[i] - b[j];
            curr[c] = diff * diff + best;
        }
        std::swap(prev, curr);
    }
    return std::sqrt(prev[col_of(n - 1, n - 1)]);
}

inline double profile_distance(std::span<const double> a, std::span<const double> b, const DistanceKind& kind) {
    if (kind.type == DistanceKind::Type::Euclidean) return euclidean(a, b);
    return dtw(a, b, kind.window_radius);
}

}  // namespace crocs
