#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "crocs/distance.hpp"
#include "crocs/parallel.hpp"
#include "crocs/types.hpp"

namespace crocs {

enum class SetDistanceKind { WSMD, SMD, HD, MHD, SL, CL, AL, WAL };

/// Directional nearest-prototype record for one ordered consumer pair, as
/// discovered by WSMD: each source prototype maps to exactly one target
/// prototype in the partner RLS.
struct DirectedPairing {
    std::size_t source_prototype = 0;
    std::size_t target_prototype = 0;
    double distance = 0.0;
};

/// Full pairing record for an unordered consumer pair (i, j), plus the WSMD value.
struct WsmdPairing {
    std::size_t consumer_i = 0;  // index into the RLS sequence handed to pairwise_set_matrix
    std::size_t consumer_j = 0;
    std::vector<DirectedPairing> i_to_j;  // one entry per prototype of i
    std::vector<DirectedPairing> j_to_i;  // one entry per prototype of j
    double delta = 0.0;
};

namespace detail {

/// Prototype-by-prototype distance table between two RLSs.
inline std::vector<std::vector<double>> prototype_distances(const RepresentativeLoadSet& a,
                                                            const RepresentativeLoadSet& b,
                                                            const DistanceKind& d) {
    std::vector<std::vector<double>> table(a.size(), std::vector<double>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            table[i][j] = profile_distance(a.prototypes[i].profile, b.prototypes[j].profile, d);
    return table;
}

inline void require_nonempty(const RepresentativeLoadSet& s) {
    if (s.prototypes.empty()) throw std::invalid_argument("set distance: empty RLS for consumer " + s.consumer_id);
}

/// Row minima with lowest-index tie-breaking.
inline std::vector<DirectedPairing> nearest_rows(const std::vector<std::vector<double>>& table) {
    std::vector<DirectedPairing> out(table.size());
    for (std::size_t a = 0; a < table.size(); ++a) {
        std::size_t best = 0;
        for (std::size_t b = 1; b < table[a].size(); ++b)
            if (table[a][b] < table[a][best]) best = b;
        out[a] = {a, best, table[a][best]};
    }
    return out;
}

}  // namespace detail

/// Computes all eight set distances from one prototype-distance table. Used
/// by the per-kind entry points and by the set-distance comparison sweep,
/// which evaluates every kind per consumer pair without recomputing d.
struct SetDistanceBundle {
    double wsmd, smd, hd, mhd, sl, cl, al, wal;

    double get(SetDistanceKind kind) const {
        switch (kind) {
            case SetDistanceKind::WSMD: return wsmd;
            case SetDistanceKind::SMD: return smd;
            case SetDistanceKind::HD: return hd;
            case SetDistanceKind::MHD: return mhd;
            case SetDistanceKind::SL: return sl;
            case SetDistanceKind::CL: return cl;
            case SetDistanceKind::AL: return al;
            case SetDistanceKind::WAL: return wal;
        }
        return 0.0;
    }
};

inline SetDistanceBundle set_distance_bundle(const RepresentativeLoadSet& si, const RepresentativeLoadSet& sj,
                                             const std::vector<std::vector<double>>& table) {
    const std::size_t ki = si.size(), kj = sj.size();
    const double pi = static_cast<double>(si.total_days);
    const double pj = static_cast<double>(sj.total_days);

    double wsum_i = 0.0, wsum_j = 0.0;    // count-weighted min sums
    double sum_i = 0.0, sum_j = 0.0;      // plain min sums
    double maxmin_i = 0.0, maxmin_j = 0.0;
    double sl = std::numeric_limits<double>::infinity(), cl = 0.0;
    // AL/WAL terms are summed in value order so the result is bit-identical
    // under argument swap (the table transposes but the multiset does not).
    std::vector<double> al_terms, wal_terms;
    al_terms.reserve(ki * kj);
    wal_terms.reserve(ki * kj);

    for (std::size_t a = 0; a < ki; ++a) {
        double row_min = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < kj; ++b) {
            const double d = table[a][b];
            row_min = std::min(row_min, d);
            cl = std::max(cl, d);
            al_terms.push_back(d);
            wal_terms.push_back(static_cast<double>(si.prototypes[a].count * sj.prototypes[b].count) * d);
        }
        sl = std::min(sl, row_min);
        sum_i += row_min;
        wsum_i += static_cast<double>(si.prototypes[a].count) * row_min;
        maxmin_i = std::max(maxmin_i, row_min);
    }
    std::sort(al_terms.begin(), al_terms.end());
    std::sort(wal_terms.begin(), wal_terms.end());
    double al_sum = 0.0, wal_sum = 0.0;
    for (double t : al_terms) al_sum += t;
    for (double t : wal_terms) wal_sum += t;
    for (std::size_t b = 0; b < kj; ++b) {
        double col_min = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < ki; ++a) col_min = std::min(col_min, table[a][b]);
        sum_j += col_min;
        wsum_j += static_cast<double>(sj.prototypes[b].count) * col_min;
        maxmin_j = std::max(maxmin_j, col_min);
    }

    SetDistanceBundle out;
    out.wsmd = 0.5 * (wsum_i / pi + wsum_j / pj);
    out.smd = 0.5 * (sum_i + sum_j);
    out.hd = std::max(maxmin_i, maxmin_j);
    out.mhd = std::max(sum_i / static_cast<double>(ki), sum_j / static_cast<double>(kj));
    out.sl = sl;
    out.cl = cl;
    out.al = al_sum / (static_cast<double>(ki) * static_cast<double>(kj));
    out.wal = wal_sum / (pi * pj);
    return out;
}

/// Weighted Sum of Minimum Distances between two RLSs, with the directional
/// nearest-prototype pairings it induces.
inline WsmdPairing wsmd(const RepresentativeLoadSet& si, const RepresentativeLoadSet& sj, const DistanceKind& d) {
    detail::require_nonempty(si);
    detail::require_nonempty(sj);
    const auto table = detail::prototype_distances(si, sj, d);
    std::vector<std::vector<double>> transposed(sj.size(), std::vector<double>(si.size()));
    for (std::size_t a = 0; a < si.size(); ++a)
        for (std::size_t b = 0; b < sj.size(); ++b) transposed[b][a] = table[a][b];

    WsmdPairing pairing;
    pairing.i_to_j = detail::nearest_rows(table);
    pairing.j_to_i = detail::nearest_rows(transposed);

    double acc_i = 0.0;
    for (std::size_t a = 0; a < si.size(); ++a)
        acc_i += static_cast<double>(si.prototypes[a].count) * pairing.i_to_j[a].distance;
    double acc_j = 0.0;
    for (std::size_t b = 0; b < sj.size(); ++b)
        acc_j += static_cast<double>(sj.prototypes[b].count) * pairing.j_to_i[b].distance;
    pairing.delta = 0.5 * (acc_i / static_cast<double>(si.total_days) + acc_j / static_cast<double>(sj.total_days));
    return pairing;
}

/// Recomputes the WSMD value from a stored pairing record; used to check
/// pairing/value consistency.
inline double wsmd_from_pairing(const WsmdPairing& pairing, const RepresentativeLoadSet& si,
                                const RepresentativeLoadSet& sj) {
    double acc_i = 0.0;
    for (const auto& edge : pairing.i_to_j)
        acc_i += static_cast<double>(si.prototypes[edge.source_prototype].count) * edge.distance;
    double acc_j = 0.0;
    for (const auto& edge : pairing.j_to_i)
        acc_j += static_cast<double>(sj.prototypes[edge.source_prototype].count) * edge.distance;
    return 0.5 * (acc_i / static_cast<double>(si.total_days) + acc_j / static_cast<double>(sj.total_days));
}

inline double set_distance(const RepresentativeLoadSet& si, const RepresentativeLoadSet& sj, SetDistanceKind kind,
                           const DistanceKind& d) {
    detail::require_nonempty(si);
    detail::require_nonempty(sj);
    const auto table = detail::prototype_distances(si, sj, d);
    return set_distance_bundle(si, sj, table).get(kind);
}

struct SetMatrixResult {
    DissimilarityMatrix matrix;
    std::vector<WsmdPairing> pairings;  // populated only for WSMD, one per unordered pair

    /// Pairing lookup for the unordered pair (i, j) with i < j.
    const WsmdPairing& pairing(std::size_t i, std::size_t j) const {
        const std::size_t lo = std::min(i, j), hi = std::max(i, j);
        const std::size_t n = matrix.size();
        // Offset of (lo, hi) in the row-major strict upper triangle.
        const std::size_t index = lo * n - lo * (lo + 1) / 2 + (hi - lo - 1);
        return pairings[index];
    }
};

/// All m(m-1)/2 set distances, parallel over unordered pairs. Assembly order
/// never affects the result: every pair owns its slot.
inline SetMatrixResult pairwise_set_matrix(const std::vector<RepresentativeLoadSet>& all_rls, SetDistanceKind kind,
                                           const DistanceKind& d, std::size_t threads = 0) {
    const std::size_t m = all_rls.size();
    if (m < 2) throw std::invalid_argument("pairwise_set_matrix: need at least 2 consumers");
    SetMatrixResult out;
    out.matrix = DissimilarityMatrix(m);
    const std::size_t pair_count = m * (m - 1) / 2;
    const bool keep_pairings = (kind == SetDistanceKind::WSMD);
    if (keep_pairings) out.pairings.resize(pair_count);

    parallel_for(
        pair_count,
        [&](std::size_t t) {
            // Invert the strict-upper-triangle offset.
            std::size_t i = 0;
            std::size_t remaining = t;
            std::size_t row_len = m - 1;
            while (remaining >= row_len) {
                remaining -= row_len;
                --row_len;
                ++i;
            }
            const std::size_t j = i + 1 + remaining;
            if (keep_pairings) {
                WsmdPairing pairing = wsmd(all_rls[i], all_rls[j], d);
                pairing.consumer_i = i;
                pairing.consumer_j = j;
                out.matrix.data()[i * m + j] = pairing.delta;
                out.matrix.data()[j * m + i] = pairing.delta;
                out.pairings[t] = std::move(pairing);
            } else {
                const double value = set_distance(all_rls[i], all_rls[j], kind, d);
                out.matrix.data()[i * m + j] = value;
                out.matrix.data()[j * m + i] = value;
            }
        },
        threads);
    return out;
}

}  // namespace crocs
