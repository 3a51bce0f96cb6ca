#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "crocs/distance.hpp"
#include "crocs/types.hpp"

namespace crocs::eval {

namespace detail {

struct Contingency {
    std::vector<std::vector<std::size_t>> cells;  // ka x kb
    std::vector<std::size_t> row_sums, col_sums;
    std::size_t n = 0;
};

inline Contingency contingency_table(const Partition& a, const Partition& b) {
    if (a.labels.size() != b.labels.size()) throw std::invalid_argument("evi: partition length mismatch");
    if (a.labels.empty()) throw std::invalid_argument("evi: empty partitions");
    Contingency t;
    t.n = a.labels.size();
    t.cells.assign(static_cast<std::size_t>(a.k), std::vector<std::size_t>(static_cast<std::size_t>(b.k), 0));
    t.row_sums.assign(static_cast<std::size_t>(a.k), 0);
    t.col_sums.assign(static_cast<std::size_t>(b.k), 0);
    for (std::size_t i = 0; i < t.n; ++i) {
        const auto ra = static_cast<std::size_t>(a.labels[i]);
        const auto cb = static_cast<std::size_t>(b.labels[i]);
        t.cells[ra][cb]++;
        t.row_sums[ra]++;
        t.col_sums[cb]++;
    }
    return t;
}

inline double choose2(std::size_t x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); }

/// Minimum-cost assignment on a square matrix by shortest augmenting paths
/// (Jonker-Volgenant style, O(n^3)). Returns the optimal total cost.
inline double hungarian_min_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = match[static_cast<std::size_t>(j0)];
            int j1 = 0;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j)
        total += cost[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)][static_cast<std::size_t>(j - 1)];
    return total;
}

inline bool same_grouping(const Partition& a, const Partition& b) {
    return relabel_canonical(a).labels == relabel_canonical(b).labels;
}

}  // namespace detail

/// Adjusted Rand Index: pair-counting agreement corrected for chance.
inline double ari(const Partition& a, const Partition& b) {
    const auto t = detail::contingency_table(a, b);
    double index = 0.0;
    for (const auto& row : t.cells)
        for (std::size_t cell : row) index += detail::choose2(cell);
    double sum_a = 0.0, sum_b = 0.0;
    for (std::size_t x : t.row_sums) sum_a += detail::choose2(x);
    for (std::size_t x : t.col_sums) sum_b += detail::choose2(x);
    const double pairs = detail::choose2(t.n);
    const double expected = sum_a * sum_b / pairs;
    const double maximum = 0.5 * (sum_a + sum_b);
    if (std::abs(maximum - expected) < 1e-15) return detail::same_grouping(a, b) ? 1.0 : 0.0;
    return (index - expected) / (maximum - expected);
}

/// Adjusted Mutual Information with arithmetic-mean normalization and the
/// hypergeometric expected-MI. Natural logs throughout (the ratio is
/// base-invariant).
inline double ami(const Partition& a, const Partition& b) {
    const auto t = detail::contingency_table(a, b);
    const double n = static_cast<double>(t.n);

    double mi = 0.0;
    for (std::size_t i = 0; i < t.row_sums.size(); ++i)
        for (std::size_t j = 0; j < t.col_sums.size(); ++j) {
            const std::size_t nij = t.cells[i][j];
            if (nij == 0) continue;
            mi += (static_cast<double>(nij) / n) *
                  std::log(n * static_cast<double>(nij) /
                           (static_cast<double>(t.row_sums[i]) * static_cast<double>(t.col_sums[j])));
        }

    auto entropy = [&](const std::vector<std::size_t>& sums) {
        double h = 0.0;
        for (std::size_t x : sums) {
            if (x == 0) continue;
            const double p = static_cast<double>(x) / n;
            h -= p * std::log(p);
        }
        return h;
    };
    const double ha = entropy(t.row_sums);
    const double hb = entropy(t.col_sums);

    // E[MI] over the hypergeometric model of random contingency tables with
    // fixed margins.
    std::vector<double> lg(t.n + 1, 0.0);
    for (std::size_t x = 2; x <= t.n; ++x) lg[x] = lg[x - 1] + std::log(static_cast<double>(x));
    double emi = 0.0;
    for (std::size_t ai : t.row_sums)
        for (std::size_t bj : t.col_sums) {
            const std::size_t lo = (ai + bj > t.n) ? ai + bj - t.n : 1;
            const std::size_t hi = std::min(ai, bj);
            for (std::size_t nij = lo; nij <= hi; ++nij) {
                const double log_p = lg[ai] + lg[bj] + lg[t.n - ai] + lg[t.n - bj] - lg[t.n] - lg[nij] -
                                     lg[ai - nij] - lg[bj - nij] - lg[t.n - ai - bj + nij];
                const double term = (static_cast<double>(nij) / n) *
                                    std::log(n * static_cast<double>(nij) /
                                             (static_cast<double>(ai) * static_cast<double>(bj)));
                emi += std::exp(log_p) * term;
            }
        }

    const double denom = 0.5 * (ha + hb) - emi;
    if (std::abs(denom) < 1e-12) return detail::same_grouping(a, b) ? 1.0 : 0.0;
    return (mi - emi) / denom;
}

/// Pair Sets Index: optimal one-to-one cluster matching on the similarity
/// |A_i n B_j| / max(|A_i|, |B_j|), chance-corrected and clipped to [0, 1].
inline double psi(const Partition& a, const Partition& b) {
    const auto t = detail::contingency_table(a, b);
    const std::size_t ka = t.row_sums.size(), kb = t.col_sums.size();
    const std::size_t dim = std::max(ka, kb);

    // Maximize total similarity = minimize negated similarity on a padded square.
    std::vector<std::vector<double>> cost(dim, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < ka; ++i)
        for (std::size_t j = 0; j < kb; ++j)
            cost[i][j] = -static_cast<double>(t.cells[i][j]) /
                         static_cast<double>(std::max(t.row_sums[i], t.col_sums[j]));
    const double s = -detail::hungarian_min_cost(cost);

    std::vector<std::size_t> sa(t.row_sums), sb(t.col_sums);
    std::sort(sa.rbegin(), sa.rend());
    std::sort(sb.rbegin(), sb.rend());
    double expected = 0.0;
    for (std::size_t i = 0; i < std::min(ka, kb); ++i)
        expected += static_cast<double>(sa[i]) * static_cast<double>(sb[i]) /
                    (static_cast<double>(t.n) * static_cast<double>(std::max(sa[i], sb[i])));

    const double denom = static_cast<double>(dim) - expected;
    if (denom <= 1e-12) return detail::same_grouping(a, b) ? 1.0 : 0.0;
    return std::max(0.0, (s - expected) / denom);
}

struct EviReport {
    double ari = 0.0;
    double ami = 0.0;
    double psi = 0.0;
    std::vector<std::vector<std::size_t>> contingency;
};

inline EviReport evi_report(const Partition& a, const Partition& b) {
    EviReport report;
    report.ari = ari(a, b);
    report.ami = ami(a, b);
    report.psi = psi(a, b);
    report.contingency = detail::contingency_table(a, b).cells;
    return report;
}

/// Normalized Jensen-Shannon divergence (base-2 logs, bounded [0, 1]) between
/// two label-count distributions over a shared label space.
inline double jsd_normalized(const std::map<int, double>& counts_a, const std::map<int, double>& counts_b) {
    double total_a = 0.0, total_b = 0.0;
    for (const auto& [label, c] : counts_a) total_a += c;
    for (const auto& [label, c] : counts_b) total_b += c;
    if (total_a <= 0.0 || total_b <= 0.0) throw std::invalid_argument("jsd: zero-total counts");

    std::map<int, std::pair<double, double>> joint;
    for (const auto& [label, c] : counts_a) joint[label].first = c / total_a;
    for (const auto& [label, c] : counts_b) joint[label].second = c / total_b;

    double div = 0.0;
    for (const auto& [label, pq] : joint) {
        const auto [p, q] = pq;
        const double m = 0.5 * (p + q);
        if (p > 0.0) div += 0.5 * p * std::log2(p / m);
        if (q > 0.0) div += 0.5 * q * std::log2(q / m);
    }
    return std::min(1.0, std::max(0.0, div));
}

/// Cohen's kappa over day-aligned label pairs, mapped to [0, 1] via (k+1)/2:
/// chance agreement sits near 0.5, perfect agreement at 1.
inline double kappa_normalized(const std::vector<int>& seq_a, const std::vector<int>& seq_b) {
    if (seq_a.size() != seq_b.size()) throw std::invalid_argument("kappa: length mismatch");
    if (seq_a.empty()) throw std::invalid_argument("kappa: empty sequences");
    const double n = static_cast<double>(seq_a.size());

    std::map<int, double> freq_a, freq_b;
    double agree = 0.0;
    for (std::size_t i = 0; i < seq_a.size(); ++i) {
        freq_a[seq_a[i]] += 1.0;
        freq_b[seq_b[i]] += 1.0;
        if (seq_a[i] == seq_b[i]) agree += 1.0;
    }
    const double po = agree / n;
    double pe = 0.0;
    for (const auto& [label, ca] : freq_a) {
        const auto it = freq_b.find(label);
        if (it != freq_b.end()) pe += (ca / n) * (it->second / n);
    }
    if (pe >= 1.0 - 1e-15) return (seq_a == seq_b) ? 1.0 : 0.5;  // kappa undefined
    const double kappa = (po - pe) / (1.0 - pe);
    return 0.5 * (kappa + 1.0);
}

/// Mean over the consumer's DLPs of the minimum Euclidean distance to any
/// representation profile.
inline double reconstruction_error(const ConsumerRecord& record, const std::vector<Profile>& representation) {
    if (representation.empty()) throw std::invalid_argument("reconstruction_error: empty representation");
    if (record.profiles.empty()) throw std::invalid_argument("reconstruction_error: empty record");
    double total = 0.0;
    for (const auto& day : record.profiles) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& rep : representation) nearest = std::min(nearest, euclidean(day.values, rep));
        total += nearest;
    }
    return total / static_cast<double>(record.profiles.size());
}

}  // namespace crocs::eval
