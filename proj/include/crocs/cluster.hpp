#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "crocs/parallel.hpp"
#include "crocs/rng.hpp"
#include "crocs/types.hpp"

namespace crocs {

enum class ClusterAlgorithm { HacWard, KMedoids, KMeans };
enum class PrototypeKind { Medoid, Mean };

struct ClusterConfig {
    ClusterAlgorithm algorithm = ClusterAlgorithm::HacWard;
    int k = 2;
    int restarts = 30;
    int max_iterations = 200;
    std::uint64_t seed = 0;
};

namespace detail {

struct Merge {
    std::size_t a, b;   // representative object indices of the merged clusters
    double height;      // squared-scale Ward distance at merge time
    std::size_t order;  // discovery order, tie-break for equal heights
};

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Agglomerative clustering with Ward's objective via the Lance-Williams
/// recurrence on squared dissimilarities, computed with the O(n^2)
/// nearest-neighbour chain. The merge list is sorted by height and the first
/// n-k merges applied, which equals the greedy merge-count cut whenever
/// heights are monotone; inversions (possible on non-Euclidean input) are
/// tolerated. Deterministic: ties always prefer the lowest object index.
inline Partition hac_ward(const DissimilarityMatrix& D, int k) {
    const std::size_t n = D.size();
    if (n == 0) throw std::invalid_argument("hac_ward: empty matrix");
    if (k < 1 || static_cast<std::size_t>(k) > n) throw std::invalid_argument("hac_ward: k out of range");

    // Working copy of squared dissimilarities, updated in place.
    std::vector<double> d2(n * n);
    for (std::size_t i = 0; i < n * n; ++i) d2[i] = D.data()[i] * D.data()[i];

    std::vector<double> size(n, 1.0);
    std::vector<char> active(n, 1);
    std::vector<detail::Merge> merges;
    merges.reserve(n - 1);
    std::vector<std::size_t> chain;
    chain.reserve(n);

    auto dist = [&](std::size_t i, std::size_t j) -> double& { return d2[i * n + j]; };

    while (merges.size() + 1 < n) {
        if (chain.empty()) {
            for (std::size_t i = 0; i < n; ++i)
                if (active[i]) {
                    chain.push_back(i);
                    break;
                }
        }
        const std::size_t a = chain.back();
        const std::size_t prev = chain.size() >= 2 ? chain[chain.size() - 2] : n;
        std::size_t best = n;
        double best_d = std::numeric_limits<double>::infinity();
        if (prev < n) {  // prefer the chain predecessor on ties
            best = prev;
            best_d = dist(a, prev);
        }
        for (std::size_t x = 0; x < n; ++x) {
            if (!active[x] || x == a || x == prev) continue;
            const double dx = dist(a, x);
            if (dx < best_d || (dx == best_d && x < best)) {
                best = x;
                best_d = dx;
            }
        }
        if (best == prev && prev < n) {
            // Reciprocal pair: merge. Keep the lower index as representative.
            chain.pop_back();
            chain.pop_back();
            const std::size_t lo = std::min(a, best), hi = std::max(a, best);
            const double h = dist(lo, hi);
            const double sa = size[lo], sb = size[hi];
            for (std::size_t x = 0; x < n; ++x) {
                if (!active[x] || x == lo || x == hi) continue;
                const double sx = size[x];
                const double updated =
                    ((sa + sx) * dist(lo, x) + (sb + sx) * dist(hi, x) - sx * h) / (sa + sb + sx);
                dist(lo, x) = updated;
                dist(x, lo) = updated;
            }
            size[lo] = sa + sb;
            active[hi] = 0;
            merges.push_back({lo, hi, h, merges.size()});
        } else {
            chain.push_back(best);
        }
    }

    std::stable_sort(merges.begin(), merges.end(), [](const detail::Merge& x, const detail::Merge& y) {
        if (x.height != y.height) return x.height < y.height;
        return x.order < y.order;
    });

    detail::UnionFind uf(n);
    for (std::size_t m = 0; m + static_cast<std::size_t>(k) < n; ++m) uf.unite(merges[m].a, merges[m].b);

    Partition p;
    p.labels.resize(n);
    std::vector<int> label_of_root(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = uf.find(i);
        if (label_of_root[root] < 0) label_of_root[root] = next++;
        p.labels[i] = label_of_root[root];
    }
    p.k = next;
    return p;
}

namespace detail {

struct PamState {
    std::vector<std::size_t> medoids;
    std::vector<int> nearest;     // position of nearest medoid in medoids[]
    std::vector<double> d_first;  // distance to nearest medoid
    std::vector<double> d_second;
    double objective = 0.0;
};

inline void pam_assign(const DissimilarityMatrix& D, PamState& s) {
    const std::size_t n = D.size();
    const std::size_t k = s.medoids.size();
    s.nearest.assign(n, 0);
    s.d_first.assign(n, 0.0);
    s.d_second.assign(n, 0.0);
    s.objective = 0.0;
    for (std::size_t o = 0; o < n; ++o) {
        double d1 = std::numeric_limits<double>::infinity();
        double d2 = std::numeric_limits<double>::infinity();
        int n1 = 0;
        for (std::size_t r = 0; r < k; ++r) {
            const double d = D(o, s.medoids[r]);
            if (d < d1 || (d == d1 && s.medoids[r] < s.medoids[static_cast<std::size_t>(n1)])) {
                d2 = d1;
                d1 = d;
                n1 = static_cast<int>(r);
            } else if (d < d2) {
                d2 = d;
            }
        }
        s.nearest[o] = n1;
        s.d_first[o] = d1;
        s.d_second[o] = d2;
        s.objective += d1;
    }
}

/// k-medoids++ seeding: first medoid uniform, then proportional to the
/// squared dissimilarity to the closest chosen medoid.
inline std::vector<std::size_t> kmedoidspp_seed(const DissimilarityMatrix& D, std::size_t k, Rng& rng) {
    const std::size_t n = D.size();
    std::vector<std::size_t> medoids;
    medoids.reserve(k);
    std::vector<char> chosen(n, 0);
    std::vector<double> weight(n, 0.0);

    const std::size_t first = static_cast<std::size_t>(rng.uniform_index(n));
    medoids.push_back(first);
    chosen[first] = 1;
    for (std::size_t o = 0; o < n; ++o) weight[o] = D(o, first) * D(o, first);

    while (medoids.size() < k) {
        double total = 0.0;
        for (std::size_t o = 0; o < n; ++o)
            if (!chosen[o]) total += weight[o];
        std::size_t pick = n;
        if (total > 0.0) {
            double r = rng.uniform() * total;
            for (std::size_t o = 0; o < n; ++o) {
                if (chosen[o]) continue;
                r -= weight[o];
                if (r < 0.0) {
                    pick = o;
                    break;
                }
            }
            if (pick == n) {  // fp tail: last unchosen
                for (std::size_t o = n; o-- > 0;)
                    if (!chosen[o]) {
                        pick = o;
                        break;
                    }
            }
        } else {
            for (std::size_t o = 0; o < n; ++o)
                if (!chosen[o]) {
                    pick = o;
                    break;
                }
        }
        medoids.push_back(pick);
        chosen[pick] = 1;
        for (std::size_t o = 0; o < n; ++o)
            weight[o] = std::min(weight[o], D(o, pick) * D(o, pick));
    }
    return medoids;
}

}  // namespace detail

struct KMedoidsResult {
    Partition partition;
    std::vector<std::size_t> medoid_indices;
    double objective = 0.0;
};

/// PAM with k-medoids++ seeding and exhaustive best-swap descent. The swap
/// deltas for all (medoid, candidate) pairs are accumulated in one O(n^2)
/// pass per iteration (FastPAM-style bookkeeping, identical results to
/// classic PAM). Best of cfg.restarts runs; deterministic given cfg.seed.
inline KMedoidsResult k_medoids(const DissimilarityMatrix& D, const ClusterConfig& cfg) {
    const std::size_t n = D.size();
    const std::size_t k = static_cast<std::size_t>(cfg.k);
    if (n == 0) throw std::invalid_argument("k_medoids: empty matrix");
    if (cfg.k < 1 || k > n) throw std::invalid_argument("k_medoids: k out of range");
    if (cfg.restarts < 1) throw std::invalid_argument("k_medoids: restarts must be >= 1");

    const std::size_t restarts = static_cast<std::size_t>(cfg.restarts);
    std::vector<detail::PamState> results(restarts);

    parallel_for(restarts, [&](std::size_t restart) {
        Rng rng = Rng::substream(cfg.seed, restart);
        detail::PamState s;
        s.medoids = detail::kmedoidspp_seed(D, k, rng);
        detail::pam_assign(D, s);

        std::vector<double> base(n);            // per-candidate gain, medoid removal aside
        std::vector<double> correction(k);      // per-removed-medoid adjustment
        for (int iter = 0; iter < cfg.max_iterations; ++iter) {
            double best_delta = 0.0;
            std::size_t best_r = k, best_c = n;
            std::vector<char> is_medoid(n, 0);
            for (std::size_t m : s.medoids) is_medoid[m] = 1;

            for (std::size_t c = 0; c < n; ++c) {
                if (is_medoid[c]) continue;
                double base_gain = 0.0;
                std::fill(correction.begin(), correction.end(), 0.0);
                for (std::size_t o = 0; o < n; ++o) {
                    const double doc = D(o, c);
                    const double keep = std::min(0.0, doc - s.d_first[o]);
                    base_gain += keep;
                    // If o's nearest medoid is removed, o moves to min(doc, second nearest).
                    correction[static_cast<std::size_t>(s.nearest[o])] +=
                        std::min(doc, s.d_second[o]) - s.d_first[o] - keep;
                }
                for (std::size_t r = 0; r < k; ++r) {
                    const double delta = base_gain + correction[r];
                    // Strictly-better wins; the fixed (c, r) scan order breaks ties.
                    if (delta < -1e-12 && delta < best_delta - 1e-12) {
                        best_delta = delta;
                        best_r = r;
                        best_c = c;
                    }
                }
            }
            if (best_r == k) break;
            s.medoids[best_r] = best_c;
            detail::pam_assign(D, s);
        }
        std::sort(s.medoids.begin(), s.medoids.end());
        detail::pam_assign(D, s);
        results[restart] = std::move(s);
    });

    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r)
        if (results[r].objective < results[best].objective) best = r;
    detail::PamState& s = results[best];

    KMedoidsResult out;
    out.medoid_indices = s.medoids;
    out.objective = s.objective;
    out.partition.labels.assign(n, 0);
    // A medoid always owns its cluster; everything else goes to the nearest
    // medoid (ties to the lowest medoid object index, already encoded by
    // pam_assign over the sorted medoid list).
    for (std::size_t o = 0; o < n; ++o) out.partition.labels[o] = s.nearest[o];
    for (std::size_t r = 0; r < k; ++r) out.partition.labels[s.medoids[r]] = static_cast<int>(r);
    out.partition.k = static_cast<int>(k);
    return out;
}

struct KMeansResult {
    Partition partition;
    std::vector<Profile> centroids;
    double wcss = 0.0;
};

namespace detail {

inline double sq_dist(const Profile& a, const Profile& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding; empty clusters are repaired by
/// seizing the point farthest from its current centroid. Best WCSS over
/// cfg.restarts runs; deterministic given cfg.seed.
inline KMeansResult k_means(const std::vector<Profile>& X, const ClusterConfig& cfg) {
    const std::size_t n = X.size();
    const std::size_t k = static_cast<std::size_t>(cfg.k);
    if (n == 0) throw std::invalid_argument("k_means: empty input");
    if (cfg.k < 1 || k > n) throw std::invalid_argument("k_means: k out of range");
    const std::size_t dim = X[0].size();
    for (const auto& x : X)
        if (x.size() != dim) throw std::invalid_argument("k_means: ragged input");

    struct Run {
        std::vector<int> labels;
        std::vector<Profile> centroids;
        double wcss = std::numeric_limits<double>::infinity();
    };
    const std::size_t restarts = static_cast<std::size_t>(cfg.restarts);
    std::vector<Run> runs(restarts);

    parallel_for(restarts, [&](std::size_t restart) {
        Rng rng = Rng::substream(cfg.seed, restart ^ 0x6b652d6d65616e73ULL);
        Run run;
        run.centroids.reserve(k);

        // k-means++ seeding
        std::vector<double> weight(n);
        run.centroids.push_back(X[static_cast<std::size_t>(rng.uniform_index(n))]);
        for (std::size_t o = 0; o < n; ++o) weight[o] = detail::sq_dist(X[o], run.centroids[0]);
        while (run.centroids.size() < k) {
            const std::size_t pick = rng.discrete(weight);
            run.centroids.push_back(X[pick]);
            for (std::size_t o = 0; o < n; ++o)
                weight[o] = std::min(weight[o], detail::sq_dist(X[o], run.centroids.back()));
        }

        run.labels.assign(n, -1);
        std::vector<std::size_t> counts(k);
        for (int iter = 0; iter < cfg.max_iterations; ++iter) {
            bool changed = false;
            for (std::size_t o = 0; o < n; ++o) {
                int best = 0;
                double best_d = detail::sq_dist(X[o], run.centroids[0]);
                for (std::size_t c = 1; c < k; ++c) {
                    const double d = detail::sq_dist(X[o], run.centroids[c]);
                    if (d < best_d) {
                        best_d = d;
                        best = static_cast<int>(c);
                    }
                }
                if (run.labels[o] != best) {
                    run.labels[o] = best;
                    changed = true;
                }
            }
            // Repair empty clusters with the worst-fitted points.
            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t o = 0; o < n; ++o) counts[static_cast<std::size_t>(run.labels[o])]++;
            for (std::size_t c = 0; c < k; ++c) {
                if (counts[c] > 0) continue;
                std::size_t worst = 0;
                double worst_d = -1.0;
                for (std::size_t o = 0; o < n; ++o) {
                    if (counts[static_cast<std::size_t>(run.labels[o])] <= 1) continue;
                    const double d = detail::sq_dist(X[o], run.centroids[static_cast<std::size_t>(run.labels[o])]);
                    if (d > worst_d) {
                        worst_d = d;
                        worst = o;
                    }
                }
                counts[static_cast<std::size_t>(run.labels[worst])]--;
                run.labels[worst] = static_cast<int>(c);
                counts[c] = 1;
                changed = true;
            }
            if (!changed && iter > 0) break;
            for (std::size_t c = 0; c < k; ++c)
                std::fill(run.centroids[c].begin(), run.centroids[c].end(), 0.0);
            for (std::size_t o = 0; o < n; ++o) {
                Profile& ctr = run.centroids[static_cast<std::size_t>(run.labels[o])];
                for (std::size_t j = 0; j < dim; ++j) ctr[j] += X[o][j];
            }
            for (std::size_t c = 0; c < k; ++c)
                for (std::size_t j = 0; j < dim; ++j) run.centroids[c][j] /= static_cast<double>(counts[c]);
        }
        run.wcss = 0.0;
        for (std::size_t o = 0; o < n; ++o)
            run.wcss += detail::sq_dist(X[o], run.centroids[static_cast<std::size_t>(run.labels[o])]);
        runs[restart] = std::move(run);
    });

    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r)
        if (runs[r].wcss < runs[best].wcss) best = r;

    KMeansResult out;
    out.partition.labels = runs[best].labels;
    out.partition.k = static_cast<int>(k);
    out.partition = relabel_canonical(out.partition);
    // Reorder centroids to match canonical labels.
    out.centroids.assign(k, Profile(dim, 0.0));
    std::vector<char> filled(k, 0);
    for (std::size_t o = 0; o < n; ++o) {
        const auto label = static_cast<std::size_t>(out.partition.labels[o]);
        if (!filled[label]) {
            out.centroids[label] = runs[best].centroids[static_cast<std::size_t>(runs[best].labels[o])];
            filled[label] = 1;
        }
    }
    out.wcss = runs[best].wcss;
    return out;
}

/// Medoid of each cluster: the member minimizing summed dissimilarity to its
/// co-members, ties to the lowest object index. Returns per-cluster member
/// lists alongside the medoid.
struct ClusterSummary {
    std::vector<std::size_t> members;
    std::size_t medoid = 0;  // object index; meaningful for medoid extraction
    Profile mean;            // filled by mean extraction
};

inline std::vector<ClusterSummary> extract_medoid_prototypes(const DissimilarityMatrix& D, const Partition& p) {
    const auto sizes = cluster_sizes(p);
    std::vector<ClusterSummary> out(static_cast<std::size_t>(p.k));
    for (std::size_t c = 0; c < out.size(); ++c) out[c].members.reserve(sizes[c]);
    for (std::size_t o = 0; o < p.labels.size(); ++o)
        out[static_cast<std::size_t>(p.labels[o])].members.push_back(o);
    for (auto& cluster : out) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t medoid = cluster.members.front();
        for (std::size_t cand : cluster.members) {
            double total = 0.0;
            for (std::size_t other : cluster.members) total += D(cand, other);
            if (total < best) {
                best = total;
                medoid = cand;
            }
        }
        cluster.medoid = medoid;
    }
    return out;
}

inline std::vector<ClusterSummary> extract_mean_prototypes(const std::vector<Profile>& X, const Partition& p) {
    std::vector<ClusterSummary> out(static_cast<std::size_t>(p.k));
    for (std::size_t o = 0; o < p.labels.size(); ++o)
        out[static_cast<std::size_t>(p.labels[o])].members.push_back(o);
    const std::size_t dim = X.empty() ? 0 : X[0].size();
    for (auto& cluster : out) {
        cluster.mean.assign(dim, 0.0);
        for (std::size_t member : cluster.members)
            for (std::size_t j = 0; j < dim; ++j) cluster.mean[j] += X[member][j];
        for (std::size_t j = 0; j < dim; ++j) cluster.mean[j] /= static_cast<double>(cluster.members.size());
    }
    return out;
}

}  // namespace crocs
