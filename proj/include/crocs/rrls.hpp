#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crocs/distance.hpp"
#include "crocs/rng.hpp"
#include "crocs/set_distance.hpp"
#include "crocs/types.hpp"

namespace crocs::rrls {

/// Vertex-weighted, edge-weighted directed graph induced by the WSMD pairings
/// within one consumer cluster. Vertex weight is the prototype's day count;
/// edge weight is the similarity 1/d of a nearest-prototype pairing.
struct PrototypeGraph {
    struct Vertex {
        std::size_t consumer;   // index into the cluster member list
        std::size_t prototype;  // prototype index within that consumer's RLS
        double weight;          // n days represented
        Profile profile;
    };
    struct Edge {
        std::size_t source;
        std::size_t target;
        double similarity;
    };

    std::vector<Vertex> vertices;
    std::vector<Edge> edges;  // directed, one per WSMD source prototype per partner
    double density = 0.0;     // rho: edge weight per unit of cross-consumer weight product
    std::size_t cluster_consumer_count = 0;
};

/// Similarity cap for zero-distance pairings; identical prototypes dominate
/// the optimizer instead of breaking it.
constexpr double kZeroDistanceEpsilon = 1e-9;

/// Builds the prototype graph for the consumer cluster whose (global) member
/// indices are given, from stage-two WSMD pairings.
inline PrototypeGraph build_prototype_graph(const std::vector<RepresentativeLoadSet>& all_rls,
                                            const SetMatrixResult& set_matrix,
                                            const std::vector<std::size_t>& cluster_members) {
    PrototypeGraph g;
    g.cluster_consumer_count = cluster_members.size();

    std::vector<std::size_t> vertex_offset(cluster_members.size(), 0);
    for (std::size_t c = 0; c < cluster_members.size(); ++c) {
        vertex_offset[c] = g.vertices.size();
        const auto& rls = all_rls[cluster_members[c]];
        for (std::size_t p = 0; p < rls.size(); ++p)
            g.vertices.push_back({c, p, static_cast<double>(rls.prototypes[p].count), rls.prototypes[p].profile});
    }

    double total_weight = 0.0;
    for (std::size_t a = 0; a < cluster_members.size(); ++a) {
        for (std::size_t b = a + 1; b < cluster_members.size(); ++b) {
            const std::size_t gi = cluster_members[a], gj = cluster_members[b];
            const WsmdPairing& pairing = set_matrix.pairing(gi, gj);
            // pairing.i_to_j always runs from the lower global index.
            const std::size_t lo_member = (gi < gj) ? a : b;
            const std::size_t hi_member = (gi < gj) ? b : a;
            for (const auto& edge : pairing.i_to_j) {
                const double sim = 1.0 / std::max(edge.distance, kZeroDistanceEpsilon);
                g.edges.push_back({vertex_offset[lo_member] + edge.source_prototype,
                                   vertex_offset[hi_member] + edge.target_prototype, sim});
                total_weight += sim;
            }
            for (const auto& edge : pairing.j_to_i) {
                const double sim = 1.0 / std::max(edge.distance, kZeroDistanceEpsilon);
                g.edges.push_back({vertex_offset[hi_member] + edge.source_prototype,
                                   vertex_offset[lo_member] + edge.target_prototype, sim});
                total_weight += sim;
            }
        }
    }

    // Density per unit of vertex-weight product over ordered cross-consumer
    // vertex pairs, so the null term gamma*rho*s_u*s_v is scale-free.
    std::vector<double> per_consumer_weight(cluster_members.size(), 0.0);
    double all_weight = 0.0;
    for (const auto& v : g.vertices) {
        per_consumer_weight[v.consumer] += v.weight;
        all_weight += v.weight;
    }
    double same_consumer = 0.0;
    for (double w : per_consumer_weight) same_consumer += w * w;
    const double cross_weight_product = all_weight * all_weight - same_consumer;
    g.density = (cross_weight_product > 0.0) ? total_weight / cross_weight_product : 0.0;
    return g;
}

struct CommunityConfig {
    double gamma = 0.02;
    double gamma_step = 0.01;
    double gamma_max = 5.0;
    std::optional<std::size_t> target_communities;
    int restarts = 8;  // independent seeded runs; best quality wins
    std::uint64_t seed = 0;
};

struct CommunityResult {
    Partition vertex_partition;
    double gamma_used = 0.0;
    double quality = 0.0;
};

/// RBER quality of a vertex partition: sum over intra-community ordered pairs
/// (u != v) of [w_uv - gamma*rho*s_u*s_v], with w_uv the symmetrized edge
/// weight (both directions summed, 0 if absent).
inline double rber_quality(const PrototypeGraph& g, const Partition& partition, double gamma) {
    const double penalty = gamma * g.density;
    double q = 0.0;
    // Each directed edge contributes once to (s,t) and once to (t,s) after
    // symmetrization, so summing directed weights twice gives the ordered total.
    for (const auto& e : g.edges)
        if (partition.labels[e.source] == partition.labels[e.target] && e.source != e.target)
            q += 2.0 * e.similarity;
    std::vector<double> sum_s(static_cast<std::size_t>(partition.k), 0.0);
    std::vector<double> sum_s2(static_cast<std::size_t>(partition.k), 0.0);
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
        const auto c = static_cast<std::size_t>(partition.labels[v]);
        sum_s[c] += g.vertices[v].weight;
        sum_s2[c] += g.vertices[v].weight * g.vertices[v].weight;
    }
    for (std::size_t c = 0; c < sum_s.size(); ++c) q -= penalty * (sum_s[c] * sum_s[c] - sum_s2[c]);
    return q;
}

namespace detail {

/// Working graph for the Leiden-style optimizer; nodes may be aggregates.
struct WorkGraph {
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency;  // symmetrized, no self entries
    std::vector<double> size;     // sum of constituent vertex weights
    std::vector<double> size_sq;  // sum of constituent squared vertex weights
    std::size_t n() const { return adjacency.size(); }
};

inline WorkGraph initial_work_graph(const PrototypeGraph& g) {
    WorkGraph w;
    w.adjacency.assign(g.vertices.size(), {});
    w.size.resize(g.vertices.size());
    w.size_sq.resize(g.vertices.size());
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
        w.size[v] = g.vertices[v].weight;
        w.size_sq[v] = g.vertices[v].weight * g.vertices[v].weight;
    }
    std::vector<std::map<std::size_t, double>> acc(g.vertices.size());
    for (const auto& e : g.edges) {
        if (e.source == e.target) continue;
        acc[e.source][e.target] += e.similarity;
        acc[e.target][e.source] += e.similarity;
    }
    for (std::size_t v = 0; v < g.vertices.size(); ++v)
        for (const auto& [u, weight] : acc[v]) w.adjacency[v].push_back({u, weight});
    return w;
}

/// One queue-driven local-move pass. Labels stay within [0, n). Gains are in
/// unordered-pair units; the ordered-pair quality change is twice that.
inline double local_move(const WorkGraph& g, std::vector<int>& community, double penalty, Rng& rng) {
    const std::size_t n = g.n();
    std::vector<double> community_size(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) community_size[static_cast<std::size_t>(community[v])] += g.size[v];

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    std::vector<char> queued(n, 1);
    std::vector<std::size_t> queue(order.begin(), order.end());
    std::size_t head = 0;
    double total_gain = 0.0;

    std::vector<double> weight_to(n, 0.0);
    while (head < queue.size()) {
        const std::size_t x = queue[head++];
        queued[x] = 0;
        const int from = community[x];

        std::vector<int> candidates;
        for (const auto& [u, wxu] : g.adjacency[x]) {
            const int c = community[u];
            if (c != from && weight_to[static_cast<std::size_t>(c)] == 0.0) candidates.push_back(c);
            weight_to[static_cast<std::size_t>(c)] += wxu;
        }

        // Tie of x to its own community, which a departure forfeits.
        const double own = weight_to[static_cast<std::size_t>(from)] -
                           penalty * g.size[x] * (community_size[static_cast<std::size_t>(from)] - g.size[x]);
        int best = from;
        double best_gain = 0.0;
        for (int c : candidates) {
            const double gain = weight_to[static_cast<std::size_t>(c)] -
                                penalty * g.size[x] * community_size[static_cast<std::size_t>(c)] - own;
            if (gain > best_gain + 1e-12 || (gain > 1e-12 && gain > best_gain - 1e-12 && c < best)) {
                best = c;
                best_gain = gain;
            }
        }
        // Leaving for an empty community pays when the own-community tie is negative.
        if (-own > best_gain + 1e-12 && community_size[static_cast<std::size_t>(from)] > g.size[x]) {
            for (std::size_t c = 0; c < n; ++c) {
                if (community_size[c] == 0.0) {
                    best = static_cast<int>(c);
                    best_gain = -own;
                    break;
                }
            }
        }

        for (const auto& [u, wxu] : g.adjacency[x]) weight_to[static_cast<std::size_t>(community[u])] = 0.0;
        weight_to[static_cast<std::size_t>(from)] = 0.0;

        if (best != from) {
            community_size[static_cast<std::size_t>(from)] -= g.size[x];
            community_size[static_cast<std::size_t>(best)] += g.size[x];
            community[x] = best;
            total_gain += best_gain;
            for (const auto& [u, wxu] : g.adjacency[x]) {
                if (!queued[u] && community[u] != best) {
                    queued[u] = 1;
                    queue.push_back(u);
                }
            }
        }
    }
    return total_gain;
}

/// Leiden refinement: within each local-move community, re-merge from
/// singletons with positive gain only. Refined labels are node ids.
inline std::vector<int> refine(const WorkGraph& g, const std::vector<int>& community, double penalty, Rng& rng) {
    const std::size_t n = g.n();
    std::vector<int> refined(n);
    std::iota(refined.begin(), refined.end(), 0);
    std::vector<double> refined_size(g.size);
    std::vector<char> is_singleton(n, 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    std::vector<double> weight_to(n, 0.0);
    for (const std::size_t x : order) {
        if (!is_singleton[x]) continue;
        std::vector<int> candidates;
        for (const auto& [u, wxu] : g.adjacency[x]) {
            if (community[u] != community[x]) continue;
            const int c = refined[u];
            if (c == refined[x]) continue;
            if (weight_to[static_cast<std::size_t>(c)] == 0.0) candidates.push_back(c);
            weight_to[static_cast<std::size_t>(c)] += wxu;
        }
        int best = refined[x];
        double best_gain = 0.0;
        for (int c : candidates) {
            const double gain = weight_to[static_cast<std::size_t>(c)] -
                                penalty * g.size[x] * refined_size[static_cast<std::size_t>(c)];
            if (gain > best_gain + 1e-12 || (gain > 1e-12 && gain > best_gain - 1e-12 && c < best)) {
                best = c;
                best_gain = gain;
            }
        }
        for (int c : candidates) weight_to[static_cast<std::size_t>(c)] = 0.0;
        if (best != refined[x]) {
            refined_size[static_cast<std::size_t>(best)] += g.size[x];
            refined_size[static_cast<std::size_t>(refined[x])] -= g.size[x];
            refined[x] = best;
            is_singleton[x] = 0;
            is_singleton[static_cast<std::size_t>(best)] = 0;  // label owner node keeps its id
        }
    }
    return refined;
}

/// Collapses refined communities into aggregate nodes. On return `community`
/// holds, per aggregate node, its (compacted) local-move community, and
/// `refined_compact` maps old node -> aggregate node.
inline WorkGraph aggregate(const WorkGraph& g, const std::vector<int>& refined, std::vector<int>& community,
                           std::vector<int>& refined_compact) {
    const std::size_t n = g.n();
    std::vector<int> remap(n, -1);
    int next = 0;
    refined_compact.assign(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
        int& slot = remap[static_cast<std::size_t>(refined[v])];
        if (slot < 0) slot = next++;
        refined_compact[v] = slot;
    }

    WorkGraph out;
    out.adjacency.assign(static_cast<std::size_t>(next), {});
    out.size.assign(static_cast<std::size_t>(next), 0.0);
    out.size_sq.assign(static_cast<std::size_t>(next), 0.0);

    std::vector<int> agg_community(static_cast<std::size_t>(next), 0);
    for (std::size_t v = 0; v < n; ++v) {
        const auto a = static_cast<std::size_t>(refined_compact[v]);
        out.size[a] += g.size[v];
        out.size_sq[a] += g.size_sq[v];
        agg_community[a] = community[v];
    }
    // Compact the community labels so they stay within [0, next).
    {
        std::vector<int> cmap;
        cmap.assign(n, -1);
        int cnext = 0;
        for (auto& c : agg_community) {
            int& slot = cmap[static_cast<std::size_t>(c)];
            if (slot < 0) slot = cnext++;
            c = slot;
        }
    }

    std::vector<std::map<std::size_t, double>> acc(static_cast<std::size_t>(next));
    for (std::size_t v = 0; v < n; ++v)
        for (const auto& [u, w] : g.adjacency[v]) {
            const auto a = static_cast<std::size_t>(refined_compact[v]);
            const auto b = static_cast<std::size_t>(refined_compact[u]);
            if (a != b) acc[a][b] += w;  // both directions visited -> symmetric totals
        }
    for (std::size_t a = 0; a < acc.size(); ++a)
        for (const auto& [b, w] : acc[a]) out.adjacency[a].push_back({b, w});

    community = std::move(agg_community);
    return out;
}

}  // namespace detail

/// Leiden-style local-move-and-refine optimization of the RBER quality. When
/// cfg.target_communities is set, gamma is swept upward by gamma_step from
/// gamma until at least that many communities emerge (first hit wins).
inline CommunityResult detect_communities(const PrototypeGraph& g, const CommunityConfig& cfg) {
    if (g.vertices.empty()) throw std::invalid_argument("detect_communities: empty graph");
    if (cfg.gamma <= 0.0) throw std::invalid_argument("detect_communities: gamma must be positive");

    const detail::WorkGraph base_graph = detail::initial_work_graph(g);

    auto run_once = [&](double gamma, std::uint64_t stream) {
        const double penalty = gamma * g.density;
        detail::WorkGraph work = base_graph;
        std::vector<int> community(work.n());
        std::iota(community.begin(), community.end(), 0);
        std::vector<int> vertex_node(g.vertices.size());
        std::iota(vertex_node.begin(), vertex_node.end(), 0);

        Rng rng = Rng::substream(cfg.seed, 0x6c656964656eULL + stream);
        for (int level = 0; level < 64; ++level) {
            detail::local_move(work, community, penalty, rng);
            if (work.n() <= 1) break;
            const std::vector<int> refined = detail::refine(work, community, penalty, rng);
            std::vector<int> refined_compact;
            detail::WorkGraph next = detail::aggregate(work, refined, community, refined_compact);
            if (next.n() == work.n()) break;  // no coarsening left: converged
            for (auto& vn : vertex_node) vn = refined_compact[static_cast<std::size_t>(vn)];
            work = std::move(next);
        }

        Partition p;
        p.labels.resize(g.vertices.size());
        int max_label = 0;
        for (std::size_t v = 0; v < g.vertices.size(); ++v) {
            p.labels[v] = community[static_cast<std::size_t>(vertex_node[v])];
            max_label = std::max(max_label, p.labels[v]);
        }
        p.k = max_label + 1;
        p = relabel_canonical(p);

        CommunityResult result;
        result.vertex_partition = std::move(p);
        result.gamma_used = gamma;
        result.quality = rber_quality(g, result.vertex_partition, gamma);
        return result;
    };

    auto run_at_gamma = [&](double gamma) {
        CommunityResult best = run_once(gamma, 0);
        for (int restart = 1; restart < std::max(1, cfg.restarts); ++restart) {
            CommunityResult candidate = run_once(gamma, static_cast<std::uint64_t>(restart));
            if (candidate.quality > best.quality + 1e-12) best = std::move(candidate);
        }
        return best;
    };

    if (!cfg.target_communities) return run_at_gamma(cfg.gamma);

    std::size_t last_count = 0;
    for (std::size_t step = 0;; ++step) {
        const double gamma = cfg.gamma + static_cast<double>(step) * cfg.gamma_step;
        if (gamma > cfg.gamma_max + 1e-12) break;
        CommunityResult result = run_at_gamma(gamma);
        last_count = static_cast<std::size_t>(result.vertex_partition.k);
        if (last_count >= *cfg.target_communities) return result;
    }
    throw std::runtime_error("detect_communities: target " + std::to_string(*cfg.target_communities) +
                             " communities unreachable by gamma_max " + std::to_string(cfg.gamma_max) +
                             "; last count " + std::to_string(last_count));
}

/// One hyperprototype per community with coverage statistics.
struct RefinedRls {
    struct Community {
        Profile hyperprototype_medoid;
        Profile hyperprototype_mean;
        double consumer_coverage = 0.0;  // fraction of cluster consumers present
        double day_coverage = 0.0;       // member vertex weight / total days
        std::vector<std::size_t> vertex_ids;
        bool major = false;
    };
    std::vector<Community> communities;  // descending day coverage
    double major_threshold = 0.03;
};

inline RefinedRls extract_rrls(const PrototypeGraph& g, const Partition& communities, const DistanceKind& d,
                               double major_day_coverage_threshold = 0.03) {
    if (communities.labels.size() != g.vertices.size())
        throw std::invalid_argument("extract_rrls: partition does not match graph");

    double total_days = 0.0;
    for (const auto& v : g.vertices) total_days += v.weight;

    RefinedRls out;
    out.major_threshold = major_day_coverage_threshold;
    out.communities.resize(static_cast<std::size_t>(communities.k));
    for (std::size_t v = 0; v < g.vertices.size(); ++v)
        out.communities[static_cast<std::size_t>(communities.labels[v])].vertex_ids.push_back(v);

    for (auto& community : out.communities) {
        double weight_total = 0.0;
        std::vector<char> consumer_seen(g.cluster_consumer_count, 0);
        const std::size_t dim = g.vertices[community.vertex_ids.front()].profile.size();
        community.hyperprototype_mean.assign(dim, 0.0);
        for (std::size_t v : community.vertex_ids) {
            const auto& vertex = g.vertices[v];
            weight_total += vertex.weight;
            consumer_seen[vertex.consumer] = 1;
            for (std::size_t t = 0; t < dim; ++t)
                community.hyperprototype_mean[t] += vertex.weight * vertex.profile[t];
        }
        for (std::size_t t = 0; t < dim; ++t) community.hyperprototype_mean[t] /= weight_total;

        // Weighted medoid: member minimizing the vertex-weight-weighted sum of
        // distances to co-members (ties to the lowest vertex id).
        double best = std::numeric_limits<double>::infinity();
        std::size_t medoid = community.vertex_ids.front();
        for (std::size_t cand : community.vertex_ids) {
            double total = 0.0;
            for (std::size_t other : community.vertex_ids)
                total +=
                    g.vertices[other].weight * profile_distance(g.vertices[cand].profile, g.vertices[other].profile, d);
            if (total < best) {
                best = total;
                medoid = cand;
            }
        }
        community.hyperprototype_medoid = g.vertices[medoid].profile;

        std::size_t consumers = 0;
        for (char seen : consumer_seen) consumers += seen;
        community.consumer_coverage = static_cast<double>(consumers) / static_cast<double>(g.cluster_consumer_count);
        community.day_coverage = weight_total / total_days;
    }

    std::stable_sort(out.communities.begin(), out.communities.end(),
                     [](const RefinedRls::Community& a, const RefinedRls::Community& b) {
                         if (a.day_coverage != b.day_coverage) return a.day_coverage > b.day_coverage;
                         return a.vertex_ids.front() < b.vertex_ids.front();
                     });
    for (auto& community : out.communities) community.major = community.day_coverage >= major_day_coverage_threshold;
    return out;
}

}  // namespace crocs::rrls
