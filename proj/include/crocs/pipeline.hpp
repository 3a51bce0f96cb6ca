#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crocs/cluster.hpp"
#include "crocs/distance.hpp"
#include "crocs/parallel.hpp"
#include "crocs/preprocess.hpp"
#include "crocs/set_distance.hpp"
#include "crocs/types.hpp"

namespace crocs {

struct CrocsConfig {
    int k_stage1 = 15;
    int consumer_clusters = 5;  // K
    NormalizationKind normalization = NormalizationKind::MinMax;
    DistanceKind distance = DistanceKind::dtw(2);
    ClusterConfig stage1;  // algorithm/restarts/max_iterations; k is taken from k_stage1
    ClusterConfig stage2;  // k is taken from consumer_clusters
    PrototypeKind prototype_kind = PrototypeKind::Medoid;
    SetDistanceKind set_distance = SetDistanceKind::WSMD;
    std::uint64_t seed = 0;
    std::size_t threads = 0;        // 0 = process default
    bool error_on_undersized = false;  // p_i < k_stage1: throw instead of exclude
};

struct ExcludedConsumer {
    std::string consumer_id;
    std::string reason;
};

struct StageOneResult {
    std::vector<RepresentativeLoadSet> rls;  // order matches surviving input order
    std::vector<ExcludedConsumer> excluded;
};

namespace detail {

inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

}  // namespace detail

/// Stage one for a single consumer: normalize DLPs, cluster them into
/// k_stage1 groups, extract prototypes with day counts. The clustering seed
/// is derived from the consumer id (not its position) so input order never
/// changes per-consumer results.
inline RepresentativeLoadSet stage_one_single(const ConsumerRecord& record, const CrocsConfig& cfg) {
    const std::size_t p = record.day_count();
    if (p < static_cast<std::size_t>(cfg.k_stage1))
        throw std::invalid_argument("stage_one: consumer " + record.consumer_id + " has " + std::to_string(p) +
                                    " days, fewer than k = " + std::to_string(cfg.k_stage1));

    std::vector<Profile> normalized(p);
    for (std::size_t i = 0; i < p; ++i) normalized[i] = normalize_profile(record.profiles[i].values, cfg.normalization);

    ClusterConfig run_cfg = cfg.stage1;
    run_cfg.k = cfg.k_stage1;
    run_cfg.seed = cfg.seed ^ detail::fnv1a64(record.consumer_id);

    Partition partition;
    std::vector<ClusterSummary> clusters;
    const bool need_matrix =
        run_cfg.algorithm != ClusterAlgorithm::KMeans || cfg.prototype_kind == PrototypeKind::Medoid;
    DissimilarityMatrix D;
    if (need_matrix) {
        D = DissimilarityMatrix(p);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) D.set(i, j, profile_distance(normalized[i], normalized[j], cfg.distance));
    }

    switch (run_cfg.algorithm) {
        case ClusterAlgorithm::HacWard:
            partition = hac_ward(D, run_cfg.k);
            break;
        case ClusterAlgorithm::KMedoids:
            partition = k_medoids(D, run_cfg).partition;
            break;
        case ClusterAlgorithm::KMeans:
            partition = k_means(normalized, run_cfg).partition;
            break;
    }

    if (cfg.prototype_kind == PrototypeKind::Medoid) {
        clusters = extract_medoid_prototypes(D, partition);
    } else {
        clusters = extract_mean_prototypes(normalized, partition);
    }

    std::vector<Prototype> prototypes;
    prototypes.reserve(clusters.size());
    for (const auto& cluster : clusters) {
        Prototype proto;
        proto.profile = (cfg.prototype_kind == PrototypeKind::Medoid) ? normalized[cluster.medoid] : cluster.mean;
        proto.count = cluster.members.size();
        for (std::size_t member : cluster.members)
            proto.member_day_indices.push_back(record.profiles[member].day_index);
        prototypes.push_back(std::move(proto));
    }
    return make_rls(record.consumer_id, std::move(prototypes));
}

/// Stage one across consumers, parallel per consumer. Undersized consumers
/// are excluded with a report entry (or raise, per config).
inline StageOneResult stage_one(const std::vector<ConsumerRecord>& records, const CrocsConfig& cfg) {
    if (cfg.k_stage1 < 2) throw std::invalid_argument("stage_one: k_stage1 must be >= 2");
    StageOneResult result;
    std::vector<char> ok(records.size(), 0);
    std::vector<RepresentativeLoadSet> slots(records.size());
    std::vector<std::string> errors(records.size());

    parallel_for(
        records.size(),
        [&](std::size_t i) {
            if (records[i].day_count() < static_cast<std::size_t>(cfg.k_stage1)) {
                errors[i] = "day count " + std::to_string(records[i].day_count()) + " below k_stage1 " +
                            std::to_string(cfg.k_stage1);
                return;
            }
            slots[i] = stage_one_single(records[i], cfg);
            ok[i] = 1;
        },
        cfg.threads);

    for (std::size_t i = 0; i < records.size(); ++i) {
        if (ok[i]) {
            result.rls.push_back(std::move(slots[i]));
        } else {
            if (cfg.error_on_undersized)
                throw std::invalid_argument("stage_one: consumer " + records[i].consumer_id + ": " + errors[i]);
            result.excluded.push_back({records[i].consumer_id, errors[i]});
        }
    }
    return result;
}

struct StageTwoResult {
    Partition partition;
    SetMatrixResult set_matrix;
};

/// Stage two: pairwise set-distance matrix over the RLSs, then one clustering
/// of consumers into K groups.
inline StageTwoResult stage_two(const std::vector<RepresentativeLoadSet>& all_rls, const CrocsConfig& cfg) {
    if (cfg.consumer_clusters < 2) throw std::invalid_argument("stage_two: K must be >= 2");
    if (all_rls.size() < static_cast<std::size_t>(cfg.consumer_clusters))
        throw std::invalid_argument("stage_two: fewer consumers (" + std::to_string(all_rls.size()) +
                                    ") than K = " + std::to_string(cfg.consumer_clusters));

    StageTwoResult result;
    result.set_matrix = pairwise_set_matrix(all_rls, cfg.set_distance, cfg.distance, cfg.threads);

    ClusterConfig run_cfg = cfg.stage2;
    run_cfg.k = cfg.consumer_clusters;
    run_cfg.seed = cfg.seed ^ 0x73746167652d3277ULL;
    switch (run_cfg.algorithm) {
        case ClusterAlgorithm::HacWard:
            result.partition = hac_ward(result.set_matrix.matrix, run_cfg.k);
            break;
        case ClusterAlgorithm::KMedoids:
            result.partition = k_medoids(result.set_matrix.matrix, run_cfg).partition;
            break;
        case ClusterAlgorithm::KMeans:
            throw std::invalid_argument("stage_two: k-means needs vector input; use HacWard or KMedoids");
    }
    return result;
}

struct StageTimings {
    double stage_one_seconds = 0.0;
    double stage_two_matrix_seconds = 0.0;
    double stage_two_cluster_seconds = 0.0;
};

struct CrocsResult {
    std::vector<RepresentativeLoadSet> rls;  // per surviving consumer
    Partition consumer_partition;
    SetMatrixResult set_matrix;
    std::vector<ExcludedConsumer> excluded;
    StageTimings timings;
};

/// The full two-stage pipeline over preprocessed consumer records.
inline CrocsResult run_crocs(const std::vector<ConsumerRecord>& records, const CrocsConfig& cfg) {
    if (records.empty()) throw std::invalid_argument("run_crocs: empty input");
    using clock = std::chrono::steady_clock;
    CrocsResult result;

    const auto t0 = clock::now();
    StageOneResult first = stage_one(records, cfg);
    result.rls = std::move(first.rls);
    result.excluded = std::move(first.excluded);
    const auto t1 = clock::now();

    // Split stage two so matrix and clustering time are visible separately.
    StageTwoResult second;
    second.set_matrix = pairwise_set_matrix(result.rls, cfg.set_distance, cfg.distance, cfg.threads);
    const auto t2 = clock::now();
    {
        if (cfg.consumer_clusters < 2) throw std::invalid_argument("stage_two: K must be >= 2");
        if (result.rls.size() < static_cast<std::size_t>(cfg.consumer_clusters))
            throw std::invalid_argument("stage_two: fewer consumers than K");
        ClusterConfig run_cfg = cfg.stage2;
        run_cfg.k = cfg.consumer_clusters;
        run_cfg.seed = cfg.seed ^ 0x73746167652d3277ULL;
        if (run_cfg.algorithm == ClusterAlgorithm::HacWard) {
            second.partition = hac_ward(second.set_matrix.matrix, run_cfg.k);
        } else if (run_cfg.algorithm == ClusterAlgorithm::KMedoids) {
            second.partition = k_medoids(second.set_matrix.matrix, run_cfg).partition;
        } else {
            throw std::invalid_argument("stage_two: k-means needs vector input; use HacWard or KMedoids");
        }
    }
    const auto t3 = clock::now();

    result.consumer_partition = std::move(second.partition);
    result.set_matrix = std::move(second.set_matrix);
    result.timings.stage_one_seconds = std::chrono::duration<double>(t1 - t0).count();
    result.timings.stage_two_matrix_seconds = std::chrono::duration<double>(t2 - t1).count();
    result.timings.stage_two_cluster_seconds = std::chrono::duration<double>(t3 - t2).count();
    return result;
}

}  // namespace crocs
