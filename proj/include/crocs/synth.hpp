#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "crocs/distance.hpp"
#include "crocs/parallel.hpp"
#include "crocs/preprocess.hpp"
#include "crocs/rng.hpp"
#include "crocs/types.hpp"

namespace crocs::synth {

constexpr std::size_t kPhi = 48;
constexpr std::size_t kShapeCount = 20;

/// One diurnal template: 1-3 Gaussian consumption peaks over a low base.
/// Centers and widths are in half-hour intervals.
struct ShapeSpec {
    struct Peak {
        double center;
        double sigma;
        double magnitude;
    };
    double base;
    std::vector<Peak> peaks;
};

/// Instantiation noise scales, shared by all shapes.
struct NoiseScales {
    double center_jitter = 0.4;    // std of peak timing shift, intervals
    double width_jitter = 0.08;    // lognormal sigma on peak width
    double magnitude_jitter = 0.05;
    double additive = 0.02;        // per-interval Gaussian noise
};

/// The 20 fundamental cluster shapes: single peaks across the day, broad
/// plateau ("flat") variants, and double/triple peak combinations. Peak
/// centers sit on a coarse grid so no two shapes come within the DTW-2
/// warping band of each other; validate_catalog audits the separation.
inline const std::vector<ShapeSpec>& shape_catalog() {
    static const std::vector<ShapeSpec> catalog = {
        /*  0 overnight single  */ {0.08, {{4.0, 2.2, 1.0}}},
        /*  1 early-am single   */ {0.08, {{12.0, 2.2, 1.0}}},
        /*  2 morning single    */ {0.08, {{19.0, 2.2, 1.0}}},
        /*  3 midday single     */ {0.08, {{26.0, 2.2, 1.0}}},
        /*  4 afternoon single  */ {0.08, {{33.0, 2.2, 1.0}}},
        /*  5 evening single    */ {0.08, {{40.0, 2.2, 1.0}}},
        /*  6 late-night single */ {0.08, {{46.0, 2.2, 1.0}}},
        /*  7 morning plateau   */ {0.10, {{10.0, 6.5, 1.0}}},
        /*  8 day plateau       */ {0.10, {{26.0, 6.5, 1.0}}},
        /*  9 evening plateau   */ {0.10, {{38.0, 6.5, 1.0}}},
        /* 10 night+morning     */ {0.07, {{4.0, 1.8, 0.85}, {19.0, 1.8, 1.0}}},
        /* 11 night+afternoon   */ {0.07, {{4.0, 1.8, 0.85}, {33.0, 1.8, 1.0}}},
        /* 12 early-am+midday   */ {0.07, {{12.0, 1.8, 0.85}, {26.0, 1.8, 1.0}}},
        /* 13 early-am+evening  */ {0.07, {{12.0, 1.8, 0.85}, {40.0, 1.8, 1.0}}},
        /* 14 morning+afternoon */ {0.07, {{19.0, 1.8, 0.85}, {33.0, 1.8, 1.0}}},
        /* 15 midday+evening    */ {0.07, {{26.0, 1.8, 0.85}, {40.0, 1.8, 1.0}}},
        /* 16 morning+evening   */ {0.07, {{19.0, 1.8, 0.85}, {40.0, 1.8, 1.0}}},
        /* 17 night+midday      */ {0.07, {{4.0, 1.8, 0.85}, {26.0, 1.8, 1.0}}},
        /* 18 triple early      */ {0.06, {{6.0, 1.6, 0.70}, {22.0, 1.6, 0.85}, {38.0, 1.6, 1.0}}},
        /* 19 triple late       */ {0.06, {{10.0, 1.6, 0.70}, {26.0, 1.6, 0.85}, {42.0, 1.6, 1.0}}},
    };
    return catalog;
}

/// A new noisy instance of catalog shape `shape_id`, min-max normalized.
inline Profile instantiate_shape(std::size_t shape_id, Rng& rng, const NoiseScales& noise = {}) {
    const ShapeSpec& spec = shape_catalog().at(shape_id);
    Profile values(kPhi, spec.base);
    for (const auto& peak : spec.peaks) {
        const double center = peak.center + rng.normal(0.0, noise.center_jitter);
        const double sigma = peak.sigma * std::exp(rng.normal(0.0, noise.width_jitter));
        const double magnitude = peak.magnitude * (1.0 + rng.normal(0.0, noise.magnitude_jitter));
        for (std::size_t t = 0; t < kPhi; ++t) {
            const double z = (static_cast<double>(t) - center) / sigma;
            values[t] += magnitude * std::exp(-0.5 * z * z);
        }
    }
    for (auto& v : values) v = std::max(0.0, v + rng.normal(0.0, noise.additive));
    return normalize_profile(values, NormalizationKind::MinMax);
}

/// A profile deliberately outside the catalog's parameter ranges: 4-7 peaks
/// at arbitrary positions with widths and noise the catalog never uses, so
/// it matches no cluster shape with high probability and outliers do not
/// cluster among themselves.
inline Profile generate_outlier_profile(Rng& rng) {
    const std::size_t peak_count = 6 + rng.uniform_index(4);
    Profile values(kPhi, rng.uniform(0.0, 0.2));
    for (std::size_t p = 0; p < peak_count; ++p) {
        const double center = rng.uniform(0.0, 48.0);
        const double sigma = rng.uniform(0.7, 3.5);
        const double magnitude = rng.uniform(0.25, 1.0);
        for (std::size_t t = 0; t < kPhi; ++t) {
            const double z = (static_cast<double>(t) - center) / sigma;
            values[t] += magnitude * std::exp(-0.5 * z * z);
        }
    }
    for (auto& v : values) v = std::max(0.0, v + rng.normal(0.0, 0.15));
    return normalize_profile(values, NormalizationKind::MinMax);
}

/// First-order Markov chain over pattern labels.
struct TransitionProbabilityMatrix {
    std::vector<std::vector<double>> rows;  // k x k, row-stochastic
    std::vector<double> initial;

    std::size_t states() const { return rows.size(); }
};

inline void validate_tpm(const TransitionProbabilityMatrix& tpm) {
    if (tpm.rows.empty()) throw std::invalid_argument("tpm: empty");
    for (const auto& row : tpm.rows) {
        if (row.size() != tpm.rows.size()) throw std::invalid_argument("tpm: not square");
        double total = 0.0;
        for (double p : row) {
            if (p < 0.0) throw std::invalid_argument("tpm: negative entry");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("tpm: row does not sum to 1");
    }
}

/// Row-normalized transition counts; rows never visited fall back to uniform.
/// Initial distribution = empirical state frequencies.
inline TransitionProbabilityMatrix fit_tpm(const std::vector<int>& labels, std::size_t k) {
    if (labels.empty()) throw std::invalid_argument("fit_tpm: empty sequence");
    for (int label : labels)
        if (label < 0 || static_cast<std::size_t>(label) >= k)
            throw std::invalid_argument("fit_tpm: label out of range");

    TransitionProbabilityMatrix tpm;
    tpm.rows.assign(k, std::vector<double>(k, 0.0));
    tpm.initial.assign(k, 0.0);
    for (std::size_t i = 0; i + 1 < labels.size(); ++i)
        tpm.rows[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(labels[i + 1])] += 1.0;
    for (int label : labels) tpm.initial[static_cast<std::size_t>(label)] += 1.0;

    for (auto& row : tpm.rows) {
        double total = 0.0;
        for (double c : row) total += c;
        if (total <= 0.0) {
            std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(k));
        } else {
            for (double& c : row) c /= total;
        }
    }
    for (double& c : tpm.initial) c /= static_cast<double>(labels.size());
    return tpm;
}

inline std::vector<int> sample_sequence(const TransitionProbabilityMatrix& tpm, std::size_t length, Rng& rng) {
    validate_tpm(tpm);
    std::vector<int> out;
    out.reserve(length);
    if (length == 0) return out;
    int state = static_cast<int>(rng.discrete(tpm.initial));
    out.push_back(state);
    while (out.size() < length) {
        state = static_cast<int>(rng.discrete(tpm.rows[static_cast<std::size_t>(state)]));
        out.push_back(state);
    }
    return out;
}

/// A sticky reference chain fitted from its own sampled run: stands in for
/// the real-data transition matrices the protocol calls for.
inline TransitionProbabilityMatrix make_reference_tpm(std::size_t k, Rng& rng) {
    TransitionProbabilityMatrix generating;
    generating.rows.assign(k, std::vector<double>(k, 0.0));
    generating.initial.assign(k, 1.0 / static_cast<double>(k));
    for (std::size_t i = 0; i < k; ++i) {
        const double self = rng.uniform(0.30, 0.65);
        double rest = 0.0;
        std::vector<double> off(k, 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            if (j == i) continue;
            off[j] = rng.uniform(0.1, 1.0);
            rest += off[j];
        }
        for (std::size_t j = 0; j < k; ++j)
            generating.rows[i][j] = (j == i) ? self : (1.0 - self) * off[j] / rest;
    }
    const auto run = sample_sequence(generating, 4000, rng);
    return fit_tpm(run, k);
}

enum class Sequencing { UniformRandom, Markov };

struct SyntheticSpec {
    std::size_t m = 50;            // consumers
    std::size_t p = 90;            // days per consumer
    std::size_t true_consumer_clusters = 2;   // K*
    std::size_t shapes_per_cluster = 2;       // k*
    std::size_t outlier_days = 0;             // n_O per consumer
    std::size_t outlier_consumers = 0;        // N_O
    Sequencing sequencing = Sequencing::UniformRandom;
    std::uint64_t seed = 0;
};

struct GeneratedDataset {
    std::vector<ConsumerRecord> records;
    std::vector<int> truth_labels;       // cluster in [0, K*) or -1 for outlier consumers
    std::vector<char> outlier_consumer;  // flags, size m
    std::vector<std::vector<int>> day_shape_labels;  // global catalog shape id, -1 for outlier days
    std::vector<std::vector<std::size_t>> cluster_shape_subsets;  // per true cluster
    std::vector<TransitionProbabilityMatrix> cluster_tpms;        // Markov mode only

    /// Ground-truth partition restricted to non-outlier consumers, plus the
    /// surviving consumer indices (outlier consumer labels are ignored by
    /// evaluation, per protocol).
    std::pair<Partition, std::vector<std::size_t>> truth_partition() const {
        Partition p;
        std::vector<std::size_t> kept;
        for (std::size_t i = 0; i < truth_labels.size(); ++i) {
            if (outlier_consumer[i]) continue;
            kept.push_back(i);
            p.labels.push_back(truth_labels[i]);
        }
        p.k = 0;
        for (int label : p.labels) p.k = std::max(p.k, label + 1);
        p = relabel_canonical(p);
        return {p, kept};
    }
};

namespace detail {

/// Draws pairwise-distinct shape subsets: fully disjoint across true clusters
/// when K*·k* <= 20, otherwise distinct as sets.
inline std::vector<std::vector<std::size_t>> draw_cluster_subsets(std::size_t clusters, std::size_t k_star,
                                                                  Rng& rng) {
    std::vector<std::vector<std::size_t>> subsets;
    if (clusters * k_star <= kShapeCount) {
        std::vector<std::size_t> pool(kShapeCount);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        rng.shuffle(pool);
        for (std::size_t c = 0; c < clusters; ++c) {
            std::vector<std::size_t> subset(pool.begin() + static_cast<std::ptrdiff_t>(c * k_star),
                                            pool.begin() + static_cast<std::ptrdiff_t>((c + 1) * k_star));
            std::sort(subset.begin(), subset.end());
            subsets.push_back(std::move(subset));
        }
        return subsets;
    }
    std::set<std::vector<std::size_t>> seen;
    std::size_t attempts = 0;
    while (subsets.size() < clusters) {
        if (++attempts > 10000 * clusters)
            throw std::invalid_argument("synth: cannot draw distinct shape subsets (k* too close to 20)");
        std::vector<std::size_t> pool(kShapeCount);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        rng.shuffle(pool);
        std::vector<std::size_t> subset(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k_star));
        std::sort(subset.begin(), subset.end());
        if (seen.insert(subset).second) subsets.push_back(std::move(subset));
    }
    return subsets;
}

}  // namespace detail

/// Builds a fully seeded synthetic dataset: consumers multinomially allotted
/// to K* clusters with distinct shape subsets, per-day shape sequences
/// (uniform or Markov with one shared TPM per cluster), n_O outlier days per
/// consumer, and N_O outlier consumers with private subsets and chains.
inline GeneratedDataset generate_dataset(const SyntheticSpec& spec) {
    if (spec.shapes_per_cluster == 0 || spec.shapes_per_cluster > kShapeCount)
        throw std::invalid_argument("synth: k* must be in [1, 20]");
    if (spec.true_consumer_clusters == 0) throw std::invalid_argument("synth: K* must be positive");
    if (spec.outlier_days > spec.p) throw std::invalid_argument("synth: n_O exceeds days per consumer");
    if (spec.outlier_consumers > spec.m) throw std::invalid_argument("synth: N_O exceeds m");
    if (spec.m - spec.outlier_consumers < spec.true_consumer_clusters)
        throw std::invalid_argument("synth: not enough regular consumers to fill K* clusters");

    Rng master = Rng::substream(spec.seed, 0x5354525543545552ULL);
    GeneratedDataset out;
    out.cluster_shape_subsets = detail::draw_cluster_subsets(spec.true_consumer_clusters, spec.shapes_per_cluster,
                                                             master);

    // Outlier consumers: a seeded random subset of the population.
    std::vector<std::size_t> order(spec.m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    master.shuffle(order);
    out.outlier_consumer.assign(spec.m, 0);
    for (std::size_t i = 0; i < spec.outlier_consumers; ++i) out.outlier_consumer[order[i]] = 1;

    // Multinomial allotment of the regular consumers; resampled until no
    // true cluster is empty so the ground truth is a valid hard partition.
    out.truth_labels.assign(spec.m, -1);
    for (;;) {
        std::vector<std::size_t> counts(spec.true_consumer_clusters, 0);
        for (std::size_t i = 0; i < spec.m; ++i) {
            if (out.outlier_consumer[i]) continue;
            const auto c = static_cast<int>(master.uniform_index(spec.true_consumer_clusters));
            out.truth_labels[i] = c;
            counts[static_cast<std::size_t>(c)]++;
        }
        if (std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; })) break;
    }

    if (spec.sequencing == Sequencing::Markov) {
        for (std::size_t c = 0; c < spec.true_consumer_clusters; ++c)
            out.cluster_tpms.push_back(make_reference_tpm(spec.shapes_per_cluster, master));
    }

    // Private subsets/chains for outlier consumers, drawn from the master
    // stream so consumer generation stays order-independent.
    std::set<std::vector<std::size_t>> taken(out.cluster_shape_subsets.begin(), out.cluster_shape_subsets.end());
    std::vector<std::vector<std::size_t>> outlier_subsets(spec.m);
    std::vector<TransitionProbabilityMatrix> outlier_tpms(spec.m);
    for (std::size_t i = 0; i < spec.m; ++i) {
        if (!out.outlier_consumer[i]) continue;
        for (int attempt = 0; attempt < 100000; ++attempt) {
            std::vector<std::size_t> pool(kShapeCount);
            std::iota(pool.begin(), pool.end(), std::size_t{0});
            master.shuffle(pool);
            std::vector<std::size_t> subset(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(spec.shapes_per_cluster));
            std::sort(subset.begin(), subset.end());
            if (taken.insert(subset).second) {
                outlier_subsets[i] = std::move(subset);
                break;
            }
        }
        if (outlier_subsets[i].empty())
            throw std::invalid_argument("synth: cannot draw distinct subsets for outlier consumers");
        if (spec.sequencing == Sequencing::Markov)
            outlier_tpms[i] = make_reference_tpm(spec.shapes_per_cluster, master);
    }

    out.records.assign(spec.m, ConsumerRecord{});
    out.day_shape_labels.assign(spec.m, {});

    parallel_for(spec.m, [&](std::size_t i) {
        Rng rng = Rng::substream(spec.seed, 0x434f4e53554d4552ULL + i);
        const bool outlier = out.outlier_consumer[i] != 0;
        const std::vector<std::size_t>& subset =
            outlier ? outlier_subsets[i]
                    : out.cluster_shape_subsets[static_cast<std::size_t>(out.truth_labels[i])];

        std::vector<int> pattern;
        if (spec.sequencing == Sequencing::Markov) {
            const auto& tpm = outlier ? outlier_tpms[i] : out.cluster_tpms[static_cast<std::size_t>(out.truth_labels[i])];
            pattern = sample_sequence(tpm, spec.p, rng);
        } else {
            pattern.resize(spec.p);
            for (auto& s : pattern) s = static_cast<int>(rng.uniform_index(subset.size()));
        }

        // Outlier day positions: seeded draw without replacement.
        std::vector<std::size_t> days(spec.p);
        std::iota(days.begin(), days.end(), std::size_t{0});
        rng.shuffle(days);
        std::vector<char> is_outlier_day(spec.p, 0);
        for (std::size_t d = 0; d < spec.outlier_days; ++d) is_outlier_day[days[d]] = 1;

        ConsumerRecord record;
        record.consumer_id = "C" + std::to_string(1000 + i);
        std::vector<int> shape_ids(spec.p, -1);
        for (std::size_t day = 0; day < spec.p; ++day) {
            DailyLoadProfile dlp;
            dlp.consumer_id = record.consumer_id;
            dlp.day_index = static_cast<std::int64_t>(day);
            if (is_outlier_day[day]) {
                dlp.values = generate_outlier_profile(rng);
            } else {
                const std::size_t shape = subset[static_cast<std::size_t>(pattern[day])];
                shape_ids[day] = static_cast<int>(shape);
                dlp.values = instantiate_shape(shape, rng);
            }
            record.profiles.push_back(std::move(dlp));
        }
        out.records[i] = std::move(record);
        out.day_shape_labels[i] = std::move(shape_ids);
    });
    return out;
}

struct CatalogStats {
    double max_within = 0.0;  // largest DTW-2 distance between same-shape instances
    double min_cross = 0.0;   // smallest DTW-2 distance between different shapes
    bool separable() const { return max_within < min_cross; }
};

/// Separability audit of the shape catalog: samples instances per shape and
/// compares within-shape against cross-shape DTW-2 distances.
inline CatalogStats validate_catalog(std::uint64_t seed, std::size_t per_shape = 25) {
    Rng rng(seed);
    std::vector<std::vector<Profile>> instances(kShapeCount);
    for (std::size_t s = 0; s < kShapeCount; ++s)
        for (std::size_t i = 0; i < per_shape; ++i) instances[s].push_back(instantiate_shape(s, rng));

    CatalogStats stats;
    stats.min_cross = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < kShapeCount; ++s)
        for (std::size_t i = 0; i < per_shape; ++i)
            for (std::size_t j = i + 1; j < per_shape; ++j)
                stats.max_within = std::max(stats.max_within, dtw(instances[s][i], instances[s][j], 2));
    for (std::size_t s = 0; s < kShapeCount; ++s)
        for (std::size_t t = s + 1; t < kShapeCount; ++t)
            for (std::size_t i = 0; i < per_shape; ++i)
                for (std::size_t j = 0; j < per_shape; ++j)
                    stats.min_cross = std::min(stats.min_cross, dtw(instances[s][i], instances[t][j], 2));
    return stats;
}

}  // namespace crocs::synth
