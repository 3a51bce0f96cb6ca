#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace crocs {

using Profile = std::vector<double>;

/// One day of phi equally spaced consumption readings for one consumer.
struct DailyLoadProfile {
    std::string consumer_id;
    std::int64_t day_index = 0;  // ordinal, not a calendar date
    Profile values;
};

/// A consumer's full set of daily profiles (the set S_i).
struct ConsumerRecord {
    std::string consumer_id;
    std::vector<DailyLoadProfile> profiles;

    std::size_t day_count() const { return profiles.size(); }
};

/// One prototype of a representative load set: a profile plus the days it stands for.
struct Prototype {
    Profile profile;
    std::size_t count = 0;  // n_i^j, number of member DLPs
    std::vector<std::int64_t> member_day_indices;
};

/// Per-consumer stage-one output: prototype profiles with day counts.
/// Prototypes are kept in descending-count order (ties by first member day)
/// so serialized RLSs are stable across runs.
struct RepresentativeLoadSet {
    std::string consumer_id;
    std::vector<Prototype> prototypes;
    std::size_t total_days = 0;  // p

    std::size_t size() const { return prototypes.size(); }
};

/// Orders prototypes canonically and fills total_days; throws if counts are inconsistent.
inline RepresentativeLoadSet make_rls(std::string consumer_id, std::vector<Prototype> prototypes) {
    for (const auto& proto : prototypes) {
        if (proto.count == 0) throw std::invalid_argument("rls: prototype with zero count");
        if (proto.count != proto.member_day_indices.size())
            throw std::invalid_argument("rls: count does not match member day list");
    }
    std::stable_sort(prototypes.begin(), prototypes.end(), [](const Prototype& a, const Prototype& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.member_day_indices.front() < b.member_day_indices.front();
    });
    RepresentativeLoadSet rls;
    rls.consumer_id = std::move(consumer_id);
    rls.prototypes = std::move(prototypes);
    rls.total_days = 0;
    for (const auto& proto : rls.prototypes) rls.total_days += proto.count;
    return rls;
}

/// Hard assignment of N objects to k non-empty clusters.
struct Partition {
    std::vector<int> labels;
    int k = 0;

    std::size_t size() const { return labels.size(); }
};

/// Validates the hard-partition invariants: labels in [0,k), every cluster non-empty.
inline void validate_partition(const Partition& p) {
    if (p.k <= 0) throw std::invalid_argument("partition: k must be positive");
    std::vector<char> seen(static_cast<std::size_t>(p.k), 0);
    for (int label : p.labels) {
        if (label < 0 || label >= p.k) throw std::invalid_argument("partition: label out of range");
        seen[static_cast<std::size_t>(label)] = 1;
    }
    for (char s : seen)
        if (!s) throw std::invalid_argument("partition: empty cluster");
}

/// Renumbers clusters by order of first appearance. Idempotent, co-membership preserving.
inline Partition relabel_canonical(const Partition& p) {
    Partition out;
    out.labels.resize(p.labels.size());
    std::vector<int> remap(static_cast<std::size_t>(p.k), -1);
    int next = 0;
    for (std::size_t i = 0; i < p.labels.size(); ++i) {
        int& slot = remap[static_cast<std::size_t>(p.labels[i])];
        if (slot < 0) slot = next++;
        out.labels[i] = slot;
    }
    out.k = next;
    return out;
}

/// Size of each cluster, indexed by cluster label. Sums to N.
inline std::vector<std::size_t> cluster_sizes(const Partition& p) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(p.k), 0);
    for (int label : p.labels) sizes[static_cast<std::size_t>(label)]++;
    return sizes;
}

/// Symmetric dissimilarity matrix with zero diagonal, dense row-major storage.
class DissimilarityMatrix {
public:
    DissimilarityMatrix() = default;
    explicit DissimilarityMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    std::size_t size() const { return n_; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

    /// Sets both (i,j) and (j,i).
    void set(std::size_t i, std::size_t j, double value) {
        data_[i * n_ + j] = value;
        data_[j * n_ + i] = value;
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

}  // namespace crocs
