#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "crocs/types.hpp"

namespace crocs {

enum class NormalizationKind { MinMax, ZNorm, None };

inline bool is_missing(double value) { return std::isnan(value); }

/// Splits a long series into consecutive day profiles of length phi.
/// Day l holds elements [l*phi, l*phi + phi).
inline std::vector<DailyLoadProfile> segment_days(const std::vector<double>& series, std::size_t phi,
                                                  const std::string& consumer_id = {}) {
    if (phi == 0) throw std::invalid_argument("segment_days: phi must be positive");
    if (series.size() % phi != 0)
        throw std::invalid_argument("segment_days: series length " + std::to_string(series.size()) +
                                    " is not a multiple of phi " + std::to_string(phi));
    const std::size_t days = series.size() / phi;
    std::vector<DailyLoadProfile> out;
    out.reserve(days);
    for (std::size_t l = 0; l < days; ++l) {
        DailyLoadProfile dlp;
        dlp.consumer_id = consumer_id;
        dlp.day_index = static_cast<std::int64_t>(l);
        dlp.values.assign(series.begin() + static_cast<std::ptrdiff_t>(l * phi),
                          series.begin() + static_cast<std::ptrdiff_t>((l + 1) * phi));
        out.push_back(std::move(dlp));
    }
    return out;
}

/// Linear interpolation of NaN gaps within one day; endpoints are held flat.
/// Requires at least one present value.
inline void interpolate_gaps(Profile& values) {
    const std::size_t n = values.size();
    std::size_t first = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_missing(values[i])) {
            first = i;
            break;
        }
    }
    if (first == n) throw std::invalid_argument("interpolate_gaps: all values missing");
    for (std::size_t i = 0; i < first; ++i) values[i] = values[first];

    std::size_t prev = first;
    for (std::size_t i = first + 1; i < n; ++i) {
        if (is_missing(values[i])) continue;
        if (i > prev + 1) {
            const double lo = values[prev];
            const double hi = values[i];
            const double span = static_cast<double>(i - prev);
            for (std::size_t j = prev + 1; j < i; ++j)
                values[j] = lo + (hi - lo) * static_cast<double>(j - prev) / span;
        }
        prev = i;
    }
    for (std::size_t i = prev + 1; i < n; ++i) values[i] = values[prev];  // trailing gap
}

/// Removes days whose missing fraction exceeds max_missing_fraction and
/// fills remaining gaps by within-day linear interpolation. Throws if no
/// day survives; callers exclude (and report) such consumers.
inline ConsumerRecord drop_incomplete_days(const ConsumerRecord& record, double max_missing_fraction) {
    ConsumerRecord out;
    out.consumer_id = record.consumer_id;
    for (const auto& day : record.profiles) {
        std::size_t missing = 0;
        for (double v : day.values)
            if (is_missing(v)) missing++;
        if (day.values.empty()) continue;
        const double fraction = static_cast<double>(missing) / static_cast<double>(day.values.size());
        if (fraction > max_missing_fraction) continue;
        DailyLoadProfile kept = day;
        if (missing > 0) interpolate_gaps(kept.values);
        out.profiles.push_back(std::move(kept));
    }
    if (out.profiles.empty())
        throw std::runtime_error("drop_incomplete_days: no usable days for consumer " + record.consumer_id);
    return out;
}

/// MinMax: (x - min) / (max - min), constant day -> all zeros.
/// ZNorm: (x - mean) / population std, constant day -> all zeros.
inline Profile normalize_profile(const Profile& values, NormalizationKind kind) {
    if (kind == NormalizationKind::None) return values;
    Profile out(values.size());
    if (values.empty()) return out;
    if (kind == NormalizationKind::MinMax) {
        double lo = values[0], hi = values[0];
        for (double v : values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double range = hi - lo;
        if (range <= 0.0) return Profile(values.size(), 0.0);
        for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / range;
        return out;
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    const double std_dev = std::sqrt(var);
    if (std_dev <= 0.0) return Profile(values.size(), 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / std_dev;
    return out;
}

inline ConsumerRecord normalize_record(const ConsumerRecord& record, NormalizationKind kind) {
    ConsumerRecord out;
    out.consumer_id = record.consumer_id;
    out.profiles.reserve(record.profiles.size());
    for (const auto& day : record.profiles) {
        DailyLoadProfile dlp = day;
        dlp.values = normalize_profile(day.values, kind);
        out.profiles.push_back(std::move(dlp));
    }
    return out;
}

}  // namespace crocs
