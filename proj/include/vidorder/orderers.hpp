#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace vidorder {

/// Outcome of one ordering algorithm on one video set.
struct OrderResult {
    VideoList list;
    DelayReport report;
    std::string algorithm;
    double wall_time_s = 0.0;
    bool optimal = false;       // proven optimal (exact solver, within budget)
    std::uint64_t nodes = 0;    // search nodes expanded (exact solver)
};

namespace detail {

class StopWatch {
public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline OrderResult finish_result(const std::vector<Video>& set, const BucketConfig& bucket,
                                 VideoList list, std::string algorithm, const StopWatch& sw) {
    OrderResult r;
    r.report = evaluate_list(set, list, bucket);
    r.list = std::move(list);
    r.algorithm = std::move(algorithm);
    r.wall_time_s = sw.seconds();
    return r;
}

/// Startup delays along a partial sequence (a prefix being built, not yet a
/// full permutation), following the same token recursion as evaluate_list.
inline std::vector<double> prefix_delays(const std::vector<Video>& set, const VideoList& seq,
                                         const BucketConfig& bucket) {
    std::vector<double> delays;
    delays.reserve(seq.size());
    double tokens = bucket.initial_tokens_bits;
    for (std::size_t idx : seq) {
        const Video& v = set[idx];
        const double d = startup_delay(v.initial_segment_bits, tokens, bucket);
        delays.push_back(d);
        tokens = next_tokens(v, tokens, d, bucket);
    }
    return delays;
}

}  // namespace detail

/// Uniformly random order (seeded Fisher-Yates).
inline OrderResult order_rand(const std::vector<Video>& set, const BucketConfig& bucket,
                              std::uint64_t seed) {
    detail::StopWatch sw;
    if (set.empty()) throw std::domain_error("order_rand: empty set");
    VideoList list(set.size());
    std::iota(list.begin(), list.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(list);
    return detail::finish_result(set, bucket, std::move(list), "rand", sw);
}

/// Interleaved order: sort by viewing time ascending (ties by index), then
/// emit alternately the shortest and the longest watch remaining, so every
/// briefly watched video is followed by a long one.
inline OrderResult order_intl(const std::vector<Video>& set, const BucketConfig& bucket) {
    detail::StopWatch sw;
    if (set.empty()) throw std::domain_error("order_intl: empty set");
    VideoList by_watch(set.size());
    std::iota(by_watch.begin(), by_watch.end(), std::size_t{0});
    std::sort(by_watch.begin(), by_watch.end(), [&](std::size_t a, std::size_t b) {
        if (set[a].viewing_time_s != set[b].viewing_time_s) {
            return set[a].viewing_time_s < set[b].viewing_time_s;
        }
        return a < b;
    });
    VideoList list;
    list.reserve(set.size());
    std::size_t lo = 0;
    std::size_t hi = set.size() - 1;
    for (bool take_short = true; lo <= hi && hi < set.size(); take_short = !take_short) {
        if (take_short) {
            list.push_back(by_watch[lo++]);
        } else {
            list.push_back(by_watch[hi--]);
        }
    }
    return detail::finish_result(set, bucket, std::move(list), "intl", sw);
}

/// Greedy gain-aware order. Negative-gain videos (net token increment below
/// the required start level) are laid out first in ascending increment order;
/// positive-gain videos are then inserted one by one, each just before the
/// last video of the longest extra-delay-free prefix. Placed there, the
/// inserted video still bursts cleanly and its viewing time refills the
/// bucket before the position where it would otherwise have run dry.
inline OrderResult order_grdy(const std::vector<Video>& set, const BucketConfig& bucket) {
    detail::StopWatch sw;
    if (set.empty()) throw std::domain_error("order_grdy: empty set");
    for (const Video& v : set) v.validate();
    bucket.validate();

    std::vector<std::size_t> negative;
    std::vector<std::size_t> positive;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (gain_stats(set[i], bucket).is_positive_gain) {
            positive.push_back(i);
        } else {
            negative.push_back(i);
        }
    }
    auto by_increment = [&](std::size_t a, std::size_t b) {
        const double da = gain_stats(set[a], bucket).net_increment_bits;
        const double db = gain_stats(set[b], bucket).net_increment_bits;
        if (da != db) return da < db;
        return a < b;
    };
    std::sort(negative.begin(), negative.end(), by_increment);
    std::sort(positive.begin(), positive.end(), by_increment);

    VideoList list = negative;
    for (std::size_t p : positive) {
        if (list.empty()) {
            list.push_back(p);
            continue;
        }
        // Length of the longest prefix already free of extra delay, then
        // insert just before that prefix's final video: placed there the
        // newcomer still bursts cleanly and refills the bucket ahead of the
        // starved position. Fully clean lists append (nothing to repair);
        // a starved first position puts the newcomer at the front.
        const std::vector<double> delays = detail::prefix_delays(set, list, bucket);
        std::size_t clean = list.size();
        for (std::size_t k = 0; k < list.size(); ++k) {
            const Video& v = set[list[k]];
            const double floor = burst_floor_delay(v.initial_segment_bits, bucket);
            if (delays[k] > floor + 1e-9) {
                clean = k;
                break;
            }
        }
        const std::size_t pos = clean == list.size() ? clean : (clean == 0 ? 0 : clean - 1);
        list.insert(list.begin() + static_cast<std::ptrdiff_t>(pos), p);
    }
    return detail::finish_result(set, bucket, std::move(list), "grdy", sw);
}

/// Exact minimiser of the maximum startup delay via depth-first branch and
/// bound over prefixes. State is (chosen subset, bucket level, prefix max);
/// branches whose prefix max already reaches the incumbent are cut, and a
/// per-subset dominance table drops states that another explored state beats
/// on both bucket level and prefix max (future delays depend only on the
/// remaining subset and the level, monotonically). Within `node_budget`
/// expanded nodes the returned order is provably optimal and flagged so;
/// past the budget the best list found is returned with `optimal == false`.
inline OrderResult order_exact(const std::vector<Video>& set, const BucketConfig& bucket,
                               std::uint64_t node_budget = 10'000'000) {
    detail::StopWatch sw;
    if (set.empty()) throw std::domain_error("order_exact: empty set");
    if (set.size() > 63) throw std::invalid_argument("order_exact: set too large (max 63)");
    bucket.validate();
    for (const Video& v : set) v.validate();
    const std::size_t n = set.size();

    // Warm start from the cheap heuristics so pruning bites immediately.
    double best_val = std::numeric_limits<double>::infinity();
    VideoList best_list;
    for (const OrderResult& cand : {order_intl(set, bucket), order_grdy(set, bucket)}) {
        if (cand.report.max_delay_s < best_val) {
            best_val = cand.report.max_delay_s;
            best_list = cand.list;
        }
    }

    struct Seen {
        double tokens;
        double maxd;
    };
    std::unordered_map<std::uint64_t, std::vector<Seen>> dominance;
    constexpr std::size_t kDominanceCap = 4'000'000;
    std::size_t stored = 0;

    std::uint64_t nodes = 0;
    bool exhausted = false;
    VideoList path;
    path.reserve(n);

    auto dfs = [&](auto&& self, std::uint64_t mask, double tokens, double maxd) -> void {
        if (exhausted) return;
        if (++nodes > node_budget) {
            exhausted = true;
            return;
        }
        if (maxd >= best_val) return;
        if (path.size() == n) {
            best_val = maxd;
            best_list = path;
            return;
        }
        auto it = dominance.find(mask);
        if (it != dominance.end()) {
            for (const Seen& e : it->second) {
                if (e.tokens >= tokens && e.maxd <= maxd) return;
            }
        }
        if (stored < kDominanceCap) {
            auto& entries = (it != dominance.end()) ? it->second : dominance[mask];
            std::erase_if(entries, [&](const Seen& e) {
                const bool drop = tokens >= e.tokens && maxd <= e.maxd;
                if (drop) --stored;
                return drop;
            });
            entries.push_back({tokens, maxd});
            ++stored;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t bit = std::uint64_t{1} << i;
            if (mask & bit) continue;
            const Video& v = set[i];
            const double d = startup_delay(v.initial_segment_bits, tokens, bucket);
            const double nmax = std::max(maxd, d);
            if (nmax >= best_val) continue;
            const double ntok = next_tokens(v, tokens, d, bucket);
            path.push_back(i);
            self(self, mask | bit, ntok, nmax);
            path.pop_back();
            if (exhausted) return;
        }
    };
    dfs(dfs, 0, bucket.initial_tokens_bits, 0.0);

    OrderResult r = detail::finish_result(set, bucket, std::move(best_list), "exact", sw);
    r.optimal = !exhausted;
    r.nodes = nodes;
    return r;
}

}  // namespace vidorder
