#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace vidorder::hardness {

/// Adversarial instance family on which ordering optimally is provably as
/// hard as number partitioning. It holds M positive-gain videos and
/// M*Y + Y + 1 negative-gain ones over a bucket with capacity Y*P that starts
/// full. Construction enforces three structural conditions:
///   I.   all videos share the initial segment size and encoding rate, and
///        P = B - mu*B/r_hat is the common required start level;
///   II.  every positive video refills the bucket completely (delta >= C);
///   III. negative increments are so balanced that every Y of them together
///        stay below P, yet any Y+1 of them exceed what any single one gives
///        (guaranteed by drawing them inside (P/(Y+1), P/Y)).
/// Under these conditions every optimal order has exactly Y negatives before
/// each positive and Y+1 at the tail, and choosing the best such grouping is
/// a balanced-partition problem over the negative increments.
struct HardInstance {
    int m_positive = 0;                  // M
    int interleave_y = 0;                // Y
    double p_bits = 0.0;                 // P
    std::vector<Video> videos;           // positives first, then negatives
    std::vector<bool> is_positive;       // per video
    std::vector<double> neg_increments;  // delta of each negative video
    BucketConfig bucket;                 // capacity Y*P, starts full
};

/// Groups of negative-video indices: one group of size Y per positive video
/// (the run preceding it) and a final group of size Y+1 (the tail run).
using Arrangement = std::vector<std::vector<std::size_t>>;

struct FormVerdict {
    double exhaustive_min_s = 0.0;       // true optimum by full enumeration
    double best_form_value_s = 0.0;      // best structured-order prediction
    std::size_t optima_count = 0;        // orders attaining the optimum
    bool optimum_matches_form = false;   // values agree within 1e-9
    bool all_optima_structured = false;  // every optimal order has the Y-runs shape
};

inline HardInstance construct_instance(int m_positive, int interleave_y, double p_bits,
                                       double token_rate_bps, double burst_rate_bps,
                                       double encoding_rate_bps, std::uint64_t seed = 0) {
    if (m_positive < 0) throw std::invalid_argument("hard instance: M must be >= 0");
    if (interleave_y < 2) throw std::invalid_argument("hard instance: Y must be >= 2");
    if (!(p_bits > 0.0)) throw std::invalid_argument("hard instance: P must be > 0");
    if (!(encoding_rate_bps > 0.0)) {
        throw std::invalid_argument("hard instance: encoding rate must be > 0");
    }
    if (!(token_rate_bps > encoding_rate_bps)) {
        throw std::invalid_argument(
            "hard instance: token rate must exceed the encoding rate (negative videos need "
            "positive net increments)");
    }
    if (!(burst_rate_bps > token_rate_bps)) {
        throw std::invalid_argument("hard instance: burst rate must exceed token rate");
    }

    HardInstance inst;
    inst.m_positive = m_positive;
    inst.interleave_y = interleave_y;
    inst.p_bits = p_bits;

    const double mu = token_rate_bps;
    const double rhat = burst_rate_bps;
    const double r = encoding_rate_bps;
    const double y = static_cast<double>(interleave_y);

    // Segment size with required start level exactly P: P = B*(1 - mu/r_hat).
    const double segment = p_bits * rhat / (rhat - mu);

    inst.bucket.capacity_bits = y * p_bits;
    inst.bucket.token_rate_bps = mu;
    inst.bucket.burst_rate_bps = rhat;
    inst.bucket.initial_tokens_bits = inst.bucket.capacity_bits;

    const std::size_t n_neg =
        static_cast<std::size_t>(m_positive) * static_cast<std::size_t>(interleave_y) +
        static_cast<std::size_t>(interleave_y) + 1;

    // Negative increments strictly inside (P/(Y+1), P/Y); the margin keeps
    // the draw away from the open endpoints.
    Rng rng(seed);
    const double lo = p_bits / (y + 1.0);
    const double hi = p_bits / y;
    const double margin = 1e-9 * (hi - lo);
    std::vector<double> watch_neg(n_neg);
    inst.neg_increments.resize(n_neg);
    double max_watch = 0.0;
    for (std::size_t i = 0; i < n_neg; ++i) {
        const double delta = rng.uniform(lo + margin, hi - margin);
        inst.neg_increments[i] = delta;
        // A negative video never reaches the data cap, so its increment is
        // mu*tau - r*tau; invert for the viewing time.
        watch_neg[i] = delta / (mu - r);
        max_watch = std::max(max_watch, watch_neg[i]);
    }

    // Shared duration: long enough that negative videos never exhaust their
    // remaining data while watched.
    const double duration = 2.0 * max_watch + segment / r + 1.0;
    const double total_rest = duration * r - segment;

    // Positive videos watch long enough to hit the data cap and still gain at
    // least the whole capacity.
    const double watch_pos =
        std::max(total_rest / r, (inst.bucket.capacity_bits + p_bits + total_rest) / mu) + 1.0;

    char buf[32];
    for (int i = 0; i < m_positive; ++i) {
        std::snprintf(buf, sizeof buf, "pos%d", i);
        inst.videos.push_back({buf, duration, r, segment, watch_pos});
        inst.is_positive.push_back(true);
    }
    for (std::size_t i = 0; i < n_neg; ++i) {
        std::snprintf(buf, sizeof buf, "neg%zu", i);
        inst.videos.push_back({buf, duration, r, segment, watch_neg[i]});
        inst.is_positive.push_back(false);
    }
    return inst;
}

namespace detail {

inline void check_arrangement(const HardInstance& inst, const Arrangement& groups) {
    const std::size_t m = static_cast<std::size_t>(inst.m_positive);
    const std::size_t y = static_cast<std::size_t>(inst.interleave_y);
    if (groups.size() != m + 1) {
        throw std::domain_error("arrangement: expected M+1 groups");
    }
    std::vector<bool> seen(inst.videos.size(), false);
    std::size_t total = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const std::size_t want = (g < m) ? y : y + 1;
        if (groups[g].size() != want) {
            throw std::domain_error("arrangement: group " + std::to_string(g) +
                                    " must hold " + std::to_string(want) + " videos");
        }
        for (std::size_t idx : groups[g]) {
            if (idx >= inst.videos.size() || inst.is_positive[idx]) {
                throw std::domain_error("arrangement: entries must be negative-video indices");
            }
            if (seen[idx]) throw std::domain_error("arrangement: duplicate video index");
            seen[idx] = true;
            ++total;
        }
    }
    if (total != inst.videos.size() - m) {
        throw std::domain_error("arrangement: must cover every negative video");
    }
}

inline double group_head_sum(const HardInstance& inst, const std::vector<std::size_t>& group,
                             std::size_t head) {
    double s = 0.0;
    const std::size_t m = static_cast<std::size_t>(inst.m_positive);
    for (std::size_t k = 0; k < head && k < group.size(); ++k) {
        s += inst.neg_increments[group[k] - m];
    }
    return s;
}

}  // namespace detail

/// Predicted maximum startup delay of the structured order induced by an
/// arrangement: the bucket starts full with Y*P tokens, each run of Y
/// negatives drains it, and the worst request is the one following the run
/// whose leading Y increments sum lowest.
inline double optimal_form_delay(const HardInstance& inst, const Arrangement& groups) {
    detail::check_arrangement(inst, groups);
    const std::size_t y = static_cast<std::size_t>(inst.interleave_y);
    double min_sum = std::numeric_limits<double>::infinity();
    for (const auto& g : groups) {
        min_sum = std::min(min_sum, detail::group_head_sum(inst, g, y));
    }
    const double floor =
        inst.videos.front().initial_segment_bits / inst.bucket.burst_rate_bps;
    return floor + (inst.p_bits - min_sum) / inst.bucket.token_rate_bps;
}

/// Explicit video order realising an arrangement: each group of Y negatives
/// followed by its positive video, the Y+1 group trailing.
inline VideoList build_form_list(const HardInstance& inst, const Arrangement& groups) {
    detail::check_arrangement(inst, groups);
    VideoList list;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t idx : groups[g]) list.push_back(idx);
        if (g + 1 < groups.size()) list.push_back(g);  // positives sit at indices [0, M)
    }
    return list;
}

/// Best arrangement by exhaustive partition search: maximise the minimum
/// leading-Y increment sum. Returns the arrangement and its predicted delay.
inline std::pair<Arrangement, double> best_form_arrangement(const HardInstance& inst) {
    const std::size_t m = static_cast<std::size_t>(inst.m_positive);
    const std::size_t y = static_cast<std::size_t>(inst.interleave_y);
    const std::size_t n_neg = inst.videos.size() - m;

    std::vector<std::size_t> negs(n_neg);
    std::iota(negs.begin(), negs.end(), m);

    Arrangement best;
    double best_min_sum = -std::numeric_limits<double>::infinity();

    // Choose the tail video of the last group (its increment never counts),
    // then partition the rest into M+1 unordered groups of Y canonically.
    Arrangement groups(m + 1);
    std::vector<std::size_t> rest;
    auto recurse = [&](auto&& self, std::size_t next_unassigned) -> void {
        if (next_unassigned == rest.size()) {
            double min_sum = std::numeric_limits<double>::infinity();
            for (const auto& g : groups) {
                min_sum = std::min(min_sum, detail::group_head_sum(inst, g, y));
            }
            if (min_sum > best_min_sum) {
                best_min_sum = min_sum;
                best = groups;
            }
            return;
        }
        const std::size_t v = rest[next_unassigned];
        for (std::size_t g = 0; g <= m; ++g) {
            if (groups[g].size() >= y) continue;
            // Canonical: a fresh group may only be opened by the smallest
            // remaining element, i.e. skip later empty twins.
            groups[g].push_back(v);
            self(self, next_unassigned + 1);
            groups[g].pop_back();
            if (groups[g].empty()) break;
        }
    };
    for (std::size_t tail = 0; tail < n_neg; ++tail) {
        rest.clear();
        for (std::size_t i = 0; i < n_neg; ++i) {
            if (i != tail) rest.push_back(negs[i]);
        }
        for (auto& g : groups) g.clear();
        recurse(recurse, 0);
        // `groups` now holds the best partition for no tail assigned; append
        // the tail to the last group of the best arrangement found so far if
        // it came from this iteration (the tail slot stays out of head sums).
        if (!best.empty() && best.back().size() == y) {
            best.back().push_back(negs[tail]);
        }
    }
    const double value = optimal_form_delay(inst, best);
    return {best, value};
}

/// Exhaustive verification on small instances (at most 9 videos): enumerate
/// every order, find the true optimum, and check that the structured-form
/// prediction matches it and that every optimal order has the run structure.
inline FormVerdict verify_small(const HardInstance& inst) {
    if (inst.videos.size() > 9) {
        throw std::length_error("verify_small: instance too large for exhaustive enumeration");
    }
    const std::size_t n = inst.videos.size();
    const std::size_t m = static_cast<std::size_t>(inst.m_positive);
    const std::size_t y = static_cast<std::size_t>(inst.interleave_y);

    VideoList perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    std::vector<VideoList> optima;
    do {
        const double v = evaluate_list(inst.videos, perm, inst.bucket).max_delay_s;
        if (v < best - 1e-12) {
            best = v;
            optima.clear();
            optima.push_back(perm);
        } else if (std::abs(v - best) <= 1e-12) {
            optima.push_back(perm);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    auto structured = [&](const VideoList& list) {
        std::size_t run = 0;
        std::size_t positives_seen = 0;
        for (std::size_t idx : list) {
            if (inst.is_positive[idx]) {
                if (run != y) return false;
                run = 0;
                ++positives_seen;
            } else {
                ++run;
            }
        }
        return positives_seen == m && run == y + 1;
    };

    FormVerdict verdict;
    verdict.exhaustive_min_s = best;
    verdict.best_form_value_s = best_form_arrangement(inst).second;
    verdict.optima_count = optima.size();
    verdict.optimum_matches_form =
        std::abs(verdict.exhaustive_min_s - verdict.best_form_value_s) <= 1e-9;
    verdict.all_optima_structured =
        std::all_of(optima.begin(), optima.end(), structured);
    return verdict;
}

}  // namespace vidorder::hardness
