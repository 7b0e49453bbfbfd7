#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace vidorder {

inline constexpr double kMegabit = 1e6;  // bits

/// One short video as the delivery model sees it. Rates are bits per second,
/// sizes are bits, times are seconds.
struct Video {
    std::string id;
    double duration_s = 0.0;            // full playback length T
    double encoding_rate_bps = 0.0;     // steady streaming rate r
    double initial_segment_bits = 0.0;  // data B that must arrive before playback starts
    double viewing_time_s = 0.0;        // how long the user actually watches (tau)

    void validate() const {
        if (!(duration_s > 0.0)) {
            throw std::invalid_argument("video " + id + ": duration must be > 0");
        }
        if (!(encoding_rate_bps > 0.0)) {
            throw std::invalid_argument("video " + id + ": encoding rate must be > 0");
        }
        if (!(initial_segment_bits > 0.0)) {
            throw std::invalid_argument("video " + id + ": initial segment must be > 0");
        }
        if (!(viewing_time_s > 0.0)) {
            throw std::invalid_argument("video " + id + ": viewing time must be > 0");
        }
        if (initial_segment_bits > duration_s * encoding_rate_bps) {
            throw std::invalid_argument("video " + id + ": initial segment exceeds total video data");
        }
    }
};

/// Token-bucket shaper configuration: bucket capacity C, token (fill) rate mu,
/// burst rate r_hat at which queued data drains while tokens remain, and the
/// token level at session start.
struct BucketConfig {
    double capacity_bits = 0.0;
    double token_rate_bps = 0.0;
    double burst_rate_bps = 0.0;
    double initial_tokens_bits = 0.0;

    void validate() const {
        if (!(capacity_bits > 0.0)) {
            throw std::invalid_argument("bucket: capacity must be > 0");
        }
        if (!(token_rate_bps > 0.0)) {
            throw std::invalid_argument("bucket: token rate must be > 0");
        }
        if (!(burst_rate_bps > token_rate_bps)) {
            throw std::invalid_argument("bucket: burst rate must exceed token rate");
        }
        if (!(initial_tokens_bits >= 0.0) || initial_tokens_bits > capacity_bits) {
            throw std::invalid_argument("bucket: initial tokens must lie in [0, capacity]");
        }
    }
};

/// A viewing order: permutation of indices into a video set.
using VideoList = std::vector<std::size_t>;

struct DelayEntry {
    std::size_t position = 0;  // place in the list, 0-based
    std::string video_id;
    double startup_delay_s = 0.0;
    double tokens_at_start_bits = 0.0;  // bucket level when this video was requested
};

struct DelayReport {
    std::vector<DelayEntry> per_video;
    double max_delay_s = 0.0;
};

/// Token-gain classification of a single video.
struct GainStats {
    double min_required_tokens_bits = 0.0;  // P: smallest start level with no extra delay
    double net_increment_bits = 0.0;        // delta: tokens gained over one full watch cycle
    bool is_positive_gain = false;          // delta >= P
};

namespace detail {

inline void validate_order(std::size_t set_size, const VideoList& order) {
    if (order.empty()) throw std::domain_error("video list: empty order");
    if (order.size() != set_size) {
        throw std::invalid_argument("video list: order length does not match set size");
    }
    VideoList sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] != i) throw std::invalid_argument("video list: order is not a permutation");
    }
}

}  // namespace detail

/// Startup delay for one video requested when the bucket holds `tokens_bits`.
///
/// While tokens remain, the initial segment drains at the burst rate; a
/// segment of B bits therefore needs B/r_hat seconds if the bucket holds
/// enough (tokens plus refill during the burst cover B). Otherwise the tail
/// of the segment passes through at the token rate and the delay is
/// (B - tokens)/mu. Points on the branch boundary belong to either branch
/// analytically; a 1e-12 relative tolerance keeps them on the burst branch.
inline double startup_delay(double segment_bits, double tokens_bits, const BucketConfig& bucket) {
    bucket.validate();
    if (!(segment_bits > 0.0)) throw std::domain_error("startup_delay: segment must be > 0");
    if (!(tokens_bits >= 0.0) || tokens_bits > bucket.capacity_bits) {
        throw std::domain_error("startup_delay: tokens must lie in [0, capacity]");
    }
    const double refill = bucket.token_rate_bps * segment_bits / bucket.burst_rate_bps;
    if (tokens_bits + refill >= segment_bits * (1.0 - 1e-12)) {
        return segment_bits / bucket.burst_rate_bps;
    }
    return (segment_bits - tokens_bits) / bucket.token_rate_bps;
}

/// Fastest possible startup for a segment: burst-rate transmission end to end.
inline double burst_floor_delay(double segment_bits, const BucketConfig& bucket) {
    if (!(segment_bits > 0.0)) throw std::domain_error("burst_floor_delay: segment must be > 0");
    return segment_bits / bucket.burst_rate_bps;
}

/// Bucket level when the *next* video is requested, given the previous video
/// started with `tokens_bits` and saw startup delay `delay_s`.
///
/// During startup the segment consumes B - mu*d tokens; during the watch
/// phase tokens refill at mu while the delivered remainder, at most the
/// watched data tau*r and at most the leftover T*r - B, consumes them.
/// The level is clamped to the physical range [0, capacity].
inline double next_tokens(const Video& prev, double tokens_bits, double delay_s,
                          const BucketConfig& bucket) {
    bucket.validate();
    prev.validate();
    if (!(tokens_bits >= 0.0) || tokens_bits > bucket.capacity_bits) {
        throw std::domain_error("next_tokens: tokens must lie in [0, capacity]");
    }
    if (!(delay_s >= 0.0)) throw std::domain_error("next_tokens: delay must be >= 0");
    const double burst_spend = prev.initial_segment_bits - bucket.token_rate_bps * delay_s;
    const double watched_rest =
        std::min(prev.viewing_time_s * prev.encoding_rate_bps,
                 prev.duration_s * prev.encoding_rate_bps - prev.initial_segment_bits);
    const double watch_gain = bucket.token_rate_bps * prev.viewing_time_s - watched_rest;
    const double level = tokens_bits - burst_spend + watch_gain;
    return std::clamp(level, 0.0, bucket.capacity_bits);
}

/// Closed-form evaluation of a whole viewing order: per-video startup delays
/// and the bucket level seen by each request.
inline DelayReport evaluate_list(const std::vector<Video>& set, const VideoList& order,
                                 const BucketConfig& bucket) {
    bucket.validate();
    detail::validate_order(set.size(), order);
    for (const Video& v : set) v.validate();

    DelayReport report;
    report.per_video.reserve(order.size());
    double tokens = bucket.initial_tokens_bits;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const Video& v = set[order[pos]];
        const double d = startup_delay(v.initial_segment_bits, tokens, bucket);
        report.per_video.push_back({pos, v.id, d, tokens});
        report.max_delay_s = std::max(report.max_delay_s, d);
        tokens = next_tokens(v, tokens, d, bucket);
    }
    return report;
}

/// Token-gain statistics of one video under a bucket configuration.
///
/// P is the smallest start level that still yields the burst-floor delay;
/// delta is the net token change across one full startup-plus-watch cycle
/// when no extra delay occurred and the bucket never hit its bounds.
inline GainStats gain_stats(const Video& v, const BucketConfig& bucket) {
    bucket.validate();
    v.validate();
    GainStats g;
    g.min_required_tokens_bits =
        v.initial_segment_bits -
        bucket.token_rate_bps * v.initial_segment_bits / bucket.burst_rate_bps;
    const double watched_rest =
        std::min(v.viewing_time_s * v.encoding_rate_bps,
                 v.duration_s * v.encoding_rate_bps - v.initial_segment_bits);
    g.net_increment_bits = bucket.token_rate_bps * v.viewing_time_s - watched_rest;
    g.is_positive_gain = g.net_increment_bits >= g.min_required_tokens_bits;
    return g;
}

/// Delay beyond the burst floor for a video started at `tokens_bits`.
inline double extra_delay(const Video& v, double tokens_bits, const BucketConfig& bucket) {
    return startup_delay(v.initial_segment_bits, tokens_bits, bucket) -
           burst_floor_delay(v.initial_segment_bits, bucket);
}

}  // namespace vidorder
