#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"

namespace vidorder::fluid {

enum class Phase { burst, slow, idle };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::burst: return "burst";
        case Phase::slow: return "slow";
        case Phase::idle: return "idle";
    }
    return "?";
}

/// One knot of the piecewise-linear token-level trajectory. `sender_rate_bps`
/// and `phase` describe the segment that *starts* here.
struct Breakpoint {
    double time_s = 0.0;
    double tokens_bits = 0.0;
    double sender_rate_bps = 0.0;
    Phase phase = Phase::idle;
};

struct TokenTrace {
    std::vector<Breakpoint> breakpoints;
};

struct SimResult {
    DelayReport report;
    TokenTrace trace;
    std::vector<double> delivered_bits;  // per list position
};

/// Continuous-time event-driven simulation of a viewing session through the
/// token bucket. The trajectory is advanced segment by segment between the
/// events that change its slope: token exhaustion, initial segment complete,
/// remaining data complete, bucket full, viewing end. Delays emerge from the
/// event clock rather than from any per-video formula, which makes this an
/// independent check of the closed-form model.
inline SimResult simulate(const std::vector<Video>& set, const VideoList& order,
                          const BucketConfig& bucket) {
    bucket.validate();
    detail::validate_order(set.size(), order);
    for (const Video& v : set) v.validate();

    const double mu = bucket.token_rate_bps;
    const double rhat = bucket.burst_rate_bps;
    const double cap = bucket.capacity_bits;

    SimResult out;
    out.delivered_bits.assign(order.size(), 0.0);
    auto& knots = out.trace.breakpoints;

    double t = 0.0;
    double tokens = bucket.initial_tokens_bits;
    // Keep knot times strictly increasing: a zero-length segment replaces the
    // previous knot's outgoing slope description instead of duplicating time.
    auto mark = [&](double rate, Phase ph) {
        if (!knots.empty() && knots.back().time_s == t) {
            knots.back() = {t, tokens, rate, ph};
            return;
        }
        knots.push_back({t, tokens, rate, ph});
    };

    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const Video& v = set[order[pos]];
        const double t_request = t;
        const double tokens_at_start = tokens;
        double delivered = 0.0;

        // Startup: drain the initial segment at the burst rate while tokens
        // last, then at the token rate with the bucket pinned at zero.
        double remaining = v.initial_segment_bits;
        while (remaining > 0.0) {
            if (tokens > 0.0) {
                mark(rhat, Phase::burst);
                const double dt_done = remaining / rhat;
                const double dt_empty = tokens / (rhat - mu);
                if (dt_done <= dt_empty) {
                    t += dt_done;
                    delivered += remaining;
                    tokens = std::max(0.0, tokens - (rhat - mu) * dt_done);
                    remaining = 0.0;
                } else {
                    t += dt_empty;
                    delivered += rhat * dt_empty;
                    remaining -= rhat * dt_empty;
                    tokens = 0.0;
                }
            } else {
                // Bucket empty: data passes through at the refill rate.
                mark(rhat, Phase::burst);
                t += remaining / mu;
                delivered += remaining;
                remaining = 0.0;
            }
        }

        const double delay = t - t_request;
        out.report.per_video.push_back({pos, v.id, delay, tokens_at_start});
        out.report.max_delay_s = std::max(out.report.max_delay_s, delay);

        // Watch phase: the remainder streams at the encoding rate for as long
        // as the user watches and data lasts; afterwards the bucket refills.
        double rest = std::max(0.0, v.duration_s * v.encoding_rate_bps - v.initial_segment_bits);
        double watch = v.viewing_time_s;
        while (watch > 0.0) {
            if (rest > 0.0) {
                const double rate =
                    (tokens > 0.0 || mu >= v.encoding_rate_bps) ? v.encoding_rate_bps : mu;
                mark(rate, Phase::slow);
                const double slope = mu - rate;
                enum { ev_watch, ev_rest, ev_full, ev_empty } ev = ev_watch;
                double dt = watch;
                const double dt_rest = rest / rate;
                if (dt_rest < dt) {
                    dt = dt_rest;
                    ev = ev_rest;
                }
                if (slope > 0.0 && tokens < cap) {
                    const double dt_full = (cap - tokens) / slope;
                    if (dt_full < dt) {
                        dt = dt_full;
                        ev = ev_full;
                    }
                }
                if (slope < 0.0 && tokens > 0.0) {
                    const double dt_empty = tokens / (-slope);
                    if (dt_empty < dt) {
                        dt = dt_empty;
                        ev = ev_empty;
                    }
                }
                t += dt;
                watch -= dt;
                delivered += rate * dt;
                rest -= rate * dt;
                tokens = std::clamp(tokens + slope * dt, 0.0, cap);
                if (ev == ev_watch) watch = 0.0;
                if (ev == ev_rest) rest = 0.0;
                if (ev == ev_full) tokens = cap;
                if (ev == ev_empty) tokens = 0.0;
            } else {
                // Nothing left to deliver: pure refill until full.
                mark(0.0, Phase::idle);
                if (tokens < cap) {
                    const double dt_full = (cap - tokens) / mu;
                    if (dt_full < watch) {
                        t += dt_full;
                        watch -= dt_full;
                        tokens = cap;
                        continue;
                    }
                }
                t += watch;
                tokens = std::min(cap, tokens + mu * watch);
                watch = 0.0;
            }
        }
        out.delivered_bits[pos] = delivered;
    }
    mark(0.0, Phase::idle);  // session end knot
    return out;
}

/// Token level at time `t`, linearly interpolated between trace knots.
/// `t` must lie within the trace horizon.
inline double token_level_at(const TokenTrace& trace, double t) {
    const auto& k = trace.breakpoints;
    if (k.empty()) throw std::out_of_range("token_level_at: empty trace");
    if (t < k.front().time_s || t > k.back().time_s) {
        throw std::out_of_range("token_level_at: time outside trace horizon");
    }
    auto it = std::upper_bound(k.begin(), k.end(), t,
                               [](double x, const Breakpoint& b) { return x < b.time_s; });
    if (it == k.begin()) return k.front().tokens_bits;
    if (it == k.end()) return k.back().tokens_bits;
    const Breakpoint& lo = *(it - 1);
    const Breakpoint& hi = *it;
    const double span = hi.time_s - lo.time_s;
    const double frac = (t - lo.time_s) / span;
    return lo.tokens_bits + frac * (hi.tokens_bits - lo.tokens_bits);
}

/// CSV export of a token trace: time_s,tokens_bits,phase.
inline void write_trace_csv(const TokenTrace& trace, std::ostream& os) {
    os << "time_s,tokens_bits,phase\n";
    char buf[80];
    for (const Breakpoint& b : trace.breakpoints) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%s\n", b.time_s, b.tokens_bits,
                      phase_name(b.phase));
        os << buf;
    }
}

}  // namespace vidorder::fluid
