#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "rng.hpp"
#include "stats_math.hpp"

namespace vidorder::io {

/// One row of a viewing trace.
struct TraceRecord {
    std::string user_id;
    std::string video_id;
    double duration_s = 0.0;
    double bitrate_bps = 0.0;
    double viewing_time_s = 0.0;
};

/// Marginal summary of one numeric column.
struct ColumnStats {
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;
    double max = 0.0;

    void validate() const {
        if (!(min <= q1 && q1 <= q2 && q2 <= q3 && q3 <= max)) {
            throw std::invalid_argument("column stats: quartiles must be ordered min<=q1<=q2<=q3<=max");
        }
        if (max < min) throw std::invalid_argument("column stats: max below min");
        if (!(std >= 0.0)) throw std::invalid_argument("column stats: std must be >= 0");
    }
};

/// Marginals of the three numeric trace columns. Bitrate is summarised in
/// Mbps (matching the CSV column), durations and viewing times in seconds.
struct TraceStats {
    ColumnStats duration_s;
    ColumnStats viewing_time_s;
    ColumnStats bitrate_mbps;
};

/// Parse failure with file location context.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kTraceHeader = "user_id,video_id,duration_s,bitrate_mbps,viewing_time_s";

namespace detail {

inline std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, std::size_t line_no, const char* what) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || end != begin + s.size() || !std::isfinite(v)) {
        throw ParseError("line " + std::to_string(line_no) + ": cannot parse " + what + " from '" +
                         s + "'");
    }
    return v;
}

}  // namespace detail

/// Load a viewing trace from CSV. The header must match kTraceHeader exactly;
/// every row needs five fields with positive finite numbers. Errors carry the
/// offending line number.
inline std::vector<TraceRecord> load_trace(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("line 1: missing header");
    if (detail::strip_cr(line) != kTraceHeader) {
        throw ParseError("line 1: header mismatch, expected '" + std::string(kTraceHeader) + "'");
    }
    std::vector<TraceRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
        const auto fields = detail::split_csv(line);
        if (fields.size() != 5) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                             std::to_string(fields.size()));
        }
        TraceRecord r;
        r.user_id = fields[0];
        r.video_id = fields[1];
        r.duration_s = detail::parse_double(fields[2], line_no, "duration_s");
        const double mbps = detail::parse_double(fields[3], line_no, "bitrate_mbps");
        r.bitrate_bps = mbps * kMegabit;
        r.viewing_time_s = detail::parse_double(fields[4], line_no, "viewing_time_s");
        if (r.user_id.empty() || r.video_id.empty()) {
            throw ParseError("line " + std::to_string(line_no) + ": empty id field");
        }
        if (!(r.duration_s > 0.0) || !(r.bitrate_bps > 0.0) || !(r.viewing_time_s > 0.0)) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": duration, bitrate and viewing time must be > 0");
        }
        records.push_back(std::move(r));
    }
    return records;
}

inline std::vector<TraceRecord> load_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trace file '" + path + "'");
    return load_trace(in);
}

/// Write a viewing trace as CSV. Numbers are printed with 17 significant
/// digits so a load/save/load round trip reproduces values exactly.
inline void save_trace(const std::vector<TraceRecord>& records, std::ostream& os) {
    os << kTraceHeader << '\n';
    char buf[128];
    for (const TraceRecord& r : records) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", r.duration_s,
                      r.bitrate_bps / kMegabit, r.viewing_time_s);
        os << r.user_id << ',' << r.video_id << buf;
    }
}

inline void save_trace_file(const std::vector<TraceRecord>& records, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    save_trace(records, os);
    if (!os.good()) throw std::runtime_error("write failure on '" + path + "'");
}

namespace detail {

inline ColumnStats column_stats(std::vector<double> xs) {
    ColumnStats c;
    std::sort(xs.begin(), xs.end());
    c.mean = mean_of(xs);
    c.std = stddev_of(xs);
    c.min = xs.front();
    c.q1 = quantile_sorted(xs, 0.25);
    c.q2 = quantile_sorted(xs, 0.50);
    c.q3 = quantile_sorted(xs, 0.75);
    c.max = xs.back();
    return c;
}

}  // namespace detail

/// Empirical marginals of a trace (quartiles by linear interpolation,
/// population standard deviation).
inline TraceStats table_stats(const std::vector<TraceRecord>& records) {
    if (records.empty()) throw std::invalid_argument("table_stats: empty trace");
    std::vector<double> dur, watch, rate;
    dur.reserve(records.size());
    watch.reserve(records.size());
    rate.reserve(records.size());
    for (const TraceRecord& r : records) {
        dur.push_back(r.duration_s);
        watch.push_back(r.viewing_time_s);
        rate.push_back(r.bitrate_bps / kMegabit);
    }
    TraceStats s;
    s.duration_s = detail::column_stats(std::move(dur));
    s.viewing_time_s = detail::column_stats(std::move(watch));
    s.bitrate_mbps = detail::column_stats(std::move(rate));
    return s;
}

/// Built-in marginals of the reference 200-user short-video viewing trace.
/// Used as the default target when synthesising data.
inline TraceStats default_trace_stats() {
    TraceStats s;
    s.duration_s = {29.32, 19.24, 2.0, 13.0, 22.0, 48.0, 62.0};
    s.viewing_time_s = {24.30, 29.79, 0.01, 3.32, 14.70, 33.12, 299.75};
    s.bitrate_mbps = {1.86, 0.85, 0.12, 1.23, 1.72, 2.44, 5.59};
    return s;
}

inline nlohmann::json stats_to_json(const TraceStats& s) {
    auto col = [](const ColumnStats& c) {
        return nlohmann::json{{"mean", c.mean}, {"std", c.std}, {"min", c.min}, {"q1", c.q1},
                              {"q2", c.q2},     {"q3", c.q3},   {"max", c.max}};
    };
    return nlohmann::json{{"duration_s", col(s.duration_s)},
                          {"viewing_time_s", col(s.viewing_time_s)},
                          {"bitrate_mbps", col(s.bitrate_mbps)}};
}

namespace detail {

/// Column sampler matching target quartiles and range. The three quartile
/// conditions pin down a shifted log-normal in closed form: the shift is the
/// unique location that makes the quartiles geometric, i.e.
/// (q2 - s)^2 = (q1 - s)(q3 - s), and (mu, sigma) then follow from q2 and the
/// interquartile log-spread. Left-skewed targets (median above the quartile
/// midpoint) use the mirror image of that family, symmetric targets a plain
/// normal. Draws are inverse-CDF samples clamped to [min, max]; the interior
/// quartiles are unaffected by the clamp as long as it captures less than a
/// quarter of the mass on each side.
class ColumnSampler {
public:
    static ColumnSampler fit(const ColumnStats& cs) {
        cs.validate();
        ColumnSampler s;
        s.lo_ = cs.min;
        s.hi_ = cs.max;
        if (cs.max == cs.min || cs.q3 - cs.q1 <= 1e-12 * std::max(1.0, std::abs(cs.q2))) {
            s.constant_ = true;
            s.value_ = cs.q2;
            return s;
        }
        const double denom = 2.0 * cs.q2 - cs.q1 - cs.q3;
        if (std::abs(denom) <= 1e-9 * (cs.q3 - cs.q1)) {
            s.normal_ = true;
            s.mu_ = cs.q2;
            s.sigma_ = (cs.q3 - cs.q1) / (2.0 * kZ75);
            return s;
        }
        double q1 = cs.q1, q2 = cs.q2, q3 = cs.q3;
        if (denom > 0.0) {
            // Median above the quartile midpoint: fit the mirrored column.
            s.reflected_ = true;
            q1 = -cs.q3;
            q2 = -cs.q2;
            q3 = -cs.q1;
        }
        const double shift = (q2 * q2 - q1 * q3) / (2.0 * q2 - q1 - q3);
        s.shift_ = shift;
        s.mu_ = std::log(q2 - shift);
        s.sigma_ = (std::log(q3 - shift) - std::log(q1 - shift)) / (2.0 * kZ75);
        return s;
    }

    double sample(Rng& rng) const {
        if (constant_) return value_;
        const double z = normal_icdf(std::clamp(rng.uniform01(), 1e-15, 1.0 - 1e-15));
        double x;
        if (normal_) {
            x = mu_ + sigma_ * z;
        } else {
            const double y = shift_ + std::exp(mu_ + sigma_ * z);
            x = reflected_ ? -y : y;
        }
        return std::clamp(x, lo_, hi_);
    }

private:
    static constexpr double kZ75 = 0.674489750196082;  // 75% point of the unit normal

    bool constant_ = false;
    bool normal_ = false;
    bool reflected_ = false;
    double value_ = 0.0;
    double shift_ = 0.0;
    double mu_ = 0.0;
    double sigma_ = 1.0;
    double lo_ = 0.0;
    double hi_ = 1.0;
};

}  // namespace detail

/// Synthesise a viewing trace whose marginals match `target`: each numeric
/// column is drawn independently from a shifted log-normal (or its mirror
/// image) fitted to that column's quartiles and clamped to its range.
/// Degenerate columns (max == min) become constants; max < min is a
/// configuration error raised by ColumnStats::validate.
inline std::vector<TraceRecord> synth_trace(const TraceStats& target, std::size_t n_users,
                                            std::size_t records_per_user, std::uint64_t seed) {
    if (n_users == 0 || records_per_user == 0) {
        throw std::invalid_argument("synth_trace: user and record counts must be > 0");
    }
    target.duration_s.validate();
    target.viewing_time_s.validate();
    target.bitrate_mbps.validate();
    const auto dur = detail::ColumnSampler::fit(target.duration_s);
    const auto watch = detail::ColumnSampler::fit(target.viewing_time_s);
    const auto rate = detail::ColumnSampler::fit(target.bitrate_mbps);

    Rng rng(seed);
    std::vector<TraceRecord> records;
    records.reserve(n_users * records_per_user);
    std::size_t vid = 0;
    char buf[32];
    for (std::size_t u = 0; u < n_users; ++u) {
        std::snprintf(buf, sizeof buf, "u%04zu", u);
        const std::string user(buf);
        for (std::size_t k = 0; k < records_per_user; ++k) {
            TraceRecord r;
            r.user_id = user;
            std::snprintf(buf, sizeof buf, "v%06zu", vid++);
            r.video_id = buf;
            r.duration_s = dur.sample(rng);
            r.bitrate_bps = rate.sample(rng) * kMegabit;
            r.viewing_time_s = watch.sample(rng);
            records.push_back(std::move(r));
        }
    }
    return records;
}

/// Build a model video from a trace row. The initial segment defaults to one
/// second of data at the encoding rate (capped by the whole video).
inline Video make_video(const TraceRecord& r) {
    Video v;
    v.id = r.video_id;
    v.duration_s = r.duration_s;
    v.encoding_rate_bps = r.bitrate_bps;
    v.initial_segment_bits = r.bitrate_bps * std::min(1.0, r.duration_s);
    v.viewing_time_s = r.viewing_time_s;
    return v;
}

/// Copy of a set with every video forced to a fixed encoding rate (and the
/// matching one-second initial segment). Durations and viewing times stay.
inline std::vector<Video> with_fixed_bitrate(const std::vector<Video>& set, double rate_bps) {
    if (!(rate_bps > 0.0)) throw std::invalid_argument("with_fixed_bitrate: rate must be > 0");
    std::vector<Video> out = set;
    for (Video& v : out) {
        v.encoding_rate_bps = rate_bps;
        v.initial_segment_bits = rate_bps * std::min(1.0, v.duration_s);
    }
    return out;
}

/// Trace rows whose bitrate does not exceed `max_bps`.
inline std::vector<TraceRecord> filter_max_bitrate(const std::vector<TraceRecord>& records,
                                                   double max_bps) {
    std::vector<TraceRecord> out;
    for (const TraceRecord& r : records) {
        if (r.bitrate_bps <= max_bps) out.push_back(r);
    }
    return out;
}

/// Deterministic user-level split: users ordered by id, the first
/// (1 - test_fraction) share goes to train, the rest to test.
inline std::pair<std::vector<TraceRecord>, std::vector<TraceRecord>> split_users(
    const std::vector<TraceRecord>& records, double test_fraction) {
    if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
        throw std::invalid_argument("split_users: test fraction outside [0, 1]");
    }
    std::vector<std::string> users;
    for (const TraceRecord& r : records) users.push_back(r.user_id);
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
    const std::size_t n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(users.size())));
    const std::size_t n_train = users.size() - n_test;
    std::pair<std::vector<TraceRecord>, std::vector<TraceRecord>> out;
    for (const TraceRecord& r : records) {
        const auto it = std::lower_bound(users.begin(), users.end(), r.user_id);
        const std::size_t idx = static_cast<std::size_t>(it - users.begin());
        (idx < n_train ? out.first : out.second).push_back(r);
    }
    return out;
}

/// Draw `count` video sets of size `set_size`. Each set picks one user
/// uniformly among those with enough records, then samples that user's rows
/// without replacement (partial Fisher-Yates).
inline std::vector<std::vector<Video>> sample_sets(const std::vector<TraceRecord>& records,
                                                   std::size_t set_size, std::size_t count,
                                                   std::uint64_t seed) {
    if (set_size == 0) throw std::invalid_argument("sample_sets: set size must be > 0");
    std::map<std::string, std::vector<std::size_t>> by_user;
    for (std::size_t i = 0; i < records.size(); ++i) by_user[records[i].user_id].push_back(i);
    std::vector<const std::vector<std::size_t>*> eligible;
    for (const auto& [user, rows] : by_user) {
        if (rows.size() >= set_size) eligible.push_back(&rows);
    }
    if (eligible.empty()) {
        throw std::invalid_argument("sample_sets: no user has enough records for the set size");
    }
    Rng rng(seed);
    std::vector<std::vector<Video>> sets;
    sets.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        const auto& rows = *eligible[rng.below(eligible.size())];
        std::vector<std::size_t> pool = rows;
        std::vector<Video> set;
        set.reserve(set_size);
        for (std::size_t k = 0; k < set_size; ++k) {
            const std::size_t j = k + rng.below(pool.size() - k);
            std::swap(pool[k], pool[j]);
            set.push_back(make_video(records[pool[k]]));
        }
        sets.push_back(std::move(set));
    }
    return sets;
}

/// Viewing-time predictions with additive Gaussian noise, clamped to stay
/// positive. Returns the perturbed sets plus the realised mean absolute
/// error between prediction and truth (after clamping).
struct NoisyViewing {
    std::vector<std::vector<Video>> sets;
    double mae_s = 0.0;
};

inline NoisyViewing noise_viewing(const std::vector<std::vector<Video>>& sets, double sigma_s,
                                  std::uint64_t seed) {
    if (!(sigma_s >= 0.0)) throw std::invalid_argument("noise_viewing: sigma must be >= 0");
    NoisyViewing out;
    out.sets = sets;
    Rng rng(seed);
    double abs_err = 0.0;
    std::size_t n = 0;
    for (auto& set : out.sets) {
        for (Video& v : set) {
            const double actual = v.viewing_time_s;
            const double predicted = std::max(0.01, actual + sigma_s * rng.normal());
            v.viewing_time_s = predicted;
            abs_err += std::abs(predicted - actual);
            ++n;
        }
    }
    out.mae_s = n ? abs_err / static_cast<double>(n) : 0.0;
    return out;
}

}  // namespace vidorder::io
