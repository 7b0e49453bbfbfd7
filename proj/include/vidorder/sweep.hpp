#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "data_io.hpp"
#include "neural.hpp"
#include "orderers.hpp"
#include "parallel.hpp"
#include "stats_math.hpp"
#include "svg.hpp"

namespace vidorder {

enum class Algo { rand, intl, grdy, exact, psac, nsac };

inline const char* algo_name(Algo a) {
    switch (a) {
        case Algo::rand: return "rand";
        case Algo::intl: return "intl";
        case Algo::grdy: return "grdy";
        case Algo::exact: return "exact";
        case Algo::psac: return "psac";
        case Algo::nsac: return "nsac";
    }
    return "?";
}

inline Algo parse_algo(const std::string& s) {
    for (Algo a : {Algo::rand, Algo::intl, Algo::grdy, Algo::exact, Algo::psac, Algo::nsac}) {
        if (s == algo_name(a)) return a;
    }
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

/// One experiment: hold a scenario fixed, move one knob, and measure every
/// requested algorithm's average maximum startup delay over the same
/// evaluation sets at every knob position.
struct SweepSpec {
    enum class Axis { capacity, token_rate, set_size, initial_tokens, noise_sigma };

    Axis axis = Axis::capacity;
    double start = 2.0;
    double stop = 10.0;
    double step = 1.0;

    double capacity_mbits = 4.0;
    double token_rate_mbps = 2.0;
    double burst_rate_mbps = 10.0;
    std::optional<double> initial_tokens_mbits;  // absent: bucket starts full
    int set_size = 15;
    int eval_sets = 256;
    std::uint64_t seed = 1;
    bool actual_bitrate = false;  // false: force every video to fixed_rate_mbps
    double fixed_rate_mbps = 2.0;
    double sigma_s = 0.0;  // viewing-time prediction noise
    std::vector<Algo> algos = {Algo::rand, Algo::intl, Algo::grdy};
    std::uint64_t exact_budget = 10'000'000;
};

inline const char* axis_name(SweepSpec::Axis a) {
    switch (a) {
        case SweepSpec::Axis::capacity: return "capacity";
        case SweepSpec::Axis::token_rate: return "token_rate";
        case SweepSpec::Axis::set_size: return "set_size";
        case SweepSpec::Axis::initial_tokens: return "initial_tokens";
        case SweepSpec::Axis::noise_sigma: return "noise_sigma";
    }
    return "?";
}

inline SweepSpec::Axis parse_axis(const std::string& s) {
    using Axis = SweepSpec::Axis;
    for (Axis a : {Axis::capacity, Axis::token_rate, Axis::set_size, Axis::initial_tokens,
                   Axis::noise_sigma}) {
        if (s == axis_name(a)) return a;
    }
    throw std::invalid_argument("unknown sweep axis '" + s + "'");
}

inline const char* axis_label(SweepSpec::Axis a) {
    switch (a) {
        case SweepSpec::Axis::capacity: return "bucket capacity (Mbit)";
        case SweepSpec::Axis::token_rate: return "token rate (Mbps)";
        case SweepSpec::Axis::set_size: return "videos per set";
        case SweepSpec::Axis::initial_tokens: return "initial tokens (Mbit)";
        case SweepSpec::Axis::noise_sigma: return "viewing-time noise sigma (s)";
    }
    return "?";
}

struct SweepRow {
    double axis_value = 0.0;
    std::string algorithm;
    double avg_max_delay_s = 0.0;
    double std_s = 0.0;
};

/// Trained models for the neural algorithms, keyed by architecture.
struct SweepModels {
    const neural::NetParams* psac = nullptr;
    const neural::NetParams* nsac = nullptr;
};

namespace detail {

inline VideoList run_algo(Algo a, const std::vector<Video>& set, const BucketConfig& bucket,
                          std::uint64_t rand_seed, std::uint64_t exact_budget,
                          const SweepModels& models) {
    switch (a) {
        case Algo::rand: return order_rand(set, bucket, rand_seed).list;
        case Algo::intl: return order_intl(set, bucket).list;
        case Algo::grdy: return order_grdy(set, bucket).list;
        case Algo::exact: return order_exact(set, bucket, exact_budget).list;
        case Algo::psac:
        case Algo::nsac: {
            const neural::NetParams* p = (a == Algo::psac) ? models.psac : models.nsac;
            if (!p) {
                throw std::invalid_argument(std::string("sweep: algorithm '") + algo_name(a) +
                                            "' requires a checkpoint");
            }
            return neural::rollout(set, *p, neural::DecodeMode::greedy).list;
        }
    }
    throw std::invalid_argument("sweep: unknown algorithm");
}

}  // namespace detail

/// Run a sweep. Every axis point draws the *same* evaluation sets (same seed)
/// so curves differ only through the knob and the algorithm. Ordering
/// algorithms see noisy viewing times when sigma > 0, while delays are always
/// scored against the true ones. Bucket/axis conflicts (for example initial
/// tokens above capacity) surface as validation errors.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec,
                                       const std::vector<io::TraceRecord>& records,
                                       const SweepModels& models = {}) {
    if (!(spec.step > 0.0)) throw std::invalid_argument("sweep: step must be > 0");
    if (!(spec.stop >= spec.start)) throw std::invalid_argument("sweep: stop must be >= start");
    if (spec.eval_sets < 1) throw std::invalid_argument("sweep: need at least one set");
    if (spec.algos.empty()) throw std::invalid_argument("sweep: no algorithms selected");
    if (models.psac && models.psac->arch != neural::Arch::psac) {
        throw std::invalid_argument("sweep: psac checkpoint has the wrong architecture");
    }
    if (models.nsac && models.nsac->arch != neural::Arch::nsac) {
        throw std::invalid_argument("sweep: nsac checkpoint has the wrong architecture");
    }

    std::vector<SweepRow> rows;
    for (int i = 0;; ++i) {
        const double v = spec.start + spec.step * i;
        if (v > spec.stop + 1e-9 * spec.step) break;

        double cap_mb = spec.capacity_mbits;
        double mu_mb = spec.token_rate_mbps;
        std::optional<double> k0_mb = spec.initial_tokens_mbits;
        int n = spec.set_size;
        double sigma = spec.sigma_s;
        switch (spec.axis) {
            case SweepSpec::Axis::capacity: cap_mb = v; break;
            case SweepSpec::Axis::token_rate: mu_mb = v; break;
            case SweepSpec::Axis::set_size: {
                const double r = std::round(v);
                if (std::abs(v - r) > 1e-6 || r < 1.0) {
                    throw std::invalid_argument("sweep: set-size axis values must be positive integers");
                }
                n = static_cast<int>(r);
                break;
            }
            case SweepSpec::Axis::initial_tokens: k0_mb = v; break;
            case SweepSpec::Axis::noise_sigma: sigma = v; break;
        }
        BucketConfig bucket;
        bucket.capacity_bits = cap_mb * kMegabit;
        bucket.token_rate_bps = mu_mb * kMegabit;
        bucket.burst_rate_bps = spec.burst_rate_mbps * kMegabit;
        bucket.initial_tokens_bits = (k0_mb ? *k0_mb : cap_mb) * kMegabit;
        bucket.validate();

        const std::vector<io::TraceRecord>* use = &records;
        std::vector<io::TraceRecord> filtered;
        if (spec.actual_bitrate) {
            filtered = io::filter_max_bitrate(records, bucket.token_rate_bps);
            use = &filtered;
        }
        auto sets = io::sample_sets(*use, static_cast<std::size_t>(n),
                                    static_cast<std::size_t>(spec.eval_sets), spec.seed);
        if (!spec.actual_bitrate) {
            for (auto& set : sets) set = io::with_fixed_bitrate(set, spec.fixed_rate_mbps * kMegabit);
        }
        const std::vector<std::vector<Video>>* order_input = &sets;
        std::vector<std::vector<Video>> noisy;
        if (sigma > 0.0) {
            noisy = io::noise_viewing(sets, sigma, spec.seed ^ 0x9e3779b97f4a7c15ull).sets;
            order_input = &noisy;
        }

        for (Algo a : spec.algos) {
            std::vector<double> delays(sets.size(), 0.0);
            parallel_for(sets.size(), [&](std::size_t s) {
                const VideoList list = detail::run_algo(a, (*order_input)[s], bucket,
                                                        spec.seed + s, spec.exact_budget, models);
                delays[s] = evaluate_list(sets[s], list, bucket).max_delay_s;
            });
            rows.push_back({v, algo_name(a), mean_of(delays), stddev_of(delays)});
        }
    }
    return rows;
}

/// CSV export: axis_value,algorithm,avg_max_delay_s,std. Fixed formatting so
/// identical runs produce identical bytes.
inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
    os << "axis_value,algorithm,avg_max_delay_s,std\n";
    char buf[160];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12g,%s,%.12g,%.12g\n", r.axis_value,
                      r.algorithm.c_str(), r.avg_max_delay_s, r.std_s);
        os << buf;
    }
}

/// SVG rendering of sweep rows: one line per algorithm.
inline void write_sweep_svg(const std::vector<SweepRow>& rows, SweepSpec::Axis axis,
                            std::ostream& os) {
    std::vector<ChartSeries> series;
    for (const SweepRow& r : rows) {
        ChartSeries* s = nullptr;
        for (auto& cand : series) {
            if (cand.name == r.algorithm) {
                s = &cand;
                break;
            }
        }
        if (!s) {
            series.push_back({r.algorithm, {}});
            s = &series.back();
        }
        s->points.push_back({r.axis_value, r.avg_max_delay_s});
    }
    write_line_chart(os, std::string("average max startup delay vs ") + axis_name(axis),
                     axis_label(axis), "average max startup delay (s)", series);
}

}  // namespace vidorder
