// Acceptance suite: end-to-end checks of the shipped guarantees, one line of
// output per criterion.  Each check is self-contained, states its tolerance
// in code, and the binary exits non-zero if any of them fail.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "vidorder/core.hpp"
#include "vidorder/data_io.hpp"
#include "vidorder/demo.hpp"
#include "vidorder/fluid.hpp"
#include "vidorder/hardness.hpp"
#include "vidorder/neural.hpp"
#include "vidorder/orderers.hpp"
#include "vidorder/rng.hpp"
#include "vidorder/sweep.hpp"

#include "support/brute.hpp"

namespace {

using namespace vidorder;

// ---- pinned tolerances and scenario constants ------------------------------
constexpr double kFluidRelTol = 1e-6;    // closed form vs fluid simulation
constexpr double kExampleTol = 1e-9;     // worked demo delays
constexpr double kExactTol = 1e-9;       // exhaustive vs branch-and-bound
constexpr double kGradTol = 1e-4;        // finite differences vs backprop
constexpr double kRandFactor = 0.85;     // trained net must beat random by 15%
constexpr double kExactFactor = 1.25;    // ... and stay within 25% of optimal
constexpr double kMonotoneRise = 1.01;   // sweep steps may rise 1% (sampling noise)
constexpr double kRatePointTol = 0.01;   // generous-token-rate operating point
constexpr double kOrderTol = 1e-12;      // per-set dominance comparisons

BucketConfig standard_bucket() {
    BucketConfig b;
    b.capacity_bits = 4e6;
    b.token_rate_bps = 2e6;
    b.burst_rate_bps = 10e6;
    b.initial_tokens_bits = 4e6;
    return b;
}

const std::vector<io::TraceRecord>& corpus() {
    static const std::vector<io::TraceRecord> recs =
        io::synth_trace(io::default_trace_stats(), 200, 60, 7);
    return recs;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// ---- criterion bodies -------------------------------------------------------

// 1. The closed-form startup delays and token levels must agree with an
//    event-driven fluid simulation of the same sessions.
std::string check_fluid_agreement() {
    Rng rng(101);
    const double trials = 10000;
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const BucketConfig bucket = testsupport::random_bucket(rng);
        const std::size_t n = 1 + rng.below(6);
        const auto set = testsupport::random_set(rng, n, bucket.token_rate_bps);
        VideoList order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);

        const DelayReport closed = evaluate_list(set, order, bucket);
        const fluid::SimResult sim = fluid::simulate(set, order, bucket);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = closed.per_video[i].startup_delay_s;
            const double b = sim.report.per_video[i].startup_delay_s;
            const double rel = std::abs(a - b) / std::max(1.0, std::abs(a));
            worst = std::max(worst, rel);
        }
    }
    if (worst > kFluidRelTol) {
        throw std::runtime_error(fmt("delays disagree: worst rel err %.3g > %.1g",
                                     worst, kFluidRelTol));
    }
    return fmt("worst rel err %.2e over %.0f sessions", worst, trials);
}

// 2. The worked examples: a blocked demo order pays up to the full token-rate
//    ceiling, the interleaved order keeps every start at the burst floor, and
//    an empty bucket costs exactly segment/token-rate.
std::string check_worked_examples() {
    const BucketConfig bucket = demo_bucket();
    const auto set = demo_mixed_set();

    const std::vector<double> expected = {0.2, 0.2, 0.6, 1.0, 1.0, 0.2, 0.2, 0.2};
    const DelayReport blocked = evaluate_list(set, demo_blocked_order(), bucket);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (std::abs(blocked.per_video[i].startup_delay_s - expected[i]) > kExampleTol) {
            throw std::runtime_error(fmt("blocked position %.0f: got %.9f want %.9f",
                                         static_cast<double>(i),
                                         blocked.per_video[i].startup_delay_s, expected[i]));
        }
    }
    const DelayReport inter = evaluate_list(set, demo_interleaved_order(), bucket);
    if (std::abs(inter.max_delay_s - 0.2) > kExampleTol) {
        throw std::runtime_error(fmt("interleaved max %.9f, want 0.2", inter.max_delay_s));
    }

    const double full = startup_delay(2e6, 4e6, bucket);
    const double empty = startup_delay(2e6, 0.0, bucket);
    if (std::abs(full - 0.2) > kExampleTol || std::abs(empty - 1.0) > kExampleTol) {
        throw std::runtime_error(fmt("single fetch: full %.9f (want 0.2), empty %.9f (want 1.0)",
                                     full, empty));
    }
    return fmt("blocked max %.3f s, interleaved max %.3f s", blocked.max_delay_s,
               inter.max_delay_s);
}

// 3. The branch-and-bound orderer must return a certified optimum that matches
//    exhaustive search and never loses to any heuristic.
std::string check_exact_optimality() {
    Rng rng(202);
    const int trials = 200;
    double worst_gap = 0.0;
    for (int t = 0; t < trials; ++t) {
        const BucketConfig bucket = testsupport::random_bucket(rng);
        const auto set = testsupport::random_set(rng, 8, bucket.token_rate_bps);
        const auto brute = testsupport::brute_force(set, bucket);
        const OrderResult ex = order_exact(set, bucket);
        if (!ex.optimal) throw std::runtime_error("exact search gave up within budget");
        const double gap = std::abs(ex.report.max_delay_s - brute.min_max_delay_s);
        worst_gap = std::max(worst_gap, gap);
        if (gap > kExactTol) {
            throw std::runtime_error(fmt("trial %.0f: exact %.9f vs exhaustive %.9f",
                                         static_cast<double>(t), ex.report.max_delay_s,
                                         brute.min_max_delay_s));
        }
        for (const OrderResult& h : {order_rand(set, bucket, 1000 + t),
                                     order_intl(set, bucket), order_grdy(set, bucket)}) {
            if (ex.report.max_delay_s > h.report.max_delay_s + kExactTol) {
                throw std::runtime_error("exact lost to heuristic " + h.algorithm);
            }
        }
    }
    return fmt("matches exhaustive search on %.0f random 8-video sets (worst gap %.1e)",
               static_cast<double>(trials), worst_gap);
}

// 4. The adversarial instance family: exhaustive verification confirms the
//    predicted structured optimum, and an instance with one oversized
//    increment admits a non-structured optimum.
std::string check_adversarial_family() {
    const double p = 2e6, mu = 2e6, rhat = 10e6, r = 1e6;
    const hardness::HardInstance inst = hardness::construct_instance(1, 2, p, mu, rhat, r, 5);
    const auto verdict = hardness::verify_small(inst);
    if (!verdict.optimum_matches_form) {
        throw std::runtime_error(fmt("structured prediction %.9f missed the optimum %.9f",
                                     hardness::best_form_arrangement(inst).second,
                                     verdict.exhaustive_min_s));
    }
    if (!verdict.all_optima_structured) {
        throw std::runtime_error("a non-structured optimum appeared in the balanced instance");
    }

    hardness::HardInstance bad = inst;
    const std::vector<double> skew = {0.5 * p, 0.2 * p, 0.2 * p, 0.2 * p, 0.2 * p};
    for (std::size_t i = 0; i < skew.size(); ++i) {
        bad.neg_increments[i] = skew[i];
        bad.videos[static_cast<std::size_t>(bad.m_positive) + i].viewing_time_s =
            skew[i] / (mu - r);
    }
    const auto skewed = hardness::verify_small(bad);
    if (skewed.all_optima_structured) {
        throw std::runtime_error("oversized increment failed to break the structure");
    }
    return fmt("balanced optimum %.6f s structured; skewed instance admits %.0f optima, "
               "not all structured",
               verdict.exhaustive_min_s, static_cast<double>(skewed.optima_count));
}

// 5. Analytic gradients of both architectures agree with central finite
//    differences across every parameter tensor.
std::string check_gradients() {
    Rng rng(303);
    const BucketConfig bucket = standard_bucket();
    const auto set = testsupport::random_set(rng, 5, bucket.token_rate_bps);
    double worst = 0.0;
    for (neural::Arch arch : {neural::Arch::psac, neural::Arch::nsac}) {
        const auto params = neural::NetParams::init(8, arch, 33);
        const auto res = neural::grad_check(params, set, bucket, 1e-3, 77);
        worst = std::max(worst, res.max_rel);
        if (res.max_rel > kGradTol) {
            throw std::runtime_error(std::string(neural::arch_name(arch)) + " " +
                                     fmt("rel err %.3g > %.1g", res.max_rel, kGradTol));
        }
    }
    return fmt("worst rel err %.2e across both architectures", worst);
}

// 6. A small trained pointer network must clearly beat random ordering on
//    held-out users, match the interleaving heuristic, and stay near optimal.
std::string check_training_beats_baselines() {
    const BucketConfig bucket = standard_bucket();
    const auto [train_recs, test_recs] = io::split_users(corpus(), 0.2);

    auto pool = io::sample_sets(train_recs, 8, 512, 40);
    for (auto& s : pool) s = io::with_fixed_bitrate(s, 2e6);

    neural::TrainConfig cfg;
    cfg.arch = neural::Arch::psac;
    cfg.steps = 2000;
    cfg.batch = 16;
    cfg.hidden = 32;
    cfg.seed = 1;
    const neural::TrainResult trained = neural::train(pool, bucket, cfg);

    auto eval_sets = io::sample_sets(test_recs, 8, 256, 41);
    for (auto& s : eval_sets) s = io::with_fixed_bitrate(s, 2e6);

    double net = 0.0, rnd = 0.0, intl = 0.0, exact = 0.0;
    for (std::size_t s = 0; s < eval_sets.size(); ++s) {
        const auto& set = eval_sets[s];
        const VideoList list =
            neural::rollout(set, trained.params, neural::DecodeMode::greedy).list;
        net += evaluate_list(set, list, bucket).max_delay_s;
        rnd += order_rand(set, bucket, 41 + s).report.max_delay_s;
        intl += order_intl(set, bucket).report.max_delay_s;
        exact += order_exact(set, bucket).report.max_delay_s;
    }
    const double n = static_cast<double>(eval_sets.size());
    net /= n;
    rnd /= n;
    intl /= n;
    exact /= n;

    if (net > kRandFactor * rnd) {
        throw std::runtime_error(fmt("trained %.4f s vs random %.4f s (need <= %.2f x)",
                                     net, rnd, kRandFactor));
    }
    if (net > intl + kOrderTol) {
        throw std::runtime_error(fmt("trained %.4f s lost to interleaving %.4f s", net, intl));
    }
    if (net > kExactFactor * exact) {
        throw std::runtime_error(fmt("trained %.4f s vs optimal %.4f s (need <= %.2f x)",
                                     net, exact, kExactFactor));
    }
    return fmt("avg max delay: trained %.4f s, random %.4f s, optimal %.4f s", net, rnd, exact);
}

// 7. The shared-encoder architecture carries fewer parameters than the
//    twin-encoder one, and short training runs of both stay finite.
std::string check_architectures() {
    const auto psac = neural::NetParams::init(32, neural::Arch::psac, 11);
    const auto nsac = neural::NetParams::init(32, neural::Arch::nsac, 11);
    if (psac.param_count() >= nsac.param_count()) {
        throw std::runtime_error(fmt("shared-encoder %.0f params, twin-encoder %.0f",
                                     static_cast<double>(psac.param_count()),
                                     static_cast<double>(nsac.param_count())));
    }
    Rng rng(404);
    std::vector<std::vector<Video>> pool;
    for (int i = 0; i < 8; ++i) pool.push_back(testsupport::random_set(rng, 6, 2e6));
    const BucketConfig bucket = standard_bucket();
    for (neural::Arch arch : {neural::Arch::psac, neural::Arch::nsac}) {
        neural::TrainConfig cfg;
        cfg.arch = arch;
        cfg.steps = 30;
        cfg.batch = 4;
        cfg.hidden = 16;
        cfg.seed = arch == neural::Arch::psac ? 11 : 12;
        const auto res = neural::train(pool, bucket, cfg);
        for (double v : res.critic_mse) {
            if (!std::isfinite(v)) throw std::runtime_error("critic loss went non-finite");
        }
        for (double v : res.mean_max_delay) {
            if (!std::isfinite(v)) throw std::runtime_error("sampled delay went non-finite");
        }
    }
    return fmt("%.0f < %.0f parameters; 30-step runs of both stay finite",
               static_cast<double>(psac.param_count()),
               static_cast<double>(nsac.param_count()));
}

// 8. Scenario sweeps: growing the bucket can only help every algorithm, and a
//    token rate at twice the encoding rate pins delays to the burst floor.
std::string check_sweep_behaviour() {
    SweepSpec spec;
    spec.axis = SweepSpec::Axis::capacity;
    spec.start = 2.0;
    spec.stop = 10.0;
    spec.step = 1.0;
    spec.set_size = 15;
    spec.eval_sets = 256;
    spec.seed = 1;
    spec.algos = {Algo::rand, Algo::intl, Algo::grdy};
    const auto rows = run_sweep(spec, corpus());
    for (Algo a : spec.algos) {
        double prev = std::numeric_limits<double>::infinity();
        for (const SweepRow& r : rows) {
            if (r.algorithm != algo_name(a)) continue;
            if (r.avg_max_delay_s > prev * kMonotoneRise) {
                throw std::runtime_error(fmt("capacity curve rose to %.6f at C=%.0f",
                                             r.avg_max_delay_s, r.axis_value) +
                                         " (" + r.algorithm + ")");
            }
            prev = r.avg_max_delay_s;
        }
    }

    SweepSpec point = spec;
    point.axis = SweepSpec::Axis::token_rate;
    point.start = point.stop = 4.0;  // twice the fixed 2 Mbps encoding rate
    point.step = 1.0;
    const auto at2x = run_sweep(point, corpus());
    for (const SweepRow& r : at2x) {
        if (std::abs(r.avg_max_delay_s - 0.2) > kRatePointTol) {
            throw std::runtime_error(fmt("%.6f s at the 2x token rate, want 0.2 +/- %.2f",
                                         r.avg_max_delay_s, kRatePointTol) + " (" +
                                     r.algorithm + ")");
        }
    }
    return fmt("capacity curves non-increasing over %.0f points; all algorithms at "
               "0.2 s +/- %.2f for generous tokens",
               (spec.stop - spec.start) / spec.step + 1, kRatePointTol);
}

// 9. Modelling the true (lower) bitrates can never predict a longer maximum
//    delay than the fixed-rate simplification, set by set.
std::string check_actual_vs_fixed_bitrate() {
    const BucketConfig bucket = standard_bucket();
    const auto eligible = io::filter_max_bitrate(corpus(), bucket.token_rate_bps);
    const auto sets = io::sample_sets(eligible, 15, 256, 9);
    double worst_margin = -std::numeric_limits<double>::infinity();
    for (const auto& actual : sets) {
        const auto fixed = io::with_fixed_bitrate(actual, 2e6);
        const VideoList list = order_intl(fixed, bucket).list;
        const double d_actual = evaluate_list(actual, list, bucket).max_delay_s;
        const double d_fixed = evaluate_list(fixed, list, bucket).max_delay_s;
        worst_margin = std::max(worst_margin, d_actual - d_fixed);
        if (d_actual > d_fixed + kOrderTol) {
            throw std::runtime_error(fmt("a set delayed %.9f s with true rates vs %.9f fixed",
                                         d_actual, d_fixed));
        }
    }
    return fmt("true-rate max delay <= fixed-rate on all %.0f sets (worst margin %.2e s)",
               static_cast<double>(sets.size()), worst_margin);
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<std::string()> body;
    };
    const std::vector<Criterion> criteria = {
        {"closed-form delays match the fluid simulation", check_fluid_agreement},
        {"worked session examples reproduce exactly", check_worked_examples},
        {"branch-and-bound is certified optimal", check_exact_optimality},
        {"adversarial family verifies exhaustively", check_adversarial_family},
        {"backprop matches finite differences", check_gradients},
        {"trained network beats the baselines", check_training_beats_baselines},
        {"architectures sized and training stable", check_architectures},
        {"sweeps respond correctly to the knobs", check_sweep_behaviour},
        {"true bitrates never exceed the fixed model", check_actual_vs_fixed_bitrate},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string detail;
        bool ok = true;
        try {
            detail = criteria[i].body();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        std::printf("[%s] %zu/%zu %-46s %s\n", ok ? "PASS" : "FAIL", i + 1, criteria.size(),
                    criteria[i].name, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    std::printf("acceptance: %zu/%zu criteria passed\n", criteria.size() - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
