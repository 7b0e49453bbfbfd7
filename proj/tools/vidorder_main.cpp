// vidorder: token-bucket delivery model for short-video feeds and tooling to
// order video sets for minimal worst-case startup delay.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vidorder/core.hpp"
#include "vidorder/data_io.hpp"
#include "vidorder/demo.hpp"
#include "vidorder/fluid.hpp"
#include "vidorder/hardness.hpp"
#include "vidorder/neural.hpp"
#include "vidorder/orderers.hpp"
#include "vidorder/svg.hpp"
#include "vidorder/sweep.hpp"

namespace {

using namespace vidorder;

struct BucketFlags {
    double capacity_mbits = 4.0;
    double token_rate_mbps = 2.0;
    double burst_rate_mbps = 10.0;
    std::optional<double> initial_tokens_mbits;

    void attach(CLI::App* app) {
        app->add_option("--capacity-mbits", capacity_mbits, "Bucket capacity in Mbit")
            ->capture_default_str();
        app->add_option("--token-rate-mbps", token_rate_mbps, "Token fill rate in Mbps")
            ->capture_default_str();
        app->add_option("--burst-rate-mbps", burst_rate_mbps, "Burst transmission rate in Mbps")
            ->capture_default_str();
        app->add_option("--initial-tokens-mbits", initial_tokens_mbits,
                        "Token level at session start in Mbit (default: full bucket)");
    }
    BucketConfig bucket() const {
        BucketConfig b;
        b.capacity_bits = capacity_mbits * kMegabit;
        b.token_rate_bps = token_rate_mbps * kMegabit;
        b.burst_rate_bps = burst_rate_mbps * kMegabit;
        b.initial_tokens_bits =
            (initial_tokens_mbits ? *initial_tokens_mbits : capacity_mbits) * kMegabit;
        b.validate();
        return b;
    }
};

struct TraceFlags {
    std::string trace_path;
    std::size_t synth_users = 200;
    std::size_t synth_per_user = 60;
    std::uint64_t synth_seed = 7;

    void attach(CLI::App* app) {
        app->add_option("--trace", trace_path, "Viewing-trace CSV (default: synthesise one)");
        app->add_option("--synth-users", synth_users, "Users in the synthesised trace")
            ->capture_default_str();
        app->add_option("--synth-per-user", synth_per_user, "Records per synthesised user")
            ->capture_default_str();
        app->add_option("--synth-seed", synth_seed, "Seed for the synthesised trace")
            ->capture_default_str();
    }
    std::vector<io::TraceRecord> records() const {
        if (!trace_path.empty()) return io::load_trace_file(trace_path);
        return io::synth_trace(io::default_trace_stats(), synth_users, synth_per_user, synth_seed);
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    return os;
}

void print_report(const DelayReport& rep) {
    std::printf("%-4s %-10s %14s %16s\n", "pos", "video", "delay_s", "tokens_mbit");
    for (const DelayEntry& e : rep.per_video) {
        std::printf("%-4zu %-10s %14.6f %16.6f\n", e.position, e.video_id.c_str(),
                    e.startup_delay_s, e.tokens_at_start_bits / kMegabit);
    }
    std::printf("max startup delay: %.6f s\n", rep.max_delay_s);
}

SweepModels load_models(const std::vector<std::string>& paths,
                        std::vector<neural::NetParams>& storage) {
    SweepModels models;
    storage.reserve(paths.size());
    for (const std::string& p : paths) {
        storage.push_back(neural::load_params(p));
        const neural::NetParams& net = storage.back();
        auto& slot = net.arch == neural::Arch::psac ? models.psac : models.nsac;
        if (slot) {
            throw std::invalid_argument("two checkpoints share the architecture '" +
                                        std::string(neural::arch_name(net.arch)) + "'");
        }
        slot = &net;
    }
    return models;
}

int cmd_simulate(const BucketFlags& bf, const TraceFlags& tf, const std::string& order_name,
                 std::size_t set_size, std::uint64_t seed, const std::string& out_csv,
                 const std::string& out_svg, bool use_demo) {
    const BucketConfig bucket = use_demo ? demo_bucket() : bf.bucket();
    std::vector<Video> set;
    VideoList order;
    if (use_demo) {
        set = demo_mixed_set();
        if (order_name == "blocked") {
            order = demo_blocked_order();
        } else if (order_name == "interleaved") {
            order = demo_interleaved_order();
        } else {
            throw std::invalid_argument("demo orders: blocked | interleaved");
        }
    } else {
        const auto sets = io::sample_sets(tf.records(), set_size, 1, seed);
        set = sets.front();
        order.resize(set.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
    }
    const fluid::SimResult sim = fluid::simulate(set, order, bucket);
    print_report(sim.report);
    if (!out_csv.empty()) {
        auto os = open_out(out_csv);
        fluid::write_trace_csv(sim.trace, os);
        std::printf("token trace -> %s\n", out_csv.c_str());
    }
    if (!out_svg.empty()) {
        ChartSeries s{"token level (Mbit)", {}};
        for (const auto& b : sim.trace.breakpoints) {
            s.points.push_back({b.time_s, b.tokens_bits / kMegabit});
        }
        auto os = open_out(out_svg);
        write_line_chart(os, "token bucket level over the session", "time (s)",
                         "tokens (Mbit)", {s});
        std::printf("token chart -> %s\n", out_svg.c_str());
    }
    return 0;
}

int cmd_order(const BucketFlags& bf, const TraceFlags& tf, std::vector<std::string> algo_names,
              std::size_t set_size, std::uint64_t seed, bool use_demo, bool as_json,
              const std::vector<std::string>& checkpoints) {
    const BucketConfig bucket = use_demo ? demo_bucket() : bf.bucket();
    std::vector<Video> set;
    if (use_demo) {
        set = demo_mixed_set();
    } else {
        set = io::sample_sets(tf.records(), set_size, 1, seed).front();
    }
    if (algo_names.empty()) algo_names = {"rand", "intl", "grdy", "exact"};
    std::vector<neural::NetParams> storage;
    const SweepModels models = load_models(checkpoints, storage);

    nlohmann::json out = nlohmann::json::array();
    for (const std::string& name : algo_names) {
        const Algo a = parse_algo(name);
        OrderResult res;
        switch (a) {
            case Algo::rand: res = order_rand(set, bucket, seed); break;
            case Algo::intl: res = order_intl(set, bucket); break;
            case Algo::grdy: res = order_grdy(set, bucket); break;
            case Algo::exact: res = order_exact(set, bucket); break;
            case Algo::psac:
            case Algo::nsac: {
                const neural::NetParams* p = a == Algo::psac ? models.psac : models.nsac;
                if (!p) throw std::invalid_argument("'" + name + "' needs --checkpoint");
                res = neural::order_neural(set, bucket, *p);
                break;
            }
        }
        if (as_json) {
            nlohmann::json j;
            j["algorithm"] = res.algorithm;
            j["max_delay_s"] = res.report.max_delay_s;
            j["order"] = res.list;
            j["optimal"] = res.optimal;
            j["wall_time_s"] = res.wall_time_s;
            out.push_back(j);
        } else {
            std::printf("== %s (max delay %.6f s%s)\n", res.algorithm.c_str(),
                        res.report.max_delay_s, res.optimal ? ", proven optimal" : "");
            std::printf("order:");
            for (std::size_t idx : res.list) std::printf(" %s", set[idx].id.c_str());
            std::printf("\n");
            print_report(res.report);
        }
    }
    if (as_json) std::printf("%s\n", out.dump(2).c_str());
    return 0;
}

int cmd_train(const BucketFlags& bf, const TraceFlags& tf, neural::TrainConfig cfg,
              std::size_t set_size, std::size_t pool_sets, double holdout,
              const std::string& bitrate_mode, double fixed_rate_mbps, const std::string& out_path) {
    const BucketConfig bucket = bf.bucket();
    const auto records = tf.records();
    const auto [train_recs, test_recs] = io::split_users(records, holdout);
    (void)test_recs;
    auto use = bitrate_mode == "actual"
                   ? io::filter_max_bitrate(train_recs, bucket.token_rate_bps)
                   : train_recs;
    auto pool = io::sample_sets(use, set_size, pool_sets, cfg.seed ^ 0xa5a5a5a5ull);
    if (bitrate_mode != "actual") {
        for (auto& s : pool) s = io::with_fixed_bitrate(s, fixed_rate_mbps * kMegabit);
    }
    std::printf("training %s: %d steps, batch %d, hidden %d, %zu pool sets of %zu videos\n",
                neural::arch_name(cfg.arch), cfg.steps, cfg.batch, cfg.hidden, pool.size(),
                set_size);
    const neural::TrainResult result = neural::train(pool, bucket, cfg);
    const auto& mse = result.critic_mse;
    if (!mse.empty()) {
        const std::size_t head = std::min<std::size_t>(50, mse.size());
        double head_avg = 0.0;
        for (std::size_t i = 0; i < head; ++i) head_avg += mse[i] / head;
        std::printf("critic mse: first-50 avg %.6g, final %.6g\n", head_avg, mse.back());
        std::printf("sampled mean max delay: first %.6g s, final %.6g s\n",
                    result.mean_max_delay.front(), result.mean_max_delay.back());
    }
    neural::save_params(result.params, out_path);
    std::printf("checkpoint (%zu parameters) -> %s\n", result.params.param_count(),
                out_path.c_str());
    return 0;
}

int cmd_hardness(int m_positive, int y, double p_mbits, double token_rate_mbps,
                 double burst_rate_mbps, double encoding_rate_mbps, std::uint64_t seed,
                 bool verify, const std::string& out_csv) {
    const auto inst = hardness::construct_instance(m_positive, y, p_mbits * kMegabit,
                                                   token_rate_mbps * kMegabit,
                                                   burst_rate_mbps * kMegabit,
                                                   encoding_rate_mbps * kMegabit, seed);
    std::printf("instance: %d positive + %zu negative videos, capacity %.6g Mbit, "
                "segment %.6g Mbit\n",
                inst.m_positive, inst.videos.size() - static_cast<std::size_t>(inst.m_positive),
                inst.bucket.capacity_bits / kMegabit,
                inst.videos.front().initial_segment_bits / kMegabit);
    const auto [best, value] = hardness::best_form_arrangement(inst);
    std::printf("best structured order: predicted max delay %.9f s\n", value);
    const VideoList list = hardness::build_form_list(inst, best);
    const DelayReport rep = evaluate_list(inst.videos, list, inst.bucket);
    std::printf("that order evaluated:  max delay %.9f s\n", rep.max_delay_s);
    if (verify) {
        const auto verdict = hardness::verify_small(inst);
        std::printf("exhaustive optimum: %.9f s over %zu optimal orders\n",
                    verdict.exhaustive_min_s, verdict.optima_count);
        std::printf("optimum matches structured prediction: %s\n",
                    verdict.optimum_matches_form ? "yes" : "NO");
        std::printf("every optimal order structured: %s\n",
                    verdict.all_optima_structured ? "yes" : "NO");
    }
    if (!out_csv.empty()) {
        std::vector<io::TraceRecord> rows;
        for (const Video& v : inst.videos) {
            rows.push_back({"hard", v.id, v.duration_s, v.encoding_rate_bps, v.viewing_time_s});
        }
        auto os = open_out(out_csv);
        io::save_trace(rows, os);
        std::printf("videos -> %s\n", out_csv.c_str());
    }
    return 0;
}

int cmd_stats(const TraceFlags& tf, const std::string& out_json) {
    const auto records = tf.records();
    const auto stats = io::table_stats(records);
    const nlohmann::json j = io::stats_to_json(stats);
    if (out_json.empty()) {
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        auto os = open_out(out_json);
        os << j.dump(2) << '\n';
        std::printf("stats -> %s\n", out_json.c_str());
    }
    return 0;
}

int cmd_sweep(SweepSpec spec, const TraceFlags& tf, const std::vector<std::string>& algo_names,
              const std::vector<std::string>& checkpoints, const std::string& out_csv,
              const std::string& out_svg) {
    spec.algos.clear();
    for (const std::string& s : algo_names) spec.algos.push_back(parse_algo(s));
    if (spec.algos.empty()) spec.algos = {Algo::rand, Algo::intl, Algo::grdy};
    std::vector<neural::NetParams> storage;
    const SweepModels models = load_models(checkpoints, storage);
    const auto rows = run_sweep(spec, tf.records(), models);
    if (!out_csv.empty()) {
        auto os = open_out(out_csv);
        write_sweep_csv(rows, os);
        std::printf("sweep rows -> %s\n", out_csv.c_str());
    } else {
        write_sweep_csv(rows, std::cout);
    }
    if (!out_svg.empty()) {
        auto os = open_out(out_svg);
        write_sweep_svg(rows, spec.axis, os);
        std::printf("sweep chart -> %s\n", out_svg.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"token-bucket short-video delivery model and list orderers"};
    app.require_subcommand(1);

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "fluid-simulate one session and export the token trace");
    BucketFlags sim_bucket;
    TraceFlags sim_trace;
    sim_bucket.attach(sim);
    sim_trace.attach(sim);
    bool sim_demo = false;
    std::string sim_order = "blocked";
    std::size_t sim_n = 15;
    std::uint64_t sim_seed = 1;
    std::string sim_csv, sim_svg;
    sim->add_flag("--demo", sim_demo, "Use the built-in 8-video demonstration set");
    sim->add_option("--order", sim_order, "Demo order: blocked | interleaved")
        ->capture_default_str();
    sim->add_option("--set-size", sim_n, "Videos per sampled set")->capture_default_str();
    sim->add_option("--seed", sim_seed, "Sampling seed")->capture_default_str();
    sim->add_option("--out-csv", sim_csv, "Write the token trace as CSV");
    sim->add_option("--out-svg", sim_svg, "Write a token-level chart as SVG");

    // ---- order ----
    auto* ord = app.add_subcommand("order", "order one video set with the chosen algorithms");
    BucketFlags ord_bucket;
    TraceFlags ord_trace;
    ord_bucket.attach(ord);
    ord_trace.attach(ord);
    bool ord_demo = false;
    bool ord_json = false;
    std::vector<std::string> ord_algos;
    std::vector<std::string> ord_ckpts;
    std::size_t ord_n = 15;
    std::uint64_t ord_seed = 1;
    ord->add_flag("--demo", ord_demo, "Use the built-in 8-video demonstration set");
    ord->add_flag("--json", ord_json, "Emit JSON instead of tables");
    ord->add_option("--algo", ord_algos, "rand | intl | grdy | exact | psac | nsac (repeatable)");
    ord->add_option("--checkpoint", ord_ckpts, "Model checkpoint for psac/nsac (repeatable)");
    ord->add_option("--set-size", ord_n, "Videos per sampled set")->capture_default_str();
    ord->add_option("--seed", ord_seed, "Sampling seed")->capture_default_str();

    // ---- train ----
    auto* tr = app.add_subcommand("train", "train a pointer-network actor-critic orderer");
    BucketFlags tr_bucket;
    TraceFlags tr_trace;
    tr_bucket.attach(tr);
    tr_trace.attach(tr);
    neural::TrainConfig tr_cfg;
    std::string tr_arch = "psac";
    std::size_t tr_n = 15;
    std::size_t tr_pool = 2048;
    double tr_holdout = 0.2;
    std::string tr_mode = "fixed";
    double tr_fixed_rate = 2.0;
    std::string tr_out = "model.ckpt";
    bool tr_desk = false;
    tr->add_option("--arch", tr_arch, "psac (shared encoder) | nsac (separate critic)")
        ->capture_default_str();
    tr->add_option("--steps", tr_cfg.steps, "Optimisation steps")->capture_default_str();
    tr->add_option("--batch", tr_cfg.batch, "Sets sampled per step")->capture_default_str();
    tr->add_option("--hidden", tr_cfg.hidden, "Hidden width")->capture_default_str();
    tr->add_option("--alpha", tr_cfg.alpha, "Adam step size")->capture_default_str();
    tr->add_option("--seed", tr_cfg.seed, "Training seed")->capture_default_str();
    auto* tr_n_opt = tr->add_option("--set-size", tr_n, "Videos per training set");
    tr->add_option("--sets", tr_pool, "Training pool size")->capture_default_str();
    tr->add_option("--holdout", tr_holdout, "User share held out of training")
        ->capture_default_str();
    tr->add_option("--bitrate-mode", tr_mode, "fixed | actual")->capture_default_str();
    tr->add_option("--fixed-rate-mbps", tr_fixed_rate, "Rate used in fixed mode")
        ->capture_default_str();
    tr->add_option("--out", tr_out, "Checkpoint output path")->capture_default_str();
    tr->add_flag("--desk-scale", tr_desk,
                 "Small profile (steps 2000, batch 16, hidden 32, set size 8)");

    // ---- eval ----
    auto* ev = app.add_subcommand("eval", "evaluate algorithms on sampled sets");
    BucketFlags ev_bucket;
    TraceFlags ev_trace;
    ev_bucket.attach(ev);
    ev_trace.attach(ev);
    std::vector<std::string> ev_algos;
    std::vector<std::string> ev_ckpts;
    int ev_n = 15;
    int ev_sets = 256;
    std::uint64_t ev_seed = 1;
    std::string ev_mode = "fixed";
    double ev_fixed_rate = 2.0;
    double ev_sigma = 0.0;
    double ev_holdout = 0.0;
    ev->add_option("--algo", ev_algos, "Algorithms to compare (repeatable)");
    ev->add_option("--checkpoint", ev_ckpts, "Model checkpoint (repeatable)");
    ev->add_option("--set-size", ev_n, "Videos per set")->capture_default_str();
    ev->add_option("--sets", ev_sets, "Evaluation sets")->capture_default_str();
    ev->add_option("--seed", ev_seed, "Sampling seed")->capture_default_str();
    ev->add_option("--bitrate-mode", ev_mode, "fixed | actual")->capture_default_str();
    ev->add_option("--fixed-rate-mbps", ev_fixed_rate, "Rate used in fixed mode")
        ->capture_default_str();
    ev->add_option("--sigma-seconds", ev_sigma, "Viewing-time prediction noise")
        ->capture_default_str();
    ev->add_option("--holdout", ev_holdout,
                   "Evaluate only on this held-out user share (0: everyone)")
        ->capture_default_str();

    // ---- sweep ----
    auto* sw = app.add_subcommand("sweep", "sweep one scenario knob and export curves");
    BucketFlags sw_bucket;
    TraceFlags sw_trace;
    sw_bucket.attach(sw);
    sw_trace.attach(sw);
    std::string sw_axis = "capacity";
    SweepSpec sw_spec;
    std::vector<std::string> sw_algos;
    std::vector<std::string> sw_ckpts;
    std::string sw_csv, sw_svg, sw_mode = "fixed";
    sw->add_option("--axis", sw_axis,
                   "capacity | token_rate | set_size | initial_tokens | noise_sigma")
        ->capture_default_str();
    sw->add_option("--start", sw_spec.start, "First axis value")->capture_default_str();
    sw->add_option("--stop", sw_spec.stop, "Last axis value")->capture_default_str();
    sw->add_option("--step", sw_spec.step, "Axis increment")->capture_default_str();
    sw->add_option("--set-size", sw_spec.set_size, "Videos per set")->capture_default_str();
    sw->add_option("--sets", sw_spec.eval_sets, "Evaluation sets per point")
        ->capture_default_str();
    sw->add_option("--seed", sw_spec.seed, "Sampling seed")->capture_default_str();
    sw->add_option("--bitrate-mode", sw_mode, "fixed | actual")->capture_default_str();
    sw->add_option("--fixed-rate-mbps", sw_spec.fixed_rate_mbps, "Rate used in fixed mode")
        ->capture_default_str();
    sw->add_option("--sigma-seconds", sw_spec.sigma_s, "Viewing-time prediction noise")
        ->capture_default_str();
    sw->add_option("--algo", sw_algos, "Algorithms to compare (repeatable)");
    sw->add_option("--checkpoint", sw_ckpts, "Model checkpoint (repeatable)");
    sw->add_option("--out-csv", sw_csv, "Write rows as CSV");
    sw->add_option("--out-svg", sw_svg, "Write the chart as SVG");

    // ---- hardness ----
    auto* hd = app.add_subcommand("hardness",
                                  "construct an adversarial instance family and verify it");
    int hd_m = 1;
    int hd_y = 2;
    double hd_p = 1.6;
    double hd_mu = 2.0;
    double hd_rhat = 10.0;
    double hd_r = 1.0;
    std::uint64_t hd_seed = 0;
    bool hd_verify = false;
    std::string hd_csv;
    hd->add_option("--m-positive", hd_m, "Positive-gain videos M")->capture_default_str();
    hd->add_option("--y", hd_y, "Interleave factor Y (>= 2)")->capture_default_str();
    hd->add_option("--p-mbits", hd_p, "Required start level P in Mbit")->capture_default_str();
    hd->add_option("--token-rate-mbps", hd_mu, "Token rate in Mbps")->capture_default_str();
    hd->add_option("--burst-rate-mbps", hd_rhat, "Burst rate in Mbps")->capture_default_str();
    hd->add_option("--encoding-rate-mbps", hd_r, "Shared encoding rate in Mbps")
        ->capture_default_str();
    hd->add_option("--seed", hd_seed, "Seed for the negative increments")->capture_default_str();
    hd->add_flag("--verify", hd_verify, "Exhaustively verify (instances up to 9 videos)");
    hd->add_option("--out-csv", hd_csv, "Write the instance's videos as a trace CSV");

    // ---- stats ----
    auto* st = app.add_subcommand("stats", "summarise a viewing trace (or the synthesiser)");
    TraceFlags st_trace;
    st_trace.attach(st);
    std::string st_json;
    st->add_option("--out-json", st_json, "Write the summary JSON here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            return cmd_simulate(sim_bucket, sim_trace, sim_order, sim_n, sim_seed, sim_csv,
                                sim_svg, sim_demo);
        }
        if (ord->parsed()) {
            return cmd_order(ord_bucket, ord_trace, ord_algos, ord_n, ord_seed, ord_demo,
                             ord_json, ord_ckpts);
        }
        if (tr->parsed()) {
            if (tr_desk) {
                const neural::TrainConfig desk = neural::TrainConfig::desk_scale();
                if (tr->count("--steps") == 0) tr_cfg.steps = desk.steps;
                if (tr->count("--batch") == 0) tr_cfg.batch = desk.batch;
                if (tr->count("--hidden") == 0) tr_cfg.hidden = desk.hidden;
                if (tr_n_opt->count() == 0) tr_n = 8;
            }
            tr_cfg.arch = tr_arch == "nsac" ? neural::Arch::nsac : neural::Arch::psac;
            if (tr_arch != "psac" && tr_arch != "nsac") {
                throw std::invalid_argument("--arch must be psac or nsac");
            }
            return cmd_train(tr_bucket, tr_trace, tr_cfg, tr_n, tr_pool, tr_holdout, tr_mode,
                             tr_fixed_rate, tr_out);
        }
        if (ev->parsed()) {
            SweepSpec spec;
            spec.axis = SweepSpec::Axis::capacity;
            spec.start = spec.stop = ev_bucket.capacity_mbits;
            spec.step = 1.0;
            spec.capacity_mbits = ev_bucket.capacity_mbits;
            spec.token_rate_mbps = ev_bucket.token_rate_mbps;
            spec.burst_rate_mbps = ev_bucket.burst_rate_mbps;
            spec.initial_tokens_mbits = ev_bucket.initial_tokens_mbits;
            spec.set_size = ev_n;
            spec.eval_sets = ev_sets;
            spec.seed = ev_seed;
            spec.actual_bitrate = ev_mode == "actual";
            spec.fixed_rate_mbps = ev_fixed_rate;
            spec.sigma_s = ev_sigma;
            spec.algos.clear();
            for (const auto& s : ev_algos) spec.algos.push_back(parse_algo(s));
            if (spec.algos.empty()) spec.algos = {Algo::rand, Algo::intl, Algo::grdy};
            std::vector<neural::NetParams> storage;
            const SweepModels models = load_models(ev_ckpts, storage);
            auto records = ev_trace.records();
            if (ev_holdout > 0.0) records = io::split_users(records, ev_holdout).second;
            const auto rows = run_sweep(spec, records, models);
            std::printf("%-8s %18s %14s\n", "algo", "avg_max_delay_s", "std_s");
            for (const auto& r : rows) {
                std::printf("%-8s %18.6f %14.6f\n", r.algorithm.c_str(), r.avg_max_delay_s,
                            r.std_s);
            }
            return 0;
        }
        if (sw->parsed()) {
            sw_spec.axis = parse_axis(sw_axis);
            sw_spec.capacity_mbits = sw_bucket.capacity_mbits;
            sw_spec.token_rate_mbps = sw_bucket.token_rate_mbps;
            sw_spec.burst_rate_mbps = sw_bucket.burst_rate_mbps;
            sw_spec.initial_tokens_mbits = sw_bucket.initial_tokens_mbits;
            sw_spec.actual_bitrate = sw_mode == "actual";
            return cmd_sweep(sw_spec, sw_trace, sw_algos, sw_ckpts, sw_csv, sw_svg);
        }
        if (hd->parsed()) {
            return cmd_hardness(hd_m, hd_y, hd_p, hd_mu, hd_rhat, hd_r, hd_seed, hd_verify,
                                hd_csv);
        }
        if (st->parsed()) {
            return cmd_stats(st_trace, st_json);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
