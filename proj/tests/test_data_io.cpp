#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vidorder/data_io.hpp"

using namespace vidorder;
using namespace vidorder::io;

namespace {

std::vector<TraceRecord> tiny_trace() {
    std::istringstream in(
        "user_id,video_id,duration_s,bitrate_mbps,viewing_time_s\n"
        "u01,v001,30,1.5,12.5\n"
        "u01,v002,20,2,3\n"
        "u02,v003,45.5,0.8,60\n");
    return load_trace(in);
}

TraceRecord make_record(const std::string& user, const std::string& vid, double dur,
                        double rate_bps, double watch) {
    TraceRecord r;
    r.user_id = user;
    r.video_id = vid;
    r.duration_s = dur;
    r.bitrate_bps = rate_bps;
    r.viewing_time_s = watch;
    return r;
}

}  // namespace

TEST(LoadTrace, ParsesRowsAndConvertsMbps) {
    const auto records = tiny_trace();
    ASSERT_EQ(records.size(), 3u);
    EXPECT_EQ(records[0].user_id, "u01");
    EXPECT_EQ(records[0].video_id, "v001");
    EXPECT_DOUBLE_EQ(records[0].duration_s, 30.0);
    EXPECT_DOUBLE_EQ(records[0].bitrate_bps, 1.5e6);
    EXPECT_DOUBLE_EQ(records[0].viewing_time_s, 12.5);
    EXPECT_DOUBLE_EQ(records[2].bitrate_bps, 0.8e6);
}

TEST(LoadTrace, AcceptsCrLfAndEmptyBody) {
    std::istringstream in("user_id,video_id,duration_s,bitrate_mbps,viewing_time_s\r\n");
    EXPECT_TRUE(load_trace(in).empty());
}

TEST(LoadTrace, RejectsWrongHeader) {
    std::istringstream in("user,video,duration,bitrate,viewing\nu,v,1,1,1\n");
    try {
        load_trace(in);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    }
}

TEST(LoadTrace, ReportsLineNumbersForBadRows) {
    std::istringstream in(
        "user_id,video_id,duration_s,bitrate_mbps,viewing_time_s\n"
        "u01,v001,30,1.5,12.5\n"
        "u01,v002,20,2\n");
    try {
        load_trace(in);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("line 3"), std::string::npos);
        EXPECT_NE(msg.find("5 fields"), std::string::npos);
    }
}

TEST(LoadTrace, RejectsUnparsableAndNonPositiveNumbers) {
    {
        std::istringstream in(
            "user_id,video_id,duration_s,bitrate_mbps,viewing_time_s\n"
            "u01,v001,30,fast,12.5\n");
        try {
            load_trace(in);
            FAIL() << "expected ParseError";
        } catch (const ParseError& e) {
            const std::string msg = e.what();
            EXPECT_NE(msg.find("line 2"), std::string::npos);
            EXPECT_NE(msg.find("bitrate_mbps"), std::string::npos);
        }
    }
    {
        std::istringstream in(
            "user_id,video_id,duration_s,bitrate_mbps,viewing_time_s\n"
            "u01,v001,30,1.5,0\n");
        EXPECT_THROW(load_trace(in), ParseError);
    }
    {
        std::istringstream in(
            "user_id,video_id,duration_s,bitrate_mbps,viewing_time_s\n"
            ",v001,30,1.5,2\n");
        EXPECT_THROW(load_trace(in), ParseError);
    }
}

TEST(SaveTrace, RoundTripsValuesExactly) {
    std::vector<TraceRecord> records = {
        make_record("u00", "v000", 29.319999999999993, 1.23e6, 0.017),
        make_record("u01", "v001", 1.0 / 3.0, 0.857142857e6, 299.75),
    };
    std::ostringstream os;
    save_trace(records, os);
    std::istringstream in(os.str());
    const auto back = load_trace(in);
    ASSERT_EQ(back.size(), records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        EXPECT_EQ(back[i].user_id, records[i].user_id);
        EXPECT_EQ(back[i].video_id, records[i].video_id);
        EXPECT_EQ(back[i].duration_s, records[i].duration_s);
        EXPECT_EQ(back[i].bitrate_bps, records[i].bitrate_bps);
        EXPECT_EQ(back[i].viewing_time_s, records[i].viewing_time_s);
    }
}

TEST(TableStats, MatchesHandComputedQuartiles) {
    std::vector<TraceRecord> records;
    for (double d : {1.0, 2.0, 3.0, 4.0}) {
        records.push_back(make_record("u", "v" + std::to_string(d), d, d * 1e6, d));
    }
    const TraceStats s = table_stats(records);
    EXPECT_DOUBLE_EQ(s.duration_s.mean, 2.5);
    EXPECT_DOUBLE_EQ(s.duration_s.std, std::sqrt(1.25));
    EXPECT_DOUBLE_EQ(s.duration_s.min, 1.0);
    EXPECT_DOUBLE_EQ(s.duration_s.q1, 1.75);
    EXPECT_DOUBLE_EQ(s.duration_s.q2, 2.5);
    EXPECT_DOUBLE_EQ(s.duration_s.q3, 3.25);
    EXPECT_DOUBLE_EQ(s.duration_s.max, 4.0);
    // Bitrate statistics are reported in Mbps.
    EXPECT_DOUBLE_EQ(s.bitrate_mbps.q2, 2.5);
}

TEST(TableStats, SingleRowDegeneratesToConstants) {
    const TraceStats s = table_stats({make_record("u", "v", 7.0, 2e6, 3.0)});
    EXPECT_DOUBLE_EQ(s.duration_s.std, 0.0);
    EXPECT_DOUBLE_EQ(s.duration_s.min, 7.0);
    EXPECT_DOUBLE_EQ(s.duration_s.q1, 7.0);
    EXPECT_DOUBLE_EQ(s.duration_s.max, 7.0);
    EXPECT_THROW(table_stats({}), std::invalid_argument);
}

TEST(StatsJson, CarriesAllColumnsAndFields) {
    const nlohmann::json j = stats_to_json(default_trace_stats());
    for (const char* col : {"duration_s", "viewing_time_s", "bitrate_mbps"}) {
        ASSERT_TRUE(j.contains(col));
        for (const char* f : {"mean", "std", "min", "q1", "q2", "q3", "max"}) {
            EXPECT_TRUE(j[col].contains(f)) << col << "." << f;
        }
    }
    EXPECT_DOUBLE_EQ(j["viewing_time_s"]["max"].get<double>(), 299.75);
}

TEST(SynthTrace, MatchesTargetMarginals) {
    const TraceStats target = default_trace_stats();
    const auto records = synth_trace(target, 200, 60, 7);
    ASSERT_EQ(records.size(), 200u * 60u);
    const TraceStats got = table_stats(records);

    auto check_column = [](const ColumnStats& got_c, const ColumnStats& want_c,
                           const char* name) {
        auto rel_ok = [&](double got_v, double want_v, const char* field) {
            EXPECT_LE(std::abs(got_v - want_v), 0.15 * std::abs(want_v))
                << name << "." << field << ": got " << got_v << " want " << want_v;
        };
        rel_ok(got_c.q1, want_c.q1, "q1");
        rel_ok(got_c.q2, want_c.q2, "q2");
        rel_ok(got_c.q3, want_c.q3, "q3");
        EXPECT_GE(got_c.min, want_c.min - 1e-9) << name;
        EXPECT_LE(got_c.max, want_c.max + 1e-9) << name;
    };
    check_column(got.duration_s, target.duration_s, "duration_s");
    check_column(got.viewing_time_s, target.viewing_time_s, "viewing_time_s");
    check_column(got.bitrate_mbps, target.bitrate_mbps, "bitrate_mbps");
    EXPECT_LE(std::abs(got.duration_s.mean - target.duration_s.mean),
              0.15 * target.duration_s.mean);
}

TEST(SynthTrace, DeterministicPerSeedWithUniqueIds) {
    const auto a = synth_trace(default_trace_stats(), 5, 4, 42);
    const auto b = synth_trace(default_trace_stats(), 5, 4, 42);
    const auto c = synth_trace(default_trace_stats(), 5, 4, 43);
    ASSERT_EQ(a.size(), b.size());
    bool any_diff = false;
    std::set<std::string> video_ids;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].user_id, b[i].user_id);
        EXPECT_EQ(a[i].duration_s, b[i].duration_s);
        EXPECT_EQ(a[i].bitrate_bps, b[i].bitrate_bps);
        EXPECT_EQ(a[i].viewing_time_s, b[i].viewing_time_s);
        video_ids.insert(a[i].video_id);
        any_diff = any_diff || a[i].duration_s != c[i].duration_s;
    }
    EXPECT_EQ(video_ids.size(), a.size());
    EXPECT_TRUE(any_diff);
}

TEST(SynthTrace, ConstantColumnAndBadTargets) {
    TraceStats t = default_trace_stats();
    t.bitrate_mbps = {2.0, 0.0, 2.0, 2.0, 2.0, 2.0, 2.0};
    const auto records = synth_trace(t, 3, 5, 1);
    for (const TraceRecord& r : records) EXPECT_DOUBLE_EQ(r.bitrate_bps, 2e6);

    TraceStats bad = default_trace_stats();
    bad.duration_s.max = bad.duration_s.min - 1.0;  // disordered quartiles
    EXPECT_THROW(synth_trace(bad, 3, 5, 1), std::invalid_argument);
    EXPECT_THROW(synth_trace(default_trace_stats(), 0, 5, 1), std::invalid_argument);
    EXPECT_THROW(synth_trace(default_trace_stats(), 3, 0, 1), std::invalid_argument);
}

TEST(SampleSets, DrawsEligibleUsersUniformlyWithoutReplacement) {
    std::vector<TraceRecord> records;
    for (int i = 0; i < 10; ++i) {
        records.push_back(make_record("alice", "a" + std::to_string(i), 20, 2e6, 5));
    }
    for (int i = 0; i < 10; ++i) {
        records.push_back(make_record("bob", "b" + std::to_string(i), 20, 2e6, 5));
    }
    for (int i = 0; i < 3; ++i) {
        records.push_back(make_record("carol", "c" + std::to_string(i), 20, 2e6, 5));
    }
    const std::size_t draws = 4000;
    const auto sets = sample_sets(records, 5, draws, 9);
    ASSERT_EQ(sets.size(), draws);
    std::map<char, int> owner_counts;
    for (const auto& set : sets) {
        ASSERT_EQ(set.size(), 5u);
        std::set<std::string> ids;
        const char owner = set[0].id[0];
        for (const Video& v : set) {
            ids.insert(v.id);
            EXPECT_EQ(v.id[0], owner) << "set mixes users";
        }
        EXPECT_EQ(ids.size(), set.size()) << "set repeats a video";
        owner_counts[owner]++;
    }
    EXPECT_EQ(owner_counts.count('c'), 0u) << "user with too few records was drawn";
    EXPECT_NEAR(owner_counts['a'], draws / 2.0, 158.0);
    EXPECT_NEAR(owner_counts['b'], draws / 2.0, 158.0);

    const auto again = sample_sets(records, 5, 3, 9);
    const auto first = sample_sets(records, 5, 3, 9);
    for (std::size_t s = 0; s < 3; ++s) {
        for (std::size_t k = 0; k < 5; ++k) {
            EXPECT_EQ(again[s][k].id, first[s][k].id);
        }
    }
}

TEST(SampleSets, FailsWhenNoUserHasEnoughRecords) {
    std::vector<TraceRecord> records = {make_record("u", "v0", 20, 2e6, 5),
                                        make_record("u", "v1", 20, 2e6, 5)};
    EXPECT_THROW(sample_sets(records, 5, 1, 1), std::invalid_argument);
    EXPECT_THROW(sample_sets(records, 0, 1, 1), std::invalid_argument);
}

TEST(NoiseViewing, ZeroSigmaIsIdentity) {
    std::vector<std::vector<Video>> sets = {{make_video(make_record("u", "v", 20, 2e6, 5))}};
    const NoisyViewing out = noise_viewing(sets, 0.0, 3);
    EXPECT_DOUBLE_EQ(out.mae_s, 0.0);
    EXPECT_DOUBLE_EQ(out.sets[0][0].viewing_time_s, 5.0);
}

TEST(NoiseViewing, RealisedErrorTracksHalfNormalMean) {
    // Large true viewing times keep the positivity clamp inactive, so the
    // mean absolute error of the Gaussian perturbation is sigma * sqrt(2/pi).
    std::vector<std::vector<Video>> sets(500);
    for (std::size_t s = 0; s < sets.size(); ++s) {
        for (int k = 0; k < 8; ++k) {
            sets[s].push_back(
                make_video(make_record("u", "v" + std::to_string(k), 20, 2e6, 100.0)));
        }
    }
    const double sigma = 5.0;
    const NoisyViewing out = noise_viewing(sets, sigma, 17);
    double recomputed = 0.0;
    std::size_t n = 0;
    for (const auto& set : out.sets) {
        for (const Video& v : set) {
            EXPECT_GE(v.viewing_time_s, 0.01);
            recomputed += std::abs(v.viewing_time_s - 100.0);
            ++n;
        }
    }
    EXPECT_NEAR(out.mae_s, recomputed / static_cast<double>(n), 1e-12);
    EXPECT_NEAR(out.mae_s, sigma * std::sqrt(2.0 / 3.14159265358979323846), 0.05 * sigma);
}

TEST(NoiseViewing, ClampsPredictionsToStayPositive) {
    std::vector<std::vector<Video>> sets = {{}};
    for (int k = 0; k < 64; ++k) {
        sets[0].push_back(make_video(make_record("u", "v" + std::to_string(k), 20, 2e6, 0.02)));
    }
    const NoisyViewing out = noise_viewing(sets, 10.0, 5);
    bool any_clamped = false;
    for (const Video& v : out.sets[0]) {
        EXPECT_GE(v.viewing_time_s, 0.01);
        any_clamped = any_clamped || v.viewing_time_s == 0.01;
    }
    EXPECT_TRUE(any_clamped);
    EXPECT_THROW(noise_viewing(sets, -1.0, 5), std::invalid_argument);
}

TEST(SplitUsers, SplitsByUserIdDeterministically) {
    std::vector<TraceRecord> records;
    for (int u = 9; u >= 0; --u) {  // deliberately unsorted input
        for (int k = 0; k < 3; ++k) {
            records.push_back(make_record("u0" + std::to_string(u),
                                          "v" + std::to_string(u * 3 + k), 20, 2e6, 5));
        }
    }
    const auto [train, test] = split_users(records, 0.2);
    EXPECT_EQ(train.size(), 24u);
    EXPECT_EQ(test.size(), 6u);
    for (const TraceRecord& r : test) {
        EXPECT_TRUE(r.user_id == "u08" || r.user_id == "u09");
    }
    for (const TraceRecord& r : train) {
        EXPECT_TRUE(r.user_id < "u08");
    }
    const auto all_train = split_users(records, 0.0);
    EXPECT_EQ(all_train.first.size(), records.size());
    EXPECT_TRUE(all_train.second.empty());
    EXPECT_THROW(split_users(records, 1.5), std::invalid_argument);
}

TEST(MakeVideo, SetsOneSecondInitialSegmentCappedByDuration) {
    const Video v = make_video(make_record("u", "v", 30, 2e6, 5));
    EXPECT_DOUBLE_EQ(v.initial_segment_bits, 2e6);
    EXPECT_DOUBLE_EQ(v.duration_s, 30.0);
    EXPECT_DOUBLE_EQ(v.encoding_rate_bps, 2e6);
    EXPECT_DOUBLE_EQ(v.viewing_time_s, 5.0);
    EXPECT_EQ(v.id, "v");
    const Video clip = make_video(make_record("u", "w", 0.5, 2e6, 5));
    EXPECT_DOUBLE_EQ(clip.initial_segment_bits, 1e6);
    EXPECT_NO_THROW(clip.validate());
}

TEST(FixedBitrateAndFilter, RewriteAndSelectRates) {
    const auto records = tiny_trace();
    std::vector<Video> set;
    for (const TraceRecord& r : records) set.push_back(make_video(r));
    const auto fixed = with_fixed_bitrate(set, 2e6);
    ASSERT_EQ(fixed.size(), set.size());
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        EXPECT_DOUBLE_EQ(fixed[i].encoding_rate_bps, 2e6);
        EXPECT_DOUBLE_EQ(fixed[i].initial_segment_bits,
                         2e6 * std::min(1.0, set[i].duration_s));
        EXPECT_DOUBLE_EQ(fixed[i].viewing_time_s, set[i].viewing_time_s);
        EXPECT_EQ(fixed[i].id, set[i].id);
    }
    EXPECT_THROW(with_fixed_bitrate(set, 0.0), std::invalid_argument);

    const auto kept = filter_max_bitrate(records, 1.5e6);
    ASSERT_EQ(kept.size(), 2u);
    EXPECT_EQ(kept[0].video_id, "v001");
    EXPECT_EQ(kept[1].video_id, "v003");
}
