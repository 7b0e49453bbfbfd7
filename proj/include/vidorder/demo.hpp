#pragma once

#include <vector>

#include "core.hpp"

namespace vidorder {

/// Eight-video demonstration set: four videos the viewer skips after two
/// seconds and four watched well past the point where their data is fully
/// delivered. Skipped videos drain the token bucket (short watch earns few
/// tokens), watched ones refill it.
inline std::vector<Video> demo_mixed_set() {
    std::vector<Video> set;
    for (int i = 0; i < 4; ++i) {
        set.push_back({"skip" + std::to_string(i + 1), 30.0, 2e6, 2e6, 2.0});
    }
    for (int i = 0; i < 4; ++i) {
        set.push_back({"watch" + std::to_string(i + 1), 20.0, 2e6, 2e6, 30.0});
    }
    return set;
}

/// Bucket the demo set is tuned for: 4 Mbit capacity, 2 Mbps tokens,
/// 10 Mbps bursts, starting full.
inline BucketConfig demo_bucket() { return {4e6, 2e6, 10e6, 4e6}; }

/// All skipped videos first: the bucket runs dry and the tail of the skip run
/// plus the first watched video start late.
inline VideoList demo_blocked_order() { return {0, 1, 2, 3, 4, 5, 6, 7}; }

/// Skip/watch alternation: every skipped video is followed by a refill, so
/// every startup stays at the burst floor.
inline VideoList demo_interleaved_order() { return {0, 4, 1, 5, 2, 6, 3, 7}; }

}  // namespace vidorder
