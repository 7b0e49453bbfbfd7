#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "orderers.hpp"
#include "rng.hpp"

namespace vidorder::neural {

/// Dense row-major matrix of doubles (cols == 1 for vectors).
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return v[static_cast<std::size_t>(i) * cols + j]; }
    double* row(int i) { return v.data() + static_cast<std::size_t>(i) * cols; }
    const double* row(int i) const { return v.data() + static_cast<std::size_t>(i) * cols; }
    std::size_t size() const { return v.size(); }
};

struct LstmParams {
    Tensor wx;  // 4m x in
    Tensor wh;  // 4m x m
    Tensor b;   // 4m x 1
};

/// Actor-critic wiring: `psac` shares the embedding and encoder between actor
/// and critic; `nsac` gives the critic an independent embedding and encoder.
enum class Arch { psac, nsac };

inline const char* arch_name(Arch a) { return a == Arch::psac ? "psac" : "nsac"; }

inline constexpr int kFeatureDim = 4;
// Feature scales: roughly the reference-trace magnitudes, so normalised
// inputs land near [0, 2].
inline constexpr double kTimeScale = 30.0;   // seconds
inline constexpr double kRateScale = 2e6;    // bits/second

/// All learnable parameters of one model.
struct NetParams {
    Arch arch = Arch::psac;
    int hidden = 0;

    Tensor embed_w, embed_b;  // m x 4, m x 1
    LstmParams enc;
    Tensor dec_start;         // m x 1, learned first decoder input
    LstmParams dec;
    Tensor att_key, att_query, att_v;  // m x m, m x m, m x 1
    Tensor crit_w1, crit_b1, crit_w2, crit_b2;  // m x m, m, 1 x m, 1
    // nsac-only critic twins (empty under psac)
    Tensor c_embed_w, c_embed_b;
    LstmParams c_enc;

    std::vector<std::pair<const char*, Tensor*>> entries() {
        std::vector<std::pair<const char*, Tensor*>> e = {
            {"embed_w", &embed_w},     {"embed_b", &embed_b},
            {"enc_wx", &enc.wx},       {"enc_wh", &enc.wh},       {"enc_b", &enc.b},
            {"dec_start", &dec_start},
            {"dec_wx", &dec.wx},       {"dec_wh", &dec.wh},       {"dec_b", &dec.b},
            {"att_key", &att_key},     {"att_query", &att_query}, {"att_v", &att_v},
            {"crit_w1", &crit_w1},     {"crit_b1", &crit_b1},
            {"crit_w2", &crit_w2},     {"crit_b2", &crit_b2},
        };
        if (arch == Arch::nsac) {
            e.push_back({"c_embed_w", &c_embed_w});
            e.push_back({"c_embed_b", &c_embed_b});
            e.push_back({"c_enc_wx", &c_enc.wx});
            e.push_back({"c_enc_wh", &c_enc.wh});
            e.push_back({"c_enc_b", &c_enc.b});
        }
        return e;
    }
    std::vector<std::pair<const char*, const Tensor*>> entries() const {
        std::vector<std::pair<const char*, const Tensor*>> e = {
            {"embed_w", &embed_w},     {"embed_b", &embed_b},
            {"enc_wx", &enc.wx},       {"enc_wh", &enc.wh},       {"enc_b", &enc.b},
            {"dec_start", &dec_start},
            {"dec_wx", &dec.wx},       {"dec_wh", &dec.wh},       {"dec_b", &dec.b},
            {"att_key", &att_key},     {"att_query", &att_query}, {"att_v", &att_v},
            {"crit_w1", &crit_w1},     {"crit_b1", &crit_b1},
            {"crit_w2", &crit_w2},     {"crit_b2", &crit_b2},
        };
        if (arch == Arch::nsac) {
            e.push_back({"c_embed_w", &c_embed_w});
            e.push_back({"c_embed_b", &c_embed_b});
            e.push_back({"c_enc_wx", &c_enc.wx});
            e.push_back({"c_enc_wh", &c_enc.wh});
            e.push_back({"c_enc_b", &c_enc.b});
        }
        return e;
    }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (auto& [name, t] : entries()) n += t->size();
        return n;
    }

    /// Zero-valued parameter set with the shapes of this architecture.
    static NetParams shaped(int m, Arch arch) {
        if (m < 1) throw std::invalid_argument("model: hidden size must be >= 1");
        NetParams p;
        p.arch = arch;
        p.hidden = m;
        p.embed_w = Tensor(m, kFeatureDim);
        p.embed_b = Tensor(m, 1);
        auto lstm = [m](int in) {
            LstmParams l;
            l.wx = Tensor(4 * m, in);
            l.wh = Tensor(4 * m, m);
            l.b = Tensor(4 * m, 1);
            return l;
        };
        p.enc = lstm(m);
        p.dec_start = Tensor(m, 1);
        p.dec = lstm(m);
        p.att_key = Tensor(m, m);
        p.att_query = Tensor(m, m);
        p.att_v = Tensor(m, 1);
        p.crit_w1 = Tensor(m, m);
        p.crit_b1 = Tensor(m, 1);
        p.crit_w2 = Tensor(1, m);
        p.crit_b2 = Tensor(1, 1);
        if (arch == Arch::nsac) {
            p.c_embed_w = Tensor(m, kFeatureDim);
            p.c_embed_b = Tensor(m, 1);
            p.c_enc = lstm(m);
        }
        return p;
    }

    /// Uniform init in [-1/sqrt(m), 1/sqrt(m)] for every parameter.
    static NetParams init(int m, Arch arch, std::uint64_t seed) {
        NetParams p = shaped(m, arch);
        Rng rng(seed);
        const double bound = 1.0 / std::sqrt(static_cast<double>(m));
        for (auto& [name, t] : p.entries()) {
            for (double& x : t->v) x = rng.uniform(-bound, bound);
        }
        return p;
    }
};

/// Normalised feature rows [duration, rate, segment, viewing] for a set.
inline Tensor video_features(const std::vector<Video>& set) {
    Tensor f(static_cast<int>(set.size()), kFeatureDim);
    for (int i = 0; i < f.rows; ++i) {
        const Video& v = set[static_cast<std::size_t>(i)];
        f(i, 0) = v.duration_s / kTimeScale;
        f(i, 1) = v.encoding_rate_bps / kRateScale;
        f(i, 2) = v.initial_segment_bits / kRateScale;
        f(i, 3) = v.viewing_time_s / kTimeScale;
    }
    return f;
}

namespace detail {

inline void affine_rows(const Tensor& w, const Tensor& b, const Tensor& x, Tensor& out) {
    // out.row(i) = w * x.row(i) + b, for every row i of x.
    for (int i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        double* oi = out.row(i);
        for (int a = 0; a < w.rows; ++a) {
            double acc = b.v[static_cast<std::size_t>(a)];
            const double* wr = w.row(a);
            for (int j = 0; j < w.cols; ++j) acc += wr[j] * xi[j];
            oi[a] = acc;
        }
    }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmCache {
    int steps = 0, in_dim = 0, m = 0;
    Tensor x;                          // steps x in
    Tensor gi, gf, gg, go, c, tc, h;   // steps x m
};

inline void lstm_cell(const LstmParams& p, int in_dim, int m, const double* x,
                      const double* hprev, const double* cprev, double* a4m, double* gi,
                      double* gf, double* gg, double* go, double* cc, double* tc, double* hh) {
    for (int row = 0; row < 4 * m; ++row) {
        double acc = p.b.v[static_cast<std::size_t>(row)];
        const double* wxr = p.wx.row(row);
        for (int j = 0; j < in_dim; ++j) acc += wxr[j] * x[j];
        const double* whr = p.wh.row(row);
        for (int j = 0; j < m; ++j) acc += whr[j] * hprev[j];
        a4m[row] = acc;
    }
    for (int k = 0; k < m; ++k) {
        gi[k] = sigmoid(a4m[k]);
        gf[k] = sigmoid(a4m[m + k]);
        gg[k] = std::tanh(a4m[2 * m + k]);
        go[k] = sigmoid(a4m[3 * m + k]);
        cc[k] = gf[k] * cprev[k] + gi[k] * gg[k];
        tc[k] = std::tanh(cc[k]);
        hh[k] = go[k] * tc[k];
    }
}

/// Backward through one cell. `dh` and `dc_in` are the incoming gradients on
/// h_t and c_t; `dx`, `dhprev`, `dcprev` are overwritten.
inline void lstm_cell_backward(const LstmParams& p, int in_dim, int m, const double* x,
                               const double* hprev, const double* cprev, const double* gi,
                               const double* gf, const double* gg, const double* go,
                               const double* tc, const double* dh, const double* dc_in,
                               LstmParams& gp, double* da4m, double* dx, double* dhprev,
                               double* dcprev) {
    for (int k = 0; k < m; ++k) {
        const double dok = dh[k] * tc[k];
        const double dck = dc_in[k] + dh[k] * go[k] * (1.0 - tc[k] * tc[k]);
        const double dik = dck * gg[k];
        const double dgk = dck * gi[k];
        const double dfk = dck * cprev[k];
        dcprev[k] = dck * gf[k];
        da4m[k] = dik * gi[k] * (1.0 - gi[k]);
        da4m[m + k] = dfk * gf[k] * (1.0 - gf[k]);
        da4m[2 * m + k] = dgk * (1.0 - gg[k] * gg[k]);
        da4m[3 * m + k] = dok * go[k] * (1.0 - go[k]);
    }
    std::fill(dx, dx + in_dim, 0.0);
    std::fill(dhprev, dhprev + m, 0.0);
    for (int row = 0; row < 4 * m; ++row) {
        const double g = da4m[row];
        double* gwx = gp.wx.row(row);
        const double* wxr = p.wx.row(row);
        for (int j = 0; j < in_dim; ++j) {
            gwx[j] += g * x[j];
            dx[j] += wxr[j] * g;
        }
        double* gwh = gp.wh.row(row);
        const double* whr = p.wh.row(row);
        for (int j = 0; j < m; ++j) {
            gwh[j] += g * hprev[j];
            dhprev[j] += whr[j] * g;
        }
        gp.b.v[static_cast<std::size_t>(row)] += g;
    }
}

/// Full-sequence forward with zero initial state.
inline LstmCache lstm_forward(const LstmParams& p, const Tensor& xs) {
    LstmCache c;
    c.steps = xs.rows;
    c.in_dim = xs.cols;
    c.m = p.wh.cols;
    c.x = xs;
    for (Tensor* t : {&c.gi, &c.gf, &c.gg, &c.go, &c.c, &c.tc, &c.h}) {
        *t = Tensor(c.steps, c.m);
    }
    std::vector<double> a(static_cast<std::size_t>(4) * c.m);
    std::vector<double> zero(static_cast<std::size_t>(c.m), 0.0);
    for (int t = 0; t < c.steps; ++t) {
        const double* hprev = t ? c.h.row(t - 1) : zero.data();
        const double* cprev = t ? c.c.row(t - 1) : zero.data();
        lstm_cell(p, c.in_dim, c.m, xs.row(t), hprev, cprev, a.data(), c.gi.row(t), c.gf.row(t),
                  c.gg.row(t), c.go.row(t), c.c.row(t), c.tc.row(t), c.h.row(t));
    }
    return c;
}

/// Backward through a full sequence. `ext_dh` carries per-step gradients on
/// h_t (the final row may include extra final-state gradients already), and
/// `dc_final` the gradient on the final cell state. Produces input gradients.
inline void lstm_backward(const LstmParams& p, const LstmCache& c, const Tensor& ext_dh,
                          const std::vector<double>& dc_final, LstmParams& gp, Tensor& dx_out) {
    const int m = c.m;
    std::vector<double> dh(static_cast<std::size_t>(m)), dc(dc_final), dhprev(
        static_cast<std::size_t>(m)), dcprev(static_cast<std::size_t>(m)),
        da(static_cast<std::size_t>(4) * m), zero(static_cast<std::size_t>(m), 0.0);
    std::fill(dh.begin(), dh.end(), 0.0);
    for (int t = c.steps - 1; t >= 0; --t) {
        for (int k = 0; k < m; ++k) dh[static_cast<std::size_t>(k)] += ext_dh(t, k);
        const double* hprev = t ? c.h.row(t - 1) : zero.data();
        const double* cprev = t ? c.c.row(t - 1) : zero.data();
        lstm_cell_backward(p, c.in_dim, m, c.x.row(t), hprev, cprev, c.gi.row(t), c.gf.row(t),
                           c.gg.row(t), c.go.row(t), c.tc.row(t), dh.data(), dc.data(), gp,
                           da.data(), dx_out.row(t), dhprev.data(), dcprev.data());
        dh = dhprev;
        dc = dcprev;
    }
}

}  // namespace detail

enum class DecodeMode { sample, greedy };

/// Everything one forward pass records; enough to replay gradients exactly.
struct Rollout {
    int n = 0;
    Tensor feats;       // N x 4
    Tensor embedded;    // N x m
    detail::LstmCache enc;
    Tensor keys;        // N x m   (att_key * enc_h_j)
    // decoder trace
    Tensor dx;          // N x m   decoder inputs
    detail::LstmCache dec;  // reuses the cache layout, filled step by step
    Tensor query;       // N x m   (att_query * h_t)
    std::vector<Tensor> att_tanh;  // per step: N x m
    Tensor probs;       // N x N   row t = selection distribution at step t
    VideoList list;     // chosen order
    double log_prob = 0.0;
    // critic trace
    Tensor c_embedded;  // nsac only
    detail::LstmCache c_enc;  // nsac only
    std::vector<double> pooled, crit_pre, crit_hid;
    double d_estimate = 0.0;
};

namespace detail {

inline Rollout run_forward(const std::vector<Video>& set, const NetParams& p, DecodeMode mode,
                           Rng* rng, const VideoList* forced) {
    if (set.empty()) throw std::domain_error("model forward: empty set");
    if (forced) vidorder::detail::validate_order(set.size(), *forced);
    const int n = static_cast<int>(set.size());
    const int m = p.hidden;

    Rollout ro;
    ro.n = n;
    ro.feats = video_features(set);
    ro.embedded = Tensor(n, m);
    affine_rows(p.embed_w, p.embed_b, ro.feats, ro.embedded);
    ro.enc = lstm_forward(p.enc, ro.embedded);

    ro.keys = Tensor(n, m);
    affine_rows(p.att_key, Tensor(m, 1), ro.enc.h, ro.keys);

    // Decoder: starts from the learned start vector and the encoder's final
    // state; afterwards consumes the embedding of whatever was just picked.
    ro.dx = Tensor(n, m);
    ro.dec.steps = n;
    ro.dec.in_dim = m;
    ro.dec.m = m;
    for (Tensor* t : {&ro.dec.gi, &ro.dec.gf, &ro.dec.gg, &ro.dec.go, &ro.dec.c, &ro.dec.tc,
                      &ro.dec.h}) {
        *t = Tensor(n, m);
    }
    ro.dec.x = Tensor(0, 0);  // inputs live in ro.dx
    ro.query = Tensor(n, m);
    ro.att_tanh.assign(static_cast<std::size_t>(n), Tensor(n, m));
    ro.probs = Tensor(n, n);

    std::vector<double> a(static_cast<std::size_t>(4) * m);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    std::vector<double> scores(static_cast<std::size_t>(n));

    for (int t = 0; t < n; ++t) {
        const double* x = t ? ro.embedded.row(static_cast<int>(ro.list[t - 1])) : p.dec_start.v.data();
        std::copy(x, x + m, ro.dx.row(t));
        const double* hprev = t ? ro.dec.h.row(t - 1) : ro.enc.h.row(n - 1);
        const double* cprev = t ? ro.dec.c.row(t - 1) : ro.enc.c.row(n - 1);
        lstm_cell(p.dec, m, m, ro.dx.row(t), hprev, cprev, a.data(), ro.dec.gi.row(t),
                  ro.dec.gf.row(t), ro.dec.gg.row(t), ro.dec.go.row(t), ro.dec.c.row(t),
                  ro.dec.tc.row(t), ro.dec.h.row(t));

        double* q = ro.query.row(t);
        for (int d = 0; d < m; ++d) {
            double acc = 0.0;
            const double* wr = p.att_query.row(d);
            const double* h = ro.dec.h.row(t);
            for (int j = 0; j < m; ++j) acc += wr[j] * h[j];
            q[d] = acc;
        }
        double smax = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            double* th = ro.att_tanh[static_cast<std::size_t>(t)].row(j);
            const double* key = ro.keys.row(j);
            double s = 0.0;
            for (int d = 0; d < m; ++d) {
                th[d] = std::tanh(key[d] + q[d]);
                s += p.att_v.v[static_cast<std::size_t>(d)] * th[d];
            }
            scores[static_cast<std::size_t>(j)] = s;
            smax = std::max(smax, s);
        }
        double z = 0.0;
        for (int j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            z += std::exp(scores[static_cast<std::size_t>(j)] - smax);
        }
        for (int j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            ro.probs(t, j) = std::exp(scores[static_cast<std::size_t>(j)] - smax) / z;
        }

        int pick = -1;
        if (forced) {
            pick = static_cast<int>((*forced)[static_cast<std::size_t>(t)]);
            if (used[static_cast<std::size_t>(pick)]) {
                throw std::domain_error("model forward: forced order repeats a video");
            }
        } else if (mode == DecodeMode::greedy) {
            double best = -1.0;
            for (int j = 0; j < n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                if (ro.probs(t, j) > best) {
                    best = ro.probs(t, j);
                    pick = j;
                }
            }
        } else {
            const double u = rng->uniform01();
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                acc += ro.probs(t, j);
                pick = j;
                if (u < acc) break;
            }
        }
        used[static_cast<std::size_t>(pick)] = true;
        ro.list.push_back(static_cast<std::size_t>(pick));
        ro.log_prob += std::log(ro.probs(t, pick));
    }

    // Critic head on the mean-pooled encoder states (own encoder under nsac).
    const LstmCache* base = &ro.enc;
    if (p.arch == Arch::nsac) {
        ro.c_embedded = Tensor(n, m);
        affine_rows(p.c_embed_w, p.c_embed_b, ro.feats, ro.c_embedded);
        ro.c_enc = lstm_forward(p.c_enc, ro.c_embedded);
        base = &ro.c_enc;
    }
    ro.pooled.assign(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < n; ++j) {
        const double* h = base->h.row(j);
        for (int d = 0; d < m; ++d) ro.pooled[static_cast<std::size_t>(d)] += h[d];
    }
    for (double& x : ro.pooled) x /= n;
    ro.crit_pre.assign(static_cast<std::size_t>(m), 0.0);
    ro.crit_hid.assign(static_cast<std::size_t>(m), 0.0);
    for (int d = 0; d < m; ++d) {
        double acc = p.crit_b1.v[static_cast<std::size_t>(d)];
        const double* wr = p.crit_w1.row(d);
        for (int j = 0; j < m; ++j) acc += wr[j] * ro.pooled[static_cast<std::size_t>(j)];
        ro.crit_pre[static_cast<std::size_t>(d)] = acc;
        ro.crit_hid[static_cast<std::size_t>(d)] = acc > 0.0 ? acc : 0.0;
    }
    double out = p.crit_b2.v[0];
    for (int d = 0; d < m; ++d) out += p.crit_w2.v[static_cast<std::size_t>(d)] *
                                        ro.crit_hid[static_cast<std::size_t>(d)];
    ro.d_estimate = out;
    return ro;
}

/// Accumulate gradients of  actor_coef * log pi(list)  +  (critic path seeded
/// with d_out on the value head)  into `g`.
inline void accumulate_backward(const Rollout& ro, const NetParams& p, double actor_coef,
                                double d_out, NetParams& g) {
    const int n = ro.n;
    const int m = p.hidden;

    Tensor d_embedded(n, m);
    Tensor d_enc_h(n, m);  // external per-step grads on encoder h rows
    std::vector<double> d_enc_c_final(static_cast<std::size_t>(m), 0.0);
    Tensor d_keys(n, m);

    // ---- actor path ----
    if (actor_coef != 0.0) {
        std::vector<double> dh(static_cast<std::size_t>(m), 0.0);
        std::vector<double> dc(static_cast<std::size_t>(m), 0.0);
        std::vector<double> dquery(static_cast<std::size_t>(m));
        std::vector<double> dhprev(static_cast<std::size_t>(m));
        std::vector<double> dcprev(static_cast<std::size_t>(m));
        std::vector<double> da(static_cast<std::size_t>(4) * m);
        std::vector<double> dxv(static_cast<std::size_t>(m));
        for (int t = n - 1; t >= 0; --t) {
            // attention/softmax: d score_j = coef * (1[j == pick] - p_j)
            std::fill(dquery.begin(), dquery.end(), 0.0);
            const int pick = static_cast<int>(ro.list[static_cast<std::size_t>(t)]);
            for (int j = 0; j < n; ++j) {
                const double w =
                    actor_coef * ((j == pick ? 1.0 : 0.0) - ro.probs(t, j));
                if (w == 0.0) continue;
                const double* th = ro.att_tanh[static_cast<std::size_t>(t)].row(j);
                double* dk = d_keys.row(j);
                for (int d = 0; d < m; ++d) {
                    g.att_v.v[static_cast<std::size_t>(d)] += w * th[d];
                    const double darg =
                        w * p.att_v.v[static_cast<std::size_t>(d)] * (1.0 - th[d] * th[d]);
                    dk[d] += darg;
                    dquery[static_cast<std::size_t>(d)] += darg;
                }
            }
            // query = att_query * h_t
            const double* h = ro.dec.h.row(t);
            for (int a = 0; a < m; ++a) {
                const double dq = dquery[static_cast<std::size_t>(a)];
                if (dq == 0.0) continue;
                double* gw = g.att_query.row(a);
                const double* wr = p.att_query.row(a);
                for (int b = 0; b < m; ++b) {
                    gw[b] += dq * h[b];
                    dh[static_cast<std::size_t>(b)] += wr[b] * dq;
                }
            }
            const double* hprev = t ? ro.dec.h.row(t - 1) : ro.enc.h.row(n - 1);
            const double* cprev = t ? ro.dec.c.row(t - 1) : ro.enc.c.row(n - 1);
            lstm_cell_backward(p.dec, m, m, ro.dx.row(t), hprev, cprev, ro.dec.gi.row(t),
                               ro.dec.gf.row(t), ro.dec.gg.row(t), ro.dec.go.row(t),
                               ro.dec.tc.row(t), dh.data(), dc.data(), g.dec, da.data(),
                               dxv.data(), dhprev.data(), dcprev.data());
            // route the input gradient
            if (t == 0) {
                for (int d = 0; d < m; ++d) g.dec_start.v[static_cast<std::size_t>(d)] += dxv[static_cast<std::size_t>(d)];
            } else {
                double* row = d_embedded.row(static_cast<int>(ro.list[static_cast<std::size_t>(t - 1)]));
                for (int d = 0; d < m; ++d) row[d] += dxv[static_cast<std::size_t>(d)];
            }
            dh = dhprev;
            dc = dcprev;
        }
        // decoder initial state was the encoder's final (h, c)
        for (int d = 0; d < m; ++d) {
            d_enc_h(n - 1, d) += dh[static_cast<std::size_t>(d)];
            d_enc_c_final[static_cast<std::size_t>(d)] += dc[static_cast<std::size_t>(d)];
        }
        // keys = att_key * enc_h_j
        for (int j = 0; j < n; ++j) {
            const double* dk = d_keys.row(j);
            const double* hj = ro.enc.h.row(j);
            for (int a = 0; a < m; ++a) {
                if (dk[a] == 0.0) continue;
                double* gw = g.att_key.row(a);
                const double* wr = p.att_key.row(a);
                for (int b = 0; b < m; ++b) {
                    gw[b] += dk[a] * hj[b];
                    d_enc_h(j, b) += wr[b] * dk[a];
                }
            }
        }
    }

    // ---- critic path ----
    Tensor d_c_enc_h;  // nsac: external grads on the critic encoder's h rows
    if (d_out != 0.0) {
        std::vector<double> dpooled(static_cast<std::size_t>(m), 0.0);
        g.crit_b2.v[0] += d_out;
        for (int d = 0; d < m; ++d) {
            g.crit_w2.v[static_cast<std::size_t>(d)] +=
                d_out * ro.crit_hid[static_cast<std::size_t>(d)];
            const double dhid = d_out * p.crit_w2.v[static_cast<std::size_t>(d)];
            const double dpre = ro.crit_pre[static_cast<std::size_t>(d)] > 0.0 ? dhid : 0.0;
            if (dpre == 0.0) continue;
            g.crit_b1.v[static_cast<std::size_t>(d)] += dpre;
            double* gw = g.crit_w1.row(d);
            const double* wr = p.crit_w1.row(d);
            for (int j = 0; j < m; ++j) {
                gw[j] += dpre * ro.pooled[static_cast<std::size_t>(j)];
                dpooled[static_cast<std::size_t>(j)] += wr[j] * dpre;
            }
        }
        const double inv_n = 1.0 / n;
        if (p.arch == Arch::psac) {
            for (int j = 0; j < n; ++j) {
                for (int d = 0; d < m; ++d) {
                    d_enc_h(j, d) += dpooled[static_cast<std::size_t>(d)] * inv_n;
                }
            }
        } else {
            d_c_enc_h = Tensor(n, m);
            for (int j = 0; j < n; ++j) {
                for (int d = 0; d < m; ++d) {
                    d_c_enc_h(j, d) = dpooled[static_cast<std::size_t>(d)] * inv_n;
                }
            }
        }
    }

    // ---- shared tails ----
    Tensor d_emb_in(n, m);
    lstm_backward(p.enc, ro.enc, d_enc_h, d_enc_c_final, g.enc, d_emb_in);
    for (int i = 0; i < n; ++i) {
        const double* a = d_emb_in.row(i);
        const double* b = d_embedded.row(i);
        const double* f = ro.feats.row(i);
        for (int d = 0; d < m; ++d) {
            const double de = a[d] + b[d];
            if (de == 0.0) continue;
            g.embed_b.v[static_cast<std::size_t>(d)] += de;
            double* gw = g.embed_w.row(d);
            for (int k = 0; k < kFeatureDim; ++k) gw[k] += de * f[k];
        }
    }
    if (p.arch == Arch::nsac && d_c_enc_h.rows == n) {
        std::vector<double> zero_c(static_cast<std::size_t>(m), 0.0);
        Tensor d_c_emb(n, m);
        lstm_backward(p.c_enc, ro.c_enc, d_c_enc_h, zero_c, g.c_enc, d_c_emb);
        for (int i = 0; i < n; ++i) {
            const double* a = d_c_emb.row(i);
            const double* f = ro.feats.row(i);
            for (int d = 0; d < m; ++d) {
                if (a[d] == 0.0) continue;
                g.c_embed_b.v[static_cast<std::size_t>(d)] += a[d];
                double* gw = g.c_embed_w.row(d);
                for (int k = 0; k < kFeatureDim; ++k) gw[k] += a[d] * f[k];
            }
        }
    }
}

}  // namespace detail

/// Sampled or greedy decode of a full order, with its log-probability and the
/// critic's delay estimate.
inline Rollout rollout(const std::vector<Video>& set, const NetParams& p, DecodeMode mode,
                       std::uint64_t seed = 0) {
    Rng rng(seed);
    return detail::run_forward(set, p, mode, &rng, nullptr);
}

/// Forward pass with the selection forced to `list` (used for gradient
/// checking: deterministic replay of a fixed action sequence).
inline Rollout rollout_forced(const std::vector<Video>& set, const NetParams& p,
                              const VideoList& list) {
    return detail::run_forward(set, p, DecodeMode::greedy, nullptr, &list);
}

/// Greedy-decode ordering through a trained model.
inline OrderResult order_neural(const std::vector<Video>& set, const BucketConfig& bucket,
                                const NetParams& p) {
    vidorder::detail::StopWatch sw;
    Rollout ro = rollout(set, p, DecodeMode::greedy);
    return vidorder::detail::finish_result(set, bucket, std::move(ro.list), arch_name(p.arch), sw);
}

struct TrainConfig {
    int steps = 20000;   // E: optimisation steps
    int batch = 32;      // Q: sampled sets per step
    int hidden = 128;    // m
    double alpha = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;
    std::uint64_t seed = 0;
    Arch arch = Arch::psac;

    /// Small profile that trains in seconds on one core.
    static TrainConfig desk_scale() {
        TrainConfig c;
        c.steps = 2000;
        c.batch = 16;
        c.hidden = 32;
        return c;
    }
};

struct TrainResult {
    NetParams params;
    std::vector<double> critic_mse;      // per step
    std::vector<double> mean_max_delay;  // per step, sampled lists
};

namespace detail {

struct Adam {
    double alpha, beta1, beta2, eps;
    NetParams m, v;
    long t = 0;

    Adam(const NetParams& shape, double a, double b1, double b2, double e)
        : alpha(a), beta1(b1), beta2(b2), eps(e),
          m(NetParams::shaped(shape.hidden, shape.arch)),
          v(NetParams::shaped(shape.hidden, shape.arch)) {}

    void step(NetParams& p, NetParams& g) {
        ++t;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        auto pe = p.entries();
        auto ge = g.entries();
        auto me = m.entries();
        auto ve = v.entries();
        for (std::size_t i = 0; i < pe.size(); ++i) {
            Tensor& tp = *pe[i].second;
            Tensor& tg = *ge[i].second;
            Tensor& tm = *me[i].second;
            Tensor& tv = *ve[i].second;
            for (std::size_t k = 0; k < tp.size(); ++k) {
                const double gk = tg.v[k];
                tm.v[k] = beta1 * tm.v[k] + (1.0 - beta1) * gk;
                tv.v[k] = beta2 * tv.v[k] + (1.0 - beta2) * gk * gk;
                const double mhat = tm.v[k] / c1;
                const double vhat = tv.v[k] / c2;
                tp.v[k] -= alpha * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }
};

}  // namespace detail

/// Actor-critic training. Each step samples `batch` sets from the pool,
/// decodes an order per set by sampling, scores it with the closed-form
/// evaluator, and applies one Adam update: the actor follows the
/// policy-gradient surrogate weighted by the critic-baselined delay
/// advantage (the advantage itself taken as a constant), the critic follows
/// the squared-error loss against realised delays. Under parameter sharing
/// both contributions land on the shared tensors in the same update.
/// Deterministic for a fixed seed; non-finite losses abort with an error.
inline TrainResult train(const std::vector<std::vector<Video>>& pool, const BucketConfig& bucket,
                         const TrainConfig& cfg) {
    if (pool.empty()) throw std::invalid_argument("train: empty training pool");
    for (const auto& set : pool) {
        if (set.empty()) throw std::invalid_argument("train: empty set in pool");
    }
    bucket.validate();
    if (cfg.steps < 0 || cfg.batch < 1) {
        throw std::invalid_argument("train: steps must be >= 0 and batch >= 1");
    }

    Rng rng(cfg.seed);
    TrainResult out{NetParams::init(cfg.hidden, cfg.arch, rng.next_u64()), {}, {}};
    detail::Adam adam(out.params, cfg.alpha, cfg.beta1, cfg.beta2, cfg.eps);
    NetParams grads = NetParams::shaped(cfg.hidden, cfg.arch);

    const double inv_q = 1.0 / cfg.batch;
    for (int step = 1; step <= cfg.steps; ++step) {
        for (auto& [name, t] : grads.entries()) std::fill(t->v.begin(), t->v.end(), 0.0);
        double mse = 0.0;
        double mean_delay = 0.0;
        double surrogate = 0.0;
        for (int q = 0; q < cfg.batch; ++q) {
            const auto& set = pool[rng.below(pool.size())];
            Rollout ro = detail::run_forward(set, out.params, DecodeMode::sample, &rng, nullptr);
            const double d = evaluate_list(set, ro.list, bucket).max_delay_s;
            const double adv = d - ro.d_estimate;
            detail::accumulate_backward(ro, out.params, adv * inv_q, 2.0 * (ro.d_estimate - d) * inv_q,
                                        grads);
            mse += adv * adv * inv_q;
            mean_delay += d * inv_q;
            surrogate += adv * ro.log_prob * inv_q;
        }
        if (!std::isfinite(mse) || !std::isfinite(mean_delay) || !std::isfinite(surrogate)) {
            throw std::runtime_error("train: diverged at step " + std::to_string(step) +
                                     " (non-finite loss)");
        }
        out.critic_mse.push_back(mse);
        out.mean_max_delay.push_back(mean_delay);
        adam.step(out.params, grads);
    }
    return out;
}

struct GradCheckResult {
    double max_rel_actor = 0.0;
    double max_rel_critic = 0.0;
    double max_rel = 0.0;
};

/// Central-difference verification of every analytic gradient. The action
/// sequence is sampled once and then held fixed; the actor function is the
/// log-probability of that sequence, the critic function the squared error
/// of the value head against a fixed target. Relative error per coordinate
/// is |analytic - numeric| / max(1, |analytic|, |numeric|).
inline GradCheckResult grad_check(const NetParams& params, const std::vector<Video>& set,
                                  const BucketConfig& bucket, double eps, std::uint64_t seed) {
    Rollout base = rollout(set, params, DecodeMode::sample, seed);
    const VideoList actions = base.list;
    const double target = evaluate_list(set, actions, bucket).max_delay_s;

    NetParams g_actor = NetParams::shaped(params.hidden, params.arch);
    detail::accumulate_backward(base, params, 1.0, 0.0, g_actor);
    NetParams g_critic = NetParams::shaped(params.hidden, params.arch);
    detail::accumulate_backward(base, params, 0.0, 2.0 * (base.d_estimate - target), g_critic);

    NetParams probe = params;
    auto pe = probe.entries();
    auto ae = g_actor.entries();
    auto ce = g_critic.entries();

    GradCheckResult res;
    auto rel = [](double a, double n) {
        return std::abs(a - n) / std::max({1.0, std::abs(a), std::abs(n)});
    };
    for (std::size_t i = 0; i < pe.size(); ++i) {
        Tensor& t = *pe[i].second;
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double saved = t.v[k];
            t.v[k] = saved + eps;
            Rollout plus = rollout_forced(set, probe, actions);
            t.v[k] = saved - eps;
            Rollout minus = rollout_forced(set, probe, actions);
            t.v[k] = saved;
            const double na = (plus.log_prob - minus.log_prob) / (2.0 * eps);
            const double ep = plus.d_estimate - target;
            const double em = minus.d_estimate - target;
            const double nc = (ep * ep - em * em) / (2.0 * eps);
            res.max_rel_actor = std::max(res.max_rel_actor, rel(ae[i].second->v[k], na));
            res.max_rel_critic = std::max(res.max_rel_critic, rel(ce[i].second->v[k], nc));
        }
    }
    res.max_rel = std::max(res.max_rel_actor, res.max_rel_critic);
    return res;
}

// ---------------------------------------------------------------------------
// Checkpoints: versioned binary container of named tensors, bit-exact.

inline constexpr char kCheckpointMagic[8] = {'V', 'O', 'R', 'D', 'N', 'E', 'T', '1'};

inline void save_params(const NetParams& p, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    auto put_u32 = [&](std::uint32_t x) { os.write(reinterpret_cast<const char*>(&x), 4); };
    os.write(kCheckpointMagic, 8);
    put_u32(p.arch == Arch::psac ? 0u : 1u);
    put_u32(static_cast<std::uint32_t>(p.hidden));
    const auto entries = p.entries();
    put_u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& [name, t] : entries) {
        const std::uint32_t len = static_cast<std::uint32_t>(std::strlen(name));
        put_u32(len);
        os.write(name, len);
        put_u32(static_cast<std::uint32_t>(t->rows));
        put_u32(static_cast<std::uint32_t>(t->cols));
        os.write(reinterpret_cast<const char*>(t->v.data()),
                 static_cast<std::streamsize>(t->size() * sizeof(double)));
    }
    if (!os.good()) throw std::runtime_error("checkpoint: write failure on '" + path + "'");
}

inline NetParams load_params(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    char magic[8];
    is.read(magic, 8);
    if (!is.good() || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
        throw std::runtime_error("checkpoint: bad magic in '" + path + "'");
    }
    auto get_u32 = [&]() {
        std::uint32_t x = 0;
        is.read(reinterpret_cast<char*>(&x), 4);
        return x;
    };
    const std::uint32_t arch_code = get_u32();
    if (arch_code > 1) throw std::runtime_error("checkpoint: unknown architecture code");
    const std::uint32_t m = get_u32();
    const std::uint32_t count = get_u32();
    if (!is.good() || m == 0 || m > 65536) throw std::runtime_error("checkpoint: corrupt header");
    NetParams p = NetParams::shaped(static_cast<int>(m),
                                    arch_code == 0 ? Arch::psac : Arch::nsac);
    auto entries = p.entries();
    if (count != entries.size()) throw std::runtime_error("checkpoint: tensor count mismatch");
    for (auto& [name, t] : entries) {
        const std::uint32_t len = get_u32();
        std::string got(len, '\0');
        is.read(got.data(), len);
        if (!is.good() || got != name) {
            throw std::runtime_error("checkpoint: tensor name mismatch, expected '" +
                                     std::string(name) + "'");
        }
        const std::uint32_t rows = get_u32();
        const std::uint32_t cols = get_u32();
        if (rows != static_cast<std::uint32_t>(t->rows) ||
            cols != static_cast<std::uint32_t>(t->cols)) {
            throw std::runtime_error("checkpoint: shape mismatch for '" + std::string(name) + "'");
        }
        is.read(reinterpret_cast<char*>(t->v.data()),
                static_cast<std::streamsize>(t->size() * sizeof(double)));
        if (!is.good()) throw std::runtime_error("checkpoint: truncated tensor data");
    }
    return p;
}

}  // namespace vidorder::neural
