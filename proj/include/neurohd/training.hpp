#pragma once

// Joint optimization of the binary projection and the class proxies:
// cross-entropy over temperature-scaled cosine logits plus a proxy
// contrastive term, hand-derived gradients, straight-through estimation for
// the binarized weights, and Adam.
//
// STE convention: the forward pass always uses W_tilde = s * sign(W); the
// backward pass routes gradients through clip(W, -1, 1), i.e. entries with
// |W| > 1 receive exactly zero gradient and s is treated as a constant.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "neurohd/config.hpp"
#include "neurohd/encoder.hpp"
#include "neurohd/model.hpp"
#include "neurohd/parallel.hpp"
#include "neurohd/rng.hpp"
#include "neurohd/rpeaks.hpp"

namespace neurohd {

using ProxySet = std::vector<DenseHypervector>;

struct TrainConfig {
    double lr = 1e-3;
    std::uint32_t batch_size = 256;
    double lambda = 0.5;
    std::uint32_t epochs = 50;
    double tau = 0.1;
    std::uint64_t seed = 1;
    std::uint32_t D = 10000;
    std::uint32_t L = 100;
    std::uint32_t T = 90;
    bool rr_segmentation = true;  // false: fixed-length blocks
    double bandpass_low = 0.5;
    double bandpass_high = 45.0;
    double window_s = 60.0;

    static TrainConfig from_config(const ConfigMap& cfg) {
        TrainConfig c;
        c.lr = cfg.get_double("lr", c.lr);
        c.batch_size = static_cast<std::uint32_t>(cfg.get_int("batch_size", c.batch_size));
        c.lambda = cfg.get_double("lambda", c.lambda);
        c.epochs = static_cast<std::uint32_t>(cfg.get_int("epochs", c.epochs));
        c.tau = cfg.get_double("temperature", c.tau);
        c.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(c.seed)));
        c.D = static_cast<std::uint32_t>(cfg.get_int("D", c.D));
        c.L = static_cast<std::uint32_t>(cfg.get_int("L", c.L));
        c.T = static_cast<std::uint32_t>(cfg.get_int("T", c.T));
        c.rr_segmentation = cfg.get_str("segmentation", c.rr_segmentation ? "rr" : "fixed") == "rr";
        c.bandpass_low = cfg.get_double("bandpass_low", c.bandpass_low);
        c.bandpass_high = cfg.get_double("bandpass_high", c.bandpass_high);
        c.window_s = cfg.get_double("window_s", c.window_s);
        validate(c);
        return c;
    }

    static void validate(const TrainConfig& c) {
        if (!(c.lr > 0.0) || c.batch_size < 1 || c.lambda < 0.0 || !(c.tau > 0.0)) {
            throw std::invalid_argument("TrainConfig: invalid hyperparameters");
        }
        if (c.D == 0 || c.L < 8 || c.T == 0) throw std::invalid_argument("TrainConfig: invalid dimensions");
    }
};

struct LossResult {
    double loss = 0.0;
    DenseHypervector dZ;
    std::vector<DenseHypervector> dproxies;
    std::vector<double> cosines;
};

namespace detail {

// Softmax cross-entropy over logits = scale * cosine(Z, p_j). Covers both
// losses: the contrastive term's logits -d_j = cos_j - 1 differ from cos_j
// by a constant shift that cancels in the softmax.
inline LossResult cosine_softmax_loss(const DenseHypervector& Z, const ProxySet& proxies,
                                      std::uint32_t y, double scale) {
    const std::size_t C = proxies.size();
    const std::size_t D = Z.size();
    if (C < 2) throw std::invalid_argument("loss: need at least two proxies");
    if (y >= C) throw std::invalid_argument("loss: label out of range");

    double zn2 = 0.0;
    for (double v : Z) zn2 += v * v;
    if (zn2 == 0.0) throw std::invalid_argument("loss: zero-norm embedding");
    const double zn = std::sqrt(zn2);

    std::vector<double> pn(C), dot(C), cosv(C);
    for (std::size_t j = 0; j < C; ++j) {
        if (proxies[j].size() != D) throw std::invalid_argument("loss: proxy dimension mismatch");
        double n2 = 0.0, d = 0.0;
        for (std::size_t i = 0; i < D; ++i) {
            n2 += proxies[j][i] * proxies[j][i];
            d += proxies[j][i] * Z[i];
        }
        if (n2 == 0.0) throw std::invalid_argument("loss: zero-norm proxy");
        pn[j] = std::sqrt(n2);
        dot[j] = d;
        cosv[j] = d / (zn * pn[j]);
    }

    double mx = -1e300;
    for (std::size_t j = 0; j < C; ++j) mx = std::max(mx, scale * cosv[j]);
    double denom = 0.0;
    std::vector<double> sm(C);
    for (std::size_t j = 0; j < C; ++j) {
        sm[j] = std::exp(scale * cosv[j] - mx);
        denom += sm[j];
    }
    for (auto& v : sm) v /= denom;

    LossResult r;
    r.loss = -std::log(sm[y]);
    r.cosines = cosv;
    r.dZ.assign(D, 0.0);
    r.dproxies.assign(C, DenseHypervector(D, 0.0));
    for (std::size_t j = 0; j < C; ++j) {
        const double dcos = scale * (sm[j] - (j == y ? 1.0 : 0.0));
        const double a = dcos / (zn * pn[j]);
        const double bz = dcos * cosv[j] / zn2;
        const double bp = dcos * cosv[j] / (pn[j] * pn[j]);
        for (std::size_t i = 0; i < D; ++i) {
            r.dZ[i] += a * proxies[j][i] - bz * Z[i];
            r.dproxies[j][i] = a * Z[i] - bp * proxies[j][i];
        }
    }
    return r;
}

}  // namespace detail

// Cross-entropy over cosine logits scaled by 1/tau.
inline LossResult ce_loss(const DenseHypervector& Z, const ProxySet& proxies, std::uint32_t y,
                          double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("ce_loss: temperature must be positive");
    return detail::cosine_softmax_loss(Z, proxies, y, 1.0 / tau);
}

// Proxy contrastive loss with d(z, p) = 1 - cosine(z, p).
inline LossResult proxy_loss(const DenseHypervector& Z, const ProxySet& proxies, std::uint32_t y) {
    return detail::cosine_softmax_loss(Z, proxies, y, 1.0);
}

inline double total_loss(double ce, double proxy, double lambda) {
    return ce + lambda * proxy;
}

struct AdamState {
    std::vector<double> m, v;

    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

inline void adam_step(std::vector<double>& params, const std::vector<double>& grads,
                      AdamState& st, double lr, std::uint64_t t, double beta1 = 0.9,
                      double beta2 = 0.999, double eps = 1e-8) {
    if (params.size() != grads.size() || params.size() != st.m.size()) {
        throw std::invalid_argument("adam_step: shape mismatch");
    }
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * grads[i];
        st.v[i] = beta2 * st.v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double mhat = st.m[i] / bc1;
        const double vhat = st.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

struct Sample {
    RrBlockSequence seq;
    std::uint32_t label = 0;
};

struct BatchGrads {
    std::vector<double> dW;             // D x L, STE-masked, mean over batch
    std::vector<DenseHypervector> dproxies;
    double total = 0.0, ce = 0.0, proxy = 0.0;
    std::size_t correct = 0;
};

// Gradients of the batch-mean total loss. Forward and the rank-one weight
// updates are row-partitioned across workers; every accumulator coordinate
// is owned by exactly one worker and filled in (sample, block) order, so the
// result is bit-identical for any worker count.
inline BatchGrads backward(const std::vector<const Sample*>& batch, const Model& model,
                           double lambda, unsigned threads = 0) {
    const std::uint32_t D = model.D;
    const std::uint32_t L = model.L;
    const PackedWeights& pw = model.weights;
    if (model.W.size() != static_cast<std::size_t>(D) * L) {
        throw std::invalid_argument("backward: model has no latent weights");
    }

    BatchGrads g;
    g.dW.assign(static_cast<std::size_t>(D) * L, 0.0);
    g.dproxies.assign(model.C, DenseHypervector(D, 0.0));
    if (batch.empty()) return g;

    std::vector<std::vector<double>> zbuf;   // per real block, D tanh values
    std::vector<std::vector<double>> padded; // per real block, padded input
    std::vector<const std::vector<double>*> raw;
    DenseHypervector Z(D);
    DenseHypervector dZ(D);

    for (const Sample* sp : batch) {
        const RrBlockSequence& seq = sp->seq;
        padded.clear();
        raw.clear();
        for (std::size_t t = 0; t < seq.blocks.size(); ++t) {
            if (!seq.mask[t]) continue;
            if (seq.blocks[t].size() != L) throw std::invalid_argument("backward: block length mismatch");
            padded.push_back(pad_block(seq.blocks[t], pw.words_per_row));
            raw.push_back(&seq.blocks[t]);
        }
        const std::size_t n_real = padded.size();
        if (n_real == 0) throw std::invalid_argument("backward: sample with no real blocks");
        if (zbuf.size() < n_real) zbuf.resize(n_real, std::vector<double>(D));
        for (auto& zb : zbuf) {
            if (zb.size() != D) zb.assign(D, 0.0);
        }

        parallel_ranges(D, [&](std::size_t r0, std::size_t r1) {
            for (std::size_t t = 0; t < n_real; ++t) {
                project_signs_range(pw, padded[t].data(), zbuf[t].data(),
                                    static_cast<std::uint32_t>(r0), static_cast<std::uint32_t>(r1));
            }
            for (std::size_t i = r0; i < r1; ++i) {
                double acc = 0.0;
                for (std::size_t t = 0; t < n_real; ++t) {
                    const double z = std::tanh(pw.s * zbuf[t][i]);
                    zbuf[t][i] = z;
                    acc += z;
                }
                Z[i] = acc;
            }
        }, threads);

        const LossResult ce = ce_loss(Z, model.proxies, sp->label, model.tau);
        const LossResult px = proxy_loss(Z, model.proxies, sp->label);
        g.ce += ce.loss;
        g.proxy += px.loss;
        g.total += total_loss(ce.loss, px.loss, lambda);

        std::uint32_t pred = 0;
        for (std::size_t j = 1; j < ce.cosines.size(); ++j) {
            if (ce.cosines[j] > ce.cosines[pred]) pred = static_cast<std::uint32_t>(j);
        }
        if (pred == sp->label) ++g.correct;

        for (std::uint32_t i = 0; i < D; ++i) dZ[i] = ce.dZ[i] + lambda * px.dZ[i];
        for (std::uint32_t c = 0; c < model.C; ++c) {
            for (std::uint32_t i = 0; i < D; ++i) {
                g.dproxies[c][i] += ce.dproxies[c][i] + lambda * px.dproxies[c][i];
            }
        }

        parallel_ranges(D, [&](std::size_t r0, std::size_t r1) {
            for (std::size_t t = 0; t < n_real; ++t) {
                const double* x = raw[t]->data();
                for (std::size_t i = r0; i < r1; ++i) {
                    const double z = zbuf[t][i];
                    const double delta = dZ[i] * (1.0 - z * z);
                    double* wrow = g.dW.data() + i * L;
                    for (std::uint32_t j = 0; j < L; ++j) wrow[j] += delta * x[j];
                }
            }
        }, threads);
    }

    const double inv = 1.0 / static_cast<double>(batch.size());
    // STE mask: no gradient outside the clip region.
    for (std::size_t k = 0; k < g.dW.size(); ++k) {
        g.dW[k] = (std::fabs(model.W[k]) <= 1.0) ? g.dW[k] * inv : 0.0;
    }
    for (auto& dp : g.dproxies) {
        for (auto& v : dp) v *= inv;
    }
    g.total *= inv;
    g.ce *= inv;
    g.proxy *= inv;
    return g;
}

struct TrainReportRow {
    std::uint32_t epoch = 0;
    double total = 0.0, ce = 0.0, proxy = 0.0, accuracy = 0.0;
};

struct ClassMetrics {
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    std::size_t support = 0;
};

struct Metrics {
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    std::size_t n = 0;
};

struct TrainReport {
    std::vector<TrainReportRow> epochs;
    Metrics final_train;
};

inline void write_report_csv(const TrainReport& rep, std::ostream& os) {
    os << "epoch,total,ce,proxy,acc\n";
    char buf[160];
    for (const auto& r : rep.epochs) {
        std::snprintf(buf, sizeof(buf), "%u,%.10g,%.10g,%.10g,%.10g\n", r.epoch, r.total, r.ce,
                      r.proxy, r.accuracy);
        os << buf;
    }
}

inline Metrics metrics_from_predictions(const std::vector<std::uint32_t>& pred,
                                        const std::vector<std::uint32_t>& label,
                                        std::uint32_t C) {
    if (pred.empty() || pred.size() != label.size()) {
        throw std::invalid_argument("metrics: empty or mismatched predictions");
    }
    Metrics m;
    m.n = pred.size();
    std::vector<std::size_t> tp(C, 0), fp(C, 0), fn(C, 0);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == label[i]) {
            ++correct;
            ++tp[label[i]];
        } else {
            ++fp[pred[i]];
            ++fn[label[i]];
        }
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n);
    m.per_class.resize(C);
    for (std::uint32_t c = 0; c < C; ++c) {
        auto& pc = m.per_class[c];
        pc.support = tp[c] + fn[c];
        const double pden = static_cast<double>(tp[c] + fp[c]);
        const double rden = static_cast<double>(tp[c] + fn[c]);
        pc.precision = pden > 0.0 ? static_cast<double>(tp[c]) / pden : 0.0;
        pc.recall = rden > 0.0 ? static_cast<double>(tp[c]) / rden : 0.0;
        pc.f1 = (pc.precision + pc.recall) > 0.0
                    ? 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall)
                    : 0.0;
        m.macro_precision += pc.precision;
        m.macro_recall += pc.recall;
        m.macro_f1 += pc.f1;
    }
    m.macro_precision /= C;
    m.macro_recall /= C;
    m.macro_f1 /= C;
    return m;
}

enum class InferencePath { continuous, symbolic };

inline std::uint32_t predict(const Model& m, const RrBlockSequence& seq, InferencePath path) {
    if (path == InferencePath::continuous) {
        return classify(encode_window(seq, m.weights), m.proxies).label;
    }
    const SymbolicEncoding enc = encode_symbolic(seq, m.weights);
    return classify_symbolic(enc.Z, m.proxy_bits).label;
}

inline Metrics evaluate(const Model& m, const std::vector<Sample>& data, InferencePath path,
                        unsigned threads = 0) {
    if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
    std::vector<std::uint32_t> pred(data.size()), label(data.size());
    parallel_ranges(data.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            pred[i] = predict(m, data[i].seq, path);
            label[i] = data[i].label;
        }
    }, threads);
    return metrics_from_predictions(pred, label, m.C);
}

// Deterministic end-to-end training. Same seed, config and dataset produce a
// bit-identical model.
inline std::pair<Model, TrainReport> train(const std::vector<Sample>& data, const TrainConfig& cfg,
                                           unsigned threads = 0) {
    TrainConfig::validate(cfg);
    if (data.empty()) throw std::invalid_argument("train: empty dataset");
    std::uint32_t C = 0;
    for (const auto& s : data) C = std::max(C, s.label + 1);
    {
        std::vector<bool> seen(C, false);
        for (const auto& s : data) seen[s.label] = true;
        std::size_t present = 0;
        for (bool b : seen) present += b ? 1 : 0;
        if (present < 2) throw std::invalid_argument("train: dataset must contain at least two classes");
    }
    for (const auto& s : data) {
        if (s.seq.block_len != cfg.L) throw std::invalid_argument("train: block length != config L");
    }

    Model model;
    model.D = cfg.D;
    model.L = cfg.L;
    model.C = C;
    model.tau = cfg.tau;

    SplitMix64 rng(cfg.seed);
    model.W.resize(static_cast<std::size_t>(cfg.D) * cfg.L);
    for (auto& w : model.W) w = rng.uniform(-0.5, 0.5);
    model.proxies.assign(C, DenseHypervector(cfg.D));
    for (auto& p : model.proxies) {
        double n2 = 0.0;
        for (auto& v : p) {
            v = rng.normal();
            n2 += v * v;
        }
        const double inv = 1.0 / std::sqrt(n2);
        for (auto& v : p) v *= inv;
    }
    refresh_inference(model);

    AdamState st_w(model.W.size());
    std::vector<AdamState> st_p(C, AdamState(cfg.D));
    std::uint64_t step = 0;

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainReport report;
    for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(order, rng);
        TrainReportRow row;
        row.epoch = epoch;
        std::size_t seen = 0, correct = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
            std::vector<const Sample*> batch;
            batch.reserve(end - begin);
            for (std::size_t k = begin; k < end; ++k) batch.push_back(&data[order[k]]);

            BatchGrads g = backward(batch, model, cfg.lambda, threads);
            ++step;
            adam_step(model.W, g.dW, st_w, cfg.lr, step);
            for (std::uint32_t c = 0; c < C; ++c) {
                adam_step(model.proxies[c], g.dproxies[c], st_p[c], cfg.lr, step);
            }
            model.weights = binarize_weights(BinaryLinear{cfg.D, cfg.L, model.W});

            const double bs = static_cast<double>(batch.size());
            row.total += g.total * bs;
            row.ce += g.ce * bs;
            row.proxy += g.proxy * bs;
            correct += g.correct;
            seen += batch.size();
        }
        row.total /= static_cast<double>(seen);
        row.ce /= static_cast<double>(seen);
        row.proxy /= static_cast<double>(seen);
        row.accuracy = static_cast<double>(correct) / static_cast<double>(seen);
        report.epochs.push_back(row);
    }

    refresh_inference(model);
    report.final_train = evaluate(model, data, InferencePath::continuous, threads);
    return {std::move(model), std::move(report)};
}

}  // namespace neurohd
