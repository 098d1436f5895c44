#pragma once

// Inference benchmarking and size accounting: per-sample latency of the
// packed symbolic path versus the dense float path of the same model, and
// the serialized-size / compression report. Timing runs single-threaded so
// the comparison isolates kernel cost.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "neurohd/encoder.hpp"
#include "neurohd/model.hpp"
#include "neurohd/training.hpp"

namespace neurohd {

struct TimingStats {
    double mean_ms = 0.0;  // per sample
    double std_ms = 0.0;
    std::vector<double> runs_ms;  // per-sample ms of each timed run
};

struct BenchResult {
    TimingStats packed;
    TimingStats dense;
    std::size_t windows = 0;
    std::size_t repeat = 0;
};

namespace detail {

// Dense float path: z = tanh(W_tilde x) per block via a dense matrix,
// aggregate, cosine against the real proxies.
inline std::uint32_t infer_dense(const Model& m, const std::vector<double>& wt,
                                 const RrBlockSequence& seq) {
    const std::uint32_t D = m.D, L = m.L;
    DenseHypervector Z(D, 0.0);
    for (std::size_t t = 0; t < seq.blocks.size(); ++t) {
        if (!seq.mask[t]) continue;
        const double* x = seq.blocks[t].data();
        for (std::uint32_t i = 0; i < D; ++i) {
            const double* row = wt.data() + static_cast<std::size_t>(i) * L;
            double acc = 0.0;
            for (std::uint32_t j = 0; j < L; ++j) acc += row[j] * x[j];
            Z[i] += std::tanh(acc);
        }
    }
    return classify(Z, m.proxies).label;
}

inline std::uint32_t infer_packed(const Model& m, const RrBlockSequence& seq) {
    const SymbolicEncoding enc = encode_symbolic(seq, m.weights);
    return classify_symbolic(enc.Z, m.proxy_bits).label;
}

inline TimingStats finalize(std::vector<double> runs) {
    TimingStats st;
    st.runs_ms = std::move(runs);
    for (double v : st.runs_ms) st.mean_ms += v;
    st.mean_ms /= static_cast<double>(st.runs_ms.size());
    for (double v : st.runs_ms) st.std_ms += (v - st.mean_ms) * (v - st.mean_ms);
    st.std_ms = std::sqrt(st.std_ms / static_cast<double>(st.runs_ms.size()));
    return st;
}

}  // namespace detail

inline BenchResult time_inference(const Model& m, const std::vector<Sample>& windows,
                                  std::size_t repeat) {
    if (windows.empty()) throw std::invalid_argument("time_inference: no windows");
    if (repeat < 10) throw std::invalid_argument("time_inference: repeat must be >= 10");

    const std::vector<double> wt = dense_tilde(m.weights);
    volatile std::uint32_t sink = 0;  // keep the work observable

    using clock = std::chrono::steady_clock;
    auto run_packed = [&] {
        for (const auto& w : windows) sink = sink + detail::infer_packed(m, w.seq);
    };
    auto run_dense = [&] {
        for (const auto& w : windows) sink = sink + detail::infer_dense(m, wt, w.seq);
    };

    BenchResult res;
    res.windows = windows.size();
    res.repeat = repeat;
    const double per = 1e-6 / static_cast<double>(windows.size());  // ns -> ms per sample

    for (int i = 0; i < 3; ++i) run_packed();
    std::vector<double> runs;
    for (std::size_t r = 0; r < repeat; ++r) {
        const auto t0 = clock::now();
        run_packed();
        const auto t1 = clock::now();
        runs.push_back(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count() * per);
    }
    res.packed = detail::finalize(std::move(runs));

    for (int i = 0; i < 3; ++i) run_dense();
    runs.clear();
    for (std::size_t r = 0; r < repeat; ++r) {
        const auto t0 = clock::now();
        run_dense();
        const auto t1 = clock::now();
        runs.push_back(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count() * per);
    }
    res.dense = detail::finalize(std::move(runs));
    return res;
}

// Fraction of windows where the packed and dense paths predict the same label.
inline double path_agreement(const Model& m, const std::vector<Sample>& windows) {
    if (windows.empty()) throw std::invalid_argument("path_agreement: no windows");
    const std::vector<double> wt = dense_tilde(m.weights);
    std::size_t agree = 0;
    for (const auto& w : windows) {
        if (detail::infer_packed(m, w.seq) == detail::infer_dense(m, wt, w.seq)) ++agree;
    }
    return static_cast<double>(agree) / static_cast<double>(windows.size());
}

struct SizeReport {
    std::uint64_t file_bytes = 0;          // full serialized container
    std::uint64_t weight_bits = 0;         // D * L
    std::uint64_t weight_bytes = 0;        // packed weight payload on disk
    std::uint64_t float32_equiv_bytes = 0; // D * L * 4
    double compression = 0.0;              // float32 dense vs packed payload
};

inline SizeReport model_size_report(const Model& m) {
    std::ostringstream os(std::ios::binary);
    save_model(m, os);
    SizeReport r;
    r.file_bytes = os.str().size();
    r.weight_bits = static_cast<std::uint64_t>(m.D) * m.L;
    r.weight_bytes = ((r.weight_bits + 63) / 64) * 8;
    r.float32_equiv_bytes = static_cast<std::uint64_t>(m.D) * m.L * 4;
    r.compression = static_cast<double>(r.float32_equiv_bytes) / static_cast<double>(r.weight_bytes);
    return r;
}

}  // namespace neurohd
