#pragma once

// R-peak detection (Pan-Tompkins style) and RR-interval block construction.
// The detector expects a bandpassed signal: derivative -> squaring ->
// 150 ms moving-window integration -> adaptive dual threshold with a 200 ms
// refractory period, followed by a search back over the raw window for the
// actual R position.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "neurohd/signal.hpp"

namespace neurohd {

using RPeakList = std::vector<std::size_t>;

struct RrBlockSequence {
    std::vector<std::vector<double>> blocks;  // T blocks of exactly L samples
    std::vector<bool> mask;                   // true = real block, false = zero pad
    std::size_t block_len = 0;                // L
    // Start/end sample of each real block on the source signal, for tracing.
    std::vector<std::pair<std::size_t, std::size_t>> bounds;

    std::size_t real_count() const {
        std::size_t n = 0;
        for (bool m : mask) n += m ? 1 : 0;
        return n;
    }
};

namespace detail {

// Five-point derivative, Pan-Tompkins flavor. First samples are zeroed.
inline std::vector<double> pt_derivative(const std::vector<double>& x) {
    std::vector<double> d(x.size(), 0.0);
    for (std::size_t n = 4; n < x.size(); ++n) {
        d[n] = (2.0 * x[n] + x[n - 1] - x[n - 3] - 2.0 * x[n - 4]) / 8.0;
    }
    return d;
}

inline std::vector<double> moving_average(const std::vector<double>& x, std::size_t w) {
    std::vector<double> out(x.size(), 0.0);
    double acc = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        acc += x[n];
        if (n >= w) acc -= x[n - w];
        out[n] = acc / static_cast<double>(std::min(n + 1, w));
    }
    return out;
}

}  // namespace detail

inline RPeakList detect_rpeaks(const EcgSignal& sig) {
    if (sig.fs < 50.0) throw std::invalid_argument("detect_rpeaks: fs must be >= 50 Hz");
    const auto& x = sig.samples;
    const std::size_t n = x.size();
    if (n < 8) return {};

    const std::size_t mwi_w = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.150 * sig.fs)));
    const std::size_t refractory = static_cast<std::size_t>(std::lround(0.200 * sig.fs));

    auto deriv = detail::pt_derivative(x);
    for (auto& v : deriv) v *= v;
    const auto mwi = detail::moving_average(deriv, mwi_w);

    // Candidate peaks: local maxima of the integrated energy.
    std::vector<std::size_t> cand;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (mwi[i] > 0.0 && mwi[i] > mwi[i - 1] && mwi[i] >= mwi[i + 1]) cand.push_back(i);
    }
    if (cand.empty()) return {};

    // Threshold learning phase over the first two seconds.
    const std::size_t learn = std::min(n, static_cast<std::size_t>(std::lround(2.0 * sig.fs)));
    double spki = 0.0, npki = 0.0;
    for (std::size_t i = 0; i < learn; ++i) spki = std::max(spki, mwi[i]);
    spki *= 0.5;
    for (std::size_t i = 0; i < learn; ++i) npki += mwi[i];
    npki = 0.5 * npki / static_cast<double>(learn);

    // Map an accepted integration peak back to the R position: the energy
    // peak lags the R wave by roughly the integration window plus the
    // derivative delay.
    const std::size_t lag = mwi_w + 4;
    auto refine = [&](std::size_t p) {
        const std::size_t lo = p > lag ? p - lag : 0;
        std::size_t best = lo;
        for (std::size_t i = lo; i <= p; ++i) {
            if (x[i] > x[best]) best = i;
        }
        return best;
    };

    RPeakList peaks;
    std::vector<double> rr_hist;
    std::ptrdiff_t last_accept = -static_cast<std::ptrdiff_t>(n);

    auto accept = [&](std::size_t p, bool searchback) {
        if (searchback)
            spki = 0.25 * mwi[p] + 0.75 * spki;
        else
            spki = 0.125 * mwi[p] + 0.875 * spki;
        if (!peaks.empty()) {
            rr_hist.push_back(static_cast<double>(p) - static_cast<double>(last_accept));
            if (rr_hist.size() > 8) rr_hist.erase(rr_hist.begin());
        }
        last_accept = static_cast<std::ptrdiff_t>(p);
        const std::size_t r = refine(p);
        if (peaks.empty() || r > peaks.back()) peaks.push_back(r);
    };

    for (std::size_t ci = 0; ci < cand.size(); ++ci) {
        const std::size_t p = cand[ci];
        const double v = mwi[p];
        const double thr1 = npki + 0.25 * (spki - npki);

        if (static_cast<std::ptrdiff_t>(p) - last_accept < static_cast<std::ptrdiff_t>(refractory)) {
            continue;
        }
        if (v > thr1) {
            accept(p, false);
        } else {
            npki = 0.125 * v + 0.875 * npki;
            // Search back with the lower threshold if we have gone too long
            // without a QRS.
            if (!rr_hist.empty()) {
                double rr_avg = 0.0;
                for (double r : rr_hist) rr_avg += r;
                rr_avg /= static_cast<double>(rr_hist.size());
                if (static_cast<double>(p) - static_cast<double>(last_accept) > 1.66 * rr_avg &&
                    v > 0.5 * thr1) {
                    accept(p, true);
                }
            }
        }
    }
    return peaks;
}

// Linear resampling of a source segment onto exactly L samples using the
// mapping p_j = j * n / L, so a segment of length L is returned unchanged
// and a segment of length 2L is subsampled at stride 2.
inline std::vector<double> resample_to(const std::vector<double>& sig, std::size_t begin,
                                       std::size_t end, std::size_t L) {
    const std::size_t n = end - begin;
    std::vector<double> out(L);
    for (std::size_t j = 0; j < L; ++j) {
        const double p = static_cast<double>(j) * static_cast<double>(n) / static_cast<double>(L);
        std::size_t i0 = static_cast<std::size_t>(p);
        if (i0 >= n - 1) {
            out[j] = sig[begin + n - 1];
            continue;
        }
        const double frac = p - static_cast<double>(i0);
        out[j] = sig[begin + i0] * (1.0 - frac) + sig[begin + i0 + 1] * frac;
    }
    return out;
}

inline RrBlockSequence segment_rr_blocks(const EcgSignal& sig, const RPeakList& peaks,
                                         std::size_t L, std::size_t T) {
    if (L < 8 || T < 1) throw std::invalid_argument("segment_rr_blocks: need L >= 8, T >= 1");
    if (peaks.size() < 2) throw std::invalid_argument("insufficient beats");

    RrBlockSequence seq;
    seq.block_len = L;
    seq.blocks.assign(T, std::vector<double>(L, 0.0));
    seq.mask.assign(T, false);

    const std::size_t n_intervals = std::min(peaks.size() - 1, T);
    for (std::size_t t = 0; t < n_intervals; ++t) {
        const std::size_t r0 = peaks[t];
        const std::size_t r1 = peaks[t + 1];
        if (r1 >= sig.samples.size() || r1 <= r0) {
            throw std::invalid_argument("segment_rr_blocks: peaks out of range");
        }
        seq.blocks[t] = zscore(resample_to(sig.samples, r0, r1, L));
        seq.mask[t] = true;
        seq.bounds.emplace_back(r0, r1);
    }
    return seq;
}

inline RrBlockSequence segment_fixed_blocks(const EcgSignal& sig, std::size_t L, std::size_t T) {
    if (L < 8 || T < 1) throw std::invalid_argument("segment_fixed_blocks: need L >= 8, T >= 1");
    if (sig.samples.size() < L) throw std::invalid_argument("segment_fixed_blocks: signal shorter than one block");

    RrBlockSequence seq;
    seq.block_len = L;
    seq.blocks.assign(T, std::vector<double>(L, 0.0));
    seq.mask.assign(T, false);

    const std::size_t n_chunks = std::min(sig.samples.size() / L, T);
    for (std::size_t t = 0; t < n_chunks; ++t) {
        std::vector<double> chunk(sig.samples.begin() + static_cast<std::ptrdiff_t>(t * L),
                                  sig.samples.begin() + static_cast<std::ptrdiff_t>((t + 1) * L));
        seq.blocks[t] = zscore(chunk);
        seq.mask[t] = true;
        seq.bounds.emplace_back(t * L, (t + 1) * L);
    }
    return seq;
}

}  // namespace neurohd
