#pragma once

// End-to-end window preparation shared by train / eval / infer / explain:
// bandpass -> R-peak detection -> block segmentation (RR-aligned or fixed
// length), plus the per-block mean-amplitude statistic consumed by the
// classic HDC baseline.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "neurohd/dataset.hpp"
#include "neurohd/parallel.hpp"
#include "neurohd/rpeaks.hpp"
#include "neurohd/signal.hpp"
#include "neurohd/synth.hpp"
#include "neurohd/training.hpp"

namespace neurohd {

struct PreparedWindow {
    Sample sample;                    // blocks + label, learned-path input
    std::vector<double> block_stats;  // mean |amplitude| per real block
    RPeakList peaks;
    std::string subject;
    std::size_t window_index = 0;
    std::string split;
};

inline PreparedWindow prepare_window(const LabeledWindow& win, const TrainConfig& cfg) {
    PreparedWindow out;
    const EcgSignal filtered = bandpass(win.signal, cfg.bandpass_low, cfg.bandpass_high);
    out.peaks = detect_rpeaks(filtered);
    if (cfg.rr_segmentation) {
        out.sample.seq = segment_rr_blocks(filtered, out.peaks, cfg.L, cfg.T);
    } else {
        out.sample.seq = segment_fixed_blocks(filtered, cfg.L, cfg.T);
    }
    for (const auto& [b, e] : out.sample.seq.bounds) {
        double acc = 0.0;
        for (std::size_t i = b; i < e; ++i) acc += std::fabs(filtered.samples[i]);
        out.block_stats.push_back(acc / static_cast<double>(e - b));
    }
    out.sample.label = win.label;
    out.subject = win.subject;
    out.window_index = win.window_index;
    return out;
}

struct PreparedDataset {
    std::vector<PreparedWindow> windows;
    std::size_t dropped = 0;  // windows with too few beats for RR segmentation
};

inline PreparedDataset prepare_dataset(const std::vector<DatasetEntry>& entries,
                                       const TrainConfig& cfg, unsigned threads = 0) {
    PreparedDataset out;
    std::vector<PreparedWindow> tmp(entries.size());
    std::vector<char> ok(entries.size(), 0);
    parallel_ranges(entries.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            try {
                tmp[i] = prepare_window(entries[i].window, cfg);
                tmp[i].split = entries[i].split;
                ok[i] = 1;
            } catch (const std::invalid_argument&) {
                ok[i] = 0;  // e.g. "insufficient beats"
            }
        }
    }, threads);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (ok[i])
            out.windows.push_back(std::move(tmp[i]));
        else
            ++out.dropped;
    }
    return out;
}

inline std::vector<Sample> samples_of(const std::vector<PreparedWindow>& ws,
                                      const std::string& split = "") {
    std::vector<Sample> out;
    for (const auto& w : ws) {
        if (split.empty() || w.split == split) out.push_back(w.sample);
    }
    return out;
}

inline std::vector<std::vector<double>> stats_of(const std::vector<PreparedWindow>& ws,
                                                 const std::string& split = "") {
    std::vector<std::vector<double>> out;
    for (const auto& w : ws) {
        if (split.empty() || w.split == split) out.push_back(w.block_stats);
    }
    return out;
}

inline std::vector<std::uint32_t> labels_of(const std::vector<PreparedWindow>& ws,
                                            const std::string& split = "") {
    std::vector<std::uint32_t> out;
    for (const auto& w : ws) {
        if (split.empty() || w.split == split) out.push_back(w.sample.label);
    }
    return out;
}

// Synthetic windows -> dataset with a deterministic patient-disjoint
// train/test split (subjects shuffled by seed; roughly one third held out).
inline Dataset dataset_from_synth(const std::vector<SynthWindow>& wins, double fs, double window_s,
                                  std::uint32_t n_classes, std::uint64_t seed) {
    Dataset ds;
    ds.fs = fs;
    ds.window_s = window_s;
    ds.n_classes = n_classes;

    std::vector<std::string> subjects;
    for (const auto& w : wins) {
        bool seen = false;
        for (const auto& s : subjects) {
            if (s == w.window.subject) {
                seen = true;
                break;
            }
        }
        if (!seen) subjects.push_back(w.window.subject);
    }
    SplitMix64 rng(seed);
    shuffle(subjects, rng);
    const std::size_t n_test = std::max<std::size_t>(1, subjects.size() / 3);
    std::map<std::string, std::string> split_of;
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        split_of[subjects[i]] = i < n_test ? "test" : "train";
    }

    for (const auto& w : wins) {
        DatasetEntry e;
        e.window = w.window;
        e.true_peaks = w.true_peaks;
        e.split = split_of[w.window.subject];
        ds.entries.push_back(std::move(e));
    }
    return ds;
}

}  // namespace neurohd
