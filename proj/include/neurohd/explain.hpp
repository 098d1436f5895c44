#pragma once

// Blockwise explainability: cosine affinity of each symbolic RR-block vector
// to a class sign vector, top-k localization, and a plot-ready CSV trace
// with a JSON metadata sidecar.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurohd/hypervector.hpp"
#include "neurohd/ops.hpp"
#include "neurohd/rpeaks.hpp"

namespace neurohd {

// score_t = cosine of block t against the class vector; padded blocks are
// reported as NaN ("absent") and never participate in top-k.
inline std::vector<double> block_scores(const std::vector<PackedHypervector>& blocks_hdc,
                                        const std::vector<bool>& mask,
                                        const PackedHypervector& class_vec) {
    if (blocks_hdc.size() != mask.size()) {
        throw std::invalid_argument("block_scores: mask size mismatch");
    }
    std::vector<double> scores(blocks_hdc.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = 0; t < blocks_hdc.size(); ++t) {
        if (!mask[t]) continue;
        scores[t] = hamming_similarity(blocks_hdc[t], class_vec);
    }
    return scores;
}

// Indices of the k highest-scoring real blocks, ordered by descending score,
// ties broken by the lower index.
inline std::vector<std::size_t> top_k(const std::vector<double>& scores, long k) {
    if (k <= 0) throw std::invalid_argument("top_k: k must be positive");
    std::vector<std::size_t> idx;
    for (std::size_t t = 0; t < scores.size(); ++t) {
        if (!std::isnan(scores[t])) idx.push_back(t);
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    if (idx.size() > static_cast<std::size_t>(k)) idx.resize(static_cast<std::size_t>(k));
    return idx;
}

struct TraceMeta {
    std::string record;
    std::size_t window_index = 0;
    std::size_t window_start_sample = 0;
    double fs = 0.0;
    std::uint32_t predicted_label = 0;
    std::uint32_t scored_class = 0;
    long k = 0;
};

// CSV trace (one row per real block) plus "<path>.json" sidecar.
inline void export_trace(const TraceMeta& meta, const RrBlockSequence& seq,
                         const std::vector<double>& scores,
                         const std::vector<std::size_t>& topk, const std::string& path) {
    if (scores.size() != seq.mask.size()) throw std::invalid_argument("export_trace: score count mismatch");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("export_trace: cannot open " + path);

    os << "block_index,start_sample,end_sample,score,is_top_k\n";
    char buf[128];
    std::size_t real = 0;
    for (std::size_t t = 0; t < seq.mask.size(); ++t) {
        if (!seq.mask[t]) continue;
        const bool is_top = std::find(topk.begin(), topk.end(), t) != topk.end();
        std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%.10g,%d\n", t, seq.bounds[real].first,
                      seq.bounds[real].second, scores[t], is_top ? 1 : 0);
        os << buf;
        ++real;
    }
    if (!os) throw std::runtime_error("export_trace: write failed");
    os.close();

    nlohmann::json j;
    j["record"] = meta.record;
    j["window_index"] = meta.window_index;
    j["window_start_sample"] = meta.window_start_sample;
    j["fs"] = meta.fs;
    j["predicted_label"] = meta.predicted_label;
    j["scored_class"] = meta.scored_class;
    j["k"] = meta.k;
    j["real_blocks"] = real;
    j["block_len"] = seq.block_len;
    std::ofstream js(path + ".json");
    if (!js) throw std::runtime_error("export_trace: cannot open " + path + ".json");
    js << j.dump(2) << "\n";
    if (!js) throw std::runtime_error("export_trace: write failed");
}

}  // namespace neurohd
