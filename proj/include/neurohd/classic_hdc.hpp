#pragma once

// Non-learned HDC baseline: per-block quantization into a random item
// memory, optional permutation-bound sequence encoding, prototype bundling
// by integer summation, cosine classification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "neurohd/hypervector.hpp"
#include "neurohd/io.hpp"
#include "neurohd/ops.hpp"
#include "neurohd/rng.hpp"

namespace neurohd {

// Uniform bins over [q_min, q_max], values clamped into range.
inline std::uint32_t quantize(double value, double q_min, double q_max, std::uint32_t Q) {
    if (!(q_min < q_max)) throw std::invalid_argument("quantize: q_min must be < q_max");
    if (Q < 2) throw std::invalid_argument("quantize: need at least 2 levels");
    const double t = (value - q_min) / (q_max - q_min);
    const double b = std::floor(t * static_cast<double>(Q));
    if (b < 0.0) return 0;
    if (b >= static_cast<double>(Q)) return Q - 1;
    return static_cast<std::uint32_t>(b);
}

// Level hypervectors are regenerated from (seed, level) on demand, so a
// stored model only needs the seed.
class ItemMemory {
public:
    ItemMemory(std::uint32_t D, std::uint32_t Q, std::uint64_t seed)
        : D_(D), Q_(Q), seed_(seed) {
        if (Q < 2) throw std::invalid_argument("ItemMemory: need at least 2 levels");
        levels_.reserve(Q);
        for (std::uint32_t k = 0; k < Q; ++k) {
            SplitMix64 rng(mix_seed(seed, k));
            levels_.push_back(random_packed(D, rng));
        }
    }

    std::uint32_t dim() const { return D_; }
    std::uint32_t level_count() const { return Q_; }
    std::uint64_t seed() const { return seed_; }

    const PackedHypervector& level(std::uint32_t k) const {
        if (k >= Q_) throw std::invalid_argument("ItemMemory: bin out of range");
        return levels_[k];
    }

private:
    std::uint32_t D_, Q_;
    std::uint64_t seed_;
    std::vector<PackedHypervector> levels_;
};

// X = sign(sum_t rho^t(h_{b_t})), rho^0 for the first element; ties to +1.
inline PackedHypervector encode_sequence(const std::vector<std::uint32_t>& bins,
                                         const ItemMemory& im, bool use_permutation) {
    if (bins.empty()) throw std::invalid_argument("encode_sequence: empty sequence");
    const std::uint32_t D = im.dim();
    std::vector<std::int32_t> acc(D, 0);
    for (std::size_t t = 0; t < bins.size(); ++t) {
        const PackedHypervector& h = im.level(bins[t]);
        if (use_permutation && t > 0) {
            const PackedHypervector hp = permute(h, t);
            for (std::uint32_t i = 0; i < D; ++i) acc[i] += hp.get(i) ? 1 : -1;
        } else {
            for (std::uint32_t i = 0; i < D; ++i) acc[i] += h.get(i) ? 1 : -1;
        }
    }
    PackedHypervector out(D);
    for (std::uint32_t i = 0; i < D; ++i) {
        if (acc[i] >= 0) out.set(i, true);
    }
    return out;
}

struct PrototypeMemory {
    std::uint32_t D = 0;
    std::vector<std::vector<std::int32_t>> prototypes;  // C x D integer sums
};

inline PrototypeMemory fit_prototypes(const std::vector<PackedHypervector>& encoded,
                                      const std::vector<std::uint32_t>& labels) {
    if (encoded.empty() || encoded.size() != labels.size()) {
        throw std::invalid_argument("fit_prototypes: empty or mismatched inputs");
    }
    std::uint32_t C = 0;
    for (std::uint32_t y : labels) C = std::max(C, y + 1);
    const std::uint32_t D = encoded.front().dim();

    PrototypeMemory mem;
    mem.D = D;
    mem.prototypes.assign(C, std::vector<std::int32_t>(D, 0));
    std::vector<std::size_t> count(C, 0);
    for (std::size_t k = 0; k < encoded.size(); ++k) {
        if (encoded[k].dim() != D) throw std::invalid_argument("fit_prototypes: dimension mismatch");
        auto& proto = mem.prototypes[labels[k]];
        for (std::uint32_t i = 0; i < D; ++i) proto[i] += encoded[k].get(i) ? 1 : -1;
        ++count[labels[k]];
    }
    for (std::uint32_t c = 0; c < C; ++c) {
        if (count[c] == 0) throw std::invalid_argument("fit_prototypes: class with zero samples");
    }
    return mem;
}

inline std::uint32_t classify_hd(const PackedHypervector& x, const PrototypeMemory& mem) {
    if (mem.prototypes.empty()) throw std::invalid_argument("classify_hd: empty prototype memory");
    if (x.dim() != mem.D) throw std::invalid_argument("classify_hd: dimension mismatch");
    std::uint32_t best = 0;
    double best_score = -2.0;
    const double sd = std::sqrt(static_cast<double>(mem.D));
    for (std::uint32_t c = 0; c < mem.prototypes.size(); ++c) {
        const auto& proto = mem.prototypes[c];
        double dot = 0.0, n2 = 0.0;
        for (std::uint32_t i = 0; i < mem.D; ++i) {
            const double p = static_cast<double>(proto[i]);
            dot += x.get(i) ? p : -p;
            n2 += p * p;
        }
        if (n2 == 0.0) throw std::invalid_argument("classify_hd: zero-norm prototype");
        const double score = dot / (sd * std::sqrt(n2));
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    return best;
}

struct ClassicConfig {
    std::uint32_t D = 10000;
    std::uint32_t Q = 16;
    std::uint64_t seed = 1;
    bool use_permutation = false;
    std::uint32_t T = 90;  // max blocks bundled per window
};

struct ClassicModel {
    ClassicConfig cfg;
    double q_min = 0.0, q_max = 1.0;
    PrototypeMemory prototypes;
};

namespace detail {
inline double nearest_rank_percentile(std::vector<double> v, double pct) {
    if (v.empty()) throw std::invalid_argument("percentile: empty input");
    std::sort(v.begin(), v.end());
    const double pos = pct / 100.0 * static_cast<double>(v.size() - 1);
    return v[static_cast<std::size_t>(std::floor(pos + 0.5))];
}
}  // namespace detail

// Bin sequence for one window from its per-block quantization statistics.
inline std::vector<std::uint32_t> classic_bins(const std::vector<double>& block_stats,
                                               const ClassicModel& m) {
    std::vector<std::uint32_t> bins;
    bins.reserve(std::min<std::size_t>(block_stats.size(), m.cfg.T));
    for (std::size_t t = 0; t < block_stats.size() && t < m.cfg.T; ++t) {
        bins.push_back(quantize(block_stats[t], m.q_min, m.q_max, m.cfg.Q));
    }
    return bins;
}

// Fit: quantization range from the 1st/99th percentile of the training
// statistics, then prototype bundling of the encoded windows.
inline ClassicModel classic_fit(const std::vector<std::vector<double>>& window_stats,
                                const std::vector<std::uint32_t>& labels,
                                const ClassicConfig& cfg) {
    if (window_stats.empty() || window_stats.size() != labels.size()) {
        throw std::invalid_argument("classic_fit: empty or mismatched inputs");
    }
    ClassicModel m;
    m.cfg = cfg;
    std::vector<double> all;
    for (const auto& ws : window_stats) all.insert(all.end(), ws.begin(), ws.end());
    m.q_min = detail::nearest_rank_percentile(all, 1.0);
    m.q_max = detail::nearest_rank_percentile(all, 99.0);
    if (!(m.q_min < m.q_max)) {
        // Degenerate statistics; widen symmetrically so quantize stays valid.
        m.q_min -= 0.5;
        m.q_max += 0.5;
    }

    ItemMemory im(cfg.D, cfg.Q, cfg.seed);
    std::vector<PackedHypervector> encoded;
    encoded.reserve(window_stats.size());
    for (const auto& ws : window_stats) {
        encoded.push_back(encode_sequence(classic_bins(ws, m), im, cfg.use_permutation));
    }
    m.prototypes = fit_prototypes(encoded, labels);
    return m;
}

inline std::uint32_t classic_predict(const std::vector<double>& block_stats, const ClassicModel& m,
                                     const ItemMemory& im) {
    return classify_hd(encode_sequence(classic_bins(block_stats, m), im, m.cfg.use_permutation),
                       m.prototypes);
}

// CHD1 container: magic, D, Q, C, use_permutation, T, seed, q_min, q_max,
// then C prototypes of D little-endian int32 each.
inline void save_classic_model(const ClassicModel& m, std::ostream& os) {
    io::write_magic(os, "CHD1");
    io::write_u32(os, m.cfg.D);
    io::write_u32(os, m.cfg.Q);
    io::write_u32(os, static_cast<std::uint32_t>(m.prototypes.prototypes.size()));
    io::write_u32(os, m.cfg.use_permutation ? 1 : 0);
    io::write_u32(os, m.cfg.T);
    io::write_u64(os, m.cfg.seed);
    io::write_f64(os, m.q_min);
    io::write_f64(os, m.q_max);
    for (const auto& proto : m.prototypes.prototypes) {
        for (std::int32_t v : proto) io::write_u32(os, static_cast<std::uint32_t>(v));
    }
    if (!os) throw std::runtime_error("save_classic_model: write failed");
}

inline void save_classic_model(const ClassicModel& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_classic_model: cannot open " + path);
    save_classic_model(m, os);
}

inline ClassicModel load_classic_model(std::istream& is) {
    if (io::read_magic(is, 4) != "CHD1") throw std::runtime_error("load_classic_model: bad magic");
    ClassicModel m;
    m.cfg.D = io::read_u32(is);
    m.cfg.Q = io::read_u32(is);
    const std::uint32_t C = io::read_u32(is);
    m.cfg.use_permutation = io::read_u32(is) != 0;
    m.cfg.T = io::read_u32(is);
    m.cfg.seed = io::read_u64(is);
    m.q_min = io::read_f64(is);
    m.q_max = io::read_f64(is);
    if (m.cfg.D == 0 || C < 2) throw std::runtime_error("load_classic_model: corrupt header");
    m.prototypes.D = m.cfg.D;
    m.prototypes.prototypes.assign(C, std::vector<std::int32_t>(m.cfg.D));
    for (auto& proto : m.prototypes.prototypes) {
        for (auto& v : proto) v = static_cast<std::int32_t>(io::read_u32(is));
    }
    return m;
}

inline ClassicModel load_classic_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_classic_model: cannot open " + path);
    return load_classic_model(is);
}

}  // namespace neurohd
