#pragma once

// Learnable symbolic projection: scaled binary weights, tanh encoding,
// temporal aggregation, and the hard-sign inference path.
//
// Forward semantics: with latent weights W, the effective weight matrix is
// W_tilde = s * sign(W), s = mean|W|, sign(0) = +1. The continuous path
// computes z = tanh(W_tilde x); the symbolic path keeps only sign(W_tilde x).
//
// The sign-bit kernel applies the binary weights without multiplications:
// row bits select the sign of each x_j via an xor on the IEEE sign bit,
// eight lanes at a time through a byte-indexed mask table. Padding columns
// carry zero bits over zero-valued x entries, so they contribute nothing.

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "neurohd/hypervector.hpp"
#include "neurohd/ops.hpp"
#include "neurohd/rpeaks.hpp"

namespace neurohd {

struct BinaryLinear {
    std::uint32_t D = 0;     // output dimensionality
    std::uint32_t L = 0;     // block length
    std::vector<double> W;   // D x L latent weights, row-major
};

// Binarized form actually used in every forward pass. Rows are bit-packed
// (bit 1 <-> +1) and padded to a word boundary with zero bits.
struct PackedWeights {
    std::uint32_t D = 0;
    std::uint32_t L = 0;
    std::size_t words_per_row = 0;
    std::vector<std::uint64_t> rows;  // D * words_per_row
    double s = 0.0;                   // mean |W|

    bool sign_bit(std::uint32_t i, std::uint32_t j) const {
        return (rows[i * words_per_row + j / 64] >> (j % 64)) & 1ULL;
    }
};

// Eqs: s = mean|W|, W_tilde = s * sign(W). Returned as scale plus sign bits.
inline PackedWeights binarize_weights(const BinaryLinear& lin) {
    if (lin.W.empty() || lin.W.size() != static_cast<std::size_t>(lin.D) * lin.L) {
        throw std::invalid_argument("binarize_weights: empty or inconsistent weight matrix");
    }
    PackedWeights pw;
    pw.D = lin.D;
    pw.L = lin.L;
    pw.words_per_row = (lin.L + 63) / 64;
    pw.rows.assign(static_cast<std::size_t>(lin.D) * pw.words_per_row, 0);
    double acc = 0.0;
    for (std::uint32_t i = 0; i < lin.D; ++i) {
        for (std::uint32_t j = 0; j < lin.L; ++j) {
            const double w = lin.W[static_cast<std::size_t>(i) * lin.L + j];
            acc += std::fabs(w);
            if (w >= 0.0) pw.rows[i * pw.words_per_row + j / 64] |= 1ULL << (j % 64);
        }
    }
    pw.s = acc / static_cast<double>(lin.W.size());
    return pw;
}

// Dense materialization of W_tilde, the "float path" weight matrix.
inline std::vector<double> dense_tilde(const PackedWeights& pw) {
    std::vector<double> wt(static_cast<std::size_t>(pw.D) * pw.L);
    for (std::uint32_t i = 0; i < pw.D; ++i) {
        for (std::uint32_t j = 0; j < pw.L; ++j) {
            wt[static_cast<std::size_t>(i) * pw.L + j] = pw.sign_bit(i, j) ? pw.s : -pw.s;
        }
    }
    return wt;
}

namespace detail {

struct SignLut {
    alignas(64) std::uint64_t mask[256][8];
    SignLut() {
        for (int b = 0; b < 256; ++b) {
            for (int k = 0; k < 8; ++k) {
                mask[b][k] = ((b >> k) & 1) ? 0ULL : 0x8000000000000000ULL;
            }
        }
    }
};

inline const SignLut& sign_lut() {
    static const SignLut lut;
    return lut;
}

}  // namespace detail

// u = sign(W) x for rows [row_begin, row_end). x_padded must hold
// words_per_row*64 entries, zeros beyond L.
inline void project_signs_range(const PackedWeights& pw, const double* x_padded, double* u,
                                std::uint32_t row_begin, std::uint32_t row_end) {
    const auto& lut = detail::sign_lut();
    const std::size_t wpr = pw.words_per_row;
    for (std::uint32_t i = row_begin; i < row_end; ++i) {
        const std::uint64_t* row = &pw.rows[i * wpr];
        double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        for (std::size_t w = 0; w < wpr; ++w) {
            const std::uint64_t bits = row[w];
            const double* xw = x_padded + w * 64;
            for (int byte = 0; byte < 8; ++byte) {
                const std::uint64_t* m = lut.mask[(bits >> (8 * byte)) & 0xff];
                const double* xx = xw + 8 * byte;
                for (int k = 0; k < 8; ++k) {
                    acc[k] += std::bit_cast<double>(std::bit_cast<std::uint64_t>(xx[k]) ^ m[k]);
                }
            }
        }
        u[i] = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    }
}

inline void project_signs(const PackedWeights& pw, const double* x_padded, double* u) {
    project_signs_range(pw, x_padded, u, 0, pw.D);
}

inline std::vector<double> pad_block(const std::vector<double>& x, std::size_t words_per_row) {
    std::vector<double> xp(words_per_row * 64, 0.0);
    std::copy(x.begin(), x.end(), xp.begin());
    return xp;
}

// Continuous encoding of one block: z = tanh(W_tilde x).
inline DenseHypervector encode_block(const std::vector<double>& x, const PackedWeights& pw) {
    if (x.size() != pw.L) throw std::invalid_argument("encode_block: block length mismatch");
    const auto xp = pad_block(x, pw.words_per_row);
    DenseHypervector z(pw.D);
    std::vector<double> u(pw.D);
    project_signs(pw, xp.data(), u.data());
    for (std::uint32_t i = 0; i < pw.D; ++i) z[i] = std::tanh(pw.s * u[i]);
    return z;
}

// Elementwise sum across encoded blocks.
inline DenseHypervector aggregate(const std::vector<DenseHypervector>& blocks) {
    if (blocks.empty()) throw std::invalid_argument("aggregate: empty input");
    DenseHypervector out(blocks.front().size(), 0.0);
    for (const auto& b : blocks) {
        if (b.size() != out.size()) throw std::invalid_argument("aggregate: dimension mismatch");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    }
    return out;
}

// Continuous embedding of a whole window: Z = sum_t tanh(W_tilde x_t) over
// real blocks. Zero pad blocks contribute tanh(0) = 0, so skipping them by
// mask equals encoding them.
inline DenseHypervector encode_window(const RrBlockSequence& seq, const PackedWeights& pw) {
    DenseHypervector Z(pw.D, 0.0);
    std::vector<double> u(pw.D);
    for (std::size_t t = 0; t < seq.blocks.size(); ++t) {
        if (!seq.mask[t]) continue;
        const auto xp = pad_block(seq.blocks[t], pw.words_per_row);
        project_signs(pw, xp.data(), u.data());
        for (std::uint32_t i = 0; i < pw.D; ++i) Z[i] += std::tanh(pw.s * u[i]);
    }
    return Z;
}

struct SymbolicEncoding {
    std::vector<std::int32_t> Z;           // sum of sign vectors, entries in [-T, T]
    std::vector<PackedHypervector> blocks; // one per block slot; pads are all-(+1)
};

// Hard-sign path of Eqs. 12-13. Pad blocks pack to all-(+1) under the
// sign(0) rule but are excluded from the sum via the mask.
inline SymbolicEncoding encode_symbolic(const RrBlockSequence& seq, const PackedWeights& pw) {
    SymbolicEncoding enc;
    enc.Z.assign(pw.D, 0);
    enc.blocks.reserve(seq.blocks.size());
    std::vector<double> u(pw.D);
    for (std::size_t t = 0; t < seq.blocks.size(); ++t) {
        PackedHypervector bits(pw.D);
        if (seq.mask[t]) {
            if (seq.blocks[t].size() != pw.L)
                throw std::invalid_argument("encode_symbolic: block length mismatch");
            const auto xp = pad_block(seq.blocks[t], pw.words_per_row);
            project_signs(pw, xp.data(), u.data());
            for (std::uint32_t i = 0; i < pw.D; ++i) {
                const double v = pw.s * u[i];
                const bool pos = v >= 0.0;
                if (pos) bits.set(i, true);
                enc.Z[i] += pos ? 1 : -1;
            }
        } else {
            for (auto& w : bits.words()) w = ~0ULL;
            bits.mask_tail();
        }
        enc.blocks.push_back(std::move(bits));
    }
    return enc;
}

struct Classification {
    std::uint32_t label = 0;
    std::vector<double> scores;  // per-class cosine
};

// argmax_j cosine(Z, p_j); ties resolve to the lowest class id.
inline Classification classify(const DenseHypervector& Z, const std::vector<DenseHypervector>& proxies) {
    if (proxies.empty()) throw std::invalid_argument("classify: no proxies");
    Classification out;
    out.scores.resize(proxies.size());
    for (std::size_t j = 0; j < proxies.size(); ++j) out.scores[j] = cosine(Z, proxies[j]);
    for (std::size_t j = 1; j < proxies.size(); ++j) {
        if (out.scores[j] > out.scores[out.label]) out.label = static_cast<std::uint32_t>(j);
    }
    return out;
}

// Symbolic classification against packed proxies: cosine between the integer
// embedding and a bipolar vector reduces to a sign-selected sum.
inline Classification classify_symbolic(const std::vector<std::int32_t>& Z,
                                        const std::vector<PackedHypervector>& proxy_bits) {
    if (proxy_bits.empty()) throw std::invalid_argument("classify: no proxies");
    const std::size_t D = Z.size();
    double zn = 0.0;
    std::int64_t ztot = 0;
    for (std::size_t i = 0; i < D; ++i) {
        zn += static_cast<double>(Z[i]) * static_cast<double>(Z[i]);
        ztot += Z[i];
    }
    if (zn == 0.0) throw std::invalid_argument("classify: zero-norm embedding");
    const double denom = std::sqrt(zn) * std::sqrt(static_cast<double>(D));

    Classification out;
    out.scores.resize(proxy_bits.size());
    for (std::size_t j = 0; j < proxy_bits.size(); ++j) {
        if (proxy_bits[j].dim() != D) throw std::invalid_argument("classify: proxy dimension mismatch");
        // dot(Z, +/-1) = 2 * sum over +1 coordinates - sum over all.
        std::int64_t pos_sum = 0;
        const auto& words = proxy_bits[j].words();
        for (std::size_t w = 0; w < words.size(); ++w) {
            std::uint64_t bits = words[w];
            while (bits) {
                const int k = std::countr_zero(bits);
                pos_sum += Z[w * 64 + static_cast<std::size_t>(k)];
                bits &= bits - 1;
            }
        }
        out.scores[j] = static_cast<double>(2 * pos_sum - ztot) / denom;
    }
    for (std::size_t j = 1; j < proxy_bits.size(); ++j) {
        if (out.scores[j] > out.scores[out.label]) out.label = static_cast<std::uint32_t>(j);
    }
    return out;
}

}  // namespace neurohd
