#pragma once

// Hypervector algebra: binding, bundling, permutation, similarity and the
// sign/pack bridge between the dense and bipolar representations. All
// functions are pure; the sign(0) = +1 convention is applied everywhere a
// tie can occur (bundling, packing).

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "neurohd/hypervector.hpp"

namespace neurohd {

namespace detail {
inline void require_same_dim(const PackedHypervector& x, const PackedHypervector& y) {
    if (x.dim() != y.dim()) throw std::invalid_argument("hypervector dimension mismatch");
}
}  // namespace detail

// Elementwise bipolar product. With the bit 1 <-> +1 encoding this is XNOR.
inline PackedHypervector bind(const PackedHypervector& x, const PackedHypervector& y) {
    detail::require_same_dim(x, y);
    PackedHypervector out(x.dim());
    for (std::size_t i = 0; i < out.word_count(); ++i) {
        out.words()[i] = ~(x.words()[i] ^ y.words()[i]);
    }
    out.mask_tail();
    return out;
}

inline PackedHypervector negate(const PackedHypervector& x) {
    PackedHypervector out(x.dim());
    for (std::size_t i = 0; i < out.word_count(); ++i) out.words()[i] = ~x.words()[i];
    out.mask_tail();
    return out;
}

// Majority vote: sign of the coordinatewise sum, ties to +1.
inline PackedHypervector bundle(const std::vector<PackedHypervector>& vs) {
    if (vs.empty()) throw std::invalid_argument("bundle: empty input");
    const std::uint32_t dim = vs.front().dim();
    for (const auto& v : vs) detail::require_same_dim(vs.front(), v);

    std::vector<std::uint32_t> ones(dim, 0);
    for (const auto& v : vs) {
        for (std::uint32_t i = 0; i < dim; ++i) ones[i] += v.get(i) ? 1u : 0u;
    }
    PackedHypervector out(dim);
    const std::uint32_t n = static_cast<std::uint32_t>(vs.size());
    for (std::uint32_t i = 0; i < dim; ++i) {
        // sum = 2*ones - n; sum >= 0 means +1
        out.set(i, 2 * ones[i] >= n);
    }
    return out;
}

// Cyclic rotation: coordinate j moves to (j + t) mod D.
inline PackedHypervector permute(const PackedHypervector& x, std::uint64_t t) {
    const std::uint32_t dim = x.dim();
    const std::uint64_t shift = t % dim;
    if (shift == 0) return x;
    PackedHypervector out(dim);
    for (std::uint32_t j = 0; j < dim; ++j) {
        if (x.get(j)) out.set(static_cast<std::size_t>((j + shift) % dim), true);
    }
    return out;
}

inline double cosine(const DenseHypervector& x, const DenseHypervector& y) {
    if (x.size() != y.size()) throw std::invalid_argument("hypervector dimension mismatch");
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        nx += x[i] * x[i];
        ny += y[i] * y[i];
    }
    if (nx == 0.0 || ny == 0.0) throw std::invalid_argument("cosine: zero-norm input");
    return dot / (std::sqrt(nx) * std::sqrt(ny));
}

// 1 - 2h/D over the packed form; exactly the cosine of the underlying
// bipolar vectors.
inline double hamming_similarity(const PackedHypervector& x, const PackedHypervector& y) {
    detail::require_same_dim(x, y);
    std::uint64_t h = 0;
    for (std::size_t i = 0; i < x.word_count(); ++i) {
        h += static_cast<std::uint64_t>(std::popcount(x.words()[i] ^ y.words()[i]));
    }
    const double d = static_cast<double>(x.dim());
    return (d - 2.0 * static_cast<double>(h)) / d;
}

// sign with sign(0) = +1, then bit-encode.
inline PackedHypervector pack(const DenseHypervector& v) {
    if (v.empty()) throw std::invalid_argument("pack: empty input");
    PackedHypervector out(static_cast<std::uint32_t>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] >= 0.0) out.set(i, true);
    }
    return out;
}

inline DenseHypervector unpack(const PackedHypervector& p) {
    DenseHypervector v(p.dim());
    for (std::uint32_t i = 0; i < p.dim(); ++i) v[i] = p.get(i) ? 1.0 : -1.0;
    return v;
}

}  // namespace neurohd
