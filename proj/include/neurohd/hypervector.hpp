#pragma once

// Hypervector representations. DenseHypervector carries the real-valued
// embeddings used during training; PackedHypervector is the bit-packed
// bipolar form used for symbolic inference (bit 1 <-> +1, bit 0 <-> -1,
// little-endian bit order within 64-bit words). Unused tail bits of the last
// word are always zero so whole-word popcounts stay exact.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "neurohd/io.hpp"
#include "neurohd/rng.hpp"

namespace neurohd {

using DenseHypervector = std::vector<double>;

class PackedHypervector {
public:
    static constexpr std::size_t kWordBits = 64;

    PackedHypervector() : dim_(0) {}

    explicit PackedHypervector(std::uint32_t dim)
        : dim_(dim), words_((dim + kWordBits - 1) / kWordBits, 0) {
        if (dim == 0) throw std::invalid_argument("PackedHypervector: dimension must be positive");
    }

    std::uint32_t dim() const { return dim_; }
    std::size_t word_count() const { return words_.size(); }

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

    bool get(std::size_t i) const {
        return (words_[i / kWordBits] >> (i % kWordBits)) & 1ULL;
    }

    void set(std::size_t i, bool value) {
        const std::uint64_t mask = 1ULL << (i % kWordBits);
        if (value)
            words_[i / kWordBits] |= mask;
        else
            words_[i / kWordBits] &= ~mask;
    }

    // Re-zero the padding bits after whole-word operations that may have
    // touched them (XNOR, negation).
    void mask_tail() {
        const std::size_t used = dim_ % kWordBits;
        if (used != 0 && !words_.empty()) {
            words_.back() &= (used == kWordBits) ? ~0ULL : ((1ULL << used) - 1ULL);
        }
    }

    friend bool operator==(const PackedHypervector& a, const PackedHypervector& b) {
        return a.dim_ == b.dim_ && a.words_ == b.words_;
    }
    friend bool operator!=(const PackedHypervector& a, const PackedHypervector& b) {
        return !(a == b);
    }

    // Wire format: 4-byte little-endian dimension, then ceil(D/64) 64-bit
    // little-endian words.
    void serialize(std::ostream& os) const {
        io::write_u32(os, dim_);
        for (std::uint64_t w : words_) io::write_u64(os, w);
    }

    static PackedHypervector deserialize(std::istream& is) {
        const std::uint32_t dim = io::read_u32(is);
        if (dim == 0) throw std::runtime_error("PackedHypervector: zero dimension in stream");
        PackedHypervector p(dim);
        for (auto& w : p.words_) w = io::read_u64(is);
        p.mask_tail();
        return p;
    }

private:
    std::uint32_t dim_;
    std::vector<std::uint64_t> words_;
};

inline PackedHypervector random_packed(std::uint32_t dim, SplitMix64& rng) {
    PackedHypervector p(dim);
    for (auto& w : p.words()) w = rng.next();
    p.mask_tail();
    return p;
}

}  // namespace neurohd
