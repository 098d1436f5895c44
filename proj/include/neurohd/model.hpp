#pragma once

// Trained model container and its on-disk format.
//
// NHDR1 layout, all integers 4-byte little-endian, floats 8-byte IEEE LE:
//   "NHDR1" | D | L | C | tau | weight bits | s | C x (proxy bits, norm)
// Weight bits are the flattened row-major sign matrix (bit index i*L + j),
// packed into ceil(D*L/64) words -- 125,000 bytes at the default
// D=10000, L=100. Proxy bits are each ceil(D/64) words plus the stored
// real-proxy norm, which lets the continuous path reconstruct a
// norm-preserving approximation after a round trip.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "neurohd/encoder.hpp"
#include "neurohd/hypervector.hpp"
#include "neurohd/io.hpp"
#include "neurohd/ops.hpp"

namespace neurohd {

struct Model {
    std::uint32_t D = 0;
    std::uint32_t L = 0;
    std::uint32_t C = 0;
    double tau = 0.1;

    PackedWeights weights;                     // forward weights: sign bits + scale
    std::vector<double> W;                     // latent weights; empty after load
    std::vector<DenseHypervector> proxies;     // real class proxies
    std::vector<PackedHypervector> proxy_bits; // sign(proxies)
    std::vector<double> proxy_norms;           // ||proxy||_2
};

// Rebuild the packed inference artifacts from the real-valued parameters.
inline void refresh_inference(Model& m) {
    BinaryLinear lin{m.D, m.L, m.W};
    m.weights = binarize_weights(lin);
    m.proxy_bits.clear();
    m.proxy_norms.clear();
    for (const auto& p : m.proxies) {
        m.proxy_bits.push_back(pack(p));
        double n = 0.0;
        for (double v : p) n += v * v;
        m.proxy_norms.push_back(std::sqrt(n));
    }
}

namespace detail {

// Row-aligned packed rows -> flat row-major bit stream.
inline std::vector<std::uint64_t> flatten_weight_bits(const PackedWeights& pw) {
    const std::size_t total = static_cast<std::size_t>(pw.D) * pw.L;
    std::vector<std::uint64_t> flat((total + 63) / 64, 0);
    std::size_t bit = 0;
    for (std::uint32_t i = 0; i < pw.D; ++i) {
        for (std::uint32_t j = 0; j < pw.L; ++j, ++bit) {
            if (pw.sign_bit(i, j)) flat[bit / 64] |= 1ULL << (bit % 64);
        }
    }
    return flat;
}

inline PackedWeights unflatten_weight_bits(const std::vector<std::uint64_t>& flat,
                                           std::uint32_t D, std::uint32_t L, double s) {
    PackedWeights pw;
    pw.D = D;
    pw.L = L;
    pw.s = s;
    pw.words_per_row = (L + 63) / 64;
    pw.rows.assign(static_cast<std::size_t>(D) * pw.words_per_row, 0);
    std::size_t bit = 0;
    for (std::uint32_t i = 0; i < D; ++i) {
        for (std::uint32_t j = 0; j < L; ++j, ++bit) {
            if ((flat[bit / 64] >> (bit % 64)) & 1ULL) {
                pw.rows[i * pw.words_per_row + j / 64] |= 1ULL << (j % 64);
            }
        }
    }
    return pw;
}

}  // namespace detail

inline void save_model(const Model& m, std::ostream& os) {
    if (m.weights.D != m.D || m.weights.L != m.L || m.proxy_bits.size() != m.C) {
        throw std::runtime_error("save_model: inference artifacts out of date");
    }
    io::write_magic(os, "NHDR1");
    io::write_u32(os, m.D);
    io::write_u32(os, m.L);
    io::write_u32(os, m.C);
    io::write_f64(os, m.tau);
    for (std::uint64_t w : detail::flatten_weight_bits(m.weights)) io::write_u64(os, w);
    io::write_f64(os, m.weights.s);
    for (std::uint32_t c = 0; c < m.C; ++c) {
        for (std::uint64_t w : m.proxy_bits[c].words()) io::write_u64(os, w);
        io::write_f64(os, m.proxy_norms[c]);
    }
    if (!os) throw std::runtime_error("save_model: write failed");
}

inline void save_model(const Model& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_model: cannot open " + path);
    save_model(m, os);
}

inline Model load_model(std::istream& is) {
    if (io::read_magic(is, 5) != "NHDR1") throw std::runtime_error("load_model: bad magic");
    Model m;
    m.D = io::read_u32(is);
    m.L = io::read_u32(is);
    m.C = io::read_u32(is);
    if (m.D == 0 || m.L == 0 || m.C < 2) throw std::runtime_error("load_model: corrupt header");
    m.tau = io::read_f64(is);

    const std::size_t nwords = (static_cast<std::size_t>(m.D) * m.L + 63) / 64;
    std::vector<std::uint64_t> flat(nwords);
    for (auto& w : flat) w = io::read_u64(is);
    const double s = io::read_f64(is);
    m.weights = detail::unflatten_weight_bits(flat, m.D, m.L, s);

    const std::size_t pwords = (m.D + 63) / 64;
    for (std::uint32_t c = 0; c < m.C; ++c) {
        PackedHypervector bits(m.D);
        for (std::size_t w = 0; w < pwords; ++w) bits.words()[w] = io::read_u64(is);
        bits.mask_tail();
        m.proxy_bits.push_back(std::move(bits));
        m.proxy_norms.push_back(io::read_f64(is));
    }
    // Reconstruct real proxies at the stored norm; direction comes from the
    // sign bits. Cosine-based classification is invariant to the norm, it is
    // kept for round-trip fidelity of reports.
    for (std::uint32_t c = 0; c < m.C; ++c) {
        DenseHypervector p = unpack(m.proxy_bits[c]);
        const double scale = m.proxy_norms[c] / std::sqrt(static_cast<double>(m.D));
        for (auto& v : p) v *= scale;
        m.proxies.push_back(std::move(p));
    }
    return m;
}

inline Model load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_model: cannot open " + path);
    return load_model(is);
}

struct ModelInfo {
    std::string magic;
    std::uint32_t D = 0;
    std::uint32_t L = 0;  // levels Q for CHD1
    std::uint32_t C = 0;
    double tau = 0.0;
    std::uint64_t weight_payload_bytes = 0;
};

// Header-only peek used by the inspect command; understands both containers.
inline ModelInfo inspect_model_header(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("inspect: cannot open " + path);
    ModelInfo info;
    char magic[5];
    if (!is.read(magic, 4)) throw std::runtime_error("inspect: short read");
    if (std::string(magic, 4) == "CHD1") {
        info.magic = "CHD1";
        info.D = io::read_u32(is);
        info.L = io::read_u32(is);  // quantization levels
        info.C = io::read_u32(is);
        return info;
    }
    if (!is.read(magic + 4, 1) || std::string(magic, 5) != "NHDR1") {
        throw std::runtime_error("inspect: unknown model format");
    }
    info.magic = "NHDR1";
    info.D = io::read_u32(is);
    info.L = io::read_u32(is);
    info.C = io::read_u32(is);
    info.tau = io::read_f64(is);
    info.weight_payload_bytes = ((static_cast<std::uint64_t>(info.D) * info.L + 63) / 64) * 8;
    return info;
}

}  // namespace neurohd
