#pragma once

// PhysioNet WFDB ingestion: header parsing, signal formats 16 (16-bit
// little-endian) and 212 (packed 12-bit pairs), and the MIT binary
// annotation format used by the Apnea-ECG per-minute labels ('N' -> 0,
// 'A' -> 1).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "neurohd/signal.hpp"

namespace neurohd {

struct WfdbSignalInfo {
    std::string file;
    int format = 0;
    double gain = 200.0;  // ADC units per mV
    int baseline = 0;
    int adc_zero = 0;
    int checksum = 0;
    bool has_checksum = false;
    std::string description;
};

struct WfdbHeader {
    std::string record;
    int nsig = 0;
    double fs = 250.0;
    long nsamples = 0;  // 0 = unspecified
    std::vector<WfdbSignalInfo> signals;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

}  // namespace detail

inline WfdbHeader parse_wfdb_header(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("wfdb: cannot open " + path);

    WfdbHeader hdr;
    std::string line;
    bool have_record_line = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tok = detail::split_ws(line);
        if (!have_record_line) {
            if (tok.size() < 2) throw std::runtime_error("wfdb: malformed record line");
            hdr.record = tok[0].substr(0, tok[0].find('/'));
            hdr.nsig = std::stoi(tok[1]);
            if (hdr.nsig < 1) throw std::runtime_error("wfdb: no signals in record");
            if (tok.size() >= 3) hdr.fs = std::stod(tok[2].substr(0, tok[2].find('/')));
            if (tok.size() >= 4) hdr.nsamples = std::stol(tok[3]);
            have_record_line = true;
            continue;
        }
        if (static_cast<int>(hdr.signals.size()) == hdr.nsig) break;

        WfdbSignalInfo si;
        if (tok.size() < 2) throw std::runtime_error("wfdb: malformed signal line");
        si.file = tok[0];
        // Format may carry xN / :skew / +offset modifiers; none are supported.
        std::size_t pos = 0;
        si.format = std::stoi(tok[1], &pos);
        if (pos != tok[1].size()) throw std::runtime_error("wfdb: unsupported format modifier " + tok[1]);
        if (si.format != 16 && si.format != 212) {
            throw std::runtime_error("wfdb: unknown format code " + tok[1]);
        }
        if (tok.size() >= 3) {
            // gain[(baseline)][/units]
            std::string g = tok[2];
            const auto slash = g.find('/');
            if (slash != std::string::npos) g = g.substr(0, slash);
            const auto paren = g.find('(');
            bool have_baseline = false;
            if (paren != std::string::npos) {
                const auto close = g.find(')', paren);
                if (close == std::string::npos) throw std::runtime_error("wfdb: malformed gain field");
                si.baseline = std::stoi(g.substr(paren + 1, close - paren - 1));
                have_baseline = true;
                g = g.substr(0, paren);
            }
            si.gain = std::stod(g);
            if (si.gain == 0.0) si.gain = 200.0;  // WFDB default gain
            if (tok.size() >= 5) si.adc_zero = std::stoi(tok[4]);
            if (!have_baseline) si.baseline = si.adc_zero;
            if (tok.size() >= 7) {
                si.checksum = std::stoi(tok[6]);
                si.has_checksum = true;
            }
            if (tok.size() >= 9) si.description = tok[8];
        }
        hdr.signals.push_back(si);
    }
    if (!have_record_line) throw std::runtime_error("wfdb: empty header");
    if (static_cast<int>(hdr.signals.size()) != hdr.nsig) {
        throw std::runtime_error("wfdb: missing signal lines");
    }
    return hdr;
}

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("wfdb: cannot open " + path);
    return std::vector<unsigned char>((std::istreambuf_iterator<char>(is)),
                                      std::istreambuf_iterator<char>());
}

inline int sign_extend_12(int v) {
    return (v & 0x800) ? v - 4096 : v;
}

// All channels interleaved, raw ADC units.
inline std::vector<std::vector<int>> decode_wfdb_samples(const WfdbHeader& hdr,
                                                         const std::vector<unsigned char>& bytes) {
    const int nsig = hdr.nsig;
    const int fmt = hdr.signals.front().format;
    for (const auto& si : hdr.signals) {
        if (si.format != fmt) throw std::runtime_error("wfdb: mixed signal formats unsupported");
    }

    std::vector<std::vector<int>> chans(static_cast<std::size_t>(nsig));
    if (fmt == 16) {
        if (hdr.nsamples > 0) {
            const std::size_t expect = 2ULL * static_cast<std::size_t>(nsig) *
                                       static_cast<std::size_t>(hdr.nsamples);
            if (bytes.size() < expect) throw std::runtime_error("wfdb: short read");
            if (bytes.size() != expect) throw std::runtime_error("wfdb: length mismatch");
        }
        const std::size_t total = bytes.size() / 2;
        const std::size_t frames = total / static_cast<std::size_t>(nsig);
        for (auto& c : chans) c.reserve(frames);
        for (std::size_t k = 0; k < frames * static_cast<std::size_t>(nsig); ++k) {
            const int lo = bytes[2 * k];
            const int hi = bytes[2 * k + 1];
            int v = lo | (hi << 8);
            if (v & 0x8000) v -= 65536;
            chans[k % static_cast<std::size_t>(nsig)].push_back(v);
        }
    } else {  // 212
        std::size_t want = 0;  // total stream samples, 0 = till EOF
        if (hdr.nsamples > 0) {
            want = static_cast<std::size_t>(hdr.nsamples) * static_cast<std::size_t>(nsig);
            const std::size_t need = (want / 2) * 3 + (want % 2 ? 2 : 0);
            if (bytes.size() < need) throw std::runtime_error("wfdb: short read");
        }
        std::vector<int> stream;
        stream.reserve(want ? want : bytes.size() * 2 / 3);
        std::size_t p = 0;
        while (p + 1 < bytes.size()) {
            const int b0 = bytes[p];
            const int b1 = bytes[p + 1];
            stream.push_back(sign_extend_12(((b1 & 0x0F) << 8) | b0));
            if (want && stream.size() == want) break;
            if (p + 2 >= bytes.size()) break;
            const int b2 = bytes[p + 2];
            stream.push_back(sign_extend_12(((b1 & 0xF0) << 4) | b2));
            if (want && stream.size() == want) break;
            p += 3;
        }
        if (want && stream.size() < want) throw std::runtime_error("wfdb: short read");
        const std::size_t frames = stream.size() / static_cast<std::size_t>(nsig);
        for (std::size_t k = 0; k < frames * static_cast<std::size_t>(nsig); ++k) {
            chans[k % static_cast<std::size_t>(nsig)].push_back(stream[k]);
        }
    }
    return chans;
}

}  // namespace detail

inline EcgSignal read_wfdb(const std::string& header_path, int channel = 0) {
    const WfdbHeader hdr = parse_wfdb_header(header_path);
    if (channel < 0 || channel >= hdr.nsig) throw std::runtime_error("wfdb: channel out of range");

    const auto dir = std::filesystem::path(header_path).parent_path();
    const auto dat_path = (dir / hdr.signals[static_cast<std::size_t>(channel)].file).string();
    const auto bytes = detail::read_file_bytes(dat_path);
    const auto chans = detail::decode_wfdb_samples(hdr, bytes);
    const auto& raw = chans[static_cast<std::size_t>(channel)];
    if (raw.empty()) throw std::runtime_error("wfdb: empty signal");

    const auto& si = hdr.signals[static_cast<std::size_t>(channel)];
    if (hdr.nsamples > 0 && si.has_checksum) {
        std::int64_t sum = 0;
        for (int v : raw) sum += v;
        const std::int16_t got = static_cast<std::int16_t>(sum & 0xFFFF);
        if (got != static_cast<std::int16_t>(si.checksum)) {
            throw std::runtime_error("wfdb: checksum mismatch");
        }
    }

    EcgSignal sig;
    sig.fs = hdr.fs;
    sig.samples.reserve(raw.size());
    for (int v : raw) {
        sig.samples.push_back((static_cast<double>(v) - si.baseline) / si.gain);
    }
    return sig;
}

// MIT annotation stream -> per-minute labels in time order. Recognized
// annotation codes: 1 ('N', normal minute) and 8 ('A', apneic minute).
inline std::vector<int> read_apnea_annotations(const std::string& path) {
    const auto bytes = detail::read_file_bytes(path);
    std::vector<int> labels;
    std::size_t p = 0;
    long long pending = 0;
    while (p + 1 < bytes.size()) {
        const unsigned a = bytes[p] | (static_cast<unsigned>(bytes[p + 1]) << 8);
        p += 2;
        const unsigned code = a >> 10;
        const unsigned time10 = a & 0x3FF;
        if (a == 0) break;  // end of annotation stream
        switch (code) {
            case 59: {  // SKIP: 4-byte interval, high 16-bit word first
                if (p + 3 >= bytes.size()) throw std::runtime_error("annotations: short read");
                const long long hi = bytes[p] | (static_cast<long long>(bytes[p + 1]) << 8);
                const long long lo = bytes[p + 2] | (static_cast<long long>(bytes[p + 3]) << 8);
                pending += (hi << 16) | lo;
                p += 4;
                break;
            }
            case 60:  // NUM
            case 61:  // SUB
            case 62:  // CHN
                break;
            case 63: {  // AUX: time10 = byte count, padded to even
                std::size_t skip = time10 + (time10 & 1);
                if (p + skip > bytes.size()) throw std::runtime_error("annotations: short read");
                p += skip;
                break;
            }
            case 1:  // 'N'
                labels.push_back(0);
                pending = 0;
                break;
            case 8:  // 'A'
                labels.push_back(1);
                pending = 0;
                break;
            default:
                throw std::runtime_error("annotations: unknown annotation code " + std::to_string(code));
        }
    }
    return labels;
}

}  // namespace neurohd
