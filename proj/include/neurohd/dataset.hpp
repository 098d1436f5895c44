#pragma once

// Dataset plumbing: labeled windows, per-minute windowing, patient-wise
// k-fold splits, CSV signal files, and the on-disk dataset directory layout
// produced by the synth command (signals/, rpeaks/, labels.csv,
// manifest.json).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurohd/rng.hpp"
#include "neurohd/signal.hpp"

namespace neurohd {

struct LabeledWindow {
    EcgSignal signal;
    std::uint32_t label = 0;
    std::string subject;
    std::size_t window_index = 0;
};

// Non-overlapping aligned windows; trailing partial windows and windows
// without a label are dropped.
inline std::vector<LabeledWindow> make_windows(const EcgSignal& sig, const std::vector<int>& labels,
                                               double window_s = 60.0,
                                               const std::string& subject = "") {
    if (!(window_s > 0.0) || !(sig.fs > 0.0)) throw std::invalid_argument("make_windows: bad window");
    const std::size_t w = static_cast<std::size_t>(window_s * sig.fs + 0.5);
    if (w == 0) throw std::invalid_argument("make_windows: empty window");
    const std::size_t n_full = sig.samples.size() / w;
    const std::size_t n = std::min(n_full, labels.size());
    std::vector<LabeledWindow> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        LabeledWindow lw;
        lw.signal.fs = sig.fs;
        lw.signal.samples.assign(sig.samples.begin() + static_cast<std::ptrdiff_t>(i * w),
                                 sig.samples.begin() + static_cast<std::ptrdiff_t>((i + 1) * w));
        lw.label = static_cast<std::uint32_t>(labels[i]);
        lw.subject = subject;
        lw.window_index = i;
        out.push_back(std::move(lw));
    }
    return out;
}

struct FoldSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Subject-disjoint k-fold split: subjects are shuffled by seed and dealt
// round-robin into folds; no subject appears on both sides of any fold.
inline std::vector<FoldSplit> patient_kfold(const std::vector<LabeledWindow>& windows,
                                            std::size_t k, std::uint64_t seed) {
    if (windows.empty()) throw std::invalid_argument("patient_kfold: empty dataset");
    std::vector<std::string> subjects;
    for (const auto& w : windows) {
        bool seen = false;
        for (const auto& s : subjects) {
            if (s == w.subject) {
                seen = true;
                break;
            }
        }
        if (!seen) subjects.push_back(w.subject);
    }
    if (k < 2 || k > subjects.size()) {
        throw std::invalid_argument("patient_kfold: k out of range for subject count");
    }
    SplitMix64 rng(seed);
    shuffle(subjects, rng);

    std::map<std::string, std::size_t> fold_of;
    for (std::size_t i = 0; i < subjects.size(); ++i) fold_of[subjects[i]] = i % k;

    std::vector<FoldSplit> folds(k);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const std::size_t f = fold_of[windows[i].subject];
        for (std::size_t g = 0; g < k; ++g) {
            if (g == f)
                folds[g].test.push_back(i);
            else
                folds[g].train.push_back(i);
        }
    }
    return folds;
}

// Two-column CSV signal: header "time_s,mv" required; fs recovered from the
// first time step.
inline EcgSignal read_signal_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("csv: cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("csv: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "time_s,mv") throw std::runtime_error("csv: missing time_s,mv header in " + path);

    std::vector<double> times, values;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("csv: malformed row in " + path);
        times.push_back(std::stod(line.substr(0, comma)));
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (times.size() < 2) throw std::runtime_error("csv: need at least 2 samples in " + path);
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw std::runtime_error("csv: non-increasing time column in " + path);
    EcgSignal sig;
    // Round fs to 1e-3 to absorb the CSV printing precision.
    sig.fs = std::round(1000.0 / dt) / 1000.0;
    sig.samples = std::move(values);
    return sig;
}

inline void write_signal_csv(const std::string& path, const EcgSignal& sig) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("csv: cannot open " + path + " for writing");
    os << "time_s,mv\n";
    char buf[80];
    for (std::size_t i = 0; i < sig.samples.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f\n", static_cast<double>(i) / sig.fs,
                      sig.samples[i]);
        os << buf;
    }
    if (!os) throw std::runtime_error("csv: write failed for " + path);
}

struct DatasetEntry {
    LabeledWindow window;
    std::vector<std::size_t> true_peaks;  // empty when unavailable
    std::string split;                    // "train" or "test"
};

struct Dataset {
    std::vector<DatasetEntry> entries;
    double fs = 0.0;
    double window_s = 60.0;
    std::uint32_t n_classes = 2;
};

inline void write_dataset(const std::string& dir, const Dataset& ds, const nlohmann::json& meta) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "signals");
    fs::create_directories(fs::path(dir) / "rpeaks");

    std::ofstream labels((fs::path(dir) / "labels.csv").string());
    if (!labels) throw std::runtime_error("dataset: cannot write labels.csv");
    labels << "file,subject,window_index,label,split\n";

    char name[32];
    for (std::size_t i = 0; i < ds.entries.size(); ++i) {
        const auto& e = ds.entries[i];
        std::snprintf(name, sizeof(name), "w%05zu.csv", i);
        write_signal_csv((fs::path(dir) / "signals" / name).string(), e.window.signal);
        {
            std::ofstream pk((fs::path(dir) / "rpeaks" / name).string());
            if (!pk) throw std::runtime_error("dataset: cannot write rpeaks file");
            pk << "sample_index\n";
            for (std::size_t p : e.true_peaks) pk << p << "\n";
        }
        labels << name << "," << e.window.subject << "," << e.window.window_index << ","
               << e.window.label << "," << e.split << "\n";
    }
    if (!labels) throw std::runtime_error("dataset: write failed for labels.csv");

    nlohmann::json j = meta;
    j["fs"] = ds.fs;
    j["window_s"] = ds.window_s;
    j["n_classes"] = ds.n_classes;
    j["n_windows"] = ds.entries.size();
    std::ofstream mf((fs::path(dir) / "manifest.json").string());
    if (!mf) throw std::runtime_error("dataset: cannot write manifest.json");
    mf << j.dump(2) << "\n";
}

inline Dataset read_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    const auto labels_path = fs::path(dir) / "labels.csv";
    std::ifstream labels(labels_path.string());
    if (!labels) throw std::runtime_error("dataset: cannot open " + labels_path.string());

    Dataset ds;
    {
        std::ifstream mf((fs::path(dir) / "manifest.json").string());
        if (mf) {
            nlohmann::json j;
            mf >> j;
            ds.fs = j.value("fs", 0.0);
            ds.window_s = j.value("window_s", 60.0);
            ds.n_classes = j.value("n_classes", 2u);
        }
    }

    std::string line;
    if (!std::getline(labels, line)) throw std::runtime_error("dataset: empty labels.csv");
    while (std::getline(labels, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
        if (cols.size() != 5) throw std::runtime_error("dataset: malformed labels.csv row");

        DatasetEntry e;
        e.window.signal = read_signal_csv((fs::path(dir) / "signals" / cols[0]).string());
        e.window.subject = cols[1];
        e.window.window_index = static_cast<std::size_t>(std::stoull(cols[2]));
        e.window.label = static_cast<std::uint32_t>(std::stoul(cols[3]));
        e.split = cols[4];

        const auto pk_path = fs::path(dir) / "rpeaks" / cols[0];
        std::ifstream pk(pk_path.string());
        if (pk) {
            std::string row;
            std::getline(pk, row);  // header
            while (std::getline(pk, row)) {
                if (!row.empty()) e.true_peaks.push_back(std::stoull(row));
            }
        }
        ds.entries.push_back(std::move(e));
    }
    if (ds.entries.empty()) throw std::runtime_error("dataset: no windows in " + dir);
    if (ds.fs == 0.0) ds.fs = ds.entries.front().window.signal.fs;
    return ds;
}

}  // namespace neurohd
