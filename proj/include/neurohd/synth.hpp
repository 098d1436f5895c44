#pragma once

// Synthetic ECG generator for desk-scale verification. Beats are placed by
// integrating an instantaneous heart-rate signal with class-dependent
// sinusoidal HRV modulation (emulating apneic cyclic variation); each beat
// is a Gaussian-derivative QRS wavelet whose positive lobe peaks exactly at
// the beat sample. Ground-truth peak positions are returned for oracle
// tests. Fully deterministic from (seed, subject, window).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "neurohd/config.hpp"
#include "neurohd/dataset.hpp"
#include "neurohd/rng.hpp"

namespace neurohd {

struct SyntheticClass {
    double mean_hr_bpm = 60.0;
    double hrv_depth_bpm = 0.0;   // modulation amplitude
    double hrv_period_s = 30.0;   // modulation period
};

struct SyntheticSpec {
    std::uint32_t n_subjects = 15;
    std::uint32_t windows_per_subject = 20;
    double fs = 100.0;
    double window_s = 60.0;
    double snr_db = 12.0;
    std::uint64_t seed = 1;
    double qrs_sigma_s = 0.017;
    double amp_jitter = 0.2;  // per-beat amplitude ~ U(1 - j, 1 + j)
    std::vector<SyntheticClass> classes{{60.0, 6.0, 20.0}, {60.0, 12.0, 35.0}};

    static SyntheticSpec from_config(const ConfigMap& cfg) {
        SyntheticSpec s;
        s.n_subjects = static_cast<std::uint32_t>(cfg.get_int("n_subjects", s.n_subjects));
        s.windows_per_subject =
            static_cast<std::uint32_t>(cfg.get_int("windows_per_subject", s.windows_per_subject));
        s.fs = cfg.get_double("fs", s.fs);
        s.window_s = cfg.get_double("window_s", s.window_s);
        s.snr_db = cfg.get_double("snr_db", s.snr_db);
        s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(s.seed)));
        s.qrs_sigma_s = cfg.get_double("qrs_sigma_s", s.qrs_sigma_s);
        s.amp_jitter = cfg.get_double("amp_jitter", s.amp_jitter);
        std::vector<SyntheticClass> classes;
        for (std::uint32_t c = 0;; ++c) {
            const std::string prefix = "class" + std::to_string(c) + "_";
            if (!cfg.has(prefix + "mean_hr")) break;
            SyntheticClass sc;
            sc.mean_hr_bpm = cfg.get_double(prefix + "mean_hr", 60.0);
            sc.hrv_depth_bpm = cfg.get_double(prefix + "hrv_depth", 0.0);
            sc.hrv_period_s = cfg.get_double(prefix + "hrv_period", 30.0);
            classes.push_back(sc);
        }
        if (!classes.empty()) s.classes = classes;
        validate(s);
        return s;
    }

    static void validate(const SyntheticSpec& s) {
        if (s.fs < 50.0) throw std::invalid_argument("synth: fs must be >= 50 Hz");
        if (s.classes.size() < 2) throw std::invalid_argument("synth: need at least two classes");
        if (s.n_subjects == 0 || s.windows_per_subject == 0 || !(s.window_s > 0.0)) {
            throw std::invalid_argument("synth: empty dataset spec");
        }
        if (s.amp_jitter < 0.0 || s.amp_jitter >= 1.0) {
            throw std::invalid_argument("synth: amp_jitter must be in [0, 1)");
        }
        for (const auto& c : s.classes) {
            if (!(c.mean_hr_bpm > 0.0) || c.hrv_depth_bpm < 0.0 ||
                c.hrv_depth_bpm >= c.mean_hr_bpm || !(c.hrv_period_s > 0.0)) {
                throw std::invalid_argument("synth: invalid class definition");
            }
        }
    }
};

struct SynthWindow {
    LabeledWindow window;
    std::vector<std::size_t> true_peaks;
};

namespace detail {

// One window: integrate-and-fire beat placement under modulated HR, then
// QRS wavelets plus white noise at the requested SNR.
inline SynthWindow synth_window(const SyntheticSpec& spec, std::uint32_t subject,
                                std::uint32_t window_index, std::uint32_t label) {
    const SyntheticClass& cls = spec.classes[label];
    SplitMix64 rng(mix_seed(spec.seed, subject, window_index));

    const std::size_t n = static_cast<std::size_t>(spec.window_s * spec.fs + 0.5);
    const double dt = 1.0 / spec.fs;
    const double beat_phase0 = rng.next_double();   // fraction toward the first beat
    const double mod_phase0 = rng.next_double();    // HRV modulation phase

    std::vector<double> beat_times;
    double phase = beat_phase0;
    double t = 0.0;
    const double two_pi = 6.283185307179586476925287;
    while (t < spec.window_s) {
        const double hr =
            cls.mean_hr_bpm +
            cls.hrv_depth_bpm * std::sin(two_pi * (t / cls.hrv_period_s + mod_phase0));
        const double dphase = hr / 60.0 * dt;
        if (phase + dphase >= 1.0) {
            const double frac = (1.0 - phase) / dphase;
            beat_times.push_back(t + frac * dt);
            phase = phase + dphase - 1.0;
        } else {
            phase += dphase;
        }
        t += dt;
    }

    std::vector<double> x(n, 0.0);
    std::vector<std::size_t> peaks;
    const double sigma = spec.qrs_sigma_s * spec.fs;  // samples
    const long halfw = static_cast<long>(std::ceil(4.0 * sigma));
    for (double bt : beat_times) {
        const double amp = 1.0 + spec.amp_jitter * (2.0 * rng.next_double() - 1.0);
        const long b = std::lround(bt * spec.fs);
        if (b < 0 || b >= static_cast<long>(n)) continue;
        peaks.push_back(static_cast<std::size_t>(b));
        // Gaussian-derivative wavelet, positive lobe normalized to amp at i==b.
        for (long i = b - halfw; i <= b + halfw; ++i) {
            if (i < 0 || i >= static_cast<long>(n)) continue;
            const double v = static_cast<double>(i - b) / sigma - 1.0;
            x[static_cast<std::size_t>(i)] += -amp * v * std::exp(0.5 - 0.5 * v * v);
        }
    }

    double power = 0.0;
    for (double v : x) power += v * v;
    power /= static_cast<double>(n);
    const double noise_std = std::sqrt(power / std::pow(10.0, spec.snr_db / 10.0));
    for (auto& v : x) v += noise_std * rng.normal();

    SynthWindow out;
    out.window.signal = EcgSignal{std::move(x), spec.fs};
    out.window.label = label;
    out.window.subject = "s" + std::to_string(subject);
    out.window.window_index = window_index;
    out.true_peaks = std::move(peaks);
    return out;
}

}  // namespace detail

// Window labels are dealt round-robin per subject, so classes stay balanced
// within every subject.
inline std::vector<SynthWindow> synth_generate(const SyntheticSpec& spec) {
    SyntheticSpec::validate(spec);
    std::vector<SynthWindow> out;
    out.reserve(static_cast<std::size_t>(spec.n_subjects) * spec.windows_per_subject);
    const std::uint32_t C = static_cast<std::uint32_t>(spec.classes.size());
    for (std::uint32_t s = 0; s < spec.n_subjects; ++s) {
        for (std::uint32_t w = 0; w < spec.windows_per_subject; ++w) {
            out.push_back(detail::synth_window(spec, s, w, (s + w) % C));
        }
    }
    return out;
}

}  // namespace neurohd
