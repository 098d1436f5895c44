#pragma once

// ECG preprocessing: 4th-order Butterworth bandpass applied forward-backward
// (zero phase) and z-score normalization.
//
// Filter design path: order-2 analog Butterworth lowpass prototype ->
// lowpass-to-bandpass transform (doubling the order to 4) -> bilinear
// transform with frequency prewarping -> two biquad sections. The DC zeros
// pair with the low-corner pole pair and the Nyquist zeros with the
// high-corner pair, which keeps both sections well conditioned.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace neurohd {

struct EcgSignal {
    std::vector<double> samples;  // mV
    double fs = 0.0;              // Hz
};

struct Biquad {
    double b0, b1, b2;  // numerator
    double a1, a2;      // denominator (a0 normalized to 1)
};

namespace detail {

// Transposed direct-form II, one section, with explicit initial state.
inline void biquad_filter(const Biquad& s, const std::vector<double>& x, std::vector<double>& y,
                          double z1, double z2) {
    y.resize(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double xn = x[n];
        const double yn = s.b0 * xn + z1;
        z1 = s.b1 * xn - s.a1 * yn + z2;
        z2 = s.b2 * xn - s.a2 * yn;
        y[n] = yn;
    }
}

inline double dc_gain(const Biquad& s) {
    return (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
}

}  // namespace detail

// Two-section Butterworth bandpass, corners in Hz.
inline std::vector<Biquad> butter_bandpass_sos(double low_hz, double high_hz, double fs) {
    if (!(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < fs / 2.0)) {
        throw std::invalid_argument("bandpass: need 0 < low < high < fs/2");
    }
    using cd = std::complex<double>;
    constexpr double pi = 3.141592653589793238462643;

    // Prewarped analog corners (bilinear with internal rate 2).
    const double w1 = 4.0 * std::tan(pi * (low_hz / (fs / 2.0)) / 2.0);
    const double w2 = 4.0 * std::tan(pi * (high_hz / (fs / 2.0)) / 2.0);
    const double bw = w2 - w1;
    const double w0sq = w1 * w2;

    // Order-2 Butterworth prototype poles.
    const cd proto[2] = {cd(-std::sqrt(0.5), std::sqrt(0.5)), cd(-std::sqrt(0.5), -std::sqrt(0.5))};

    // Lowpass -> bandpass: each prototype pole splits into two.
    cd spoles[4];
    for (int k = 0; k < 2; ++k) {
        const cd ph = proto[k] * (bw / 2.0);
        const cd root = std::sqrt(ph * ph - cd(w0sq, 0.0));
        spoles[2 * k] = ph + root;
        spoles[2 * k + 1] = ph - root;
    }
    const double k_analog = bw * bw;  // prototype gain 1 times bw^n

    // Bilinear transform, z = (4 + s) / (4 - s). The two analog zeros at
    // s = 0 land on z = +1; the degree difference adds two zeros at z = -1.
    cd zpoles[4];
    cd denom_prod(1.0, 0.0);
    for (int i = 0; i < 4; ++i) {
        zpoles[i] = (cd(4.0, 0.0) + spoles[i]) / (cd(4.0, 0.0) - spoles[i]);
        denom_prod *= cd(4.0, 0.0) - spoles[i];
    }
    const double k_digital = k_analog * (16.0 / denom_prod.real());

    // Group the four digital poles into conjugate pairs, low-angle pair first.
    cd upper[2];
    int nu = 0;
    for (int i = 0; i < 4; ++i) {
        if (zpoles[i].imag() >= 0.0) upper[nu++] = zpoles[i];
    }
    if (nu != 2) throw std::runtime_error("bandpass: pole pairing failed");
    if (std::arg(upper[0]) > std::arg(upper[1])) std::swap(upper[0], upper[1]);

    std::vector<Biquad> sos(2);
    // Low-corner poles with the z = +1 zeros.
    sos[0].b0 = k_digital;
    sos[0].b1 = -2.0 * k_digital;
    sos[0].b2 = k_digital;
    sos[0].a1 = -2.0 * upper[0].real();
    sos[0].a2 = std::norm(upper[0]);
    // High-corner poles with the z = -1 zeros.
    sos[1].b0 = 1.0;
    sos[1].b1 = 2.0;
    sos[1].b2 = 1.0;
    sos[1].a1 = -2.0 * upper[1].real();
    sos[1].a2 = std::norm(upper[1]);
    return sos;
}

namespace detail {

// Steady-state unit-step state of a biquad; scaled by the first input sample
// so startup transients vanish for locally constant signals.
inline void step_state(const Biquad& s, double& z1, double& z2) {
    const double h1 = dc_gain(s);
    z1 = h1 - s.b0;
    z2 = s.b2 - s.a2 * h1;
}

inline std::vector<double> sosfilt_zi(const std::vector<Biquad>& sos, const std::vector<double>& x) {
    std::vector<double> y = x;
    std::vector<double> tmp;
    double drive = x.empty() ? 0.0 : x.front();
    for (const auto& s : sos) {
        double z1, z2;
        step_state(s, z1, z2);
        biquad_filter(s, y, tmp, z1 * drive, z2 * drive);
        y.swap(tmp);
        drive *= dc_gain(s);
    }
    return y;
}

}  // namespace detail

// Zero-phase filtering: odd-reflect pad by 3x the filter order, filter
// forward and backward with steady-state initial conditions, trim.
inline std::vector<double> filtfilt(const std::vector<Biquad>& sos, const std::vector<double>& x) {
    if (x.empty()) return {};
    const std::size_t order = 2 * sos.size();
    std::size_t padlen = 3 * order;
    if (padlen >= x.size()) padlen = x.size() - 1;

    std::vector<double> ext;
    ext.reserve(x.size() + 2 * padlen);
    for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * x.back() - x[x.size() - 1 - i]);

    std::vector<double> y = detail::sosfilt_zi(sos, ext);
    std::reverse(y.begin(), y.end());
    y = detail::sosfilt_zi(sos, y);
    std::reverse(y.begin(), y.end());

    return std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(padlen),
                               y.begin() + static_cast<std::ptrdiff_t>(padlen + x.size()));
}

inline EcgSignal bandpass(const EcgSignal& sig, double low_hz = 0.5, double high_hz = 45.0) {
    if (sig.samples.empty()) throw std::invalid_argument("bandpass: empty signal");
    const auto sos = butter_bandpass_sos(low_hz, high_hz, sig.fs);
    return EcgSignal{filtfilt(sos, sig.samples), sig.fs};
}

// Population mean/std normalization; constant input maps to all-zero.
inline std::vector<double> zscore(const std::vector<double>& x) {
    if (x.size() < 2) throw std::invalid_argument("zscore: need at least 2 samples");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    std::vector<double> out(x.size());
    if (var == 0.0) return out;
    const double inv = 1.0 / std::sqrt(var);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * inv;
    return out;
}

inline EcgSignal zscore_normalize(const EcgSignal& sig) {
    return EcgSignal{zscore(sig.samples), sig.fs};
}

}  // namespace neurohd
