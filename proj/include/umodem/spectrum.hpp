#pragma once

#include "umodem/error.hpp"
#include "umodem/fft.hpp"
#include "umodem/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace umodem {

enum class Window { rectangular, hann };

// One-sided power spectrum of a single frame.
struct Spectrum {
    std::vector<double> bin_freq_hz;
    std::vector<double> bin_power;
    std::size_t fft_size = 0;
    int source_sample_rate_hz = 0;

    double bin_width_hz() const noexcept {
        return static_cast<double>(source_sample_rate_hz) / static_cast<double>(fft_size);
    }

    std::size_t nearest_bin(double freq_hz) const noexcept {
        const double idx = std::round(freq_hz / bin_width_hz());
        return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(bin_power.size() - 1)));
    }

    double total_power() const noexcept {
        double s = 0.0;
        for (double p : bin_power) s += p;
        return s;
    }
};

inline Spectrum empty_spectrum(std::size_t fft_size, int sample_rate_hz) {
    Spectrum s;
    s.fft_size = fft_size;
    s.source_sample_rate_hz = sample_rate_hz;
    const std::size_t bins = fft_size / 2 + 1;
    s.bin_freq_hz.resize(bins);
    s.bin_power.assign(bins, 0.0);
    for (std::size_t i = 0; i < bins; ++i)
        s.bin_freq_hz[i] = static_cast<double>(i) * sample_rate_hz / static_cast<double>(fft_size);
    return s;
}

inline void validate_fft_size(std::size_t fft_size) {
    if (fft_size < 2 || !is_power_of_two(fft_size))
        throw ModemError(Errc::config, "fft size must be a power of two >= 2");
}

// |X_i|^2 / N^2, doubled for bins other than DC and Nyquist. A unit-amplitude tone
// centred on a bin reads 0.5 with the rectangular window.
inline Spectrum power_spectrum(std::span<const double> samples, int sample_rate_hz, std::size_t fft_size,
                               Window window = Window::rectangular) {
    validate_fft_size(fft_size);
    if (samples.size() < fft_size)
        throw ModemError(Errc::insufficient_data, "signal shorter than fft size");

    std::vector<std::complex<double>> buf(fft_size);
    for (std::size_t k = 0; k < fft_size; ++k) {
        double w = 1.0;
        if (window == Window::hann)
            w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(fft_size));
        buf[k] = samples[k] * w;
    }
    fft_inplace(buf);

    Spectrum s = empty_spectrum(fft_size, sample_rate_hz);
    const double norm = 1.0 / (static_cast<double>(fft_size) * static_cast<double>(fft_size));
    for (std::size_t i = 0; i < s.bin_power.size(); ++i) {
        double p = std::norm(buf[i]) * norm;
        if (i != 0 && i != fft_size / 2) p *= 2.0;
        s.bin_power[i] = p;
    }
    return s;
}

inline Spectrum power_spectrum(const AudioSignal& signal, std::size_t fft_size, Window window = Window::rectangular) {
    return power_spectrum(signal.samples(), signal.sample_rate(), fft_size, window);
}

// Mean of per-frame spectra over consecutive non-overlapping frames.
inline Spectrum averaged_power_spectrum(std::span<const double> samples, int sample_rate_hz,
                                        std::size_t fft_size, Window window = Window::rectangular) {
    validate_fft_size(fft_size);
    const std::size_t frames = samples.size() / fft_size;
    if (frames == 0)
        throw ModemError(Errc::insufficient_data, "signal shorter than fft size");

    Spectrum acc = empty_spectrum(fft_size, sample_rate_hz);
    for (std::size_t f = 0; f < frames; ++f) {
        const Spectrum s = power_spectrum(samples.subspan(f * fft_size, fft_size), sample_rate_hz, fft_size, window);
        for (std::size_t i = 0; i < acc.bin_power.size(); ++i) acc.bin_power[i] += s.bin_power[i];
    }
    for (double& p : acc.bin_power) p /= static_cast<double>(frames);
    return acc;
}

struct BandPower {
    double power = 0.0;
    std::size_t bins = 0;
    bool empty() const noexcept { return bins == 0; }
};

// Mean bin power over bins centred in [f_lo, f_hi], skipping bins within
// halfwidth of any excluded frequency.
inline BandPower band_power(const Spectrum& spectrum, double f_lo_hz, double f_hi_hz,
                            std::span<const double> excluded_freqs_hz, double exclusion_halfwidth_hz) {
    const double nyquist = spectrum.source_sample_rate_hz / 2.0;
    if (!(f_lo_hz < f_hi_hz) || f_hi_hz > nyquist)
        throw ModemError(Errc::config, "band must satisfy f_lo < f_hi <= nyquist");

    BandPower out;
    double sum = 0.0;
    for (std::size_t i = 0; i < spectrum.bin_power.size(); ++i) {
        const double f = spectrum.bin_freq_hz[i];
        if (f < f_lo_hz || f > f_hi_hz) continue;
        const bool excluded = std::any_of(excluded_freqs_hz.begin(), excluded_freqs_hz.end(), [&](double fc) {
            return f >= fc - exclusion_halfwidth_hz && f <= fc + exclusion_halfwidth_hz;
        });
        if (excluded) continue;
        sum += spectrum.bin_power[i];
        ++out.bins;
    }
    if (out.bins > 0) out.power = sum / static_cast<double>(out.bins);
    return out;
}

inline BandPower band_power(const Spectrum& spectrum, double f_lo_hz, double f_hi_hz) {
    return band_power(spectrum, f_lo_hz, f_hi_hz, {}, 0.0);
}

// Sum (not mean) of bin power in [f_lo, f_hi]; used for audible-leakage reporting.
inline double band_energy(const Spectrum& spectrum, double f_lo_hz, double f_hi_hz) {
    double sum = 0.0;
    for (std::size_t i = 0; i < spectrum.bin_power.size(); ++i)
        if (spectrum.bin_freq_hz[i] >= f_lo_hz && spectrum.bin_freq_hz[i] <= f_hi_hz) sum += spectrum.bin_power[i];
    return sum;
}

// Mean power of the bin nearest freq_hz across non-overlapping rectangular frames.
// A signal shorter than one frame is zero-padded to a single frame.
inline double carrier_bin_power(std::span<const double> samples, int sample_rate_hz, double freq_hz,
                                std::size_t fft_size = 4096) {
    if (samples.size() >= fft_size) {
        const Spectrum s = averaged_power_spectrum(samples, sample_rate_hz, fft_size);
        return s.bin_power[s.nearest_bin(freq_hz)];
    }
    std::vector<double> padded(samples.begin(), samples.end());
    padded.resize(fft_size, 0.0);
    const Spectrum s = power_spectrum(padded, sample_rate_hz, fft_size);
    return s.bin_power[s.nearest_bin(freq_hz)];
}

} // namespace umodem
