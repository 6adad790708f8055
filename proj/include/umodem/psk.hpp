#pragma once

#include "umodem/error.hpp"
#include "umodem/fft.hpp"
#include "umodem/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace umodem {

struct PskConfig {
    double carrier_hz = 19200.0;
    double bit_rate_bps = 200.0;
    int sample_rate_hz = 96000;
    double amplitude = 0.8;
    // Fraction of a symbol tapered on each side of a phase reversal.
    double ramp_fraction = 0.05;
    // |y| / running mean |y| below this flags a low-confidence DPSK decision.
    double erasure_floor = 0.1;
    // DPSK front end: baseband moving average spanning this fraction of a symbol,
    // i.e. a bandpass of roughly bit_rate / fraction around the carrier. 0 disables it.
    double rx_filter_fraction = 0.5;

    std::size_t samples_per_bit() const {
        if (!(bit_rate_bps > 0.0)) throw ModemError(Errc::config, "bit rate must be positive");
        return static_cast<std::size_t>(std::llround(sample_rate_hz / bit_rate_bps));
    }

    std::size_t ramp_samples() const {
        return static_cast<std::size_t>(std::floor(ramp_fraction * static_cast<double>(samples_per_bit())));
    }

    void validate() const {
        if (sample_rate_hz <= 0) throw ModemError(Errc::config, "sample rate must be positive");
        check_below_nyquist(carrier_hz, sample_rate_hz);
        if (!(amplitude > 0.0 && amplitude <= 1.0)) throw ModemError(Errc::config, "amplitude must be in (0, 1]");
        if (!(ramp_fraction >= 0.0 && ramp_fraction < 0.5))
            throw ModemError(Errc::config, "ramp fraction must be in [0, 0.5)");
        if (!(erasure_floor >= 0.0)) throw ModemError(Errc::config, "erasure floor must be non-negative");
        if (!(rx_filter_fraction >= 0.0 && rx_filter_fraction <= 4.0))
            throw ModemError(Errc::config, "rx filter fraction must be in [0, 4]");
        if (samples_per_bit() < 8)
            throw ModemError(Errc::config, "bit period must hold at least 8 samples (got " +
                                               std::to_string(samples_per_bit()) + ")");
    }
};

struct DemodTrace {
    std::vector<double> per_bit_correlation;
    std::vector<double> per_bit_phase_estimate;
    BitStream decisions;
    std::vector<bool> erasures;

    std::size_t size() const noexcept { return decisions.size(); }
    std::size_t erasure_count() const noexcept {
        return static_cast<std::size_t>(std::count(erasures.begin(), erasures.end(), true));
    }
};

// 16-bit sync word with aperiodic autocorrelation sidelobes of at most 2.
inline BitStream default_sync_header() { return {1, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1, 0, 1, 0, 1}; }

namespace detail {

// Amplitude taper for the sample `j` positions away from a reversal (j = 0 is adjacent).
// Across the 2*ramp window the signed envelope follows a raised-cosine swing from +1 to -1.
inline double taper_gain(std::size_t j, std::size_t ramp) {
    return std::sin(std::numbers::pi * (static_cast<double>(j) + 0.5) / (2.0 * static_cast<double>(ramp)));
}

inline void taper_in_place(std::span<double> x, std::span<const std::size_t> boundaries, std::size_t ramp) {
    if (ramp == 0) return;
    for (std::size_t b : boundaries) {
        for (std::size_t j = 0; j < ramp; ++j) {
            const double g = taper_gain(j, ramp);
            if (b >= j + 1) x[b - 1 - j] *= g;
            if (b + j < x.size()) x[b + j] *= g;
        }
    }
}

inline void check_boundaries(std::span<const std::size_t> boundaries, std::size_t length, std::size_t ramp) {
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        if (boundaries[i] > length) throw ModemError(Errc::config, "ramp boundary beyond signal end");
        if (i > 0) {
            if (boundaries[i] <= boundaries[i - 1]) throw ModemError(Errc::config, "ramp boundaries must be increasing");
            if (boundaries[i] - boundaries[i - 1] < 2 * ramp)
                throw ModemError(Errc::config, "ramp windows overlap");
        }
    }
}

// Polarity-per-symbol synthesis on a global time axis: A * p_i * cos(2 pi f k / sr),
// or the sine branch when quadrature is set. Reversals are tapered.
inline std::vector<double> synthesize(std::span<const int> polarity, const PskConfig& config,
                                      bool quadrature = false) {
    const std::size_t spb = config.samples_per_bit();
    std::vector<double> out(polarity.size() * spb);
    const double w = 2.0 * std::numbers::pi * config.carrier_hz / config.sample_rate_hz;
    for (std::size_t i = 0; i < polarity.size(); ++i) {
        const double a = config.amplitude * polarity[i];
        for (std::size_t k = i * spb; k < (i + 1) * spb; ++k) {
            const double t = w * static_cast<double>(k);
            out[k] = a * (quadrature ? std::sin(t) : std::cos(t));
        }
    }
    std::vector<std::size_t> reversals;
    for (std::size_t i = 1; i < polarity.size(); ++i)
        if (polarity[i] != polarity[i - 1]) reversals.push_back(i * spb);
    taper_in_place(out, reversals, config.ramp_samples());
    return out;
}

inline std::vector<int> dpsk_polarity(std::span<const Bit> header, std::span<const Bit> bits) {
    std::vector<int> p = to_bipolar(header);
    int current = 1; // reference symbol
    p.push_back(current);
    for (Bit b : bits) {
        if (b) current = -current;
        p.push_back(current);
    }
    return p;
}

inline std::span<const double> mono_view(const AudioSignal& s, std::vector<double>& scratch) {
    if (s.is_mono()) return s.channel(0);
    const AudioSignal m = mixdown(s);
    scratch.assign(m.channel(0).begin(), m.channel(0).end());
    return scratch;
}

} // namespace detail

// Tapers the amplitude around each listed reversal boundary; the caller decides
// which symbol boundaries actually reverse phase.
inline AudioSignal apply_transition_ramp(const AudioSignal& signal, std::span<const std::size_t> boundaries,
                                         const PskConfig& config) {
    config.validate();
    const std::size_t ramp = config.ramp_samples();
    detail::check_boundaries(boundaries, signal.size(), ramp);
    AudioSignal out = signal;
    for (int c = 0; c < out.channel_count(); ++c) detail::taper_in_place(out.channel(c), boundaries, ramp);
    return out;
}

// s[k] = A * m_i * cos(2 pi f_c k / sr) with the carrier phase running continuously.
inline AudioSignal bpsk_modulate(std::span<const Bit> bits, const PskConfig& config) {
    config.validate();
    if (bits.empty()) throw ModemError(Errc::insufficient_data, "payload is empty");
    const auto polarity = to_bipolar(bits);
    return AudioSignal(detail::synthesize(polarity, config), config.sample_rate_hz);
}

// Absolute phase per symbol, starting with a phase-0 reference symbol.
inline std::vector<double> dpsk_encode(std::span<const Bit> bits) {
    std::vector<double> phase;
    phase.reserve(bits.size() + 1);
    phase.push_back(0.0);
    for (Bit b : bits) {
        double next = phase.back() + (b ? std::numbers::pi : 0.0);
        if (next >= 2.0 * std::numbers::pi - 1e-9) next -= 2.0 * std::numbers::pi;
        phase.push_back(next);
    }
    return phase;
}

// A logical one adds pi to the carrier phase. An optional BPSK sync header is sent
// ahead of the reference symbol for receivers that must find the frame start.
inline AudioSignal dpsk_modulate(std::span<const Bit> bits, const PskConfig& config,
                                 std::span<const Bit> header = {}) {
    config.validate();
    if (bits.empty()) throw ModemError(Errc::insufficient_data, "payload is empty");
    const auto polarity = detail::dpsk_polarity(header, bits);
    return AudioSignal(detail::synthesize(polarity, config), config.sample_rate_hz);
}

// Correlates each bit period against the carrier reference aligned by delay_samples.
// y > 0 decodes to 1, y < 0 to 0, y == 0 to 0 flagged as an erasure.
inline DemodTrace bpsk_demodulate_coherent(const AudioSignal& received, const PskConfig& config,
                                           std::size_t delay_samples) {
    config.validate();
    std::vector<double> scratch;
    const auto r = detail::mono_view(received, scratch);
    const std::size_t spb = config.samples_per_bit();
    if (r.size() < delay_samples + spb)
        throw ModemError(Errc::insufficient_data, "signal too short for the requested delay");

    const double w = 2.0 * std::numbers::pi * config.carrier_hz / config.sample_rate_hz;
    const std::size_t nbits = (r.size() - delay_samples) / spb;
    DemodTrace trace;
    for (std::size_t n = 0; n < nbits; ++n) {
        double y = 0.0;
        double q = 0.0;
        for (std::size_t j = n * spb; j < (n + 1) * spb; ++j) {
            const double t = w * static_cast<double>(j);
            const double x = r[delay_samples + j];
            y += x * std::cos(t);
            q += x * std::sin(t);
        }
        trace.per_bit_correlation.push_back(y);
        trace.per_bit_phase_estimate.push_back(std::atan2(-q, y));
        trace.decisions.push_back(y > 0.0 ? 1 : 0);
        trace.erasures.push_back(y == 0.0);
    }
    return trace;
}

// Argmax over d in [0, max_delay] of the normalised cross-correlation between the
// received signal and the BPSK-modulated header. Ties go to the smaller delay.
// The peak must exceed min_peak and three times the median off-peak envelope
// (lags at least one symbol away from the peak), otherwise sync is rejected.
// Against white noise a single lag reads roughly N(0, 1/len(header)), so the
// default floor is six of those standard deviations.
inline std::size_t estimate_delay(const AudioSignal& received, std::span<const Bit> header_bits,
                                  const PskConfig& config, std::size_t max_delay_samples,
                                  std::optional<double> min_peak = std::nullopt) {
    config.validate();
    if (header_bits.empty()) throw ModemError(Errc::insufficient_data, "header is empty");
    std::vector<double> scratch;
    const auto r = detail::mono_view(received, scratch);

    const auto polarity = to_bipolar(header_bits);
    const auto h = detail::synthesize(polarity, config);
    const auto hq = detail::synthesize(polarity, config, true);
    if (r.size() < h.size() + max_delay_samples)
        throw ModemError(Errc::insufficient_data, "received signal shorter than header plus search range");

    const auto xc = cross_correlate(r, h, max_delay_samples);
    const auto xq = cross_correlate(r, hq, max_delay_samples);

    auto energy = [](std::span<const double> v) {
        double e = 0.0;
        for (double x : v) e += x * x;
        return e;
    };
    const double h_norm = std::sqrt(energy(h));
    const double hq_norm = std::sqrt(energy(hq));

    std::vector<double> prefix(r.size() + 1, 0.0);
    for (std::size_t k = 0; k < r.size(); ++k) prefix[k + 1] = prefix[k] + r[k] * r[k];

    const std::size_t lags = max_delay_samples + 1;
    std::vector<double> corr(lags), envelope(lags);
    for (std::size_t d = 0; d < lags; ++d) {
        const double e = prefix[d + h.size()] - prefix[d];
        if (e <= 1e-300) continue;
        const double rn = std::sqrt(e);
        corr[d] = xc[d] / (h_norm * rn);
        const double cq = xq[d] / (hq_norm * rn);
        envelope[d] = std::hypot(corr[d], cq);
    }

    const double best = *std::max_element(corr.begin(), corr.end());
    std::size_t peak = 0;
    while (corr[peak] < best - 1e-12) ++peak;

    const std::size_t spb = config.samples_per_bit();
    std::vector<double> off;
    for (std::size_t d = 0; d < lags; ++d)
        if ((d > peak ? d - peak : peak - d) >= spb) off.push_back(envelope[d]);
    double median = 0.0;
    if (!off.empty()) {
        auto mid = off.begin() + static_cast<std::ptrdiff_t>(off.size() / 2);
        std::nth_element(off.begin(), mid, off.end());
        median = *mid;
    }
    const double floor = min_peak.value_or(6.0 / std::sqrt(static_cast<double>(h.size())));
    if (!(best > 0.0 && best >= floor) || (!off.empty() && best < 3.0 * median))
        throw ModemError(Errc::sync_not_found, "correlation peak " + std::to_string(best) +
                                                   " below confidence floor (median off-peak " +
                                                   std::to_string(median) + ")");
    return peak;
}

// Baseband moving average (centred, length forced odd) re-modulated onto the carrier.
// Unit gain at the carrier; attenuates noise outside roughly +/- sr/(2M) of it.
inline std::vector<double> bandpass_front_end(std::span<const double> r, const PskConfig& config) {
    const std::size_t spb = config.samples_per_bit();
    std::size_t m = static_cast<std::size_t>(std::llround(config.rx_filter_fraction * static_cast<double>(spb)));
    m |= 1;
    const std::size_t half = m / 2;
    const double w = 2.0 * std::numbers::pi * config.carrier_hz / config.sample_rate_hz;

    std::vector<std::complex<double>> prefix(r.size() + 1);
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double t = w * static_cast<double>(k);
        prefix[k + 1] = prefix[k] + r[k] * std::complex<double>(std::cos(t), -std::sin(t));
    }
    std::vector<double> out(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        const std::size_t lo = k >= half ? k - half : 0;
        const std::size_t hi = std::min(r.size(), k + half + 1);
        const auto avg = (prefix[hi] - prefix[lo]) / static_cast<double>(m);
        const double t = w * static_cast<double>(k);
        out[k] = 2.0 * (avg * std::complex<double>(std::cos(t), std::sin(t))).real();
    }
    return out;
}

// Delay-and-multiply: h[k] = r[k] r[k - T], integrated over each symbol after the
// reference and scaled so a clean channel gives y = cos(theta). Samples within the
// ramp length of either symbol edge are left out of the sum.
// y < 0 decodes to 1 (phase reversed), y > 0 to 0.
inline DemodTrace dpsk_demodulate(const AudioSignal& received, const PskConfig& config,
                                  std::size_t start_offset_samples) {
    config.validate();
    std::vector<double> scratch;
    auto r = detail::mono_view(received, scratch);
    const std::size_t spb = config.samples_per_bit();
    if (r.size() < start_offset_samples + 2 * spb)
        throw ModemError(Errc::insufficient_data, "signal shorter than two symbols after the start offset");

    std::vector<double> filtered;
    if (config.rx_filter_fraction > 0.0) {
        filtered = bandpass_front_end(r, config);
        r = filtered;
    }

    const std::size_t guard = config.ramp_samples();
    const std::size_t count = spb - 2 * guard;
    const double norm = 2.0 / (config.amplitude * config.amplitude * static_cast<double>(count));
    const std::size_t decisions = (r.size() - start_offset_samples) / spb - 1;

    DemodTrace trace;
    double abs_sum = 0.0;
    for (std::size_t n = 1; n <= decisions; ++n) {
        const std::size_t begin = start_offset_samples + n * spb + guard;
        double acc = 0.0;
        for (std::size_t k = begin; k < begin + count; ++k) acc += r[k] * r[k - spb];
        const double y = norm * acc;

        abs_sum += std::abs(y);
        const double running_mean = abs_sum / static_cast<double>(n);
        const bool weak = running_mean <= 0.0 || std::abs(y) / running_mean < config.erasure_floor;

        trace.per_bit_correlation.push_back(y);
        trace.per_bit_phase_estimate.push_back(std::acos(std::clamp(y, -1.0, 1.0)));
        trace.decisions.push_back(y < 0.0 ? 1 : 0);
        trace.erasures.push_back(y == 0.0 || weak);
    }
    return trace;
}

} // namespace umodem
