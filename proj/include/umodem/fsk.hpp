#pragma once

#include "umodem/error.hpp"
#include "umodem/signal.hpp"
#include "umodem/spectrum.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace umodem {

// Dual-stream FSK: DATA on the left channel, CLOCK on the right.
struct FskConfig {
    double data_freq0_hz = 18000.0;
    double data_freq1_hz = 18250.0;
    double clock_freq0_hz = 18500.0;
    double clock_freq1_hz = 18750.0;
    double bit_rate_bps = 4.0;
    int sample_rate_hz = 44100;
    std::size_t fft_size = 4096;
    double detection_ratio = 10.0;
    double amplitude = 0.8;
    double band_lo_hz = 18000.0;
    double band_hi_hz = 19500.0;

    std::array<double, 4> carriers() const noexcept {
        return {data_freq0_hz, data_freq1_hz, clock_freq0_hz, clock_freq1_hz};
    }

    std::size_t samples_per_bit() const {
        if (!(bit_rate_bps > 0.0)) throw ModemError(Errc::config, "bit rate must be positive");
        return static_cast<std::size_t>(std::llround(sample_rate_hz / bit_rate_bps));
    }

    // Carrier exclusion guard: two bins either side.
    double exclusion_halfwidth_hz() const noexcept {
        return 2.0 * static_cast<double>(sample_rate_hz) / static_cast<double>(fft_size);
    }

    void validate() const {
        if (sample_rate_hz <= 0) throw ModemError(Errc::config, "sample rate must be positive");
        validate_fft_size(fft_size);
        if (!(amplitude > 0.0 && amplitude <= 1.0)) throw ModemError(Errc::config, "amplitude must be in (0, 1]");
        if (!(detection_ratio > 0.0)) throw ModemError(Errc::config, "detection ratio must be positive");
        if (!(band_lo_hz < band_hi_hz)) throw ModemError(Errc::config, "band_lo must be below band_hi");
        check_below_nyquist(band_hi_hz, sample_rate_hz);
        const auto c = carriers();
        for (std::size_t i = 0; i < c.size(); ++i) {
            check_below_nyquist(c[i], sample_rate_hz);
            if (c[i] < band_lo_hz || c[i] > band_hi_hz)
                throw ModemError(Errc::config, "carrier " + std::to_string(c[i]) + " Hz outside detection band");
            for (std::size_t j = i + 1; j < c.size(); ++j)
                if (c[i] == c[j]) throw ModemError(Errc::config, "carriers must be distinct");
        }
        if (samples_per_bit() < 2 * fft_size)
            throw ModemError(Errc::config, "bit period must hold at least two fft frames (" +
                                               std::to_string(samples_per_bit()) + " < " +
                                               std::to_string(2 * fft_size) + " samples)");
    }
};

enum class Carrier : std::size_t { data0 = 0, data1 = 1, clock0 = 2, clock1 = 3 };

struct CarrierDetection {
    std::size_t frame_index = 0;
    std::array<bool, 4> active{};
    double noise_floor_power = 0.0;
    std::array<double, 4> carrier_powers{};

    bool is_active(Carrier c) const noexcept { return active[static_cast<std::size_t>(c)]; }
    double power(Carrier c) const noexcept { return carrier_powers[static_cast<std::size_t>(c)]; }

    // 0 or 1 when exactly one carrier of the pair is active.
    std::optional<Bit> data_value() const noexcept { return pair_value(Carrier::data0, Carrier::data1); }
    std::optional<Bit> clock_value() const noexcept { return pair_value(Carrier::clock0, Carrier::clock1); }

private:
    std::optional<Bit> pair_value(Carrier zero, Carrier one) const noexcept {
        const bool z = is_active(zero);
        const bool o = is_active(one);
        if (z == o) return std::nullopt;
        return o ? Bit{1} : Bit{0};
    }
};

// Adaptive threshold: the noise floor is the mean in-band power with the carrier
// bins (and a guard band) removed; a carrier is active at detection_ratio times that floor.
inline CarrierDetection detect_carriers(const Spectrum& spectrum, const FskConfig& config,
                                        std::size_t frame_index = 0) {
    const auto carriers = config.carriers();
    CarrierDetection det;
    det.frame_index = frame_index;
    det.noise_floor_power =
        band_power(spectrum, config.band_lo_hz, config.band_hi_hz, carriers, config.exclusion_halfwidth_hz()).power;

    for (std::size_t c = 0; c < carriers.size(); ++c) {
        const std::size_t bin = spectrum.nearest_bin(carriers[c]);
        double p = spectrum.bin_power[bin];
        if (bin > 0) p = std::max(p, spectrum.bin_power[bin - 1]);
        if (bin + 1 < spectrum.bin_power.size()) p = std::max(p, spectrum.bin_power[bin + 1]);
        det.carrier_powers[c] = p;
        det.active[c] = det.noise_floor_power > 0.0 ? p >= config.detection_ratio * det.noise_floor_power : p > 0.0;
    }
    return det;
}

inline CarrierDetection detect_carriers(std::span<const double> frame, const FskConfig& config,
                                        std::size_t frame_index = 0) {
    if (frame.size() < config.fft_size)
        throw ModemError(Errc::insufficient_data, "frame shorter than fft size");
    return detect_carriers(power_spectrum(frame, config.sample_rate_hz, config.fft_size), config, frame_index);
}

inline AudioSignal fsk_modulate(std::span<const Bit> bits, const FskConfig& config) {
    config.validate();
    if (bits.empty()) throw ModemError(Errc::insufficient_data, "payload is empty");

    const std::size_t spb = config.samples_per_bit();
    std::vector<double> left(bits.size() * spb);
    std::vector<double> right(bits.size() * spb);
    const double two_pi_over_sr = 2.0 * std::numbers::pi / config.sample_rate_hz;

    for (std::size_t i = 0; i < bits.size(); ++i) {
        const double fd = bits[i] ? config.data_freq1_hz : config.data_freq0_hz;
        // clock alternates every period so each boundary is a clock transition
        const double fc = (i % 2 == 0) ? config.clock_freq1_hz : config.clock_freq0_hz;
        for (std::size_t k = 0; k < spb; ++k) {
            const double t = static_cast<double>(k);
            left[i * spb + k] = config.amplitude * std::cos(two_pi_over_sr * fd * t);
            right[i * spb + k] = config.amplitude * std::cos(two_pi_over_sr * fc * t);
        }
    }
    return AudioSignal(std::move(left), std::move(right), config.sample_rate_hz);
}

enum class FskInput {
    mixdown,     // single microphone: both channels summed acoustically
    per_channel, // loopback: data read from the left channel, clock from the right
};

struct FskDemodResult {
    BitStream bits;
    std::vector<CarrierDetection> trace;
    std::vector<std::size_t> erasure_frames; // frames with zero or two data carriers while awaiting a sample
    std::size_t missed_bits = 0;             // clock periods that ended without a clean data frame
};

// Frames of fft_size are taken back to back. A change in the active clock carrier
// arms the sampler; the data carrier is read from the first frame of that clock
// period where exactly one data carrier is active.
inline FskDemodResult fsk_demodulate(const AudioSignal& signal, const FskConfig& config,
                                     FskInput input = FskInput::mixdown) {
    config.validate();
    if (signal.sample_rate() != config.sample_rate_hz)
        throw ModemError(Errc::incompatible_signal, "signal sample rate " + std::to_string(signal.sample_rate()) +
                                                        " Hz does not match config " +
                                                        std::to_string(config.sample_rate_hz) + " Hz");
    if (signal.size() < config.fft_size)
        throw ModemError(Errc::insufficient_data, "signal shorter than fft size");

    const bool split = input == FskInput::per_channel && signal.channel_count() == 2;
    const AudioSignal mono = split ? signal : mixdown(signal);

    FskDemodResult out;
    std::optional<Bit> clock;
    bool armed = false;
    bool saw_clock = false;

    const std::size_t frames = signal.size() / config.fft_size;
    for (std::size_t f = 0; f < frames; ++f) {
        const std::size_t off = f * config.fft_size;
        CarrierDetection det;
        if (split) {
            det = detect_carriers(signal.channel(0).subspan(off, config.fft_size), config, f);
            const CarrierDetection clk = detect_carriers(signal.channel(1).subspan(off, config.fft_size), config, f);
            for (Carrier c : {Carrier::clock0, Carrier::clock1}) {
                const auto i = static_cast<std::size_t>(c);
                det.active[i] = clk.active[i];
                det.carrier_powers[i] = clk.carrier_powers[i];
            }
        } else {
            det = detect_carriers(mono.channel(0).subspan(off, config.fft_size), config, f);
        }

        const auto c = det.clock_value();
        if (c) {
            saw_clock = true;
            if (c != clock) {
                if (armed) ++out.missed_bits;
                clock = c;
                armed = true;
            }
            if (armed) {
                if (const auto d = det.data_value()) {
                    out.bits.push_back(*d);
                    armed = false;
                } else {
                    out.erasure_frames.push_back(f);
                }
            }
        }
        out.trace.push_back(det);
    }
    if (armed) ++out.missed_bits;
    if (!saw_clock) throw ModemError(Errc::no_clock, "no clock carrier detected in any frame");
    return out;
}

} // namespace umodem
