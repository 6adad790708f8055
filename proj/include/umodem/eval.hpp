#pragma once

#include "umodem/channel.hpp"
#include "umodem/error.hpp"
#include "umodem/fsk.hpp"
#include "umodem/psk.hpp"
#include "umodem/signal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

namespace umodem {

enum class Scheme { fsk, bpsk, dpsk };

inline std::string_view to_string(Scheme s) {
    switch (s) {
    case Scheme::fsk: return "fsk";
    case Scheme::bpsk: return "bpsk";
    case Scheme::dpsk: return "dpsk";
    }
    return "dpsk";
}

inline std::optional<Scheme> parse_scheme(std::string_view s) {
    for (Scheme k : {Scheme::fsk, Scheme::bpsk, Scheme::dpsk})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

// Positional agreement over the sent length; missing bits count as errors and
// surplus received bits are ignored.
inline double compute_btsr(std::span<const Bit> sent, std::span<const Bit> received) {
    if (sent.empty()) throw ModemError(Errc::insufficient_data, "sent stream is empty");
    const std::size_t n = std::min(sent.size(), received.size());
    std::size_t ok = 0;
    for (std::size_t i = 0; i < n; ++i) ok += sent[i] == received[i];
    return static_cast<double>(ok) / static_cast<double>(sent.size());
}

// Geometric-distribution estimate: with a run of BTSR * n good bits before the
// first error, BER ~ 1 / (BTSR * n). +infinity when BTSR is zero.
inline double ber_estimate(double btsr, std::size_t n) {
    if (!(btsr > 0.0) || n == 0) return std::numeric_limits<double>::infinity();
    return 1.0 / (btsr * static_cast<double>(n));
}

struct TransmissionReport {
    BitStream sent_bits;
    BitStream received_bits;
    double btsr = 0.0;
    double ber_estimate = std::numeric_limits<double>::infinity();
    std::size_t erasure_count = 0;
    std::uint64_t trial_seed = 0;
    std::size_t clipped_samples = 0;
    bool clipping_warning = false;
    std::optional<Errc> failure; // demodulator error, if any
};

using SchemeConfig = std::variant<FskConfig, PskConfig>;

enum class SyncMode {
    known_delay, // loopback: receiver is told the channel delay
    header,      // blind: a sync header is prepended and located by correlation
};

struct TrialSetup {
    Scheme scheme = Scheme::dpsk;
    std::size_t payload_bits = 800;
    ChannelSpec channel;
    SchemeConfig config = PskConfig{};
    SyncMode sync = SyncMode::known_delay;
    // Header-mode search range beyond the known delay; 0 means one second.
    std::size_t max_delay_samples = 0;
};

inline const FskConfig& fsk_config(const TrialSetup& s) {
    const auto* c = std::get_if<FskConfig>(&s.config);
    if (!c) throw ModemError(Errc::config, "fsk scheme needs an FskConfig");
    return *c;
}

inline const PskConfig& psk_config(const TrialSetup& s) {
    const auto* c = std::get_if<PskConfig>(&s.config);
    if (!c) throw ModemError(Errc::config, std::string(to_string(s.scheme)) + " scheme needs a PskConfig");
    return *c;
}

inline void validate(const TrialSetup& s) {
    if (s.payload_bits == 0) throw ModemError(Errc::config, "payload must hold at least one bit");
    if (s.scheme == Scheme::fsk) fsk_config(s).validate();
    else psk_config(s).validate();
}

// Frequency the carrier-bin SNR refers to for a scheme.
inline double reference_carrier_hz(const TrialSetup& s) {
    return s.scheme == Scheme::fsk ? fsk_config(s).data_freq1_hz : psk_config(s).carrier_hz;
}

inline BitStream random_bits(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    BitStream bits(n);
    for (auto& b : bits) b = static_cast<Bit>(rng() >> 63);
    return bits;
}

// Random payload from the trial seed -> modulate -> channel -> demodulate -> score.
inline TransmissionReport run_trial(const TrialSetup& setup) {
    validate(setup);
    TransmissionReport report;
    report.trial_seed = setup.channel.seed;
    report.sent_bits = random_bits(setup.payload_bits, mix_seed(setup.channel.seed, 0x7061796c));

    ChannelSpec channel = setup.channel;
    channel.seed = mix_seed(setup.channel.seed, 0x6e6f6973);

    try {
        if (setup.scheme == Scheme::fsk) {
            const auto& cfg = fsk_config(setup);
            const AudioSignal tx = mixdown(fsk_modulate(report.sent_bits, cfg));
            const ChannelResult rx = apply_channel(tx, channel);
            report.clipped_samples = rx.clipped_samples;
            report.clipping_warning = rx.clipping_warning;
            const FskDemodResult res = fsk_demodulate(rx.signal, cfg);
            report.received_bits = res.bits;
            report.erasure_count = res.erasure_frames.size();
        } else {
            const auto& cfg = psk_config(setup);
            const std::size_t spb = cfg.samples_per_bit();
            const BitStream header = setup.sync == SyncMode::header ? default_sync_header() : BitStream{};

            AudioSignal tx(std::vector<double>(1, 0.0), cfg.sample_rate_hz);
            if (setup.scheme == Scheme::bpsk) {
                BitStream framed = header;
                framed.insert(framed.end(), report.sent_bits.begin(), report.sent_bits.end());
                tx = bpsk_modulate(framed, cfg);
            } else {
                tx = dpsk_modulate(report.sent_bits, cfg, header);
            }
            const ChannelResult rx = apply_channel(tx, channel);
            report.clipped_samples = rx.clipped_samples;
            report.clipping_warning = rx.clipping_warning;

            std::size_t delay = channel.delay_samples;
            if (setup.sync == SyncMode::header) {
                const std::size_t header_len = header.size() * spb;
                std::size_t search = setup.max_delay_samples ? setup.max_delay_samples
                                                             : static_cast<std::size_t>(cfg.sample_rate_hz);
                search = std::min(search, rx.signal.size() - header_len);
                delay = estimate_delay(rx.signal, header, cfg, search);
            }
            const std::size_t offset = delay + header.size() * spb;

            // received stream is trimmed to the frame; trailing samples are not payload
            const std::size_t frame_end = std::min(rx.signal.size(), offset + (setup.payload_bits + 1) * spb);
            std::vector<double> frame(rx.signal.channel(0).begin(),
                                      rx.signal.channel(0).begin() + static_cast<std::ptrdiff_t>(frame_end));
            const AudioSignal cut(std::move(frame), rx.signal.sample_rate());

            DemodTrace trace;
            if (setup.scheme == Scheme::bpsk) trace = bpsk_demodulate_coherent(cut, cfg, offset);
            else trace = dpsk_demodulate(cut, cfg, offset);
            report.received_bits = trace.decisions;
            report.erasure_count = trace.erasure_count();
        }
    } catch (const ModemError& e) {
        if (e.code() == Errc::config) throw;
        report.failure = e.code();
        report.received_bits.clear();
    }

    report.btsr = compute_btsr(report.sent_bits, report.received_bits);
    report.ber_estimate = ber_estimate(report.btsr, report.sent_bits.size());
    return report;
}

enum class SweepAxis { snr_db, bit_rate_bps };

inline std::string_view to_string(SweepAxis a) { return a == SweepAxis::snr_db ? "snr_db" : "bit_rate_bps"; }

struct SweepResult {
    std::string axis_name;
    std::vector<double> axis_values;
    std::vector<double> mean_btsr;
    std::vector<double> std_btsr;
    std::vector<bool> valid;
    std::size_t trials_per_point = 0;

    // axis,value,mean_btsr,std_btsr,trials with six decimals; invalid points say so.
    std::string to_csv() const {
        std::string out = "axis,value,mean_btsr,std_btsr,trials\n";
        char buf[256];
        for (std::size_t i = 0; i < axis_values.size(); ++i) {
            if (valid[i])
                std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%zu\n", axis_name.c_str(), axis_values[i],
                              mean_btsr[i], std_btsr[i], trials_per_point);
            else
                std::snprintf(buf, sizeof buf, "%s,%.6f,invalid,invalid,%zu\n", axis_name.c_str(), axis_values[i],
                              trials_per_point);
            out += buf;
        }
        return out;
    }
};

struct SweepOptions {
    unsigned threads = 0;     // 0 = hardware concurrency
    bool reuse_seed = false;  // every trial uses the base seed (determinism checks)
};

inline std::uint64_t trial_seed(std::uint64_t base, std::size_t point, std::size_t trial) {
    return mix_seed(mix_seed(base, point), trial);
}

// Applies one axis value to a copy of the base setup.
inline TrialSetup at_axis_point(const TrialSetup& base, SweepAxis axis, double value) {
    TrialSetup s = base;
    if (axis == SweepAxis::snr_db) {
        NoiseSpec noise = s.channel.noise.value_or(NoiseSpec{NoiseKind::white, value, reference_carrier_hz(s)});
        noise.snr_db_at_carrier = value;
        s.channel.noise = noise;
    } else {
        std::visit([&](auto& cfg) { cfg.bit_rate_bps = value; }, s.config);
    }
    return s;
}

// Runs `trials` seeded trials per axis value. Trials are independent and run on a
// worker pool; per-trial seeds make the result identical to a serial run.
inline SweepResult sweep(const TrialSetup& base, SweepAxis axis, std::span<const double> values, std::size_t trials,
                         SweepOptions options = {}) {
    if (values.empty()) throw ModemError(Errc::config, "sweep needs at least one axis value");
    if (trials < 2) throw ModemError(Errc::config, "sweep needs at least two trials per point");

    SweepResult result;
    result.axis_name = std::string(to_string(axis));
    result.axis_values.assign(values.begin(), values.end());
    result.trials_per_point = trials;
    result.mean_btsr.assign(values.size(), std::numeric_limits<double>::quiet_NaN());
    result.std_btsr.assign(values.size(), std::numeric_limits<double>::quiet_NaN());
    result.valid.assign(values.size(), true);

    std::vector<TrialSetup> points;
    for (std::size_t i = 0; i < values.size(); ++i) {
        points.push_back(at_axis_point(base, axis, values[i]));
        try {
            validate(points.back());
        } catch (const ModemError& e) {
            if (e.code() != Errc::config && e.code() != Errc::nyquist_violation) throw;
            result.valid[i] = false;
        }
    }

    std::vector<double> btsr(values.size() * trials, 0.0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job = next++; job < btsr.size(); job = next++) {
            const std::size_t point = job / trials;
            const std::size_t trial = job % trials;
            if (!result.valid[point]) continue;
            TrialSetup s = points[point];
            s.channel.seed = options.reuse_seed ? base.channel.seed : trial_seed(base.channel.seed, point, trial);
            btsr[job] = run_trial(s).btsr;
        }
    };
    unsigned n_threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();

    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!result.valid[i]) continue;
        double sum = 0.0;
        for (std::size_t t = 0; t < trials; ++t) sum += btsr[i * trials + t];
        const double mean = sum / static_cast<double>(trials);
        double ss = 0.0;
        for (std::size_t t = 0; t < trials; ++t) ss += (btsr[i * trials + t] - mean) * (btsr[i * trials + t] - mean);
        result.mean_btsr[i] = mean;
        result.std_btsr[i] = std::sqrt(ss / static_cast<double>(trials - 1));
    }
    return result;
}

} // namespace umodem
