#pragma once

// Command implementations for the umodem tool. Kept in a header so the test
// suite can drive the same code in-process.

#include "CLI11.hpp"
#include "umodem/umodem.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace umodem::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

inline int exit_code_for(Errc code) {
    return (code == Errc::sync_not_found || code == Errc::no_clock) ? kExitRuntime : kExitUsage;
}

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Modem parameters shared by every subcommand; unset flags keep the scheme defaults.
struct ModemFlags {
    double carrier_hz = 0.0;
    double bit_rate_bps = 0.0;
    int sample_rate_hz = 0;
    double amplitude = 0.0;
    double ramp_fraction = -1.0;
    double rx_filter_fraction = -1.0;
    std::size_t fft_size = 0;
    double detection_ratio = 0.0;

    void attach(CLI::App& app) {
        app.add_option("--carrier", carrier_hz, "PSK carrier frequency in Hz (default 19200)");
        app.add_option("--bit-rate", bit_rate_bps, "bit rate in bits/s (default 200 PSK, 4 FSK)");
        app.add_option("--sample-rate", sample_rate_hz, "sample rate in Hz (default 96000 PSK, 44100 FSK)");
        app.add_option("--amplitude", amplitude, "carrier amplitude in (0, 1] (default 0.8)");
        app.add_option("--ramp-fraction", ramp_fraction, "PSK reversal taper as a fraction of a symbol (default 0.05)");
        app.add_option("--rx-filter", rx_filter_fraction, "DPSK receive filter length in symbols, 0 disables (default 0.5)");
        app.add_option("--fft-size", fft_size, "FSK detection frame size (default 4096)");
        app.add_option("--detection-ratio", detection_ratio, "FSK carrier/noise-floor ratio (default 10)");
    }

    PskConfig psk() const {
        PskConfig c;
        if (carrier_hz > 0) c.carrier_hz = carrier_hz;
        if (bit_rate_bps > 0) c.bit_rate_bps = bit_rate_bps;
        if (sample_rate_hz > 0) c.sample_rate_hz = sample_rate_hz;
        if (amplitude > 0) c.amplitude = amplitude;
        if (ramp_fraction >= 0) c.ramp_fraction = ramp_fraction;
        if (rx_filter_fraction >= 0) c.rx_filter_fraction = rx_filter_fraction;
        c.validate();
        return c;
    }

    FskConfig fsk() const {
        FskConfig c;
        if (bit_rate_bps > 0) c.bit_rate_bps = bit_rate_bps;
        if (sample_rate_hz > 0) c.sample_rate_hz = sample_rate_hz;
        if (amplitude > 0) c.amplitude = amplitude;
        if (fft_size > 0) c.fft_size = fft_size;
        if (detection_ratio > 0) c.detection_ratio = detection_ratio;
        c.validate();
        return c;
    }

    SchemeConfig for_scheme(Scheme s) const {
        if (s == Scheme::fsk) return fsk();
        return psk();
    }

    int sample_rate_for(Scheme s) const { return s == Scheme::fsk ? fsk().sample_rate_hz : psk().sample_rate_hz; }
};

inline Scheme require_scheme(const std::string& name) {
    const auto s = parse_scheme(name);
    if (!s) throw ModemError(Errc::config, "unknown scheme '" + name + "' (expected fsk, bpsk or dpsk)");
    return *s;
}

inline NoiseKind require_noise_kind(const std::string& name) {
    const auto k = parse_noise_kind(name);
    if (!k) throw ModemError(Errc::config, "unknown noise kind '" + name + "'");
    return *k;
}

struct EncodeArgs {
    std::string scheme, payload, out;
    bool header = false;
};

inline int cmd_encode(const EncodeArgs& a, const ModemFlags& flags, std::ostream& out) {
    const Scheme scheme = require_scheme(a.scheme);
    const BitStream bits = parse_payload(a.payload);

    AudioSignal signal = [&] {
        if (scheme == Scheme::fsk) {
            if (a.header) throw ModemError(Errc::config, "--header applies to bpsk and dpsk only");
            return fsk_modulate(bits, flags.fsk());
        }
        const PskConfig cfg = flags.psk();
        const BitStream header = a.header ? default_sync_header() : BitStream{};
        if (scheme == Scheme::dpsk) return dpsk_modulate(bits, cfg, header);
        BitStream framed = header;
        framed.insert(framed.end(), bits.begin(), bits.end());
        return bpsk_modulate(framed, cfg);
    }();

    write_wav(signal, a.out);
    out << "bits=" << bits.size() << " samples=" << signal.size() << " channels=" << signal.channel_count()
        << " sample_rate=" << signal.sample_rate() << " duration_s=" << fixed6(signal.duration_s()) << "\n";
    return kExitOk;
}

struct DecodeArgs {
    std::string scheme, in, sync = "offset";
    std::size_t offset = 0;
    std::size_t max_delay = 0;
    bool trace = false;
    bool per_channel = false;
};

inline int cmd_decode(const DecodeArgs& a, const ModemFlags& flags, std::ostream& out) {
    const Scheme scheme = require_scheme(a.scheme);
    if (a.sync != "offset" && a.sync != "header")
        throw ModemError(Errc::config, "--sync must be 'offset' or 'header'");
    const DecodedWav wav = read_wav(a.in);
    const int expected = flags.sample_rate_for(scheme);
    if (wav.spec.sample_rate_hz != expected)
        throw ModemError(Errc::incompatible_signal, "sample rate mismatch: file is " +
                                                        std::to_string(wav.spec.sample_rate_hz) + " Hz, expected " +
                                                        std::to_string(expected) + " Hz");

    if (scheme == Scheme::fsk) {
        const FskConfig cfg = flags.fsk();
        const auto res = fsk_demodulate(wav.signal, cfg, a.per_channel ? FskInput::per_channel : FskInput::mixdown);
        out << format_bits(res.bits) << "\n";
        if (a.trace) {
            out << "frame,noise_floor,data0,data1,clock0,clock1,active\n";
            for (const auto& d : res.trace) {
                out << d.frame_index << "," << d.noise_floor_power;
                for (double p : d.carrier_powers) out << "," << p;
                out << ",";
                const char* names[] = {"data0", "data1", "clock0", "clock1"};
                bool first = true;
                for (std::size_t c = 0; c < 4; ++c)
                    if (d.active[c]) {
                        out << (first ? "" : "|") << names[c];
                        first = false;
                    }
                out << "\n";
            }
        }
        return kExitOk;
    }

    const PskConfig cfg = flags.psk();
    const std::size_t spb = cfg.samples_per_bit();
    std::size_t start = a.offset;
    if (a.sync == "header") {
        const BitStream header = default_sync_header();
        const std::size_t header_len = header.size() * spb;
        if (wav.signal.size() < header_len)
            throw ModemError(Errc::insufficient_data, "file shorter than the sync header");
        std::size_t search = wav.signal.size() - header_len;
        if (a.max_delay > 0) search = std::min(search, a.max_delay);
        start = estimate_delay(wav.signal, header, cfg, search) + header_len;
    }
    const DemodTrace trace =
        scheme == Scheme::dpsk ? dpsk_demodulate(wav.signal, cfg, start) : bpsk_demodulate_coherent(wav.signal, cfg, start);
    out << format_bits(trace.decisions) << "\n";
    if (a.trace) {
        out << "bit,correlation,phase,decision,erasure\n";
        for (std::size_t i = 0; i < trace.size(); ++i)
            out << i << "," << fixed6(trace.per_bit_correlation[i]) << "," << fixed6(trace.per_bit_phase_estimate[i])
                << "," << int(trace.decisions[i]) << "," << (trace.erasures[i] ? 1 : 0) << "\n";
    }
    return kExitOk;
}

struct SimulateArgs {
    std::string scheme;
    std::size_t bits = 0;
    double snr_db = 0.0;
    bool has_snr = false;
    std::string noise_kind = "white";
    std::size_t delay = 0;
    std::uint64_t seed = 0;
    std::string sync = "delay";
};

inline TrialSetup make_setup(Scheme scheme, std::size_t bits, const ModemFlags& flags, std::size_t delay,
                             std::uint64_t seed, const std::string& sync) {
    TrialSetup s;
    s.scheme = scheme;
    s.config = flags.for_scheme(scheme);
    s.payload_bits = bits ? bits : (scheme == Scheme::fsk ? 32 : 800);
    s.channel.delay_samples = delay;
    s.channel.seed = seed;
    if (sync == "header") s.sync = SyncMode::header;
    else if (sync != "delay") throw ModemError(Errc::config, "--sync must be 'delay' or 'header'");
    return s;
}

inline int cmd_simulate(const SimulateArgs& a, const ModemFlags& flags, std::ostream& out, std::ostream& err) {
    const Scheme scheme = require_scheme(a.scheme);
    const NoiseKind kind = require_noise_kind(a.noise_kind);
    TrialSetup setup = make_setup(scheme, a.bits, flags, a.delay, a.seed, a.sync);
    if (a.has_snr) setup.channel.noise = NoiseSpec{kind, a.snr_db, reference_carrier_hz(setup)};

    const TransmissionReport r = run_trial(setup);
    if (r.failure) err << "warning: demodulation failed: " << to_string(*r.failure) << "\n";
    if (r.clipping_warning) err << "warning: " << r.clipped_samples << " samples clipped\n";

    out << "scheme,n_bits,snr_db,noise_kind,btsr,ber_estimate,erasures,seed\n";
    out << to_string(scheme) << "," << setup.payload_bits << "," << (a.has_snr ? fixed6(a.snr_db) : "none") << ","
        << (a.has_snr ? a.noise_kind : "none") << "," << fixed6(r.btsr) << ","
        << (std::isinf(r.ber_estimate) ? "inf" : fixed6(r.ber_estimate)) << "," << r.erasure_count << "," << a.seed
        << "\n";
    return kExitOk;
}

struct SweepArgs {
    std::string scheme, axis = "snr", out_path, noise_kind = "white";
    std::vector<double> values;
    std::size_t trials = 10;
    std::size_t bits = 0;
    double snr_db = 10.0;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

inline int cmd_sweep(const SweepArgs& a, const ModemFlags& flags, std::ostream& out) {
    const Scheme scheme = require_scheme(a.scheme);
    SweepAxis axis;
    if (a.axis == "snr") axis = SweepAxis::snr_db;
    else if (a.axis == "bitrate") axis = SweepAxis::bit_rate_bps;
    else throw ModemError(Errc::config, "--axis must be 'snr' or 'bitrate'");
    if (a.values.empty()) throw ModemError(Errc::config, "--values must list at least one point");

    TrialSetup base = make_setup(scheme, a.bits, flags, 0, a.seed, "delay");
    base.channel.noise = NoiseSpec{require_noise_kind(a.noise_kind), a.snr_db, reference_carrier_hz(base)};

    const SweepResult r = sweep(base, axis, a.values, a.trials, SweepOptions{a.threads, false});
    const std::string csv = r.to_csv();
    if (a.out_path.empty()) {
        out << csv;
    } else {
        std::ofstream f(a.out_path, std::ios::binary | std::ios::trunc);
        if (!f) throw ModemError(Errc::io, "cannot open " + a.out_path + " for writing");
        f << csv;
        out << "wrote " << r.axis_values.size() << " rows to " << a.out_path << "\n";
    }
    return kExitOk;
}

struct SpectrumArgs {
    std::string in, window = "rect";
    std::size_t fft_size = 4096;
};

inline int cmd_spectrum(const SpectrumArgs& a, std::ostream& out) {
    Window w;
    if (a.window == "rect") w = Window::rectangular;
    else if (a.window == "hann") w = Window::hann;
    else throw ModemError(Errc::config, "--window must be 'rect' or 'hann'");
    const DecodedWav wav = read_wav(a.in);
    const AudioSignal mono = mixdown(wav.signal);
    const Spectrum s = averaged_power_spectrum(mono.channel(0), mono.sample_rate(), a.fft_size, w);
    out << "freq_hz,power\n";
    char buf[96];
    for (std::size_t i = 0; i < s.bin_power.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f,%.9e\n", s.bin_freq_hz[i], s.bin_power[i]);
        out << buf;
    }
    return kExitOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Near-ultrasonic acoustic modem: FSK, BPSK and DPSK over WAV files and a simulated channel"};
    app.require_subcommand(1);
    ModemFlags flags;

    EncodeArgs enc;
    auto* encode = app.add_subcommand("encode", "modulate a payload into a WAV file");
    encode->add_option("scheme", enc.scheme, "fsk, bpsk or dpsk")->required();
    encode->add_option("payload", enc.payload, "hex (0x...) or bit string")->required();
    encode->add_option("out", enc.out, "output WAV path")->required();
    encode->add_flag("--header", enc.header, "prepend the PSK sync header");
    flags.attach(*encode);

    DecodeArgs dec;
    auto* decode = app.add_subcommand("decode", "demodulate a WAV file to a bit string");
    decode->add_option("scheme", dec.scheme, "fsk, bpsk or dpsk")->required();
    decode->add_option("in", dec.in, "input WAV path")->required();
    decode->add_option("--sync", dec.sync, "PSK frame start: 'offset' (use --offset) or 'header'");
    decode->add_option("--offset", dec.offset, "PSK frame start in samples for --sync offset");
    decode->add_option("--max-delay", dec.max_delay, "header search range in samples (default: whole file)");
    decode->add_flag("--trace", dec.trace, "print per-bit (PSK) or per-frame (FSK) detail as CSV");
    decode->add_flag("--per-channel", dec.per_channel, "FSK: read data from left and clock from right channel");
    flags.attach(*decode);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run one trial through the simulated channel");
    simulate->add_option("scheme", sim.scheme, "fsk, bpsk or dpsk")->required();
    simulate->add_option("--bits", sim.bits, "payload length (default 800 PSK, 32 FSK)");
    auto* snr = simulate->add_option("--snr-db", sim.snr_db, "carrier-bin SNR in dB (omit for a noiseless channel)");
    simulate->add_option("--noise-kind", sim.noise_kind, "white, lowpass_music, lowpass_voice, broadband_jangle");
    simulate->add_option("--delay", sim.delay, "propagation delay in samples");
    simulate->add_option("--seed", sim.seed, "trial seed");
    simulate->add_option("--sync", sim.sync, "PSK receiver timing: 'delay' (known) or 'header'");
    flags.attach(*simulate);

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "BTSR sweep over SNR or bit rate, written as CSV");
    sweep_cmd->add_option("scheme", sw.scheme, "fsk, bpsk or dpsk")->required();
    sweep_cmd->add_option("--axis", sw.axis, "'snr' or 'bitrate'");
    sweep_cmd->add_option("--values", sw.values, "comma separated axis values")->delimiter(',')->required();
    sweep_cmd->add_option("--trials", sw.trials, "trials per point (>= 2)");
    sweep_cmd->add_option("--out", sw.out_path, "CSV output path (default: standard output)");
    sweep_cmd->add_option("--bits", sw.bits, "payload length per trial");
    sweep_cmd->add_option("--snr-db", sw.snr_db, "SNR used by bit-rate sweeps");
    sweep_cmd->add_option("--noise-kind", sw.noise_kind, "noise profile");
    sweep_cmd->add_option("--seed", sw.seed, "base seed");
    sweep_cmd->add_option("--threads", sw.threads, "worker threads (0 = all cores)");
    flags.attach(*sweep_cmd);

    SpectrumArgs sp;
    auto* spectrum = app.add_subcommand("spectrum", "averaged power spectrum of a WAV file as CSV");
    spectrum->add_option("in", sp.in, "input WAV path")->required();
    spectrum->add_option("--fft-size", sp.fft_size, "frame size (power of two)");
    spectrum->add_option("--window", sp.window, "'rect' or 'hann'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    sim.has_snr = snr->count() > 0;

    try {
        if (encode->parsed()) return cmd_encode(enc, flags, out);
        if (decode->parsed()) return cmd_decode(dec, flags, out);
        if (simulate->parsed()) return cmd_simulate(sim, flags, out, err);
        if (sweep_cmd->parsed()) return cmd_sweep(sw, flags, out);
        if (spectrum->parsed()) return cmd_spectrum(sp, out);
    } catch (const ModemError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    }
    return kExitUsage;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"umodem"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace umodem::cli
