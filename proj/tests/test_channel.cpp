#include "umodem/channel.hpp"
#include "umodem/psk.hpp"
#include "umodem/spectrum.hpp"

#include <gtest/gtest.h>

using namespace umodem;

namespace {

AudioSignal carrier_signal(std::size_t n = 48000) { return dpsk_modulate(BitStream(n / 480 - 1, 0), PskConfig{}); }

double fraction_below(const AudioSignal& s, double f_hz) {
    const auto sp = averaged_power_spectrum(s.samples(), s.sample_rate(), 4096);
    return band_energy(sp, 0.0, f_hz) / sp.total_power();
}

} // namespace

TEST(NoiseKind, Names) {
    for (NoiseKind k : {NoiseKind::white, NoiseKind::lowpass_music, NoiseKind::lowpass_voice, NoiseKind::broadband_jangle})
        EXPECT_EQ(parse_noise_kind(to_string(k)), k);
    EXPECT_FALSE(parse_noise_kind("pink").has_value());
}

TEST(ApplyChannel, IdentityReturnsInput) {
    const auto s = carrier_signal();
    const auto r = apply_channel(s, ChannelSpec{});
    EXPECT_EQ(r.signal, s);
    EXPECT_EQ(r.clipped_samples, 0u);
    EXPECT_FALSE(r.clipping_warning);
}

TEST(ApplyChannel, DelayPrependsZeros) {
    const auto s = carrier_signal(9600);
    ChannelSpec spec;
    spec.delay_samples = 480;
    const auto r = apply_channel(s, spec);
    ASSERT_EQ(r.signal.size(), s.size() + 480);
    for (std::size_t k = 0; k < 480; ++k) EXPECT_EQ(r.signal.samples()[k], 0.0);
    for (std::size_t k = 0; k < s.size(); ++k) EXPECT_EQ(r.signal.samples()[k + 480], s.samples()[k]);
}

TEST(ApplyChannel, GainAndClipping) {
    const auto s = carrier_signal(9600);
    ChannelSpec spec;
    spec.gain = 0.5;
    const auto half = apply_channel(s, spec);
    for (std::size_t k = 0; k < s.size(); ++k) EXPECT_EQ(half.signal.samples()[k], 0.5 * s.samples()[k]);

    spec.gain = 2.0;
    const auto loud = apply_channel(s, spec);
    EXPECT_GT(loud.clipped_samples, 0u);
    EXPECT_TRUE(loud.clipping_warning);
    EXPECT_LE(loud.signal.peak(), 1.0);

    spec.gain = 0.0;
    EXPECT_THROW(apply_channel(s, spec), ModemError);
}

TEST(ApplyChannel, WhiteNoiseHitsTargetSnr) {
    // carrier-bin SNR puts most of the white noise outside the carrier bin; a small
    // gain keeps the sum clear of the clipping limit
    const auto s = scale(carrier_signal(), 1e-3);
    for (double target : {0.0, 10.0, 20.0, 30.0}) {
        ChannelSpec spec;
        spec.gain = 1e-3;
        spec.noise = NoiseSpec{NoiseKind::white, target, 19200.0};
        spec.seed = 11;
        const auto r = apply_channel(carrier_signal(), spec);
        ASSERT_EQ(r.clipped_samples, 0u);
        // recover the added noise and measure it independently of the scaling step
        std::vector<double> n(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) n[k] = r.signal.samples()[k] - s.samples()[k];
        const double snr = measure_snr_at(s, AudioSignal(std::move(n), 96000), 19200.0);
        EXPECT_NEAR(snr, target, 1.0) << target;
    }
}

TEST(ApplyChannel, LowSnrClipsAndWarns) {
    ChannelSpec spec;
    spec.noise = NoiseSpec{NoiseKind::white, 15.0, 19200.0};
    const auto r = apply_channel(carrier_signal(), spec);
    EXPECT_TRUE(r.clipping_warning);
    EXPECT_LE(r.signal.peak(), 1.0);
}

TEST(ApplyChannel, DeterministicPerSeed) {
    const auto s = carrier_signal(9600);
    ChannelSpec spec;
    spec.noise = NoiseSpec{NoiseKind::broadband_jangle, 10.0, 19200.0};
    spec.seed = 99;
    EXPECT_EQ(apply_channel(s, spec).signal, apply_channel(s, spec).signal);
    ChannelSpec other = spec;
    other.seed = 100;
    EXPECT_FALSE(apply_channel(s, spec).signal == apply_channel(s, other).signal);
}

TEST(ApplyChannel, StereoChannelsGetIndependentNoise) {
    const auto m = carrier_signal(9600);
    const AudioSignal st(std::vector<double>(m.samples().begin(), m.samples().end()),
                         std::vector<double>(m.samples().begin(), m.samples().end()), 96000);
    ChannelSpec spec;
    spec.noise = NoiseSpec{NoiseKind::white, 10.0, 19200.0};
    const auto r = apply_channel(st, spec);
    ASSERT_EQ(r.signal.channel_count(), 2);
    EXPECT_FALSE(std::equal(r.signal.channel(0).begin(), r.signal.channel(0).end(), r.signal.channel(1).begin()));
}

TEST(MeasureSnr, MonotonicInNoiseVariance) {
    const auto s = carrier_signal();
    const auto base = synth_noise(NoiseKind::white, s.size(), 96000, 4);
    double prev = std::numeric_limits<double>::infinity();
    for (double sigma : {0.001, 0.01, 0.05, 0.2, 1.0}) {
        const double snr = measure_snr_at(s, scale(base, sigma), 19200.0);
        EXPECT_LT(snr, prev);
        prev = snr;
    }
}

TEST(MeasureSnr, ClosedForms) {
    const auto s = carrier_signal();
    EXPECT_NEAR(measure_snr_at(s, s, 19200.0), 0.0, 1e-12);
    EXPECT_NEAR(measure_snr_at(scale(s, 2.0), s, 19200.0), 20 * std::log10(2.0), 1e-9);
    // on-bin tones: bin 819 of 4096 at 96 kHz is 19195.3125 Hz
    const double f = 819 * 96000.0 / 4096;
    const auto a = generate_tone(f, 8192, 1.0, 0.0, 96000);
    const auto b = generate_tone(f, 8192, std::pow(10.0, -15.0 / 20), 0.3, 96000);
    EXPECT_NEAR(measure_snr_at(a, b, f), 15.0, 1e-9);
    EXPECT_EQ(measure_snr_at(a, AudioSignal(std::vector<double>(8192, 0.0), 96000), f),
              std::numeric_limits<double>::infinity());
}

TEST(MeasureSnr, Errors) {
    const auto s = carrier_signal();
    EXPECT_THROW(measure_snr_at(s, AudioSignal(std::vector<double>(100, 0.1), 96000), 19200.0), ModemError);
    EXPECT_THROW(measure_snr_at(s, AudioSignal(std::vector<double>(s.size(), 0.1), 44100), 19200.0), ModemError);
}

TEST(SynthNoise, LowpassKindsConcentrateBelow10k) {
    for (NoiseKind k : {NoiseKind::lowpass_voice, NoiseKind::lowpass_music}) {
        const auto n = synth_noise(k, 96000, 96000, 7);
        EXPECT_GE(fraction_below(n, 10000.0), 0.9) << to_string(k);
    }
    // white noise spreads evenly up to Nyquist
    EXPECT_NEAR(fraction_below(synth_noise(NoiseKind::white, 96000, 96000, 7), 10000.0), 10000.0 / 48000, 0.02);
}

TEST(SynthNoise, JangleIsBroadband) {
    const auto n = synth_noise(NoiseKind::broadband_jangle, 96000 * 2, 96000, 3);
    const auto sp = averaged_power_spectrum(n.samples(), 96000, 4096);
    const double high = band_power(sp, 18000, 19500).power;
    const double low = band_power(sp, 1000, 2000).power;
    EXPECT_LT(std::abs(10 * std::log10(high / low)), 3.0);
}

TEST(SynthNoise, JangleIsBursty) {
    const auto n = synth_noise(NoiseKind::broadband_jangle, 96000, 96000, 3);
    // short-term power varies far more than for stationary white noise
    auto spread = [](const AudioSignal& s) {
        double lo = 1e300, hi = 0;
        for (std::size_t f = 0; f + 960 <= s.size(); f += 960) {
            double e = 0;
            for (std::size_t k = f; k < f + 960; ++k) e += s.samples()[k] * s.samples()[k];
            lo = std::min(lo, e);
            hi = std::max(hi, e);
        }
        return hi / lo;
    };
    EXPECT_GT(spread(n), 3.0 * spread(synth_noise(NoiseKind::white, 96000, 96000, 3)));
}

TEST(SynthNoise, SeededAndValidated) {
    for (NoiseKind k : {NoiseKind::white, NoiseKind::lowpass_music, NoiseKind::lowpass_voice, NoiseKind::broadband_jangle}) {
        EXPECT_EQ(synth_noise(k, 5000, 96000, 42), synth_noise(k, 5000, 96000, 42));
        EXPECT_FALSE(synth_noise(k, 5000, 96000, 42) == synth_noise(k, 5000, 96000, 43));
    }
    EXPECT_THROW(synth_noise(NoiseKind::white, 0, 96000, 1), ModemError);
    EXPECT_THROW(synth_noise(NoiseKind::white, 10, 0, 1), ModemError);
}

TEST(MixSeed, SpreadsNearbySeeds) {
    EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
    EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
    EXPECT_EQ(mix_seed(5, 6), mix_seed(5, 6));
}
