// Sends a short text message with each scheme through a noisy simulated channel
// and prints what comes out the other side.

#include "umodem/umodem.hpp"

#include <cstdio>
#include <string>

using namespace umodem;

namespace {

BitStream text_bits(const std::string& s) {
    BitStream bits;
    for (unsigned char ch : s)
        for (int b = 7; b >= 0; --b) bits.push_back(static_cast<Bit>((ch >> b) & 1));
    return bits;
}

std::string bits_text(const BitStream& bits) {
    std::string s;
    for (std::size_t i = 0; i + 8 <= bits.size(); i += 8) {
        unsigned char ch = 0;
        for (std::size_t b = 0; b < 8; ++b) ch = static_cast<unsigned char>((ch << 1) | bits[i + b]);
        s.push_back(ch >= 32 && ch < 127 ? static_cast<char>(ch) : '?');
    }
    return s;
}

void report(const char* name, const BitStream& sent, const BitStream& got) {
    std::printf("%-5s btsr=%.4f  \"%s\"\n", name, compute_btsr(sent, got), bits_text(got).c_str());
}

} // namespace

int main() {
    const std::string message = "hello, ultrasound";
    const BitStream bits = text_bits(message);

    ChannelSpec channel;
    channel.delay_samples = 777;
    channel.noise = NoiseSpec{NoiseKind::lowpass_music, 25.0, 19200.0};
    channel.seed = 42;

    // DPSK with a sync header: the receiver finds the frame on its own
    const PskConfig psk;
    const BitStream header = default_sync_header();
    const auto rx = apply_channel(dpsk_modulate(bits, psk, header), channel).signal;
    const std::size_t header_len = header.size() * psk.samples_per_bit();
    const std::size_t start = estimate_delay(rx, header, psk, rx.size() - header_len) + header_len;
    auto trace = dpsk_demodulate(rx, psk, start);
    trace.decisions.resize(bits.size());
    report("dpsk", bits, trace.decisions);

    // coherent BPSK, told the delay
    const auto rx_b = apply_channel(bpsk_modulate(bits, psk), channel).signal;
    report("bpsk", bits, bpsk_demodulate_coherent(rx_b, psk, channel.delay_samples).decisions);

    // FSK is slow: send the first two characters only
    const FskConfig fsk;
    const BitStream short_bits(bits.begin(), bits.begin() + 16);
    ChannelSpec fsk_channel = channel;
    fsk_channel.noise->carrier_hz = fsk.data_freq1_hz;
    const auto rx_f = apply_channel(fsk_modulate(short_bits, fsk), fsk_channel).signal;
    report("fsk", short_bits, fsk_demodulate(rx_f, fsk, FskInput::per_channel).bits);
    return 0;
}
