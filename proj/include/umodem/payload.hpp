#pragma once

#include "umodem/error.hpp"
#include "umodem/signal.hpp"

#include <cctype>
#include <string>
#include <string_view>

namespace umodem {

// "0x..." is hex, most significant bit first; anything else must be a string of 0/1.
inline BitStream parse_payload(std::string_view text) {
    BitStream bits;
    if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        for (char ch : text.substr(2)) {
            const int c = std::tolower(static_cast<unsigned char>(ch));
            int v;
            if (c >= '0' && c <= '9') v = c - '0';
            else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
            else throw ModemError(Errc::config, "invalid hex digit '" + std::string(1, ch) + "'");
            for (int b = 3; b >= 0; --b) bits.push_back(static_cast<Bit>((v >> b) & 1));
        }
    } else {
        for (char ch : text) {
            if (ch != '0' && ch != '1') throw ModemError(Errc::config, "payload must be hex (0x...) or a bit string");
            bits.push_back(ch == '1');
        }
    }
    if (bits.empty()) throw ModemError(Errc::config, "payload is empty");
    return bits;
}

inline std::string format_bits(std::span<const Bit> bits) {
    std::string s;
    s.reserve(bits.size());
    for (Bit b : bits) s.push_back(b ? '1' : '0');
    return s;
}

} // namespace umodem
