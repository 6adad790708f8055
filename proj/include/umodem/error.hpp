#pragma once

#include <stdexcept>
#include <string>

namespace umodem {

enum class Errc {
    nyquist_violation,
    config,
    insufficient_data,
    incompatible_signal,
    sync_not_found,
    no_clock,
    unsupported_format,
    corrupt_file,
    io,
};

inline const char* to_string(Errc code) {
    switch (code) {
    case Errc::nyquist_violation: return "nyquist violation";
    case Errc::config: return "configuration error";
    case Errc::insufficient_data: return "insufficient data";
    case Errc::incompatible_signal: return "incompatible signal";
    case Errc::sync_not_found: return "sync not found";
    case Errc::no_clock: return "no clock";
    case Errc::unsupported_format: return "unsupported format";
    case Errc::corrupt_file: return "corrupt file";
    case Errc::io: return "i/o error";
    }
    return "unknown error";
}

// Every failure raised by the library carries one of the codes above so the
// CLI can map it to an exit status without string matching.
class ModemError : public std::runtime_error {
public:
    ModemError(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace umodem
