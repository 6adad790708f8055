#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace umodem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli_run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string tmp(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("umodem_cli_" + name)).string();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

} // namespace

TEST(Cli, EncodeDpskReportsGeometry) {
    const auto r = cli_run({"encode", "dpsk", "0xA5", tmp("a5.wav")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "bits=8 samples=4320 channels=1 sample_rate=96000 duration_s=0.045000\n");
    EXPECT_EQ(read_wav(tmp("a5.wav")).signal.size(), 4320u);
}

TEST(Cli, EncodeFskIsStereo) {
    const auto r = cli_run({"encode", "fsk", "1010", tmp("fsk.wav")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "bits=4 samples=44100 channels=2 sample_rate=44100 duration_s=1.000000\n");
}

TEST(Cli, EncodeErrors) {
    EXPECT_EQ(cli_run({"encode", "dpsk", "", tmp("e.wav")}).code, 2);
    EXPECT_EQ(cli_run({"encode", "dpsk", "0xZZ", tmp("e.wav")}).code, 2);
    EXPECT_EQ(cli_run({"encode", "qam", "0x1", tmp("e.wav")}).code, 2);
    EXPECT_EQ(cli_run({"encode", "dpsk", "0x1", tmp("e.wav"), "--carrier", "50000"}).code, 2);
    EXPECT_EQ(cli_run({"encode", "dpsk", "0x1", "/nonexistent-dir/e.wav"}).code, 2);
    EXPECT_EQ(cli_run({"encode"}).code, 2);
    EXPECT_EQ(cli_run({}).code, 2);
    EXPECT_EQ(cli_run({"--help"}).code, 0);
}

TEST(Cli, DecodeRoundTrips) {
    ASSERT_EQ(cli_run({"encode", "dpsk", "0xDEADBEEF", tmp("rt.wav")}).code, 0);
    auto r = cli_run({"decode", "dpsk", tmp("rt.wav")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, format_bits(parse_payload("0xDEADBEEF")) + "\n");

    ASSERT_EQ(cli_run({"encode", "bpsk", "0xC3", tmp("rtb.wav"), "--header"}).code, 0);
    r = cli_run({"decode", "bpsk", tmp("rtb.wav"), "--sync", "header"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "11000011\n");

    ASSERT_EQ(cli_run({"encode", "fsk", "110010", tmp("rtf.wav")}).code, 0);
    r = cli_run({"decode", "fsk", tmp("rtf.wav"), "--per-channel"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "110010\n");
}

TEST(Cli, DecodeTraceHasOneRowPerBit) {
    ASSERT_EQ(cli_run({"encode", "dpsk", "1101", tmp("tr.wav")}).code, 0);
    const auto r = cli_run({"decode", "dpsk", tmp("tr.wav"), "--trace"});
    ASSERT_EQ(r.code, 0);
    const auto l = lines(r.out);
    ASSERT_EQ(l.size(), 6u);
    EXPECT_EQ(l[0], "1101");
    EXPECT_EQ(l[1], "bit,correlation,phase,decision,erasure");
    EXPECT_EQ(l[2].substr(0, 2), "0,");
    EXPECT_EQ(l[2].substr(l[2].size() - 4), ",1,0");
}

TEST(Cli, DecodeFailures) {
    // silence: header search finds nothing
    write_wav(AudioSignal(std::vector<double>(96000, 0.0), 96000), tmp("silence.wav"));
    auto r = cli_run({"decode", "dpsk", tmp("silence.wav"), "--sync", "header"});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("sync not found"), std::string::npos);

    write_wav(AudioSignal(std::vector<double>(44100, 0.0), std::vector<double>(44100, 0.0), 44100), tmp("fsil.wav"));
    EXPECT_EQ(cli_run({"decode", "fsk", tmp("fsil.wav")}).code, 3);

    ASSERT_EQ(cli_run({"encode", "dpsk", "0x5", tmp("rate.wav")}).code, 0);
    r = cli_run({"decode", "dpsk", tmp("rate.wav"), "--sample-rate", "48000"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("sample rate"), std::string::npos);
    EXPECT_EQ(cli_run({"decode", "dpsk", tmp("missing.wav")}).code, 2);
}

TEST(Cli, SimulateCleanDpsk) {
    const auto r = cli_run({"simulate", "dpsk", "--bits", "800", "--snr-db", "99", "--seed", "7"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto l = lines(r.out);
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(l[0], "scheme,n_bits,snr_db,noise_kind,btsr,ber_estimate,erasures,seed");
    EXPECT_EQ(l[1].substr(0, 40), "dpsk,800,99.000000,white,1.000000,0.0012");
    EXPECT_EQ(r.out, cli_run({"simulate", "dpsk", "--bits", "800", "--snr-db", "99", "--seed", "7"}).out);
}

TEST(Cli, SimulateFsk) {
    const auto r = cli_run({"simulate", "fsk", "--bits", "32", "--snr-db", "40", "--seed", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto fields = lines(r.out)[1];
    const auto btsr = std::stod(fields.substr(fields.find(",white,") + 7));
    EXPECT_GE(btsr, 0.9);
}

TEST(Cli, SimulateNoiselessAndErrors) {
    auto r = cli_run({"simulate", "bpsk", "--bits", "64"});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("bpsk,64,none,none,1.000000"), std::string::npos);
    EXPECT_EQ(cli_run({"simulate", "dpsk", "--noise-kind", "pink", "--snr-db", "3"}).code, 2);
    EXPECT_EQ(cli_run({"simulate", "dpsk", "--sync", "magic"}).code, 2);
    EXPECT_EQ(cli_run({"simulate", "dpsk", "--bit-rate", "20000"}).code, 2);
}

TEST(Cli, SweepCsv) {
    auto r = cli_run({"sweep", "dpsk", "--axis", "snr", "--values", "20,30", "--trials", "2", "--bits", "50", "--threads", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto l = lines(r.out);
    ASSERT_EQ(l.size(), 3u);
    EXPECT_EQ(l[0], "axis,value,mean_btsr,std_btsr,trials");
    EXPECT_EQ(l[2], "snr_db,30.000000,1.000000,0.000000,2");

    r = cli_run({"sweep", "dpsk", "--axis", "bitrate", "--values", "200,20000", "--trials", "2", "--bits", "20",
                 "--out", tmp("sweep.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream f(tmp("sweep.csv"));
    const std::string csv((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    EXPECT_NE(csv.find("bit_rate_bps,20000.000000,invalid,invalid,2"), std::string::npos);

    EXPECT_EQ(cli_run({"sweep", "dpsk", "--values", "1", "--trials", "1"}).code, 2);
    EXPECT_EQ(cli_run({"sweep", "dpsk", "--axis", "gain", "--values", "1"}).code, 2);
    EXPECT_EQ(cli_run({"sweep", "dpsk"}).code, 2);
}

TEST(Cli, SpectrumOfEncodedCarrier) {
    ASSERT_EQ(cli_run({"encode", "dpsk", std::string(40, '0'), tmp("spec.wav")}).code, 0);
    const auto r = cli_run({"spectrum", tmp("spec.wav")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto l = lines(r.out);
    ASSERT_EQ(l.size(), 1u + 2049u);
    EXPECT_EQ(l[0], "freq_hz,power");
    double best = -1, best_f = 0;
    for (std::size_t i = 1; i < l.size(); ++i) {
        const auto comma = l[i].find(',');
        const double f = std::stod(l[i].substr(0, comma)), p = std::stod(l[i].substr(comma + 1));
        if (p > best) {
            best = p;
            best_f = f;
        }
    }
    EXPECT_NEAR(best_f, 19200.0, 96000.0 / 4096);
    EXPECT_EQ(r.out, cli_run({"spectrum", tmp("spec.wav")}).out);
}

TEST(Cli, SpectrumEdgeCases) {
    write_wav(AudioSignal(std::vector<double>(8192, 0.0), 96000), tmp("zero.wav"));
    const auto r = cli_run({"spectrum", tmp("zero.wav"), "--fft-size", "1024", "--window", "hann"});
    ASSERT_EQ(r.code, 0);
    const auto l = lines(r.out);
    ASSERT_EQ(l.size(), 514u);
    for (std::size_t i = 1; i < l.size(); ++i) EXPECT_EQ(l[i].substr(l[i].find(',') + 1), "0.000000000e+00");

    write_wav(AudioSignal(std::vector<double>(100, 0.1), 96000), tmp("short.wav"));
    EXPECT_EQ(cli_run({"spectrum", tmp("short.wav")}).code, 2);
    EXPECT_EQ(cli_run({"spectrum", tmp("zero.wav"), "--fft-size", "1000"}).code, 2);
    EXPECT_EQ(cli_run({"spectrum", tmp("zero.wav"), "--window", "kaiser"}).code, 2);
}
