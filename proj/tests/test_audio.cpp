#include "kidcorpus/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using namespace kidcorpus;
using kctest::pcm_wav_bytes;
using kctest::tone_clip;

namespace fs = std::filesystem;

namespace {

AudioClip random_clip(std::mt19937& rng) {
    AudioClip c;
    c.samples.resize(rng() % 5000);
    for (auto& s : c.samples) s = static_cast<std::int16_t>(static_cast<int>(rng() % 65536) - 32768);
    return c;
}

Errc parse_error(const std::string& bytes) {
    try {
        parse_wav(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::io_error;
}

void put_u16(std::string& b, std::size_t at, std::uint16_t v) {
    b[at] = static_cast<char>(v & 0xFF);
    b[at + 1] = static_cast<char>(v >> 8);
}

void put_u32(std::string& b, std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b[at + i] = static_cast<char>((v >> (8 * i)) & 0xFF);
}

double mean(const std::vector<std::int16_t>& s) {
    return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

int max_abs_diff(const AudioClip& a, const AudioClip& b) {
    REQUIRE(a.samples.size() == b.samples.size());
    int worst = 0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        worst = std::max(worst, std::abs(int(a.samples[i]) - int(b.samples[i])));
    }
    return worst;
}

}  // namespace

TEST_CASE("canonical write/parse/write is byte identical") {
    std::mt19937 rng(11);
    for (int i = 0; i < 100; ++i) {
        const AudioClip c = random_clip(rng);
        const auto bytes = write_wav(c);
        const AudioClip back = parse_wav(bytes);
        CHECK(back == c);
        CHECK(write_wav(back) == bytes);
    }
}

TEST_CASE("canonical header layout") {
    AudioClip c;
    c.samples = {1, -1, 2};
    const auto b = write_wav(c);
    REQUIRE(b.size() == kCanonicalHeaderSize + 6);
    CHECK(std::string(b.begin(), b.begin() + 4) == "RIFF");
    CHECK(std::string(b.begin() + 8, b.begin() + 16) == "WAVEfmt ");
    CHECK(b[24] == 0x80);
    CHECK(b[25] == 0x3E);
    CHECK(b[26] == 0x00);
    CHECK(b[27] == 0x00);
    CHECK(b[22] == 1);   // channels
    CHECK(b[34] == 16);  // bits
}

TEST_CASE("writer refuses non-canonical clips") {
    AudioClip c;
    c.sample_rate = 48000;
    CHECK_THROWS_AS(write_wav(c), Error);
    c.sample_rate = 16000;
    c.channels = 2;
    CHECK_THROWS_AS(write_wav(c), Error);
}

TEST_CASE("each malformed input class has its own error") {
    AudioClip c;
    c.samples = {100, 200, 300, 400};
    const std::string good = write_wav_string(c);

    CHECK(parse_error("") == Errc::not_riff);
    CHECK(parse_error("RIFX" + good.substr(4)) == Errc::not_riff);
    CHECK(parse_error(good.substr(0, 8) + "AVI " + good.substr(12)) == Errc::not_riff);

    std::string fl = good;
    put_u16(fl, 20, 3);  // IEEE float
    CHECK(parse_error(fl) == Errc::not_pcm);

    std::string rate = good;
    put_u32(rate, 24, 22050);
    CHECK(parse_error(rate) == Errc::unsupported_rate);

    std::string depth = good;
    put_u16(depth, 34, 24);
    CHECK(parse_error(depth) == Errc::unsupported_depth);

    std::string ch = good;
    put_u16(ch, 22, 3);
    CHECK(parse_error(ch) == Errc::unsupported_channels);

    CHECK(parse_error(good.substr(0, good.size() - 3)) == Errc::truncated_data);
    CHECK(parse_error(good.substr(0, 30)) == Errc::truncated_data);
    std::string odd = good;
    put_u32(odd, 40, 7);  // half a sample
    CHECK(parse_error(odd.substr(0, 44 + 7)) == Errc::truncated_data);
}

TEST_CASE("foreign chunks and extensible format") {
    AudioClip c;
    c.samples = {5, -5, 7};
    const std::string good = write_wav_string(c);
    // LIST chunk with odd size and pad byte between fmt and data
    std::string with_list = good.substr(0, 36) + std::string("LIST\x03\x00\x00\x00" "abc\0", 12) + good.substr(36);
    put_u32(with_list, 4, static_cast<std::uint32_t>(with_list.size() - 8));
    CHECK(parse_wav(with_list) == c);

    // WAVE_FORMAT_EXTENSIBLE carrying the PCM subformat
    std::string ext = "RIFF0000WAVEfmt ";
    ext += std::string("\x28\x00\x00\x00", 4);
    std::string fmt(40, '\0');
    put_u16(fmt, 0, 0xFFFE);
    put_u16(fmt, 2, 1);
    put_u32(fmt, 4, 16000);
    put_u32(fmt, 8, 32000);
    put_u16(fmt, 12, 2);
    put_u16(fmt, 14, 16);
    put_u16(fmt, 16, 22);
    put_u16(fmt, 18, 16);
    put_u16(fmt, 24, 1);  // KSDATAFORMAT_SUBTYPE_PCM leading bytes
    fmt.replace(26, 14, std::string("\x00\x00\x00\x00\x10\x00\x80\x00\x00\xAA\x00\x38\x9B\x71", 14));
    ext += fmt + good.substr(36);
    put_u32(ext, 4, static_cast<std::uint32_t>(ext.size() - 8));
    CHECK(parse_wav(ext) == c);
}

TEST_CASE("stereo 48 kHz upload resamples to 16 kHz mono") {
    const AudioClip up = tone_clip(440.0, 8000.0, 0.0, 1000.0, 0.0, 0.0, 48000, 0.0, 2);
    const AudioClip parsed = parse_wav(pcm_wav_bytes(up));
    CHECK(parsed.channels == 2);
    CHECK(parsed.sample_rate == 48000);
    const AudioClip out = resample_to_16k(parsed);
    CHECK(out.is_canonical());
    CHECK(out.frames() == 16000);
    const AudioClip cd = resample_to_16k(tone_clip(440.0, 8000.0, 0.0, 500.0, 0.0, 0.0, 44100));
    CHECK(cd.frames() == 8000);
}

TEST_CASE("dc removal leaves mean zero within 1 LSB") {
    const AudioClip c = tone_clip(1000.0, 6000.0, 400.0, 800.0, 400.0, 50.0, 16000, 1500.0);
    std::vector<double> x(c.samples.begin(), c.samples.end());
    const double removed = remove_dc(x);
    CHECK(removed == doctest::Approx(1500.0).epsilon(0.01));
    CHECK(std::abs(std::accumulate(x.begin(), x.end(), 0.0) / x.size()) <= 1.0);
    const auto out = cleanup_pipeline(c);
    CHECK(std::abs(mean(out.clip.samples)) <= 1.0);
}

TEST_CASE("normalized peak and trim margins") {
    struct Case {
        double freq, amp, lead, tone, trail, taper;
    };
    for (const Case k : {Case{1000, 3000, 500, 700, 600, 50}, Case{2000, 12000, 300, 400, 900, 20},
                         Case{3000, 800, 1000, 300, 250, 20}}) {
        const auto r = cleanup_pipeline(tone_clip(k.freq, k.amp, k.lead, k.tone, k.trail, k.taper));
        CHECK(std::abs(r.report.peak_after + 3.0) <= 0.1);
        CHECK(std::abs(r.report.trimmed_leading_ms - (k.lead - 100.0)) <= 25.0);
        CHECK(std::abs(r.report.trimmed_trailing_ms - (k.trail - 100.0)) <= 25.0);
        CHECK_FALSE(r.report.clipping_detected);
        CHECK(r.report.gain_db > 0.0);
    }
}

TEST_CASE("second pass is a no-op within 1 LSB") {
    struct Case {
        double freq, taper;
    };
    // lower carriers or sharper edges put energy near the cutoff, where a second
    // filter pass reshapes the envelope by several LSB
    for (const Case k : {Case{1000, 50}, Case{2000, 20}, Case{3000, 20}, Case{4000, 20}}) {
        CAPTURE(k.freq);
        const auto first = cleanup_pipeline(tone_clip(k.freq, 5000, 400, 600, 400, k.taper));
        const auto second = cleanup_pipeline(first.clip);
        CHECK(max_abs_diff(first.clip, second.clip) <= 1);
        CHECK(std::abs(second.report.gain_db) <= 0.1);
        CHECK(second.report.trimmed_leading_ms == 0.0);
        CHECK(second.report.trimmed_trailing_ms == 0.0);
    }
}

TEST_CASE("silent and clipped takes") {
    AudioClip quiet;
    quiet.samples.assign(16000, 0);
    CHECK_THROWS_AS(cleanup_pipeline(quiet), Error);
    try {
        cleanup_pipeline(tone_clip(1000, 10, 100, 100, 100));  // -70 dBFS
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::all_silence);
    }
    std::vector<std::int16_t> s = {0, 32767, 32767, 0, -32768, -32768, -32768, 0};
    CHECK(detect_clipping(s, 3));
    s[5] = 0;
    CHECK_FALSE(detect_clipping(s, 3));
    AudioClip loud = tone_clip(1000, 40000, 200, 300, 200, 0);
    CHECK(cleanup_pipeline(loud).report.clipping_detected);
}

TEST_CASE("cleanup wants canonical input") {
    const AudioClip c = tone_clip(1000, 5000, 100, 300, 100, 20, 48000);
    try {
        cleanup_pipeline(c);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::non_canonical_clip);
    }
}
