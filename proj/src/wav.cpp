#include "kidcorpus/audio.hpp"

#include "kidcorpus/error.hpp"

#include <cmath>
#include <cstring>
#include <optional>

namespace kidcorpus {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) |
           (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char (&tag)[5]) {
    return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char (&tag)[5]) {
    out.insert(out.end(), tag, tag + 4);
}

struct Format {
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t bits = 0;
};

}  // namespace

bool is_accepted_rate(int rate) noexcept { return rate == 16000 || rate == 44100 || rate == 48000; }

AudioClip parse_wav(std::span<const std::uint8_t> b) {
    if (b.size() < 12 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE")) {
        throw Error(Errc::not_riff, "not a RIFF/WAVE stream");
    }

    std::optional<Format> fmt;
    std::size_t pos = 12;
    while (true) {
        if (pos + 8 > b.size()) {
            throw Error(Errc::truncated_data, fmt ? "missing data chunk" : "missing fmt chunk");
        }
        const std::uint32_t size = read_u32(b, pos + 4);
        const std::size_t body = pos + 8;
        const std::size_t available = b.size() - body;

        if (tag_is(b, pos, "fmt ")) {
            if (size < 16 || size > available) throw Error(Errc::truncated_data, "short fmt chunk");
            std::uint16_t format = read_u16(b, body);
            if (format == kFormatExtensible && size >= 40) {
                // sub-format GUID starts at byte 24 of the chunk body
                format = read_u16(b, body + 24);
            }
            if (format != kFormatPcm) {
                throw Error(Errc::not_pcm, "audio format " + std::to_string(format) + " is not PCM",
                            {{"format", format}});
            }
            Format f;
            f.channels = read_u16(b, body + 2);
            f.rate = read_u32(b, body + 4);
            f.bits = read_u16(b, body + 14);
            if (f.bits != 16) {
                throw Error(Errc::unsupported_depth,
                            std::to_string(f.bits) + "-bit samples are not supported",
                            {{"bit_depth", f.bits}});
            }
            if (!is_accepted_rate(static_cast<int>(f.rate))) {
                throw Error(Errc::unsupported_rate,
                            "sample rate " + std::to_string(f.rate) + " Hz is not accepted",
                            {{"sample_rate", f.rate}});
            }
            if (f.channels != 1 && f.channels != 2) {
                throw Error(Errc::unsupported_channels,
                            std::to_string(f.channels) + " channels are not supported",
                            {{"channels", f.channels}});
            }
            fmt = f;
        } else if (tag_is(b, pos, "data")) {
            if (!fmt) throw Error(Errc::not_pcm, "data chunk precedes fmt chunk");
            if (size > available) {
                throw Error(Errc::truncated_data,
                            "data chunk declares " + std::to_string(size) + " bytes but " +
                                std::to_string(available) + " are present",
                            {{"declared", size}, {"present", available}});
            }
            const std::size_t block = static_cast<std::size_t>(fmt->channels) * 2;
            if (size % block != 0) throw Error(Errc::truncated_data, "partial sample frame");

            AudioClip clip;
            clip.sample_rate = static_cast<int>(fmt->rate);
            clip.channels = fmt->channels;
            clip.bit_depth = fmt->bits;
            clip.samples.resize(size / 2);
            for (std::size_t i = 0; i < clip.samples.size(); ++i) {
                clip.samples[i] = static_cast<std::int16_t>(read_u16(b, body + 2 * i));
            }
            return clip;
        }

        if (size > available) throw Error(Errc::truncated_data, "chunk runs past end of stream");
        pos = body + size + (size & 1U);
    }
}

AudioClip parse_wav(std::string_view bytes) {
    return parse_wav(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

std::vector<std::uint8_t> write_wav(const AudioClip& clip) {
    if (!clip.is_canonical()) {
        throw Error(Errc::non_canonical_clip,
                    "canonical clips are 16000 Hz mono 16-bit; got " +
                        std::to_string(clip.sample_rate) + " Hz, " +
                        std::to_string(clip.channels) + " ch, " + std::to_string(clip.bit_depth) +
                        " bit");
    }
    const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
    std::vector<std::uint8_t> out;
    out.reserve(kCanonicalHeaderSize + data_bytes);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_bytes);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, kCanonicalChannels);
    put_u32(out, kCanonicalRate);
    put_u32(out, kCanonicalRate * kCanonicalChannels * 2);  // byte rate
    put_u16(out, kCanonicalChannels * 2);                    // block align
    put_u16(out, kCanonicalDepth);
    put_tag(out, "data");
    put_u32(out, data_bytes);
    for (std::int16_t s : clip.samples) put_u16(out, static_cast<std::uint16_t>(s));
    return out;
}

std::string write_wav_string(const AudioClip& clip) {
    auto bytes = write_wav(clip);
    return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

AudioClip downmix_to_mono(const AudioClip& clip) {
    if (clip.channels == 1) return clip;
    if (clip.channels != 2) {
        throw Error(Errc::unsupported_channels, "only mono and stereo clips can be downmixed");
    }
    AudioClip mono;
    mono.sample_rate = clip.sample_rate;
    mono.channels = 1;
    mono.bit_depth = clip.bit_depth;
    mono.samples.resize(clip.frames());
    for (std::size_t i = 0; i < mono.samples.size(); ++i) {
        const int sum = clip.samples[2 * i] + clip.samples[2 * i + 1];
        mono.samples[i] = static_cast<std::int16_t>(std::lround(sum / 2.0));
    }
    return mono;
}

AudioClip resample_to_16k(const AudioClip& input) {
    if (!is_accepted_rate(input.sample_rate)) {
        throw Error(Errc::unsupported_rate,
                    "cannot resample from " + std::to_string(input.sample_rate) + " Hz",
                    {{"sample_rate", input.sample_rate}});
    }
    AudioClip mono = downmix_to_mono(input);
    if (mono.sample_rate == kCanonicalRate) return mono;

    const std::size_t n_in = mono.samples.size();
    const auto rate = static_cast<std::size_t>(mono.sample_rate);
    const std::size_t n_out = (n_in * kCanonicalRate + rate / 2) / rate;
    const double step = static_cast<double>(rate) / kCanonicalRate;

    AudioClip out;
    out.sample_rate = kCanonicalRate;
    out.channels = 1;
    out.bit_depth = mono.bit_depth;
    out.samples.resize(n_out);
    for (std::size_t j = 0; j < n_out; ++j) {
        const double pos = static_cast<double>(j) * step;
        auto i0 = static_cast<std::size_t>(pos);
        if (i0 >= n_in) i0 = n_in - 1;
        const std::size_t i1 = std::min(i0 + 1, n_in - 1);
        const double frac = pos - static_cast<double>(i0);
        const double x0 = mono.samples[i0];
        const double x1 = mono.samples[i1];
        out.samples[j] = static_cast<std::int16_t>(std::lround(x0 + frac * (x1 - x0)));
    }
    return out;
}

}  // namespace kidcorpus
