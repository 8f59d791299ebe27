#pragma once

// Shared fixtures for the unit tests and the acceptance runner.

#include "kidcorpus/audio.hpp"
#include "kidcorpus/corpus.hpp"
#include "kidcorpus/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace kctest {

namespace fs = std::filesystem;
using namespace kidcorpus;

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() /
                ("kidcorpus-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& s) const { return path_ / s; }

private:
    fs::path path_;
};

/// Silence, a sine burst with raised-cosine edges, silence. `amplitude` in LSB.
inline AudioClip tone_clip(double freq_hz, double amplitude, double lead_ms, double tone_ms,
                           double trail_ms, double taper_ms = 20.0, int rate = kCanonicalRate,
                           double dc = 0.0, int channels = 1) {
    const auto n_lead = static_cast<std::size_t>(std::lround(lead_ms * rate / 1000.0));
    const auto n_tone = static_cast<std::size_t>(std::lround(tone_ms * rate / 1000.0));
    const auto n_trail = static_cast<std::size_t>(std::lround(trail_ms * rate / 1000.0));
    const auto n_taper = static_cast<std::size_t>(std::lround(taper_ms * rate / 1000.0));
    AudioClip c;
    c.sample_rate = rate;
    c.channels = channels;
    const std::size_t total = n_lead + n_tone + n_trail;
    c.samples.reserve(total * static_cast<std::size_t>(channels));
    for (std::size_t i = 0; i < total; ++i) {
        double v = dc;
        if (i >= n_lead && i < n_lead + n_tone) {
            const std::size_t k = i - n_lead;
            double env = 1.0;
            if (n_taper > 0 && k < n_taper) env = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(k) / n_taper);
            if (n_taper > 0 && n_tone - 1 - k < n_taper) {
                env = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(n_tone - 1 - k) / n_taper);
            }
            v += amplitude * env * std::sin(2.0 * M_PI * freq_hz * static_cast<double>(k) / rate);
        }
        const auto s = static_cast<std::int16_t>(std::clamp(std::lround(v), -32768L, 32767L));
        for (int ch = 0; ch < channels; ++ch) c.samples.push_back(s);
    }
    return c;
}

/// Any-format PCM WAV with a 44-byte header, for uploads at 44.1/48 kHz or stereo.
inline std::string pcm_wav_bytes(const AudioClip& c) {
    std::string out;
    auto u32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    auto u16 = [&](std::uint16_t v) {
        out.push_back(static_cast<char>(v & 0xFF));
        out.push_back(static_cast<char>(v >> 8));
    };
    const auto data_size = static_cast<std::uint32_t>(c.samples.size() * 2);
    out += "RIFF";
    u32(36 + data_size);
    out += "WAVEfmt ";
    u32(16);
    u16(1);
    u16(static_cast<std::uint16_t>(c.channels));
    u32(static_cast<std::uint32_t>(c.sample_rate));
    u32(static_cast<std::uint32_t>(c.sample_rate * c.channels * 2));
    u16(static_cast<std::uint16_t>(c.channels * 2));
    u16(16);
    out += "data";
    u32(data_size);
    for (auto s : c.samples) u16(static_cast<std::uint16_t>(s));
    return out;
}

/// A short spoken-word stand-in: 48 kHz capture, 300 ms lead, 600 ms tone, 400 ms tail.
inline std::string take_bytes(int variant = 0) {
    return pcm_wav_bytes(tone_clip(700.0 + 37.0 * variant, 9000.0, 300.0, 600.0, 400.0, 20.0, 48000));
}

inline Date day(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

/// The boy with tag "A", five years old on 2026-10-14.
inline Speaker ivan_speaker() {
    Speaker s;
    s.speaker_tag = "A";
    s.full_name = "Ivan Petrov";
    s.sex = Sex::boy;
    s.date_of_birth = day(2021, 3, 10);
    s.enrollment_date = day(2026, 9, 1);
    s.address = "ul. Vitosha 1, Sofia";
    s.children_in_family = 2;
    s.birth_order = 1;
    s.attends_kindergarten = true;
    s.kindergarten_name = "Slanchice";
    s.extra_courses = {ExtraCourse::singing};
    s.development_notes = "none";
    s.diseases = "none";
    return s;
}

inline const std::vector<std::string>& sample_words() {
    static const std::vector<std::string> words = {
        "мама", "татко", "баба", "дядо", "куче", "котка", "хляб", "зъб",
        "нож", "мед", "сняг", "риба", "жаба", "чаша", "лисица"};
    return words;
}

/// Adds the first n sample words and saves them as collection `label`.
inline WordCollection seed_collection(Corpus& corpus, char label, int n, bool publish = true) {
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back(corpus.add_word(sample_words().at(i)).word_id);
    auto c = corpus.create_collection(label, "Family", ids);
    return publish ? corpus.publish_collection(label) : c;
}

}  // namespace kctest
