#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kidcorpus {

inline constexpr int kCanonicalRate = 16000;
inline constexpr int kCanonicalChannels = 1;
inline constexpr int kCanonicalDepth = 16;
inline constexpr std::size_t kCanonicalHeaderSize = 44;
inline constexpr double kFullScale = 32768.0;

bool is_accepted_rate(int rate) noexcept;  // 16000, 44100, 48000

struct AudioFacts {
    int sample_rate = 0;
    int channels = 0;
    int bit_depth = 0;
    double duration_seconds = 0.0;

    bool is_canonical() const noexcept {
        return sample_rate == kCanonicalRate && channels == kCanonicalChannels &&
               bit_depth == kCanonicalDepth;
    }
    friend bool operator==(const AudioFacts&, const AudioFacts&) = default;
};

/// Decoded PCM. Samples are interleaved when channels > 1.
struct AudioClip {
    std::vector<std::int16_t> samples;
    int sample_rate = kCanonicalRate;
    int channels = kCanonicalChannels;
    int bit_depth = kCanonicalDepth;

    std::size_t frames() const noexcept {
        return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0;
    }
    double duration_seconds() const noexcept {
        return sample_rate > 0 ? static_cast<double>(frames()) / sample_rate : 0.0;
    }
    bool is_canonical() const noexcept { return facts().is_canonical(); }
    AudioFacts facts() const noexcept {
        return {sample_rate, channels, bit_depth, duration_seconds()};
    }

    friend bool operator==(const AudioClip&, const AudioClip&) = default;
};

/// RIFF/WAVE PCM reader. Unknown chunks are skipped. Errors: not_riff,
/// not_pcm, unsupported_rate, unsupported_depth, unsupported_channels,
/// truncated_data.
AudioClip parse_wav(std::span<const std::uint8_t> bytes);
AudioClip parse_wav(std::string_view bytes);

/// Canonical 44-byte-header writer; throws non_canonical_clip for anything
/// other than 16 kHz / mono / 16-bit.
std::vector<std::uint8_t> write_wav(const AudioClip& clip);
std::string write_wav_string(const AudioClip& clip);

/// Averages stereo channels; mono clips are returned unchanged.
AudioClip downmix_to_mono(const AudioClip& clip);

/// Linear-interpolation resampler to 16 kHz (stereo is downmixed first).
AudioClip resample_to_16k(const AudioClip& clip);

double dbfs(double peak_lsb) noexcept;

struct CleanupConfig {
    double highpass_hz = 60.0;
    double trim_threshold_db = -40.0;  // relative to the filtered clip peak
    double frame_ms = 25.0;
    double hop_ms = 10.0;
    double margin_ms = 100.0;
    double target_peak_dbfs = -3.0;
    double silence_floor_dbfs = -60.0;  // filtered peak below this is a failed take
    int clip_run = 3;                   // consecutive full-scale samples
};

struct CleanupReport {
    double dc_offset_removed = 0.0;  // LSB
    double trimmed_leading_ms = 0.0;
    double trimmed_trailing_ms = 0.0;
    double peak_before = 0.0;  // dBFS of the input
    double peak_after = 0.0;   // dBFS of the output
    double gain_db = 0.0;      // normalization gain applied
    bool clipping_detected = false;

    friend bool operator==(const CleanupReport&, const CleanupReport&) = default;
};

struct CleanupResult {
    AudioClip clip;
    CleanupReport report;
};

// Individual stages, operating on samples in LSB units.
double remove_dc(std::vector<double>& samples);
void highpass_zero_phase(std::vector<double>& samples, double cutoff_hz, int sample_rate);
bool detect_clipping(std::span<const std::int16_t> samples, int run);

/// Half-open kept range [begin, end) after silence trimming.
struct TrimBounds {
    std::size_t begin = 0;
    std::size_t end = 0;
};
TrimBounds find_trim_bounds(std::span<const double> samples, int sample_rate,
                            const CleanupConfig& config);

/// DC removal, zero-phase first-order high-pass, energy-based silence trim,
/// peak normalization. Requires a 16 kHz mono clip; throws all_silence for a
/// take with nothing above the silence floor.
CleanupResult cleanup_pipeline(const AudioClip& clip, const CleanupConfig& config = {});

}  // namespace kidcorpus
