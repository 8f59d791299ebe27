#include "kidcorpus/audio.hpp"

#include "kidcorpus/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace kidcorpus {

namespace {

// Bilinear first-order section: unity gain at Nyquist, analog-like passband.
void highpass_forward(std::vector<double>& x, double b0, double a1) {
    if (x.empty()) return;
    double prev_in = x.front();
    double prev_out = 0.0;
    for (double& v : x) {
        const double in = v;
        prev_out = b0 * (in - prev_in) + a1 * prev_out;
        prev_in = in;
        v = prev_out;
    }
}

double peak_abs(std::span<const double> x) {
    double p = 0.0;
    for (double v : x) p = std::max(p, std::abs(v));
    return p;
}

}  // namespace

double dbfs(double peak_lsb) noexcept {
    if (peak_lsb <= 0.0) return -std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(peak_lsb / kFullScale);
}

double remove_dc(std::vector<double>& samples) {
    if (samples.empty()) return 0.0;
    const double mean =
        std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    for (double& v : samples) v -= mean;
    return mean;
}

void highpass_zero_phase(std::vector<double>& samples, double cutoff_hz, int sample_rate) {
    if (cutoff_hz <= 0.0) return;
    const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate);
    const double b0 = 1.0 / (1.0 + k);
    const double a1 = (1.0 - k) / (1.0 + k);
    highpass_forward(samples, b0, a1);
    std::reverse(samples.begin(), samples.end());
    highpass_forward(samples, b0, a1);
    std::reverse(samples.begin(), samples.end());
}

bool detect_clipping(std::span<const std::int16_t> samples, int run) {
    int current = 0;
    for (std::int16_t s : samples) {
        if (s >= std::numeric_limits<std::int16_t>::max() ||
            s <= std::numeric_limits<std::int16_t>::min()) {
            if (++current >= run) return true;
        } else {
            current = 0;
        }
    }
    return false;
}

TrimBounds find_trim_bounds(std::span<const double> x, int sample_rate,
                            const CleanupConfig& config) {
    const std::size_t n = x.size();
    const auto frame = static_cast<std::size_t>(std::lround(config.frame_ms * sample_rate / 1000.0));
    const auto hop = static_cast<std::size_t>(std::lround(config.hop_ms * sample_rate / 1000.0));
    const auto margin =
        static_cast<std::size_t>(std::lround(config.margin_ms * sample_rate / 1000.0));
    const double threshold = peak_abs(x) * std::pow(10.0, config.trim_threshold_db / 20.0);

    auto above = [&](std::size_t i) { return std::abs(x[i]) >= threshold; };

    // A frame is kept when any of its samples reaches the threshold. Inside
    // the outermost kept frames the cut lands on the first/last sample that
    // reaches it, so a second pass sees the same boundaries.
    const std::size_t frame_count = n <= frame ? 1 : 1 + (n - frame + hop - 1) / hop;
    std::size_t first = n;
    std::size_t last = 0;
    for (std::size_t f = 0; f < frame_count && first == n; ++f) {
        const std::size_t lo = f * hop;
        const std::size_t hi = std::min(n, lo + frame);
        for (std::size_t i = lo; i < hi; ++i) {
            if (above(i)) {
                first = i;
                break;
            }
        }
    }
    if (first == n) return {0, 0};
    for (std::size_t f = frame_count; f-- > 0;) {
        const std::size_t lo = f * hop;
        const std::size_t hi = std::min(n, lo + frame);
        bool found = false;
        for (std::size_t i = hi; i-- > lo;) {
            if (above(i)) {
                last = i;
                found = true;
                break;
            }
        }
        if (found) break;
    }
    TrimBounds b;
    b.begin = first > margin ? first - margin : 0;
    b.end = std::min(n, last + 1 + margin);
    return b;
}

CleanupResult cleanup_pipeline(const AudioClip& clip, const CleanupConfig& config) {
    if (clip.sample_rate != kCanonicalRate || clip.channels != 1 ||
        clip.bit_depth != kCanonicalDepth) {
        throw Error(Errc::non_canonical_clip, "cleanup expects a 16 kHz mono 16-bit clip");
    }
    if (clip.samples.empty()) throw Error(Errc::all_silence, "clip has no samples");

    CleanupReport report;
    report.clipping_detected = detect_clipping(clip.samples, config.clip_run);

    std::vector<double> x(clip.samples.begin(), clip.samples.end());
    report.peak_before = dbfs(peak_abs(x));

    report.dc_offset_removed = remove_dc(x);
    highpass_zero_phase(x, config.highpass_hz, clip.sample_rate);

    const double peak = peak_abs(x);
    if (peak <= 0.0 || dbfs(peak) < config.silence_floor_dbfs) {
        throw Error(Errc::all_silence, "take contains no signal above the silence floor",
                    {{"peak_dbfs", peak > 0.0 ? dbfs(peak) : -999.0}});
    }

    const TrimBounds bounds = find_trim_bounds(x, clip.sample_rate, config);
    report.trimmed_leading_ms = 1000.0 * static_cast<double>(bounds.begin) / clip.sample_rate;
    report.trimmed_trailing_ms =
        1000.0 * static_cast<double>(x.size() - bounds.end) / clip.sample_rate;

    const double target = kFullScale * std::pow(10.0, config.target_peak_dbfs / 20.0);
    const double gain = target / peak;
    report.gain_db = 20.0 * std::log10(gain);

    CleanupResult result;
    result.clip.sample_rate = clip.sample_rate;
    result.clip.channels = 1;
    result.clip.bit_depth = kCanonicalDepth;
    result.clip.samples.reserve(bounds.end - bounds.begin);
    double out_peak = 0.0;
    for (std::size_t i = bounds.begin; i < bounds.end; ++i) {
        const double v = std::clamp(std::round(x[i] * gain), -32768.0, 32767.0);
        out_peak = std::max(out_peak, std::abs(v));
        result.clip.samples.push_back(static_cast<std::int16_t>(v));
    }
    report.peak_after = dbfs(out_peak);
    result.report = report;
    return result;
}

}  // namespace kidcorpus
