#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mtr/audio.hpp"

namespace mtr::test {

inline AudioClip make_tone(double freq_hz, int sample_rate, std::size_t samples,
                           double amplitude = 8230.0 /* ~-12 dBFS */) {
    AudioClip clip;
    clip.sample_rate = sample_rate;
    clip.channels = 1;
    clip.samples.resize(samples);
    for (std::size_t i = 0; i < samples; ++i)
        clip.samples[i] = static_cast<int16_t>(std::lround(
            amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * i / sample_rate)));
    return clip;
}

inline AudioClip make_noise_clip(uint32_t seed, int sample_rate, std::size_t samples,
                                 int16_t amplitude = 8000) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> dist(-amplitude, amplitude);
    AudioClip clip;
    clip.sample_rate = sample_rate;
    clip.channels = 1;
    clip.samples.resize(samples);
    for (auto& s : clip.samples) s = static_cast<int16_t>(dist(rng));
    return clip;
}

// speech-ish test signal: a few gliding tones plus noise, useful where a
// single sine would be degenerate for LPC
inline AudioClip make_speechlike(uint32_t seed, int sample_rate, std::size_t samples) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    AudioClip clip;
    clip.sample_rate = sample_rate;
    clip.channels = 1;
    clip.samples.resize(samples);
    double phase1 = 0.0, phase2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        double t = static_cast<double>(i) / sample_rate;
        double f1 = 180.0 + 60.0 * std::sin(2.0 * std::numbers::pi * 1.3 * t);
        double f2 = 900.0 + 350.0 * std::sin(2.0 * std::numbers::pi * 0.7 * t + 1.0);
        phase1 += 2.0 * std::numbers::pi * f1 / sample_rate;
        phase2 += 2.0 * std::numbers::pi * f2 / sample_rate;
        double envelope = 0.55 + 0.45 * std::sin(2.0 * std::numbers::pi * 2.1 * t);
        double v = envelope * (6000.0 * std::sin(phase1) + 2500.0 * std::sin(phase2)) +
                   400.0 * jitter(rng);
        clip.samples[i] = static_cast<int16_t>(std::lround(v));
    }
    return clip;
}

inline double correlation(std::span<const int16_t> a, std::span<const int16_t> b) {
    std::size_t n = std::min(a.size(), b.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    if (da == 0.0 || db == 0.0) return 0.0;
    return num / std::sqrt(da * db);
}

// best correlation over small alignment shifts, for codecs with delay
inline double correlation_with_lag(std::span<const int16_t> a, std::span<const int16_t> b,
                                   int max_lag) {
    double best = -1.0;
    for (int lag = -max_lag; lag <= max_lag; ++lag) {
        std::span<const int16_t> sa = a, sb = b;
        if (lag > 0)
            sa = a.subspan(static_cast<std::size_t>(lag));
        else if (lag < 0)
            sb = b.subspan(static_cast<std::size_t>(-lag));
        std::size_t n = std::min(sa.size(), sb.size());
        best = std::max(best, correlation(sa.first(n), sb.first(n)));
    }
    return best;
}

// Goertzel-style single-bin magnitude of a Hann-windowed segment, as an
// independent spectral meter for resampler checks.
inline double tone_magnitude_db(std::span<const int16_t> x, double freq_hz, int sample_rate) {
    const std::size_t n = x.size();
    double re = 0.0, im = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
        double phi = 2.0 * std::numbers::pi * freq_hz * i / sample_rate;
        re += w * x[i] * std::cos(phi);
        im -= w * x[i] * std::sin(phi);
        norm += w;
    }
    double mag = 2.0 * std::sqrt(re * re + im * im) / norm;
    return 20.0 * std::log10(std::max(mag, 1e-12));
}

// total energy (linear) above a cutoff, via plain DFT over bins
inline double energy_fraction_above(std::span<const int16_t> x, double cutoff_hz,
                                    int sample_rate) {
    const std::size_t n = x.size();
    double total = 0.0, above = 0.0;
    // coarse bin spacing is fine for a leakage check; Hann window first
    std::vector<double> windowed(n);
    for (std::size_t i = 0; i < n; ++i) {
        double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
        windowed[i] = w * x[i];
    }
    const std::size_t bins = 512;
    for (std::size_t k = 0; k < bins; ++k) {
        double freq = 0.5 * sample_rate * (k + 0.5) / bins;
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double phi = 2.0 * std::numbers::pi * freq * i / sample_rate;
            re += windowed[i] * std::cos(phi);
            im -= windowed[i] * std::sin(phi);
        }
        double p = re * re + im * im;
        total += p;
        if (freq > cutoff_hz) above += p;
    }
    return total > 0.0 ? above / total : 0.0;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        root_ = std::filesystem::temp_directory_path() /
                ("mtr-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter_++));
        std::filesystem::create_directories(root_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(root_, ec);
    }
    const std::filesystem::path& path() const { return root_; }

private:
    static inline int counter_ = 0;
    std::filesystem::path root_;
};

}  // namespace mtr::test
