#include "mtr/augment.hpp"

#include <cmath>
#include <string>

#include "mtr/errors.hpp"
#include "mtr/resample.hpp"

namespace mtr {

uint64_t hash_utterance_id(std::string_view id) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (char c : id) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

uint64_t derive_stream_seed(uint64_t global_seed, std::string_view utterance_id) {
    // one SplitMix64 step over the combined value decorrelates streams of
    // neighbouring seeds and similar ids
    Rng mixer(global_seed ^ hash_utterance_id(utterance_id));
    return mixer.next();
}

double signal_energy(const AudioClip& clip) {
    if (clip.samples.empty())
        throw_format("EmptyClip", "energy of an empty clip is undefined");
    double acc = 0.0;
    for (int16_t s : clip.samples) {
        double v = s / 32768.0;
        acc += v * v;
    }
    return acc / static_cast<double>(clip.samples.size());
}

MixResult mix_noise(const AudioClip& clip, const AudioClip& noise, SnrTarget target, Rng& rng) {
    if (clip.sample_rate != noise.sample_rate)
        throw_format("RateMismatch", "signal at " + std::to_string(clip.sample_rate) +
                                         " Hz, noise at " + std::to_string(noise.sample_rate) +
                                         " Hz");
    if (clip.channels != 1 || noise.channels != 1)
        throw_format("UnsupportedInput", "noise mixing requires mono signal and noise");
    if (noise.samples.empty())
        throw_format("SilentNoise", "noise clip is empty");

    const double e_signal = signal_energy(clip);
    if (e_signal <= 0.0)
        throw_format("SilentSignal", "signal energy is zero, SNR scaling undefined");

    // noise segment: random start, looped to the utterance duration
    const uint64_t offset = rng.next_below(noise.samples.size());
    std::vector<double> segment(clip.samples.size());
    double e_segment = 0.0;
    for (std::size_t i = 0; i < segment.size(); ++i) {
        double v = noise.samples[(offset + i) % noise.samples.size()] / 32768.0;
        segment[i] = v;
        e_segment += v * v;
    }
    if (!segment.empty()) e_segment /= static_cast<double>(segment.size());
    if (e_segment <= 0.0)
        throw_format("SilentNoise", "selected noise segment is silent, SNR scaling undefined");

    const double alpha = std::sqrt(e_signal / (e_segment * std::pow(10.0, target.snr_db / 10.0)));

    MixResult result;
    result.noise_offset = offset;
    result.noise_scale = alpha;
    result.clip.sample_rate = clip.sample_rate;
    result.clip.channels = 1;
    result.clip.samples.resize(clip.samples.size());
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        double v = clip.samples[i] + alpha * segment[i] * 32768.0;
        result.clip.samples[i] = quantize_sample_counting(v, result.clipped);
    }
    return result;
}

namespace {

// best rational approximation by continued fractions
std::pair<int64_t, int64_t> to_fraction(double x, int64_t max_den) {
    int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double v = x;
    for (int i = 0; i < 64; ++i) {
        int64_t a = static_cast<int64_t>(std::floor(v));
        int64_t p2 = a * p1 + p0;
        int64_t q2 = a * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        double frac = v - static_cast<double>(a);
        if (frac < 1e-12 || std::abs(static_cast<double>(p1) / q1 - x) < 1e-12) break;
        v = 1.0 / frac;
    }
    return {p1, q1};
}

}  // namespace

AudioClip perturb_speed(const AudioClip& clip, double factor) {
    if (!(factor > 0.0))
        throw_config("InvalidFactor", "speed factor must be positive");
    if (clip.channels != 1)
        throw_format("UnsupportedInput", "speed perturbation requires mono input");

    auto [num, den] = to_fraction(factor, 512);
    if (num <= 0 || den <= 0)
        throw_config("InvalidFactor", "speed factor has no usable rational form");
    // playing faster = resampling to fewer samples: ratio den/num
    return resample_by_ratio(clip, static_cast<int>(den), static_cast<int>(num));
}

GainResult perturb_volume(const AudioClip& clip, double factor) {
    if (!(factor > 0.0))
        throw_config("InvalidFactor", "volume factor must be positive");
    auto [scaled, clipped] = apply_gain(clip, factor);
    return {std::move(scaled), clipped};
}

GainResult perturb_speed_volume(const AudioClip& clip, double speed_factor,
                                double volume_factor) {
    if (!(speed_factor > 0.0) || !(volume_factor > 0.0))
        throw_config("InvalidFactor", "speed and volume factors must be positive");
    if (clip.channels != 1)
        throw_format("UnsupportedInput", "speed perturbation requires mono input");

    auto [num, den] = to_fraction(speed_factor, 512);
    if (num <= 0 || den <= 0)
        throw_config("InvalidFactor", "speed factor has no usable rational form");

    GainResult result;
    result.clip = resample_by_ratio(clip, static_cast<int>(den), static_cast<int>(num), 127,
                                    0.47, volume_factor, &result.clipped);
    return result;
}

}  // namespace mtr
