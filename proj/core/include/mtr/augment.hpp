#pragma once

#include <cstdint>
#include <string_view>

#include "mtr/audio.hpp"

namespace mtr {

// SplitMix64. Identical seeds give identical draw sequences on every
// platform, which is what makes utterance-level parallelism safe: each
// utterance gets its own stream derived from (global seed, utterance id).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, bound), bound > 0; 128-bit multiply keeps this exact
    // and platform-independent
    uint64_t next_below(uint64_t bound) {
        return static_cast<uint64_t>(
            (static_cast<__uint128_t>(next()) * bound) >> 64);
    }

    double next_double() { return (next() >> 11) * 0x1.0p-53; }

    bool next_bool() { return next() >> 63; }

private:
    uint64_t state_;
};

uint64_t hash_utterance_id(std::string_view id);  // FNV-1a 64
uint64_t derive_stream_seed(uint64_t global_seed, std::string_view utterance_id);

struct SnrTarget {
    double snr_db = 5.0;
};

// Mean-square energy per sample, full-scale normalized:
// E = (1/N) * sum((s/32768)^2). Throws EmptyClip.
double signal_energy(const AudioClip& clip);

struct MixResult {
    AudioClip clip;
    int64_t clipped = 0;
    uint64_t noise_offset = 0;  // drawn start position into the noise clip
    double noise_scale = 0.0;   // applied alpha
};

// Adds `noise` to `clip` at the target SNR. The noise is read from a
// random start offset and looped to cover the whole utterance; it is
// scaled so that 10*log10(E_signal / E_scaled_noise) equals the target
// before clamping. Throws SilentSignal, SilentNoise or RateMismatch.
MixResult mix_noise(const AudioClip& clip, const AudioClip& noise, SnrTarget target, Rng& rng);

// Resampling-based speed change: pitch shifts with tempo, the rate label
// stays. Output length is round(n / factor) within +-2 samples.
AudioClip perturb_speed(const AudioClip& clip, double factor);

struct GainResult {
    AudioClip clip;
    int64_t clipped = 0;
};

GainResult perturb_volume(const AudioClip& clip, double factor);

// Speed and volume together: the gain folds into the resampler's single
// final rounding, so swapping the two factors changes nothing but that
// rounding (the orders stay within 1 LSB of each other).
GainResult perturb_speed_volume(const AudioClip& clip, double speed_factor,
                                double volume_factor);

}  // namespace mtr
