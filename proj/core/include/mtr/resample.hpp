#pragma once

#include "mtr/audio.hpp"

namespace mtr {

// Band-limited rate conversion between 8 kHz and 16 kHz. Downsampling
// discards the upper octave; upsampling inserts no energy above the
// source Nyquist, so a 16 kHz clip that went through 8 kHz stays
// band-limited to 4 kHz.
struct ResampleSpec {
    int source_rate = 16000;
    int target_rate = 8000;
    int filter_taps = 127;          // odd; prototype length at the filter rate
    double cutoff_fraction = 0.47;  // of min(source, target), 0.5 = Nyquist
};

// Converts a mono clip to target_rate (8000 or 16000). Same-rate calls
// return the input unchanged. Output length is round(n * target / source).
AudioClip resample(const AudioClip& clip, int target_rate);
AudioClip resample(const AudioClip& clip, const ResampleSpec& spec);

// Polyphase resampling by the exact rational up/down. The sample-rate
// label of the result is kept from the input; callers that change the
// nominal rate (resample) or keep it (speed perturbation) decide.
// `gain` folds a linear scale into the single final rounding; `clipped`
// (when non-null) receives the number of samples that hit the clamp.
AudioClip resample_by_ratio(const AudioClip& clip, int up, int down, int filter_taps = 127,
                            double cutoff_fraction = 0.47, double gain = 1.0,
                            int64_t* clipped = nullptr);

}  // namespace mtr
