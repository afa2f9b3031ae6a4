#include "mtr/resample.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "mtr/errors.hpp"

namespace mtr {

namespace {

double bessel_i0(double x) {
    // power series; converges quickly for the beta values used here
    double sum = 1.0, term = 1.0;
    for (int k = 1; k < 64; ++k) {
        double t = x / (2.0 * k);
        term *= t * t;
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

// Kaiser-windowed sinc prototype at the upsampled rate, gain `up` in the
// passband, each polyphase branch normalized to unit DC gain.
std::vector<double> design_lowpass(int taps, double cutoff, int up, double beta) {
    const int center = (taps - 1) / 2;
    std::vector<double> h(taps);
    const double i0_beta = bessel_i0(beta);
    for (int n = 0; n < taps; ++n) {
        double t = n - center;
        double sinc = t == 0.0 ? 2.0 * cutoff
                               : std::sin(2.0 * std::numbers::pi * cutoff * t) /
                                     (std::numbers::pi * t);
        double w = 2.0 * (n - center) / (taps - 1);
        double window = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - w * w))) / i0_beta;
        h[n] = sinc * window * up;
    }
    for (int phase = 0; phase < up; ++phase) {
        double sum = 0.0;
        for (int n = phase; n < taps; n += up) sum += h[n];
        if (sum != 0.0)
            for (int n = phase; n < taps; n += up) h[n] /= sum;
    }
    return h;
}

}  // namespace

AudioClip resample_by_ratio(const AudioClip& clip, int up, int down, int filter_taps,
                            double cutoff_fraction, double gain, int64_t* clipped) {
    if (clip.channels != 1)
        throw_format("UnsupportedInput", "resampling requires mono input");
    if (up <= 0 || down <= 0)
        throw_config("InvalidFactor", "resampling ratio must be positive");
    if (filter_taps < 3 || filter_taps % 2 == 0)
        throw_config("InvalidFactor", "filter_taps must be odd and positive");
    if (!(cutoff_fraction > 0.0 && cutoff_fraction <= 0.5))
        throw_config("InvalidFactor", "cutoff_fraction must be in (0, 0.5]");

    int g = std::gcd(up, down);
    up /= g;
    down /= g;
    if (up == 1 && down == 1) {
        if (gain == 1.0)
            return clip;
        AudioClip out = clip;  // pure gain, no filtering at unit ratio
        int64_t count = 0;
        for (std::size_t i = 0; i < out.samples.size(); ++i)
            out.samples[i] = quantize_sample_counting(clip.samples[i] * gain, count);
        if (clipped) *clipped += count;
        return out;
    }

    // cutoff as cycles/sample at the filter rate (input rate times `up`)
    const double cutoff = cutoff_fraction * std::min(1.0, double(up) / down) / up;
    const double beta = 5.653;  // ~60 dB Kaiser stopband
    const std::vector<double> h = design_lowpass(filter_taps, cutoff, up, beta);
    const int center = (filter_taps - 1) / 2;

    const int64_t in_len = static_cast<int64_t>(clip.samples.size());
    const int64_t out_len = (2 * in_len * up + down) / (2 * down);  // round(n*up/down)

    AudioClip out;
    out.sample_rate = clip.sample_rate;
    out.channels = 1;
    out.samples.resize(static_cast<std::size_t>(out_len));

    for (int64_t n = 0; n < out_len; ++n) {
        int64_t num = n * down + center;
        int64_t base = num / up;
        int phase = static_cast<int>(num % up);
        double acc = 0.0;
        for (int t = phase, j = 0; t < filter_taps; t += up, ++j) {
            int64_t idx = base - j;
            if (idx < 0) break;  // taps run from newest to oldest input
            if (idx < in_len) acc += h[t] * clip.samples[idx];
        }
        acc *= gain;
        if (clipped)
            out.samples[n] = quantize_sample_counting(acc, *clipped);
        else
            out.samples[n] = quantize_sample(acc);
    }
    return out;
}

AudioClip resample(const AudioClip& clip, const ResampleSpec& spec) {
    auto supported = [](int r) { return r == 8000 || r == 16000; };
    if (!supported(spec.source_rate) || !supported(spec.target_rate))
        throw_config("UnsupportedRate", "rates must be 8000 or 16000 Hz");
    if (clip.sample_rate != spec.source_rate)
        throw_config("UnsupportedRate", "clip rate " + std::to_string(clip.sample_rate) +
                                            " does not match spec source rate");
    if (spec.source_rate == spec.target_rate)
        return clip;

    AudioClip out = resample_by_ratio(clip, spec.target_rate / std::gcd(spec.target_rate, spec.source_rate),
                                      spec.source_rate / std::gcd(spec.target_rate, spec.source_rate),
                                      spec.filter_taps, spec.cutoff_fraction);
    out.sample_rate = spec.target_rate;
    return out;
}

AudioClip resample(const AudioClip& clip, int target_rate) {
    ResampleSpec spec;
    spec.source_rate = clip.sample_rate;
    spec.target_rate = target_rate;
    return resample(clip, spec);
}

}  // namespace mtr
