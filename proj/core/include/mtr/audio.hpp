#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace mtr {

// Integer PCM audio. Samples are interleaved when channels == 2.
struct AudioClip {
    std::vector<int16_t> samples;
    int sample_rate = 8000;
    int channels = 1;

    std::size_t frame_count() const { return samples.size() / channels; }
    double duration_seconds() const {
        return static_cast<double>(frame_count()) / sample_rate;
    }
};

// Raw WAV49 payload as stored in a GSM 06.10 WAV file: a sequence of
// 65-byte blocks, each decoding to 320 samples. fact_samples is the
// original (pre-padding) sample count from the mandatory fact chunk.
struct Wav49Payload {
    std::vector<uint8_t> blocks;
    int sample_rate = 8000;
    uint32_t fact_samples = 0;
};

struct WavMetadata {
    uint16_t format_tag = 0;  // 1 = linear PCM, 0x0031 = GSM 6.10
    int channels = 0;
    int sample_rate = 0;
    int bits_per_sample = 0;
    int block_align = 0;
    uint32_t data_bytes = 0;
    std::optional<uint32_t> fact_samples;
    int trailing_chunks = 0;  // chunks after `data`, skipped but counted
};

constexpr uint16_t kFormatPcm = 0x0001;
constexpr uint16_t kFormatGsm610 = 0x0031;
constexpr int kWav49BlockBytes = 65;
constexpr int kWav49SamplesPerBlock = 320;

using ParsedWav = std::variant<AudioClip, Wav49Payload>;

// Parses a RIFF/WAVE byte stream. PCM data chunks yield an AudioClip;
// GSM 6.10 (WAV49) files yield the raw block payload for the codec layer.
// Throws Error with code MalformedRiff, UnsupportedFormat or
// InconsistentHeader.
std::pair<ParsedWav, WavMetadata> parse_wav(std::span<const uint8_t> bytes);

// Writes a canonical 44-byte-header PCM file. parse_wav(write_wav(c))
// reproduces c exactly.
std::vector<uint8_t> write_wav(const AudioClip& clip);

// Serializes a WAV49 payload as a WAVE file with format tag 0x0031,
// a 20-byte fmt chunk (samples-per-block = 320) and a fact chunk.
std::vector<uint8_t> write_wav49_container(const Wav49Payload& payload);

// Averages stereo to mono, rounding half away from zero. Mono input is
// returned unchanged. Throws UnsupportedChannelCount for channels > 2.
AudioClip downmix_to_mono(const AudioClip& clip);

// Scales every sample by `factor`, rounding half away from zero and
// saturating to the 16-bit range. Returns the scaled clip and the number
// of samples that hit the clamp.
std::pair<AudioClip, int64_t> apply_gain(const AudioClip& clip, double factor);

// Rounds half away from zero and saturates to [-32768, 32767].
int16_t quantize_sample(double value);

// Same, but counts samples whose rounded value needed the clamp.
int16_t quantize_sample_counting(double value, int64_t& clipped);

}  // namespace mtr
