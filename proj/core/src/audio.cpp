#include "mtr/audio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <string>

#include "mtr/errors.hpp"

namespace mtr {

namespace {

// Bounds-checked little-endian reader. Every access is validated against
// the buffer, so arbitrary input can never read out of range.
class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

    uint32_t u32() {
        need(4);
        uint32_t v = static_cast<uint32_t>(data_[pos_]) |
                     static_cast<uint32_t>(data_[pos_ + 1]) << 8 |
                     static_cast<uint32_t>(data_[pos_ + 2]) << 16 |
                     static_cast<uint32_t>(data_[pos_ + 3]) << 24;
        pos_ += 4;
        return v;
    }

    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(data_[pos_] | data_[pos_ + 1] << 8);
        pos_ += 2;
        return v;
    }

    std::span<const uint8_t> bytes(std::size_t n) {
        need(n);
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    void skip(std::size_t n) { need(n); pos_ += n; }

    bool tag(const char* fourcc) {
        need(4);
        bool ok = std::memcmp(data_.data() + pos_, fourcc, 4) == 0;
        pos_ += 4;
        return ok;
    }

    std::string fourcc() {
        auto s = bytes(4);
        return std::string(reinterpret_cast<const char*>(s.data()), 4);
    }

private:
    void need(std::size_t n) const {
        if (n > data_.size() - pos_)
            throw_format("MalformedRiff", "truncated input at byte " + std::to_string(pos_));
    }

    std::span<const uint8_t> data_;
    std::size_t pos_ = 0;
};

class ByteWriter {
public:
    void u32(uint32_t v) {
        out_.push_back(static_cast<uint8_t>(v));
        out_.push_back(static_cast<uint8_t>(v >> 8));
        out_.push_back(static_cast<uint8_t>(v >> 16));
        out_.push_back(static_cast<uint8_t>(v >> 24));
    }
    void u16(uint16_t v) {
        out_.push_back(static_cast<uint8_t>(v));
        out_.push_back(static_cast<uint8_t>(v >> 8));
    }
    void tag(const char* fourcc) {
        out_.insert(out_.end(), fourcc, fourcc + 4);
    }
    void bytes(std::span<const uint8_t> b) {
        out_.insert(out_.end(), b.begin(), b.end());
    }
    std::vector<uint8_t> take() { return std::move(out_); }

private:
    std::vector<uint8_t> out_;
};

struct FmtChunk {
    uint16_t format_tag = 0;
    uint16_t channels = 0;
    uint32_t sample_rate = 0;
    uint16_t block_align = 0;
    uint16_t bits_per_sample = 0;
    uint16_t samples_per_block = 0;  // GSM extension field
};

FmtChunk parse_fmt(ByteReader& r, uint32_t size) {
    if (size < 16)
        throw_format("MalformedRiff", "fmt chunk smaller than 16 bytes");
    FmtChunk f;
    f.format_tag = r.u16();
    f.channels = r.u16();
    f.sample_rate = r.u32();
    r.u32();  // avg bytes/sec, recomputed on write
    f.block_align = r.u16();
    f.bits_per_sample = r.u16();
    uint32_t consumed = 16;
    if (size >= 18) {
        uint16_t cb = r.u16();
        consumed += 2;
        if (cb >= 2 && size >= 20) {
            f.samples_per_block = r.u16();
            consumed += 2;
        }
    }
    r.skip(size - consumed);
    return f;
}

}  // namespace

int16_t quantize_sample(double value) {
    double rounded = value >= 0.0 ? std::floor(value + 0.5) : std::ceil(value - 0.5);
    if (rounded > 32767.0) return 32767;
    if (rounded < -32768.0) return -32768;
    return static_cast<int16_t>(rounded);
}

int16_t quantize_sample_counting(double value, int64_t& clipped) {
    double rounded = value >= 0.0 ? std::floor(value + 0.5) : std::ceil(value - 0.5);
    if (rounded > 32767.0) {
        ++clipped;
        return 32767;
    }
    if (rounded < -32768.0) {
        ++clipped;
        return -32768;
    }
    return static_cast<int16_t>(rounded);
}

std::pair<ParsedWav, WavMetadata> parse_wav(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    if (!r.tag("RIFF"))
        throw_format("MalformedRiff", "missing RIFF magic");
    uint32_t riff_size = r.u32();
    if (riff_size + 8u > bytes.size() && riff_size != 0)
        throw_format("InconsistentHeader",
                     "RIFF size " + std::to_string(riff_size) + " exceeds file length");
    if (!r.tag("WAVE"))
        throw_format("MalformedRiff", "missing WAVE form type");

    std::optional<FmtChunk> fmt;
    std::optional<uint32_t> fact_samples;
    std::span<const uint8_t> data;
    bool have_data = false;
    int trailing = 0;

    while (r.remaining() >= 8) {
        std::string id = r.fourcc();
        uint32_t size = r.u32();
        if (size > r.remaining())
            throw_format("InconsistentHeader",
                         "chunk '" + id + "' claims " + std::to_string(size) +
                             " bytes but only " + std::to_string(r.remaining()) + " remain");
        if (have_data) {
            r.skip(size);
            if ((size & 1) && r.remaining() > 0) r.skip(1);
            ++trailing;
            continue;
        }
        if (id == "fmt ") {
            fmt = parse_fmt(r, size);
        } else if (id == "fact") {
            if (size < 4)
                throw_format("MalformedRiff", "fact chunk smaller than 4 bytes");
            ByteReader fr(r.bytes(size));
            fact_samples = fr.u32();
        } else if (id == "data") {
            data = r.bytes(size);
            have_data = true;
        } else {
            r.skip(size);  // LIST, cue, etc.
        }
        if ((size & 1) && r.remaining() > 0) r.skip(1);  // chunk padding
    }

    if (!fmt)
        throw_format("MalformedRiff", "no fmt chunk before end of file");
    if (!have_data)
        throw_format("MalformedRiff", "no data chunk before end of file");

    WavMetadata meta;
    meta.format_tag = fmt->format_tag;
    meta.channels = fmt->channels;
    meta.sample_rate = static_cast<int>(fmt->sample_rate);
    meta.bits_per_sample = fmt->bits_per_sample;
    meta.block_align = fmt->block_align;
    meta.data_bytes = static_cast<uint32_t>(data.size());
    meta.fact_samples = fact_samples;
    meta.trailing_chunks = trailing;

    if (fmt->sample_rate == 0)
        throw_format("MalformedRiff", "zero sample rate");

    if (fmt->format_tag == kFormatPcm) {
        if (fmt->bits_per_sample != 16)
            throw_format("UnsupportedFormat",
                         std::to_string(fmt->bits_per_sample) + "-bit PCM not supported");
        if (fmt->channels != 1 && fmt->channels != 2)
            throw_format("UnsupportedFormat",
                         std::to_string(fmt->channels) + " channels not supported");
        if (fmt->block_align != fmt->channels * 2)
            throw_format("InconsistentHeader", "PCM block align disagrees with channel count");
        if (data.size() % (fmt->channels * 2) != 0)
            throw_format("InconsistentHeader", "data size is not a whole number of frames");
        AudioClip clip;
        clip.sample_rate = static_cast<int>(fmt->sample_rate);
        clip.channels = fmt->channels;
        clip.samples.resize(data.size() / 2);
        for (std::size_t i = 0; i < clip.samples.size(); ++i)
            clip.samples[i] = static_cast<int16_t>(data[2 * i] | data[2 * i + 1] << 8);
        return {std::move(clip), meta};
    }

    if (fmt->format_tag == kFormatGsm610) {
        if (fmt->channels != 1)
            throw_format("UnsupportedFormat", "multichannel GSM 6.10 not supported");
        if (fmt->block_align != kWav49BlockBytes)
            throw_format("InconsistentHeader", "GSM 6.10 block align must be 65");
        if (!fact_samples)
            throw_format("MalformedRiff", "GSM 6.10 file missing fact chunk");
        Wav49Payload payload;
        payload.sample_rate = static_cast<int>(fmt->sample_rate);
        payload.fact_samples = *fact_samples;
        payload.blocks.assign(data.begin(), data.end());
        return {std::move(payload), meta};
    }

    throw_format("UnsupportedFormat",
                 "format tag 0x" + std::to_string(fmt->format_tag) + " not supported");
}

std::vector<uint8_t> write_wav(const AudioClip& clip) {
    const uint32_t data_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
    ByteWriter w;
    w.tag("RIFF");
    w.u32(36 + data_bytes);
    w.tag("WAVE");
    w.tag("fmt ");
    w.u32(16);
    w.u16(kFormatPcm);
    w.u16(static_cast<uint16_t>(clip.channels));
    w.u32(static_cast<uint32_t>(clip.sample_rate));
    w.u32(static_cast<uint32_t>(clip.sample_rate * clip.channels * 2));
    w.u16(static_cast<uint16_t>(clip.channels * 2));
    w.u16(16);
    w.tag("data");
    w.u32(data_bytes);
    for (int16_t s : clip.samples)
        w.u16(static_cast<uint16_t>(s));
    return w.take();
}

std::vector<uint8_t> write_wav49_container(const Wav49Payload& payload) {
    const uint32_t data_bytes = static_cast<uint32_t>(payload.blocks.size());
    const uint32_t avg_rate =
        static_cast<uint32_t>(static_cast<uint64_t>(payload.sample_rate) * kWav49BlockBytes /
                              kWav49SamplesPerBlock);
    ByteWriter w;
    w.tag("RIFF");
    // fmt(8+20) + fact(8+4) + data header(8) + payload, after "WAVE"
    w.u32(4 + 28 + 12 + 8 + data_bytes + (data_bytes & 1));
    w.tag("WAVE");
    w.tag("fmt ");
    w.u32(20);
    w.u16(kFormatGsm610);
    w.u16(1);
    w.u32(static_cast<uint32_t>(payload.sample_rate));
    w.u32(avg_rate);
    w.u16(kWav49BlockBytes);
    w.u16(0);  // bits per sample: not meaningful for GSM
    w.u16(2);  // cbSize
    w.u16(kWav49SamplesPerBlock);
    w.tag("fact");
    w.u32(4);
    w.u32(payload.fact_samples);
    w.tag("data");
    w.u32(data_bytes);
    w.bytes(payload.blocks);
    if (data_bytes & 1)
        w.bytes(std::array<uint8_t, 1>{0});
    return w.take();
}

AudioClip downmix_to_mono(const AudioClip& clip) {
    if (clip.channels == 1)
        return clip;
    if (clip.channels != 2)
        throw_format("UnsupportedChannelCount",
                     std::to_string(clip.channels) + " channels, expected 1 or 2");
    AudioClip out;
    out.sample_rate = clip.sample_rate;
    out.channels = 1;
    out.samples.resize(clip.samples.size() / 2);
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        int sum = clip.samples[2 * i] + clip.samples[2 * i + 1];
        // (L+R)/2, half away from zero; sum fits in int so no overflow
        int avg = sum >= 0 ? (sum + 1) / 2 : (sum - 1) / 2;
        out.samples[i] = static_cast<int16_t>(std::clamp(avg, -32768, 32767));
    }
    return out;
}

std::pair<AudioClip, int64_t> apply_gain(const AudioClip& clip, double factor) {
    if (!(factor > 0.0))
        throw_config("InvalidFactor", "gain factor must be positive");
    AudioClip out;
    out.sample_rate = clip.sample_rate;
    out.channels = clip.channels;
    out.samples.resize(clip.samples.size());
    int64_t clipped = 0;
    for (std::size_t i = 0; i < clip.samples.size(); ++i)
        out.samples[i] = quantize_sample_counting(clip.samples[i] * factor, clipped);
    return {std::move(out), clipped};
}

}  // namespace mtr
