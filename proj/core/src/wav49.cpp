#include "mtr/wav49.hpp"

#include <algorithm>
#include <string>
#include <variant>

#include "mtr/bitio.hpp"
#include "mtr/errors.hpp"

namespace mtr {

namespace {

void write_frame_bits(LsbBitWriter& w, const gsm::FrameParams& p) {
    static constexpr int kLarBits[8] = {6, 6, 5, 5, 4, 4, 3, 3};
    for (int i = 0; i < 8; ++i)
        w.put(static_cast<uint32_t>(p.larc[i]), kLarBits[i]);
    for (int j = 0; j < gsm::kSubframes; ++j) {
        w.put(static_cast<uint32_t>(p.ltp_lag[j]), 7);
        w.put(static_cast<uint32_t>(p.ltp_gain[j]), 2);
        w.put(static_cast<uint32_t>(p.grid_position[j]), 2);
        w.put(static_cast<uint32_t>(p.block_amplitude[j]), 6);
        for (int i = 0; i < 13; ++i)
            w.put(static_cast<uint32_t>(p.pulses[j][i]), 3);
    }
}

gsm::FrameParams read_frame_bits(LsbBitReader& r) {
    static constexpr int kLarBits[8] = {6, 6, 5, 5, 4, 4, 3, 3};
    gsm::FrameParams p;
    for (int i = 0; i < 8; ++i)
        p.larc[i] = static_cast<int16_t>(r.get(kLarBits[i]));
    for (int j = 0; j < gsm::kSubframes; ++j) {
        p.ltp_lag[j] = static_cast<int16_t>(r.get(7));
        p.ltp_gain[j] = static_cast<int16_t>(r.get(2));
        p.grid_position[j] = static_cast<int16_t>(r.get(2));
        p.block_amplitude[j] = static_cast<int16_t>(r.get(6));
        for (int i = 0; i < 13; ++i)
            p.pulses[j][i] = static_cast<int16_t>(r.get(3));
    }
    return p;
}

}  // namespace

Wav49Block pack_wav49_block(const gsm::FrameParams& first, const gsm::FrameParams& second) {
    LsbBitWriter w;
    write_frame_bits(w, first);
    write_frame_bits(w, second);
    Wav49Block out{};
    std::copy(w.bytes().begin(), w.bytes().end(), out.begin());
    return out;
}

std::pair<gsm::FrameParams, gsm::FrameParams> unpack_wav49_block(const Wav49Block& block) {
    LsbBitReader r(block);
    gsm::FrameParams a = read_frame_bits(r);
    gsm::FrameParams b = read_frame_bits(r);
    return {a, b};
}

std::vector<uint8_t> wav49_encode(const AudioClip& clip) {
    if (clip.channels != 1)
        throw_format("UnsupportedInput", "WAV49 encoding requires mono input");
    if (clip.sample_rate != 8000)
        throw_format("UnsupportedInput", "WAV49 encoding requires 8 kHz input, got " +
                                             std::to_string(clip.sample_rate));

    const uint32_t original = static_cast<uint32_t>(clip.samples.size());
    const std::size_t blocks =
        (clip.samples.size() + kWav49SamplesPerBlock - 1) / kWav49SamplesPerBlock;

    Wav49Payload payload;
    payload.sample_rate = clip.sample_rate;
    payload.fact_samples = original;
    payload.blocks.reserve(blocks * kWav49BlockBytes);

    gsm::CodecState state;
    gsm::PcmFrame frame{};
    for (std::size_t b = 0; b < blocks; ++b) {
        gsm::FrameParams half[2];
        for (int h = 0; h < 2; ++h) {
            frame.fill(0);
            std::size_t begin = b * kWav49SamplesPerBlock + h * gsm::kFrameSamples;
            if (begin < clip.samples.size()) {
                std::size_t n = std::min<std::size_t>(gsm::kFrameSamples,
                                                      clip.samples.size() - begin);
                std::copy_n(clip.samples.begin() + begin, n, frame.begin());
            }
            half[h] = gsm::encode_frame_params(state, frame);
        }
        Wav49Block block = pack_wav49_block(half[0], half[1]);
        payload.blocks.insert(payload.blocks.end(), block.begin(), block.end());
    }

    return write_wav49_container(payload);
}

AudioClip wav49_decode_payload(const Wav49Payload& payload) {
    if (payload.blocks.size() % kWav49BlockBytes != 0)
        throw_format("TruncatedBlock",
                     "payload of " + std::to_string(payload.blocks.size()) +
                         " bytes is not a whole number of 65-byte blocks");

    const std::size_t blocks = payload.blocks.size() / kWav49BlockBytes;
    AudioClip clip;
    clip.sample_rate = payload.sample_rate;
    clip.channels = 1;
    clip.samples.reserve(blocks * kWav49SamplesPerBlock);

    gsm::CodecState state;
    for (std::size_t b = 0; b < blocks; ++b) {
        Wav49Block block;
        std::copy_n(payload.blocks.begin() + b * kWav49BlockBytes, kWav49BlockBytes,
                    block.begin());
        auto [first, second] = unpack_wav49_block(block);
        for (const auto* params : {&first, &second}) {
            gsm::PcmFrame pcm = gsm::decode_frame_params(state, *params);
            clip.samples.insert(clip.samples.end(), pcm.begin(), pcm.end());
        }
    }

    if (clip.samples.size() > payload.fact_samples)
        clip.samples.resize(payload.fact_samples);
    return clip;
}

AudioClip wav49_decode(std::span<const uint8_t> file_bytes) {
    auto [parsed, meta] = parse_wav(file_bytes);
    if (!std::holds_alternative<Wav49Payload>(parsed))
        throw_format("UnsupportedInput", "file is not WAV49 (GSM 6.10) encoded");
    return wav49_decode_payload(std::get<Wav49Payload>(parsed));
}

}  // namespace mtr
