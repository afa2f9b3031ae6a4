#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace mtr::gsm {

// Full-rate GSM 06.10 (RPE-LTP) speech codec, ETSI fixed-point arithmetic.
// One frame is 160 samples of 16-bit PCM at 8 kHz (20 ms) coded into 260
// bits: 8 log-area-ratio coefficients plus, per 40-sample subframe, an LTP
// lag and gain, an RPE grid position, a block amplitude and 13 pulses.

constexpr int kFrameSamples = 160;
constexpr int kSubframes = 4;
constexpr int kFrameBytes = 33;        // 260 bits + 4-bit signature
constexpr uint8_t kFrameSignature = 0xD;

using PcmFrame = std::array<int16_t, kFrameSamples>;
using FrameBytes = std::array<uint8_t, kFrameBytes>;

// The 76 quantized codec parameters of one frame.
struct FrameParams {
    std::array<int16_t, 8> larc{};                         // 6,6,5,5,4,4,3,3 bits
    std::array<int16_t, kSubframes> ltp_lag{};             // 7 bits, 40..120
    std::array<int16_t, kSubframes> ltp_gain{};            // 2 bits
    std::array<int16_t, kSubframes> grid_position{};       // 2 bits
    std::array<int16_t, kSubframes> block_amplitude{};     // 6 bits
    std::array<std::array<int16_t, 13>, kSubframes> pulses{};  // 3 bits each
};

// Encoder and decoder history. Reset state is all zeros; the two sides
// keep independent memories so one state may round-trip a stream.
struct CodecState {
    struct Encoder {
        int16_t z1 = 0;       // offset-compensation memory
        int32_t l_z2 = 0;
        int16_t mp = 0;       // pre-emphasis memory
        std::array<int16_t, 8> u{};          // analysis lattice taps
        std::array<int16_t, 8> larpp_prev{};
        std::array<int16_t, 280> dp0{};      // reconstructed residual history
    } enc;
    struct Decoder {
        int16_t nrp = 40;                    // last valid LTP lag
        std::array<int16_t, 160> drp{};      // 120 history + 40 current
        std::array<int16_t, 8> larpp_prev{};
        std::array<int16_t, 9> v{};          // synthesis lattice taps
        int16_t msr = 0;                     // de-emphasis memory
    } dec;
};

// Encodes one 160-sample frame, advancing the state.
FrameParams encode_frame_params(CodecState& state, const PcmFrame& pcm);

// Decodes one parameter frame to 160 samples, advancing the state.
PcmFrame decode_frame_params(CodecState& state, const FrameParams& params);

// 33-byte frame layout with leading 0xD signature nibble, fields packed
// MSB-first in standard order.
FrameBytes pack_frame(const FrameParams& params);

// Throws Error("BadSignature") when the first nibble is not 0xD.
FrameParams unpack_frame(const FrameBytes& bytes);

FrameBytes encode_frame(CodecState& state, const PcmFrame& pcm);
PcmFrame decode_frame(CodecState& state, const FrameBytes& bytes);

}  // namespace mtr::gsm
