#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mtr/audio.hpp"
#include "mtr/gsm0610.hpp"

namespace mtr {

// WAV49: the WAVE container for GSM 06.10 where two 260-bit frames are
// packed into one 65-byte block, bits filling each byte LSB-first and
// without the signature nibble of the standalone frame format.

using Wav49Block = std::array<uint8_t, kWav49BlockBytes>;

Wav49Block pack_wav49_block(const gsm::FrameParams& first, const gsm::FrameParams& second);
std::pair<gsm::FrameParams, gsm::FrameParams> unpack_wav49_block(const Wav49Block& block);

// Encodes a mono 8 kHz clip to a complete WAV49 file. The input is
// zero-padded to a multiple of 320 samples; the original count is stored
// in the fact chunk. Throws UnsupportedInput otherwise.
std::vector<uint8_t> wav49_encode(const AudioClip& clip);

// Decodes the payload of a parsed WAV49 file back to PCM, truncated to
// fact_samples. Throws TruncatedBlock when the payload is not a whole
// number of 65-byte blocks.
AudioClip wav49_decode_payload(const Wav49Payload& payload);

// Convenience: parse + decode a WAV49 file image.
AudioClip wav49_decode(std::span<const uint8_t> file_bytes);

}  // namespace mtr
