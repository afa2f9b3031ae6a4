#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mtr {

// Bit-level packing over byte buffers. Two orders are needed: the classic
// GSM frame format fills bytes from the most significant bit down, while
// WAV49 blocks fill bytes from the least significant bit up.

class MsbBitWriter {
public:
    void put(uint32_t value, int bits) {
        for (int i = bits - 1; i >= 0; --i)
            put_bit((value >> i) & 1u);
    }
    void put_bit(uint32_t bit) {
        if (fill_ == 0) {
            out_.push_back(0);
            fill_ = 8;
        }
        --fill_;
        if (bit) out_.back() |= static_cast<uint8_t>(1u << fill_);
    }
    std::size_t bit_count() const { return out_.size() * 8 - fill_; }
    const std::vector<uint8_t>& bytes() const { return out_; }

private:
    std::vector<uint8_t> out_;
    int fill_ = 0;  // unused bits remaining in the last byte
};

class MsbBitReader {
public:
    explicit MsbBitReader(std::span<const uint8_t> data) : data_(data) {}

    uint32_t get(int bits) {
        uint32_t v = 0;
        for (int i = 0; i < bits; ++i)
            v = v << 1 | get_bit();
        return v;
    }
    uint32_t get_bit() {
        uint32_t bit = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u;
        ++pos_;
        return bit;
    }
    std::size_t bits_left() const { return data_.size() * 8 - pos_; }

private:
    std::span<const uint8_t> data_;
    std::size_t pos_ = 0;
};

class LsbBitWriter {
public:
    void put(uint32_t value, int bits) {
        for (int i = 0; i < bits; ++i)
            put_bit((value >> i) & 1u);
    }
    void put_bit(uint32_t bit) {
        if (next_ == 0) out_.push_back(0);
        if (bit) out_.back() |= static_cast<uint8_t>(1u << next_);
        next_ = (next_ + 1) & 7;
    }
    std::size_t bit_count() const {
        return next_ == 0 ? out_.size() * 8 : (out_.size() - 1) * 8 + next_;
    }
    const std::vector<uint8_t>& bytes() const { return out_; }

private:
    std::vector<uint8_t> out_;
    int next_ = 0;  // next bit position within the last byte
};

class LsbBitReader {
public:
    explicit LsbBitReader(std::span<const uint8_t> data) : data_(data) {}

    uint32_t get(int bits) {
        uint32_t v = 0;
        for (int i = 0; i < bits; ++i)
            v |= get_bit() << i;
        return v;
    }
    uint32_t get_bit() {
        uint32_t bit = (data_[pos_ >> 3] >> (pos_ & 7)) & 1u;
        ++pos_;
        return bit;
    }
    std::size_t bits_left() const { return data_.size() * 8 - pos_; }

private:
    std::span<const uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace mtr
