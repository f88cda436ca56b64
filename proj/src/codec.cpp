#include "irswarm/codec.hpp"

#include <cmath>

#include <fmt/format.h>

#include "irswarm/error.hpp"

namespace irswarm::codec {

namespace {

constexpr int kTypeShift = 32;
constexpr int kSenderShift = 24;
constexpr int kTargetShift = 16;
constexpr int kPayloadShift = 8;
constexpr int kPreambleShift = 34;

constexpr std::uint8_t kTypeBeacon = 0b00;
constexpr std::uint8_t kTypeHeading = 0b01;

std::uint8_t crc8_step(std::uint8_t crc, std::uint8_t byte) noexcept {
    crc ^= byte;
    for (int i = 0; i < 8; ++i) {
        crc = (crc & 0x80) ? static_cast<std::uint8_t>((crc << 1) ^ 0x07)
                           : static_cast<std::uint8_t>(crc << 1);
    }
    return crc;
}

// type..payload as a 32-bit word; the top six bits are the zero pad.
std::uint8_t crc_of_fields(std::uint32_t fields) noexcept {
    const std::uint8_t bytes[4] = {
        static_cast<std::uint8_t>(fields >> 24), static_cast<std::uint8_t>(fields >> 16),
        static_cast<std::uint8_t>(fields >> 8), static_cast<std::uint8_t>(fields)};
    return crc8_bytes(bytes);
}

}  // namespace

RobotId::RobotId(int value) {
    require(value >= 0 && value < kBroadcast, "robot id must lie in 0..254");
    value_ = static_cast<std::uint8_t>(value);
}

RobotId sender_of(const Frame& frame) noexcept {
    return std::visit([](const auto& f) { return f.sender; }, frame);
}

Codeword Codeword::from_bits(std::span<const std::uint8_t> bits) {
    require(bits.size() == kCodewordBits, "codeword must be exactly 42 bits");
    std::uint64_t raw = 0;
    for (auto b : bits) {
        require(b <= 1, "codeword bits must be 0 or 1");
        raw = (raw << 1) | b;
    }
    return from_raw(raw);
}

bool Codeword::bit(int index) const {
    require(index >= 0 && index < kCodewordBits, "bit index out of range");
    return (raw_ >> (kCodewordBits - 1 - index)) & 1U;
}

Codeword Codeword::with_bit_flipped(int index) const {
    require(index >= 0 && index < kCodewordBits, "bit index out of range");
    return from_raw(raw_ ^ (std::uint64_t{1} << (kCodewordBits - 1 - index)));
}

std::vector<std::uint8_t> Codeword::bits() const {
    std::vector<std::uint8_t> out(kCodewordBits);
    for (int i = 0; i < kCodewordBits; ++i) {
        out[i] = static_cast<std::uint8_t>((raw_ >> (kCodewordBits - 1 - i)) & 1U);
    }
    return out;
}

std::string Codeword::to_string() const {
    std::string s(kCodewordBits, '0');
    for (int i = 0; i < kCodewordBits; ++i) {
        if ((raw_ >> (kCodewordBits - 1 - i)) & 1U) s[i] = '1';
    }
    return s;
}

const char* to_string(DecodeFailure failure) noexcept {
    switch (failure) {
        case DecodeFailure::BadPreamble: return "bad-preamble";
        case DecodeFailure::BadCrc: return "bad-crc";
        case DecodeFailure::BadType: return "bad-type";
    }
    return "unknown";
}

std::uint8_t crc8(std::span<const std::uint8_t> bits) {
    require(bits.size() % 8 == 0, "crc8 payload must be byte aligned");
    std::uint8_t crc = 0;
    for (std::size_t i = 0; i < bits.size(); i += 8) {
        std::uint8_t byte = 0;
        for (std::size_t j = 0; j < 8; ++j) {
            require(bits[i + j] <= 1, "crc8 payload bits must be 0 or 1");
            byte = static_cast<std::uint8_t>((byte << 1) | bits[i + j]);
        }
        crc = crc8_step(crc, byte);
    }
    return crc;
}

std::uint8_t crc8_bytes(std::span<const std::uint8_t> bytes) noexcept {
    std::uint8_t crc = 0;
    for (auto b : bytes) crc = crc8_step(crc, b);
    return crc;
}

std::uint8_t quantize_heading(double theta_deg) {
    require(theta_deg >= 0.0 && theta_deg < 360.0, "heading must lie in [0, 360)");
    const auto q = static_cast<long>(std::lround(theta_deg * 256.0 / 360.0));
    return static_cast<std::uint8_t>(q % 256);
}

double dequantize_heading(int q) {
    require(q >= 0 && q <= 255, "quantized heading must lie in 0..255");
    return q * 360.0 / 256.0;
}

Codeword encode_frame(const Frame& frame) {
    std::uint32_t type = 0;
    std::uint32_t sender = 0;
    std::uint32_t target = kBroadcast;
    std::uint32_t payload = 0;
    if (const auto* b = std::get_if<Beacon>(&frame)) {
        type = kTypeBeacon;
        sender = b->sender.value();
    } else {
        const auto& h = std::get<Heading>(frame);
        type = kTypeHeading;
        sender = h.sender.value();
        target = h.target;
        payload = h.heading_q;
    }
    const std::uint32_t fields =
        (type << 24) | (sender << 16) | (target << 8) | payload;
    const std::uint64_t raw = (std::uint64_t{kPreamble} << kPreambleShift) |
                              (std::uint64_t{fields} << kPayloadShift) | crc_of_fields(fields);
    return Codeword::from_raw(raw);
}

DecodeResult decode_frame(Codeword codeword) noexcept {
    const std::uint64_t raw = codeword.raw();
    if (((raw >> kPreambleShift) & 0xFF) != kPreamble) return DecodeFailure::BadPreamble;

    const auto fields = static_cast<std::uint32_t>((raw >> kPayloadShift) & 0x3FFFFFF);
    if (crc_of_fields(fields) != (raw & 0xFF)) return DecodeFailure::BadCrc;

    const auto type = static_cast<std::uint8_t>((raw >> kTypeShift) & 0b11);
    const auto sender = static_cast<std::uint8_t>(raw >> kSenderShift);
    const auto target = static_cast<std::uint8_t>(raw >> kTargetShift);
    const auto payload = static_cast<std::uint8_t>(raw >> kPayloadShift);
    // A valid CRC over a 255 sender is still not a robot.
    if (sender == kBroadcast) return DecodeFailure::BadType;

    if (type == kTypeBeacon) {
        if (target != kBroadcast || payload != 0) return DecodeFailure::BadType;
        return Frame{Beacon{RobotId{sender}}};
    }
    if (type == kTypeHeading) {
        return Frame{Heading{RobotId{sender}, target, payload}};
    }
    return DecodeFailure::BadType;
}

DecodeResult decode_frame(std::span<const std::uint8_t> bits) {
    return decode_frame(Codeword::from_bits(bits));
}

std::string describe(const Frame& frame) {
    if (const auto* b = std::get_if<Beacon>(&frame)) {
        return fmt::format("beacon sender={}", b->sender.value());
    }
    const auto& h = std::get<Heading>(frame);
    return fmt::format("heading sender={} target={} q={}", h.sender.value(), h.target, h.heading_q);
}

}  // namespace irswarm::codec
