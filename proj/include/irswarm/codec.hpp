#pragma once

// Frame-level IR codes: the 42-bit codeword every robot emits, its CRC-8
// protection and the 8-bit heading quantizer carried inside Heading frames.
//
// On-air layout, first bit first (MSB first within each field):
//
//   preamble(8) = 10101010 | type(2) | sender(8) | target(8) | payload(8) | crc(8)
//
// The CRC covers type..payload (26 bits) left-padded with six zero bits to
// four whole bytes.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace irswarm::codec {

inline constexpr int kCodewordBits = 42;
inline constexpr std::uint8_t kPreamble = 0xAA;
inline constexpr std::uint8_t kBroadcast = 0xFF;

/// Identification code of one robot. 255 is the broadcast address and is
/// never a robot's own id.
class RobotId {
public:
    constexpr RobotId() = default;
    /// Throws ContractViolation for 255.
    explicit RobotId(int value);

    constexpr std::uint8_t value() const noexcept { return value_; }
    friend constexpr auto operator<=>(RobotId, RobotId) = default;

private:
    std::uint8_t value_ = 0;
};

struct Beacon {
    RobotId sender;
    friend bool operator==(const Beacon&, const Beacon&) = default;
};

/// `target` is a raw address so that 0xFF (broadcast) is representable.
struct Heading {
    RobotId sender;
    std::uint8_t target = kBroadcast;
    std::uint8_t heading_q = 0;
    friend bool operator==(const Heading&, const Heading&) = default;
};

using Frame = std::variant<Beacon, Heading>;

RobotId sender_of(const Frame& frame) noexcept;

/// A 42-bit on-air code. Bit 0 is the first bit sent (preamble MSB).
class Codeword {
public:
    constexpr Codeword() = default;

    /// Throws ContractViolation unless `bits` holds exactly 42 entries, each 0 or 1.
    static Codeword from_bits(std::span<const std::uint8_t> bits);
    static constexpr Codeword from_raw(std::uint64_t raw) noexcept {
        Codeword c;
        c.raw_ = raw & kMask;
        return c;
    }

    bool bit(int index) const;
    Codeword with_bit_flipped(int index) const;
    std::vector<std::uint8_t> bits() const;
    std::string to_string() const;

    constexpr std::uint64_t raw() const noexcept { return raw_; }

    /// On-off keyed light superposes: mark bits dominate.
    friend constexpr Codeword operator|(Codeword a, Codeword b) noexcept {
        return from_raw(a.raw_ | b.raw_);
    }
    friend constexpr bool operator==(Codeword, Codeword) = default;

private:
    static constexpr std::uint64_t kMask = (std::uint64_t{1} << kCodewordBits) - 1;
    std::uint64_t raw_ = 0;
};

enum class DecodeFailure { BadPreamble, BadCrc, BadType };

const char* to_string(DecodeFailure failure) noexcept;

using DecodeResult = std::variant<Frame, DecodeFailure>;

/// CRC-8, polynomial 0x07, init 0x00, no reflection, no final xor.
/// `bits` is a bit sequence (0/1 entries) whose length is a multiple of 8.
std::uint8_t crc8(std::span<const std::uint8_t> bits);

/// Same checksum over whole bytes.
std::uint8_t crc8_bytes(std::span<const std::uint8_t> bytes) noexcept;

/// round(theta * 256 / 360) mod 256; theta must lie in [0, 360).
std::uint8_t quantize_heading(double theta_deg);
double dequantize_heading(int q);

Codeword encode_frame(const Frame& frame);
DecodeResult decode_frame(Codeword codeword) noexcept;
/// Throws ContractViolation when `bits` is not exactly 42 bits long.
DecodeResult decode_frame(std::span<const std::uint8_t> bits);

std::string describe(const Frame& frame);

}  // namespace irswarm::codec
