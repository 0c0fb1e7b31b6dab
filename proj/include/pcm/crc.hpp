// Bit-level CRC for CRC-aided list decoding.
//
// The engine runs MSB-first over a raw bit sequence.  Reflection flags are
// kept in the config for byte-oriented payloads (crc_of_bytes); the polar
// code path works on bit vectors and requires them off.

#pragma once

#include <cstdint>

#include "pcm/common.hpp"

namespace pcm {

struct CrcConfig {
    int width = 16;                 // 8, 16 or 24
    std::uint32_t polynomial = 0x1021;
    std::uint32_t initial = 0xFFFF;
    std::uint32_t final_xor = 0;
    bool reflect_in = false;
    bool reflect_out = false;

    std::uint32_t mask() const { return (width == 32) ? 0xFFFFFFFFu : ((1u << width) - 1u); }

    void validate() const {
        require(width == 8 || width == 16 || width == 24, "CrcConfig: width must be 8, 16 or 24");
        require((polynomial & ~mask()) == 0, "CrcConfig: polynomial wider than width");
        require((initial & ~mask()) == 0, "CrcConfig: initial value wider than width");
    }
};

inline CrcConfig default_crc16() { return CrcConfig{}; }

// CRC over a bit sequence, MSB-first shift register.
inline std::uint32_t crc_of_bits(const Bits& bits, const CrcConfig& cfg) {
    cfg.validate();
    require(!cfg.reflect_in && !cfg.reflect_out,
            "crc_of_bits: reflection only applies to byte payloads");
    std::uint32_t reg = cfg.initial;
    const std::uint32_t top = 1u << (cfg.width - 1);
    for (std::uint8_t b : bits) {
        const bool feedback = ((reg & top) != 0) != ((b & 1) != 0);
        reg = (reg << 1) & cfg.mask();
        if (feedback) reg ^= cfg.polynomial;
    }
    return (reg ^ cfg.final_xor) & cfg.mask();
}

// Byte-payload CRC in the usual Rocksoft parameter model.
inline std::uint32_t crc_of_bytes(const std::vector<std::uint8_t>& bytes, const CrcConfig& cfg) {
    cfg.validate();
    std::uint32_t reg = cfg.initial;
    const std::uint32_t top = 1u << (cfg.width - 1);
    for (std::uint8_t byte : bytes) {
        for (int k = 0; k < 8; ++k) {
            const int shift = cfg.reflect_in ? k : (7 - k);
            const bool bit = (byte >> shift) & 1;
            const bool feedback = ((reg & top) != 0) != bit;
            reg = (reg << 1) & cfg.mask();
            if (feedback) reg ^= cfg.polynomial;
        }
    }
    if (cfg.reflect_out) {
        std::uint32_t r = 0;
        for (int k = 0; k < cfg.width; ++k)
            if (reg & (1u << k)) r |= 1u << (cfg.width - 1 - k);
        reg = r;
    }
    return (reg ^ cfg.final_xor) & cfg.mask();
}

// payload -> payload || check bits (check bits MSB-first).
inline Bits crc_attach(const Bits& payload, const CrcConfig& cfg) {
    require(!payload.empty(), "crc_attach: payload must be non-empty");
    const std::uint32_t v = crc_of_bits(payload, cfg);
    Bits out = payload;
    for (int k = cfg.width - 1; k >= 0; --k)
        out.push_back(static_cast<std::uint8_t>((v >> k) & 1));
    return out;
}

inline bool crc_check(const Bits& bits, const CrcConfig& cfg) {
    cfg.validate();
    if (bits.size() <= static_cast<std::size_t>(cfg.width)) return false;
    const std::size_t n = bits.size() - cfg.width;
    Bits payload(bits.begin(), bits.begin() + n);
    const std::uint32_t v = crc_of_bits(payload, cfg);
    for (int k = 0; k < cfg.width; ++k)
        if (bits[n + k] != ((v >> (cfg.width - 1 - k)) & 1)) return false;
    return true;
}

} // namespace pcm
