#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace voldiff {

// Little-endian f32 payload packing shared by the DFV and checkpoint
// containers.
inline void append_f32le(std::string& out, float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    out.push_back(static_cast<char>(u & 0xff));
    out.push_back(static_cast<char>((u >> 8) & 0xff));
    out.push_back(static_cast<char>((u >> 16) & 0xff));
    out.push_back(static_cast<char>((u >> 24) & 0xff));
}

inline float read_f32le(const unsigned char* b) {
    const std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                            (static_cast<std::uint32_t>(b[1]) << 8) |
                            (static_cast<std::uint32_t>(b[2]) << 16) |
                            (static_cast<std::uint32_t>(b[3]) << 24);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

}  // namespace voldiff
