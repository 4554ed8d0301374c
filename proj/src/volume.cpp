#include "voldiff/volume.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace voldiff {

namespace {

void check_dims(int w, int h, int d, int l) {
    if (w < 1 || h < 1 || d < 1 || l < 1)
        throw std::invalid_argument("Volume4D: all dimensions must be >= 1");
}

inline std::uint32_t f32_bits(float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    return u;
}

inline float bits_f32(std::uint32_t u) {
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

}  // namespace

Volume4D::Volume4D(int w_, int h_, int d_, int l_) : w(w_), h(h_), d(d_), l(l_) {
    check_dims(w_, h_, d_, l_);
    v.assign(static_cast<std::size_t>(w_) * h_ * d_ * l_, 0.0f);
}

DfvHeader parse_dfv_header(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("DFV header is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("magic", "") != "DFV1")
        throw std::runtime_error("DFV header: missing magic DFV1");
    if (j.value("dtype", "") != "f32le")
        throw std::runtime_error("DFV header: unsupported dtype (want f32le)");
    for (const char* key : {"w", "h", "d", "l"})
        if (!j.contains(key) || !j[key].is_number_integer())
            throw std::runtime_error(std::string("DFV header: missing integer field ") + key);
    DfvHeader hd;
    hd.w = j["w"].get<int>();
    hd.h = j["h"].get<int>();
    hd.d = j["d"].get<int>();
    hd.l = j["l"].get<int>();
    if (!j.contains("normalized") || !j["normalized"].is_boolean())
        throw std::runtime_error("DFV header: missing boolean field normalized");
    hd.normalized = j["normalized"].get<bool>();
    if (hd.w < 1 || hd.h < 1 || hd.d < 1 || hd.l < 1)
        throw std::runtime_error("DFV header: dimensions must be >= 1");
    return hd;
}

Volume4D load_dfv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_dfv: cannot open " + path);

    std::string header;
    if (!std::getline(f, header))
        throw std::runtime_error("load_dfv: " + path + " has no header line");
    const DfvHeader hd = parse_dfv_header(header);

    Volume4D vol(hd.w, hd.h, hd.d, hd.l);
    vol.normalized = hd.normalized;

    const std::size_t count = vol.size();
    const std::size_t want = count * 4;
    std::string payload((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (payload.size() != want)
        throw std::runtime_error("load_dfv: " + path + ": payload is " +
                                 std::to_string(payload.size()) + " bytes, expected " +
                                 std::to_string(want));
    const auto* b = reinterpret_cast<const unsigned char*>(payload.data());
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t u = static_cast<std::uint32_t>(b[4 * i]) |
                                (static_cast<std::uint32_t>(b[4 * i + 1]) << 8) |
                                (static_cast<std::uint32_t>(b[4 * i + 2]) << 16) |
                                (static_cast<std::uint32_t>(b[4 * i + 3]) << 24);
        const float x = bits_f32(u);
        if (!std::isfinite(x))
            throw std::runtime_error("load_dfv: " + path + ": non-finite value at index " +
                                     std::to_string(i));
        vol.v[i] = x;
    }
    return vol;
}

void save_dfv(const Volume4D& vol, const std::string& path) {
    check_dims(vol.w, vol.h, vol.d, vol.l);
    if (vol.size() != static_cast<std::size_t>(vol.w) * vol.h * vol.d * vol.l)
        throw std::invalid_argument("save_dfv: data size does not match dimensions");
    for (float x : vol.v)
        if (!std::isfinite(x)) throw std::runtime_error("save_dfv: volume has non-finite values");

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_dfv: cannot open " + path + " for writing");

    std::string header = "{\"magic\":\"DFV1\",\"w\":" + std::to_string(vol.w) +
                         ",\"h\":" + std::to_string(vol.h) + ",\"d\":" + std::to_string(vol.d) +
                         ",\"l\":" + std::to_string(vol.l) + ",\"dtype\":\"f32le\"" +
                         ",\"normalized\":" + (vol.normalized ? "true" : "false") + "}\n";
    f.write(header.data(), static_cast<std::streamsize>(header.size()));

    std::string payload(vol.size() * 4, '\0');
    auto* b = reinterpret_cast<unsigned char*>(payload.data());
    for (std::size_t i = 0; i < vol.size(); ++i) {
        const std::uint32_t u = f32_bits(vol.v[i]);
        b[4 * i] = static_cast<unsigned char>(u & 0xff);
        b[4 * i + 1] = static_cast<unsigned char>((u >> 8) & 0xff);
        b[4 * i + 2] = static_cast<unsigned char>((u >> 16) & 0xff);
        b[4 * i + 3] = static_cast<unsigned char>((u >> 24) & 0xff);
    }
    f.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!f) throw std::runtime_error("save_dfv: write to " + path + " failed");
}

void normalize_volume(Volume4D& vol) {
    if (vol.v.empty()) throw std::invalid_argument("normalize_volume: empty volume");
    float lo = vol.v[0], hi = vol.v[0];
    for (float x : vol.v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (!(hi > lo)) throw std::invalid_argument("normalize_volume: constant volume (zero range)");
    const double range = static_cast<double>(hi) - static_cast<double>(lo);
    for (float& x : vol.v) {
        const double t = (static_cast<double>(x) - static_cast<double>(lo)) / range;
        x = static_cast<float>(2.0 * t - 1.0);
    }
    vol.normalized = true;
}

Grid get_slice(const Volume4D& vol, int slice, int volume) {
    if (slice < 0 || slice >= vol.d) throw std::invalid_argument("get_slice: slice out of range");
    if (volume < 0 || volume >= vol.l)
        throw std::invalid_argument("get_slice: volume out of range");
    Grid g(vol.h, vol.w);
    for (int r = 0; r < vol.h; ++r)
        for (int c = 0; c < vol.w; ++c) g.at(r, c) = vol.at(volume, slice, r, c);
    return g;
}

void set_slice(Volume4D& vol, int slice, int volume, const Grid& g) {
    if (slice < 0 || slice >= vol.d) throw std::invalid_argument("set_slice: slice out of range");
    if (volume < 0 || volume >= vol.l)
        throw std::invalid_argument("set_slice: volume out of range");
    if (g.h != vol.h || g.w != vol.w)
        throw std::invalid_argument("set_slice: grid shape does not match volume");
    for (int r = 0; r < vol.h; ++r)
        for (int c = 0; c < vol.w; ++c)
            vol.at(volume, slice, r, c) = static_cast<float>(g.at(r, c));
}

SlicePair slice_pair(const Volume4D& vol, int slice, int volume) {
    if (vol.l < 2) throw std::invalid_argument("slice_pair: need at least 2 volumes");
    SlicePair p;
    p.slice = slice;
    p.volume = volume;
    p.x = get_slice(vol, slice, volume);
    p.x_prime = get_slice(vol, slice, (volume - 1 + vol.l) % vol.l);
    return p;
}

void write_pgm(const Grid& g, const std::string& path, double lo, double hi) {
    if (g.v.empty()) throw std::invalid_argument("write_pgm: empty grid");
    if (!(hi > lo)) throw std::invalid_argument("write_pgm: need hi > lo");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("write_pgm: cannot open " + path + " for writing");
    f << "P5\n" << g.w << " " << g.h << "\n255\n";
    std::string bytes(g.size(), '\0');
    for (std::size_t i = 0; i < g.size(); ++i) {
        double t = (g.v[i] - lo) / (hi - lo);
        t = std::clamp(t, 0.0, 1.0);
        bytes[i] = static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0)));
    }
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write_pgm: write to " + path + " failed");
}

}  // namespace voldiff
