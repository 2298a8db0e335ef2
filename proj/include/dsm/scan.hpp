#pragma once

// Parallel classification scan of a parameter window and PPM rendering.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <openssl/evp.h>

#include "dsm/core_map.hpp"
#include "dsm/cycles.hpp"
#include "dsm/errors.hpp"

namespace dsm {

struct ScanConfig {
    double a_min = -0.5;
    double a_max = 0.5;
    double b_min = 0.0;
    double b_max = 1.0;
    int width = 600;
    int height = 400;
    int q_max = 10;
    int workers = 1;
};

/// Pixel code: 0 when no cycle was found, else (q << 16) | k.
using PixelCode = std::uint32_t;

inline PixelCode encode(int q, std::int64_t k) { return (static_cast<PixelCode>(q) << 16) | static_cast<PixelCode>(k); }
inline int code_period(PixelCode c) { return static_cast<int>(c >> 16); }
inline std::int64_t code_type(PixelCode c) { return static_cast<std::int64_t>(c & 0xffffu); }

struct ScanResult {
    ScanConfig config;
    std::vector<PixelCode> codes;  // row-major, row 0 at b_max
    std::string content_hash;

    PixelCode at(int row, int col) const { return codes[static_cast<std::size_t>(row) * config.width + col]; }
};

inline void validate(const ScanConfig& c) {
    const auto bad = [](const char* what) { throw Error(Status::invalid_argument, what); };
    if (!(c.a_max > c.a_min)) bad("a_max must exceed a_min");
    if (!(c.b_max > c.b_min)) bad("b_max must exceed b_min");
    if (c.a_min < -0.5 || c.a_max > 0.5 || c.b_min < 0.0 || c.b_max > 1.0) {
        throw Error(Status::parameter_out_of_range, "scan window must lie in [-1/2,1/2] x [0,1]");
    }
    if (c.width < 1 || c.height < 1) bad("grid dimensions must be positive");
    if (c.q_max < 1 || c.q_max > 12) bad("q_max must lie in [1, 12]");
    if (c.workers < 1) bad("workers must be >= 1");
}

/// Pixel centres; columns i and width-1-i are exact negatives on a symmetric window.
inline double pixel_a(const ScanConfig& c, int i) {
    return (static_cast<double>(2 * i + 1 - c.width) / (2.0 * c.width)) * (c.a_max - c.a_min) +
           0.5 * (c.a_max + c.a_min);
}

inline double pixel_b(const ScanConfig& c, int j) {
    return c.b_max - (static_cast<double>(2 * j + 1) / (2.0 * c.height)) * (c.b_max - c.b_min);
}

inline PixelCode classify_pixel(double a, double b, int q_max) {
    try {
        const auto cls = classify(Parameter(a, b), q_max);
        if (!cls.in_tongue()) return 0;
        return encode(cls.cycle->period, cls.type->k);
    } catch (const Error&) {
        return 0;
    }
}

/// SHA-1 of the bytes framed as a git blob ("blob <size>\0" + data).
inline std::string git_blob_sha1(const std::string& data) {
    const std::string head = "blob " + std::to_string(data.size()) + std::string(1, '\0');
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw Error(Status::io_error, "cannot allocate digest context");
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, head.data(), head.size()) == 1 &&
                    EVP_DigestUpdate(ctx, data.data(), data.size()) == 1 && EVP_DigestFinal_ex(ctx, md, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw Error(Status::io_error, "SHA-1 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

inline std::string serialize_codes(const ScanResult& r) {
    std::string s;
    s.reserve(r.codes.size() * 4);
    for (PixelCode c : r.codes)
        for (int sh = 0; sh < 32; sh += 8) s.push_back(static_cast<char>((c >> sh) & 0xffu));
    return s;
}

inline ScanResult scan_tongues(const ScanConfig& cfg) {
    validate(cfg);
    ScanResult r;
    r.config = cfg;
    r.codes.assign(static_cast<std::size_t>(cfg.width) * cfg.height, 0);
    std::atomic<int> next_row{0};
    const auto work = [&] {
        for (int j = next_row++; j < cfg.height; j = next_row++) {
            const double b = pixel_b(cfg, j);
            for (int i = 0; i < cfg.width; ++i) {
                r.codes[static_cast<std::size_t>(j) * cfg.width + i] = classify_pixel(pixel_a(cfg, i), b, cfg.q_max);
            }
        }
    };
    const int n = std::min(cfg.workers, cfg.height);
    std::vector<std::thread> pool;
    for (int w = 1; w < n; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    r.content_hash = git_blob_sha1(serialize_codes(r));
    return r;
}

struct Rgb {
    unsigned char r = 0, g = 0, b = 0;
};

/// Hue by period, brightness by type index; code 0 is black.
inline Rgb palette(PixelCode code) {
    if (code == 0) return {};
    const int q = code_period(code);
    const std::int64_t k = code_type(code);
    const double den = std::max<double>(1.0, std::ldexp(1.0, q) - 1.0);
    const double h = std::fmod((q - 1) * 137.5, 360.0) / 60.0;
    const double s = 0.85;
    const double v = 0.45 + 0.55 * (static_cast<double>(k) + 1.0) / den;
    const int sector = static_cast<int>(h) % 6;
    const double f = h - std::floor(h);
    const double p = v * (1 - s), qq = v * (1 - s * f), t = v * (1 - s * (1 - f));
    double rr = 0, gg = 0, bb = 0;
    switch (sector) {
        case 0: rr = v, gg = t, bb = p; break;
        case 1: rr = qq, gg = v, bb = p; break;
        case 2: rr = p, gg = v, bb = t; break;
        case 3: rr = p, gg = qq, bb = v; break;
        case 4: rr = t, gg = p, bb = v; break;
        default: rr = v, gg = p, bb = qq; break;
    }
    const auto byte = [](double x) { return static_cast<unsigned char>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)); };
    return {byte(rr), byte(gg), byte(bb)};
}

inline std::string ppm_bytes(const ScanResult& r) {
    std::string s = "P6\n" + std::to_string(r.config.width) + " " + std::to_string(r.config.height) + "\n255\n";
    for (PixelCode c : r.codes) {
        const Rgb px = palette(c);
        s.push_back(static_cast<char>(px.r));
        s.push_back(static_cast<char>(px.g));
        s.push_back(static_cast<char>(px.b));
    }
    return s;
}

inline void render_ppm(const ScanResult& r, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(Status::io_error, "cannot open " + path + " for writing");
    const std::string bytes = ppm_bytes(r);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(Status::io_error, "write failed for " + path);
}

}  // namespace dsm
