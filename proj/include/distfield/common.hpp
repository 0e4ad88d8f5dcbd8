#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace distfield {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double xx, double yy) : x(xx), y(yy) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    // z-component of the 3D cross product (this x o).
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::sqrt(x * x + y * y); }
    double squaredNorm() const { return x * x + y * y; }
    // 90 degree counterclockwise rotation in (x right, y down) raster axes.
    Vec2 rot90() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }

// Deterministic, platform-independent random stream (splitmix64).
// All seeded randomness in the library goes through this; std:: distributions
// are implementation-defined and would break byte-reproducible datasets.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed + 0x9E3779B97F4A7C15ull) {}

    uint64_t nextU64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return double(nextU64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    uint64_t below(uint64_t n) { return nextU64() % n; }

    // Box-Muller, deterministic.
    double gaussian() {
        double u1 = std::max(uniform(), 0x1.0p-60);
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Derive an independent sub-stream (stable across platforms).
    Rng fork(uint64_t salt) {
        return Rng(nextU64() ^ (salt * 0xD2B74407B1CE6E93ull));
    }

private:
    uint64_t state_;
};

// Thread cap for internal parallel loops; 0 = hardware concurrency.
inline unsigned threadBudget() {
    if (const char* env = std::getenv("DISTFIELD_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return unsigned(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Static block partition over [0, n). Each index is processed by exactly one
// worker and partition boundaries do not depend on the thread count, so any
// per-index output is bit-identical to the sequential order.
inline void parallelFor(int n, const std::function<void(int)>& body) {
    unsigned workers = std::min<unsigned>(threadBudget(), n > 0 ? unsigned(n) : 1u);
    if (n <= 0) return;
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    int chunk = (n + int(workers) - 1) / int(workers);
    for (unsigned t = 0; t < workers; ++t) {
        int lo = int(t) * chunk;
        int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (int i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Little-endian scalar packing for the binary file formats.
inline void putU32(std::string& out, uint32_t v) {
    char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char((v >> 24) & 0xff)};
    out.append(b, 4);
}

inline void putF32(std::string& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    putU32(out, bits);
}

inline uint32_t getU32(const std::string& in, size_t& pos) {
    uint32_t v = uint32_t(uint8_t(in[pos])) | uint32_t(uint8_t(in[pos + 1])) << 8 |
                 uint32_t(uint8_t(in[pos + 2])) << 16 | uint32_t(uint8_t(in[pos + 3])) << 24;
    pos += 4;
    return v;
}

inline float getF32(const std::string& in, size_t& pos) {
    uint32_t bits = getU32(in, pos);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace distfield
