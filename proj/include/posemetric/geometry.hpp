#pragma once

#include <array>
#include <cmath>

namespace posemetric {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr bool operator==(const Vec3&) const = default;

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline constexpr Vec3 kWorldUp{0.0, 1.0, 0.0};

enum class Axis { X, Y, Z };

// Row-major 3x3 rotation matrix.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static constexpr Mat3 identity() { return {}; }

    static Mat3 rotation(Axis axis, double radians) {
        const double c = std::cos(radians);
        const double s = std::sin(radians);
        switch (axis) {
            case Axis::X: return {{1, 0, 0, 0, c, -s, 0, s, c}};
            case Axis::Y: return {{c, 0, s, 0, 1, 0, -s, 0, c}};
            case Axis::Z: return {{c, -s, 0, s, c, 0, 0, 0, 1}};
        }
        return {};
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                r.m[i * 3 + j] = m[i * 3 + 0] * o.m[0 * 3 + j] + m[i * 3 + 1] * o.m[1 * 3 + j] +
                                 m[i * 3 + 2] * o.m[2 * 3 + j];
            }
        }
        return r;
    }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    bool finite() const {
        for (double v : m) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace posemetric
