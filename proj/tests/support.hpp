#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "posemetric/geometry.hpp"
#include "posemetric/skeleton.hpp"
#include "posemetric/tinynn.hpp"

namespace testing_support {

using namespace posemetric;

inline std::string fixture(const std::string& name) { return std::string(POSEMETRIC_FIXTURES) + "/" + name; }

inline std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("posemetric_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string operator/(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline Vec3 random_vec(nn::SeededRng& rng, double lo = -1.0, double hi = 1.0) {
    return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

inline Pose random_pose(nn::SeededRng& rng, std::size_t joints) {
    Pose p;
    for (std::size_t j = 0; j < joints; ++j) p.positions.push_back(random_vec(rng));
    return p;
}

// Angle oracle: atan2(|u x v|, u.v), independent of the acos formulation.
inline double angle_oracle(const Vec3& u, const Vec3& v) {
    const Vec3 c{u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
    return std::atan2(std::sqrt(c.x * c.x + c.y * c.y + c.z * c.z), u.x * v.x + u.y * v.y + u.z * v.z);
}

// Plain double-precision forward pass used as a finite-difference oracle.
inline std::vector<double> reference_forward(const nn::Mlp<double>& mlp, std::vector<double> x) {
    for (const auto& l : mlp.layers) {
        std::vector<double> y(l.out());
        for (std::size_t o = 0; o < l.out(); ++o) {
            double s = l.bias[o];
            for (std::size_t i = 0; i < l.in(); ++i) s += l.weight(o, i) * x[i];
            y[o] = l.activation == nn::Activation::Relu ? std::max(0.0, s) : s;
        }
        x = std::move(y);
    }
    return x;
}

// Rotation about an arbitrary axis (Rodrigues), for invariance tests.
inline Mat3 axis_angle(Vec3 axis, double angle) {
    const double n = axis.norm();
    axis = axis * (1.0 / n);
    const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
    const double x = axis.x, y = axis.y, z = axis.z;
    return {{t * x * x + c, t * x * y - s * z, t * x * z + s * y, t * x * y + s * z, t * y * y + c, t * y * z - s * x,
             t * x * z - s * y, t * y * z + s * x, t * z * z + c}};
}

inline Pose transformed(const Pose& p, const Mat3& r, const Vec3& shift) {
    Pose out;
    for (const auto& v : p.positions) out.positions.push_back(r * v + shift);
    return out;
}

}  // namespace testing_support
