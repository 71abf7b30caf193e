#pragma once

#include <cmath>
#include <stdexcept>

namespace plume {

/// 3-component point/vector in the normalized length units of the simulation
/// domain. Components must be finite; the checked constructor enforces it.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;

    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
            throw std::invalid_argument("Vec3: non-finite component");
        }
    }

    friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
    friend bool operator==(const Vec3& a, const Vec3& b) = default;
};

inline double squared_distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

/// Euclidean distance between two points.
inline double distance(const Vec3& a, const Vec3& b) {
    return std::sqrt(squared_distance(a, b));
}

}  // namespace plume
