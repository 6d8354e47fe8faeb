#pragma once

#include <cmath>
#include <algorithm>

namespace flowlab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
// z-component of the 3D cross product; positive when b is counterclockwise of a
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double norm2(const Vec2& a) { return a.x * a.x + a.y * a.y; }
inline double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }

// Rotation by +pi/2: (x, y) -> (-y, x).  grad_perp(u) applied to (u_x1, u_x2)
// yields the velocity (-u_x2, u_x1) of the associated flow.
inline Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

// Distance from p to the closed segment [a, b].
inline double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = norm2(ab);
    if (len2 == 0.0) return dist(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return dist(p, a + ab * t);
}

struct Box {
    double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;

    bool contains(const Vec2& p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    Vec2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
    Box scaled(double factor) const {
        const Vec2 c = center();
        return {c.x - 0.5 * width() * factor, c.x + 0.5 * width() * factor,
                c.y - 0.5 * height() * factor, c.y + 0.5 * height() * factor};
    }
};

struct Ball {
    Vec2 center;
    double radius = 1.0;

    bool contains(const Vec2& p) const { return dist(p, center) <= radius; }
};

} // namespace flowlab
