#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mlfe {

struct Point {
    int x = 0;
    int y = 0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Row-major 2D field of doubles.
///
/// Used both for intensity images (nominal range [0, 255]) and for
/// transform-domain coefficient planes, which carry no range constraint.
class Plane {
public:
    Plane() = default;
    Plane(int width, int height, double fill = 0.0);
    Plane(int width, int height, std::vector<double> data);

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] double& operator()(int x, int y) noexcept {
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }
    [[nodiscard]] double operator()(int x, int y) const noexcept {
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }

    [[nodiscard]] std::span<double> pixels() noexcept { return data_; }
    [[nodiscard]] std::span<const double> pixels() const noexcept { return data_; }
    [[nodiscard]] std::span<double> row(int y) noexcept {
        return std::span<double>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
    }
    [[nodiscard]] std::span<const double> row(int y) const noexcept {
        return std::span<const double>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
    }

    [[nodiscard]] bool same_shape(const Plane& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }
    [[nodiscard]] bool contains(Point p) const noexcept {
        return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_;
    }

    /// Copy of the rectangle [x, x+w) × [y, y+h).
    [[nodiscard]] Plane crop(int x, int y, int w, int h) const;

    Plane& operator+=(const Plane& other);
    Plane& operator-=(const Plane& other);
    Plane& operator*=(double s) noexcept;

    friend bool operator==(const Plane&, const Plane&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

[[nodiscard]] Plane operator+(Plane a, const Plane& b);
[[nodiscard]] Plane operator-(Plane a, const Plane& b);
[[nodiscard]] Plane operator*(Plane a, double s);

/// Intensity image, nominally in [0, 255].
using GrayImage = Plane;

/// Throws InvalidArgument unless both planes have identical geometry.
void require_same_shape(const Plane& a, const Plane& b, const char* what);

/// Throws InvalidArgument if any sample is NaN or infinite.
void require_finite(const Plane& p, const char* what);

[[nodiscard]] double max_abs_difference(const Plane& a, const Plane& b);
[[nodiscard]] double mean(const Plane& p);
[[nodiscard]] double sum_of_squares(const Plane& p);

/// Clamp every sample into [lo, hi].
[[nodiscard]] Plane clamped(Plane p, double lo, double hi);

}  // namespace mlfe
