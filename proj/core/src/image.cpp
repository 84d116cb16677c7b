#include "mlfe/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlfe/errors.hpp"

namespace mlfe {

Plane::Plane(int width, int height, double fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw InvalidArgument("negative plane dimensions");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Plane::Plane(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0) throw InvalidArgument("negative plane dimensions");
    if (data_.size() != static_cast<std::size_t>(width) * height)
        throw InvalidArgument("plane data length does not match width*height");
}

Plane Plane::crop(int x, int y, int w, int h) const {
    if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > width_ || y + h > height_)
        throw InvalidArgument("crop rectangle outside the plane");
    Plane out(w, h);
    for (int r = 0; r < h; ++r) {
        auto src = row(y + r).subspan(x, w);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

Plane& Plane::operator+=(const Plane& other) {
    require_same_shape(*this, other, "plane addition");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Plane& Plane::operator-=(const Plane& other) {
    require_same_shape(*this, other, "plane subtraction");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Plane& Plane::operator*=(double s) noexcept {
    for (auto& v : data_) v *= s;
    return *this;
}

Plane operator+(Plane a, const Plane& b) { return a += b; }
Plane operator-(Plane a, const Plane& b) { return a -= b; }
Plane operator*(Plane a, double s) { return a *= s; }

void require_same_shape(const Plane& a, const Plane& b, const char* what) {
    if (!a.same_shape(b)) {
        throw InvalidArgument(std::string(what) + ": dimension mismatch (" +
                              std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                              " vs " + std::to_string(b.width()) + "x" +
                              std::to_string(b.height()) + ")");
    }
}

void require_finite(const Plane& p, const char* what) {
    for (double v : p.pixels()) {
        if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + ": non-finite sample");
    }
}

double max_abs_difference(const Plane& a, const Plane& b) {
    require_same_shape(a, b, "max_abs_difference");
    double m = 0.0;
    auto pa = a.pixels();
    auto pb = b.pixels();
    for (std::size_t i = 0; i < pa.size(); ++i) m = std::max(m, std::abs(pa[i] - pb[i]));
    return m;
}

double mean(const Plane& p) {
    if (p.empty()) return 0.0;
    double s = 0.0;
    for (double v : p.pixels()) s += v;
    return s / static_cast<double>(p.size());
}

double sum_of_squares(const Plane& p) {
    double s = 0.0;
    for (double v : p.pixels()) s += v * v;
    return s;
}

Plane clamped(Plane p, double lo, double hi) {
    for (auto& v : p.pixels()) v = std::clamp(v, lo, hi);
    return p;
}

}  // namespace mlfe
