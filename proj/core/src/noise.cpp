#include "mlfe/noise.hpp"

#include <algorithm>
#include <cmath>
#include <vector>
#include <numbers>

#include "mlfe/errors.hpp"

namespace mlfe {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t index) const noexcept {
    return splitmix64(seed_ + index * 0x9E3779B97F4A7C15ULL);
}

double CounterRng::uniform(std::uint64_t index) const noexcept {
    return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
}

std::pair<double, double> CounterRng::normal_pair(std::uint64_t pair) const noexcept {
    const double u1 = uniform(2 * pair);
    const double u2 = uniform(2 * pair + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

GrayImage add_speckle(const GrayImage& img, const NoiseSpec& spec) {
    if (img.empty()) throw InvalidArgument("add_speckle: empty image");
    if (!(spec.sigma2_target > 0.0)) throw InvalidArgument("add_speckle: sigma2_target must be > 0");

    const double energy = sum_of_squares(img) / static_cast<double>(img.size());
    if (energy <= 0.0)
        throw DegenerateInput("add_speckle: all-zero image cannot carry multiplicative noise");

    auto clean = img.pixels();
    const std::size_t n = clean.size();
    std::vector<double> z(n);
    const CounterRng rng(spec.seed);
    for (std::size_t i = 0; i < n; i += 2) {
        const auto [z0, z1] = rng.normal_pair(i / 2);
        z[i] = z0;
        if (i + 1 < n) z[i + 1] = z1;
    }

    GrayImage out(img.width(), img.height());
    auto px = out.pixels();
    const auto synthesize = [&](double eta_sd) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            px[i] = std::clamp(clean[i] * (1.0 + eta_sd * z[i]), 0.0, 255.0);
            s += (px[i] - clean[i]) * (px[i] - clean[i]);
        }
        return s / static_cast<double>(n);
    };

    // Clamping to [0, 255] removes part of the variance the analytic scale
    // sqrt(sigma2 / mean(u^2)) injects. The realized variance is nondecreasing
    // in the scale for a fixed draw, so bisect until it meets the target.
    double lo = std::sqrt(spec.sigma2_target / energy);
    if (synthesize(lo) >= spec.sigma2_target) return out;
    double hi = lo;
    for (int i = 0; i < 60 && synthesize(hi) < spec.sigma2_target; ++i) {
        lo = hi;
        hi *= 2.0;
    }
    if (synthesize(hi) < spec.sigma2_target)
        throw DegenerateInput("add_speckle: target variance unreachable within [0, 255]");
    for (int i = 0; i < 60 && (hi - lo) > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (synthesize(mid) < spec.sigma2_target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    synthesize(hi);
    return out;
}

double effective_variance_for_level(const GrayImage& img, double sigma2_level) {
    if (img.empty()) throw InvalidArgument("effective_variance_for_level: empty image");
    return sigma2_level * (sum_of_squares(img) / static_cast<double>(img.size())) / (255.0 * 255.0);
}

double realized_variance(const GrayImage& noisy, const GrayImage& clean) {
    require_same_shape(noisy, clean, "realized_variance");
    double s = 0.0;
    auto a = noisy.pixels();
    auto b = clean.pixels();
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

}  // namespace mlfe
