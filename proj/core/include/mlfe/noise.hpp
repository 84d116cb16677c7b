#pragma once

#include <cstdint>
#include <utility>

#include "mlfe/image.hpp"

namespace mlfe {

/// Counter-based SplitMix64 generator.
///
/// Sample `i` of stream `seed` is splitmix64(seed + (i + 1) * 0x9E3779B97F4A7C15),
/// so any sample can be drawn independently of the others. Gaussian pairs are
/// produced with the Box-Muller transform from two consecutive uniforms.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

    [[nodiscard]] std::uint64_t bits(std::uint64_t index) const noexcept;
    /// Uniform on the open interval (0, 1), 53-bit resolution.
    [[nodiscard]] double uniform(std::uint64_t index) const noexcept;
    /// Standard normal pair built from uniforms 2*pair and 2*pair+1.
    [[nodiscard]] std::pair<double, double> normal_pair(std::uint64_t pair) const noexcept;

private:
    std::uint64_t seed_;
};

[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

enum class NoiseModel { MultiplicativeGaussian };

struct NoiseSpec {
    NoiseModel model = NoiseModel::MultiplicativeGaussian;
    /// Target mean of (u0 - u)^2, in squared gray levels.
    double sigma2_target = 0.0;
    std::uint64_t seed = 0;
};

/// Speckle synthesis u0 = clamp(u * (1 + eta), 0, 255).
///
/// eta is i.i.d. zero-mean Gaussian. Its deviation starts at
/// sqrt(sigma2_target / mean(u^2)), which makes E[(u0 - u)^2] equal the target
/// before clamping; when clamping pulls the realized mean of (u0 - u)^2 below
/// the target, the deviation is raised (same Gaussian draw) until it matches.
[[nodiscard]] GrayImage add_speckle(const GrayImage& img, const NoiseSpec& spec);

/// Converts a noise level expressed as a multiplier variance on the [0, 255]
/// scale (sigma2_level / 255^2, the convention of speckle generators that work
/// on unit-range images) into the effective additive variance for `img`.
[[nodiscard]] double effective_variance_for_level(const GrayImage& img, double sigma2_level);

/// Realized mean of (noisy - clean)^2.
[[nodiscard]] double realized_variance(const GrayImage& noisy, const GrayImage& clean);

}  // namespace mlfe
