#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "mlfe/image.hpp"

namespace mlfe {

// Nonsubsampled (a-trous) pyramid: a contourlet transform with a single
// direction per scale. Every plane keeps the source geometry.

enum class NspFilterBank {
    /// CDF 9/7 pair mapped to 2D by the McClellan transform (default).
    Cdf97,
    /// Separable B3-spline starlet: highpass = identity - lowpass, synthesis by summation.
    Starlet,
};

enum class Boundary {
    /// Half-sample mirror extension.
    Symmetric,
    /// Circular extension.
    Periodic,
};

struct NspOptions {
    int levels = 4;
    NspFilterBank filters = NspFilterBank::Cdf97;
    Boundary boundary = Boundary::Symmetric;
};

[[nodiscard]] NspFilterBank parse_filter_bank(std::string_view name);
[[nodiscard]] std::string_view to_string(NspFilterBank bank) noexcept;

struct KernelTap {
    int dx;
    int dy;
    double weight;
};

/// Zero-phase 2D kernel, symmetric about both axes.
struct Kernel2D {
    int radius = 0;
    std::vector<KernelTap> taps;  // nonzero entries only

    [[nodiscard]] double at(int dx, int dy) const noexcept;
    [[nodiscard]] double l2_norm() const noexcept;
};

/// Two-channel nonsubsampled bank with H0*G0 + H1*G1 = 1.
struct NspBank {
    Kernel2D analysis_low;
    Kernel2D analysis_high;
    Kernel2D synthesis_low;
    Kernel2D synthesis_high;
};

[[nodiscard]] const NspBank& filter_bank(NspFilterBank which);

/// McClellan transform of a zero-phase 1D filter given by its taps
/// h[0..N] (center first), with cos(w) -> (cos w1 + cos w2) / 2.
[[nodiscard]] Kernel2D mcclellan(const std::vector<double>& half_taps);

/// Convolution with `kernel` upsampled by `dilation` (a-trous holes).
[[nodiscard]] Plane convolve(const Plane& in, const Kernel2D& kernel, int dilation, Boundary boundary);

/// Bandpass layers ordered coarse -> fine: layers[0] is layer 1 (deepest),
/// layers.back() is the finest. `lowpass` is the residual after the last level.
struct PyramidStack {
    std::vector<Plane> layers;
    Plane lowpass;
    NspOptions options;

    [[nodiscard]] int width() const noexcept { return lowpass.width(); }
    [[nodiscard]] int height() const noexcept { return lowpass.height(); }
    [[nodiscard]] int layer_count() const noexcept { return static_cast<int>(layers.size()); }
    /// 1-based layer access, matching the coarse -> fine numbering.
    [[nodiscard]] Plane& layer(int index);
    [[nodiscard]] const Plane& layer(int index) const;
};

/// Smallest admissible image side for `options`.
[[nodiscard]] int nsp_min_dimension(const NspOptions& options);

[[nodiscard]] PyramidStack nsp_decompose(const GrayImage& img, const NspOptions& options = {});
[[nodiscard]] GrayImage nsp_reconstruct(const PyramidStack& stack);

/// Median(|c|) / 0.6745. Even counts average the two middle order statistics.
[[nodiscard]] double estimate_sigma(const Plane& layer);

/// Keeps c where |c| >= threshold, zero elsewhere.
[[nodiscard]] Plane hard_threshold(const Plane& layer, double threshold);

/// Multiplies the 1-based `index` layer by `gain`.
[[nodiscard]] PyramidStack scale_layer(PyramidStack stack, int index, double gain);

/// l2 norm of the finest-layer analysis filter: the factor by which white
/// noise of unit deviation appears in the finest layer.
[[nodiscard]] double finest_layer_noise_gain(const NspOptions& options = {});

/// Noise deviation of `img` estimated from the MAD of its finest pyramid layer,
/// rescaled to the image domain.
[[nodiscard]] double estimate_image_sigma(const GrayImage& img, const NspOptions& options = {});

struct ThresholdPolicy {
    /// K multipliers for layers 1..levels (coarse -> fine).
    std::vector<double> k = {3.0, 3.0, 3.0, 4.0};
    /// Layer amplified after thresholding (1-based, 0 disables) and its gain.
    int enhance_layer = 3;
    double enhance_gain = 2.0;
};

/// Hard-threshold denoising and enhancement: decompose, K-sigma threshold
/// each bandpass layer against its own MAD estimate, amplify the enhance
/// layer, reconstruct. The lowpass residual is left untouched.
[[nodiscard]] GrayImage nsp_threshold_enhance(const GrayImage& noisy,
                                              const ThresholdPolicy& policy = {},
                                              const NspOptions& options = {});

/// Writes each plane as a min/max-normalized PGM plus manifest.json.
void dump_stack(const PyramidStack& stack, const std::filesystem::path& dir);

}  // namespace mlfe
