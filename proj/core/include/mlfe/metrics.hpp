#pragma once

#include <iosfwd>
#include <vector>

#include "mlfe/image.hpp"
#include "mlfe/io.hpp"

namespace mlfe {

// Full-reference quality metrics. Arguments are always (denoised, reference).
// Identical inputs yield +infinity for SNR and PSNR.

enum class SnrConvention {
    /// Signal energy measured as the centered energy of the denoised image.
    CenteredEstimate,
    /// Signal energy measured as the raw energy of the clean reference,
    /// 10*log10(sum u^2 / sum (u_t - u)^2).
    ReferenceEnergy,
};

enum class MssimConvention {
    /// Plain mean of the SSIM map.
    Mean,
    /// Mean of the squared SSIM map values.
    MeanOfSquares,
};

inline constexpr double kPeak = 255.0;
inline constexpr int kSsimWindow = 8;

[[nodiscard]] double mse(const GrayImage& denoised, const GrayImage& reference);
[[nodiscard]] double rmse(const GrayImage& denoised, const GrayImage& reference);
[[nodiscard]] double psnr(const GrayImage& denoised, const GrayImage& reference);
[[nodiscard]] double snr(const GrayImage& denoised, const GrayImage& reference,
                         SnrConvention convention = SnrConvention::CenteredEstimate);

/// SSIM indices of every 8x8 window position (uniform window statistics).
/// Geometry is (width - 7) x (height - 7); entry (x, y) belongs to the window
/// whose top-left corner is pixel (x, y).
struct SsimMap {
    Plane values;
};

[[nodiscard]] SsimMap ssim_map(const GrayImage& denoised, const GrayImage& reference);
[[nodiscard]] double mssim(const SsimMap& map, MssimConvention convention = MssimConvention::Mean);
[[nodiscard]] double mssim(const GrayImage& denoised, const GrayImage& reference,
                           MssimConvention convention = MssimConvention::Mean);

struct QualityReport {
    double snr = 0.0;
    double psnr = 0.0;
    double rmse = 0.0;
    double mssim = 0.0;
};

struct MetricOptions {
    SnrConvention snr = SnrConvention::CenteredEstimate;
    MssimConvention mssim = MssimConvention::Mean;
};

[[nodiscard]] QualityReport evaluate(const GrayImage& denoised, const GrayImage& reference,
                                     const MetricOptions& options = {});

/// Elementwise a - b.
[[nodiscard]] Plane ssim_diff_map(const SsimMap& a, const SsimMap& b);

/// Signed render: positive values ramp white->red, negative white->blue.
/// `scale` is the magnitude mapped to full color; 0 selects max |value|.
[[nodiscard]] RgbImage render_signed(const Plane& diff, double scale = 0.0);

/// Affine map [-1, 1] -> [0, 255] of an SSIM map, for display.
[[nodiscard]] GrayImage render_ssim(const SsimMap& map);
/// Inverse of render_ssim (lossy: 8-bit quantized input).
[[nodiscard]] SsimMap decode_ssim(const GrayImage& rendered);

struct ProfileSample {
    double distance = 0.0;  // Euclidean distance from the first endpoint
    Point at;
    double intensity = 0.0;
};

/// Intensities along the Bresenham rasterization of [p0, p1], endpoints included.
[[nodiscard]] std::vector<ProfileSample> line_profile(const GrayImage& img, Point p0, Point p1);

void write_profile_csv(const std::vector<ProfileSample>& profile, std::ostream& out);

/// Plane as CSV: one image row per line, full double precision.
void write_plane_csv(const Plane& plane, std::ostream& out);
[[nodiscard]] Plane read_plane_csv(std::istream& in);

}  // namespace mlfe
