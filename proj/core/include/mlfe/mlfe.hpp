#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "mlfe/bm3d.hpp"
#include "mlfe/image.hpp"
#include "mlfe/nsp.hpp"

namespace mlfe {

// Multi-layer fusion enhancement around BM3D:
//
//   u_R  = nsp_threshold_enhance(u_0)
//   u_on = bm3d_basic(u_0),  u_oR = bm3d_basic(u_R)
//   u_F  = fuse_and_enhance(u_on, u_oR)
//   out  = bm3d_final(noisy = u_0, pilot = u_F)

/// Signed geometric mean sgn(a) * sqrt(|a * b|); sign from `primary`, sgn(0) = 0.
[[nodiscard]] Plane fuse_geometric(const Plane& primary, const Plane& secondary);

/// Affine map of `fused` onto the [min, max] range of `target`. A constant
/// `fused` maps to the midpoint of that range.
[[nodiscard]] Plane rescale_range(const Plane& fused, const Plane& target);

/// Intermediate stacks of the fusion step.
struct FusionStacks {
    PyramidStack primary;    // decomposition of u_on
    PyramidStack secondary;  // decomposition of u_oR
    PyramidStack fused;      // signed geometric mean per layer
    PyramidStack adjusted;   // fused layers rescaled to the primary ranges
    PyramidStack enhanced;   // adjusted layers times the per-layer gains
};

/// c_F[i] = gains[i] * adjusted[i]; lowpass carried over from `adjusted`.
[[nodiscard]] PyramidStack enhance_fused(const FusionStacks& stacks, const std::vector<double>& gains);

enum class SigmaSource {
    /// Use MlfeConfig::sigma as given.
    Supplied,
    /// MAD estimate from the finest pyramid layer of the noisy input.
    Estimated,
};

enum class FinalStage {
    /// Wiener stage on u_0 with u_F as pilot and grouping image.
    WienerWithFusedPilot,
    /// Full two-stage BM3D run on u_F (ablation).
    FullBm3dOnFused,
};

struct MlfeConfig {
    ThresholdPolicy threshold;
    NspOptions pyramid;
    std::vector<double> fusion_gains = {1.0, 2.0, 2.0, 1.0};
    SigmaSource sigma_source = SigmaSource::Estimated;
    double sigma = 0.0;
    /// Profiles; their sigma fields are overwritten by the resolved sigma.
    Bm3dProfile basic = Bm3dProfile::basic(25.0);
    Bm3dProfile final_stage = Bm3dProfile::wiener(25.0);
    FinalStage final_mode = FinalStage::WienerWithFusedPilot;
    int threads = 0;
};

/// Per-layer fusion, range adjustment and enhancement of two decompositions.
[[nodiscard]] FusionStacks fuse_stacks(PyramidStack primary, PyramidStack secondary,
                                       const std::vector<double>& gains);

/// Builds all fusion stacks for a pair of basic estimates.
[[nodiscard]] FusionStacks build_fusion(const GrayImage& primary, const GrayImage& secondary,
                                        const MlfeConfig& config);

/// Decompose both, fuse, rescale against the primary, enhance, reconstruct.
/// The primary lowpass residual is carried through unmodified.
[[nodiscard]] GrayImage fuse_and_enhance(const GrayImage& primary, const GrayImage& secondary,
                                         const MlfeConfig& config = {});

/// Sigma the pipeline hands to BM3D for this input.
[[nodiscard]] double resolve_sigma(const GrayImage& noisy, const MlfeConfig& config);

struct MlfeStages {
    GrayImage thresholded;   // u_R
    GrayImage basic_noisy;   // u_on
    GrayImage basic_thresh;  // u_oR
    GrayImage fused;         // u_F
    GrayImage output;
    double sigma = 0.0;
};

[[nodiscard]] MlfeStages mlfe_bm3d_stages(const GrayImage& noisy, const MlfeConfig& config = {});
[[nodiscard]] GrayImage mlfe_bm3d(const GrayImage& noisy, const MlfeConfig& config = {});

/// Writes u_R, u_on, u_oR, u_F and the output as PGM plus manifest.json.
void dump_stages(const MlfeStages& stages, const std::filesystem::path& dir);

}  // namespace mlfe
