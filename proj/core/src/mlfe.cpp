#include "mlfe/mlfe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "mlfe/errors.hpp"
#include "mlfe/io.hpp"

namespace mlfe {
namespace {

// BM3D weights divide by sigma^2; a clean input would otherwise estimate 0.
constexpr double kMinSigma = 1.0;

PyramidStack with_layers_like(const PyramidStack& shape) {
    PyramidStack out;
    out.options = shape.options;
    out.lowpass = shape.lowpass;
    out.layers.resize(shape.layers.size());
    return out;
}

}  // namespace

Plane fuse_geometric(const Plane& primary, const Plane& secondary) {
    require_same_shape(primary, secondary, "fuse_geometric");
    Plane out(primary.width(), primary.height());
    auto a = primary.pixels();
    auto b = secondary.pixels();
    auto o = out.pixels();
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double sign = a[i] > 0.0 ? 1.0 : (a[i] < 0.0 ? -1.0 : 0.0);
        o[i] = sign * std::sqrt(std::abs(a[i] * b[i]));
    }
    return out;
}

Plane rescale_range(const Plane& fused, const Plane& target) {
    require_same_shape(fused, target, "rescale_range");
    if (fused.empty()) return fused;
    const auto [flo, fhi] = std::minmax_element(fused.pixels().begin(), fused.pixels().end());
    const auto [tlo, thi] = std::minmax_element(target.pixels().begin(), target.pixels().end());
    const double f_min = *flo;
    const double f_max = *fhi;
    const double t_min = *tlo;
    const double t_max = *thi;

    Plane out(fused.width(), fused.height());
    auto o = out.pixels();
    if (f_max == f_min) {
        std::fill(o.begin(), o.end(), 0.5 * (t_min + t_max));
        return out;
    }
    const double scale = (t_max - t_min) / (f_max - f_min);
    auto f = fused.pixels();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = (f[i] - f_min) * scale + t_min;
    return out;
}

PyramidStack enhance_fused(const FusionStacks& stacks, const std::vector<double>& gains) {
    const PyramidStack& adjusted = stacks.adjusted;
    if (static_cast<int>(gains.size()) != adjusted.layer_count())
        throw InvalidArgument("enhance_fused: need one gain per pyramid layer");
    PyramidStack out = adjusted;
    for (int i = 1; i <= out.layer_count(); ++i) out.layer(i) *= gains[static_cast<std::size_t>(i - 1)];
    return out;
}

FusionStacks fuse_stacks(PyramidStack primary, PyramidStack secondary, const std::vector<double>& gains) {
    if (primary.layer_count() != secondary.layer_count() || primary.width() != secondary.width() ||
        primary.height() != secondary.height())
        throw InvalidArgument("fuse_stacks: pyramid geometry mismatch");
    FusionStacks s;
    s.primary = std::move(primary);
    s.secondary = std::move(secondary);
    s.fused = with_layers_like(s.primary);
    s.adjusted = with_layers_like(s.primary);
    for (int i = 1; i <= s.primary.layer_count(); ++i) {
        s.fused.layer(i) = fuse_geometric(s.primary.layer(i), s.secondary.layer(i));
        s.adjusted.layer(i) = rescale_range(s.fused.layer(i), s.primary.layer(i));
    }
    s.enhanced = enhance_fused(s, gains);
    return s;
}

FusionStacks build_fusion(const GrayImage& primary, const GrayImage& secondary, const MlfeConfig& config) {
    require_same_shape(primary, secondary, "fuse_and_enhance");
    return fuse_stacks(nsp_decompose(primary, config.pyramid), nsp_decompose(secondary, config.pyramid),
                       config.fusion_gains);
}

GrayImage fuse_and_enhance(const GrayImage& primary, const GrayImage& secondary, const MlfeConfig& config) {
    return nsp_reconstruct(build_fusion(primary, secondary, config).enhanced);
}

double resolve_sigma(const GrayImage& noisy, const MlfeConfig& config) {
    if (config.sigma_source == SigmaSource::Supplied) {
        if (!(config.sigma > 0.0)) throw InvalidArgument("supplied sigma must be > 0");
        return config.sigma;
    }
    return std::max(kMinSigma, estimate_image_sigma(noisy, config.pyramid));
}

MlfeStages mlfe_bm3d_stages(const GrayImage& noisy, const MlfeConfig& config) {
    const int min_side = std::max(nsp_min_dimension(config.pyramid), config.basic.block);
    if (noisy.width() < min_side || noisy.height() < min_side)
        throw TooSmall("mlfe_bm3d: image sides must be >= " + std::to_string(min_side));
    require_finite(noisy, "mlfe_bm3d");

    MlfeStages st;
    st.sigma = resolve_sigma(noisy, config);
    Bm3dProfile basic = config.basic;
    Bm3dProfile final_stage = config.final_stage;
    basic.sigma = st.sigma;
    final_stage.sigma = st.sigma;
    const Bm3dRun run{config.threads, nullptr};

    st.thresholded = nsp_threshold_enhance(noisy, config.threshold, config.pyramid);
    st.basic_noisy = bm3d_basic(noisy, basic, run);
    st.basic_thresh = bm3d_basic(st.thresholded, basic, run);
    st.fused = fuse_and_enhance(st.basic_noisy, st.basic_thresh, config);
    if (config.final_mode == FinalStage::WienerWithFusedPilot) {
        st.output = bm3d_final(noisy, st.fused, final_stage, run);
    } else {
        const GrayImage pilot = bm3d_basic(st.fused, basic, run);
        st.output = bm3d_final(st.fused, pilot, final_stage, run);
    }
    return st;
}

GrayImage mlfe_bm3d(const GrayImage& noisy, const MlfeConfig& config) {
    return mlfe_bm3d_stages(noisy, config).output;
}

void dump_stages(const MlfeStages& stages, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const std::pair<const char*, const GrayImage*> files[] = {
        {"u_R.pgm", &stages.thresholded}, {"u_on.pgm", &stages.basic_noisy}, {"u_oR.pgm", &stages.basic_thresh},
        {"u_F.pgm", &stages.fused},       {"output.pgm", &stages.output},
    };
    nlohmann::json manifest;
    manifest["sigma"] = stages.sigma;
    for (const auto& [name, img] : files) {
        write_image(*img, dir / name);
        manifest["files"].push_back(name);
    }
    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
}

}  // namespace mlfe
