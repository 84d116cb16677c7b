#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mlfe_cli/settings.hpp"

namespace mlfe::cli {

struct Region {
    std::string name;
    int x = 0;
    int y = 0;
    int width = 0;   // 0 = whole image
    int height = 0;

    [[nodiscard]] bool whole() const noexcept { return width == 0; }
};

enum class SigmaMode { Calibrated, Estimated, Fixed };

/// Benchmark grid read from a key=value manifest.
///
/// Keys:
///   images           comma-separated paths, relative to the manifest directory
///   inputs           clean (default; noise is synthesized) or noisy (no
///                    reference: only denoised images are written, metrics n/a)
///   sigma2           comma-separated noise levels (required for clean inputs)
///   sigma2_scale     level (default; multiplier variance on the 0..255 scale)
///                    or effective (mean squared deviation, gray levels^2)
///   methods          any of noisy, nsct-ht, bm3d, mlfe-bm3d
///   seeds            comma-separated noise seeds (default 1)
///   sigma            calibrated (default for clean inputs), estimated, or a number
///   region.NAME      x,y,w,h crop evaluated in addition to the whole image
///   ssim_maps        write SSIM maps and MLFE-minus-BM3D difference renders
///   save_images      write noisy and denoised images
///   timing           false writes 0 seconds so reports are byte-reproducible
///   snr_convention   centered (default) or reference
///   mssim_convention mean (default) or squared
/// plus every pipeline key except sigma.
struct BenchManifest {
    std::vector<std::filesystem::path> images;
    bool noisy_inputs = false;
    std::vector<double> sigma2;
    bool sigma2_is_level = true;
    std::vector<Method> methods;
    std::vector<std::uint64_t> seeds = {1};
    SigmaMode sigma_mode = SigmaMode::Calibrated;
    double sigma = 0.0;
    std::vector<Region> regions;  // whole image first
    bool ssim_maps = false;
    bool save_images = false;
    bool timing = true;
    MetricOptions metrics;
    Settings pipeline;
};

[[nodiscard]] BenchManifest parse_manifest(const Settings& settings, const std::filesystem::path& base_dir);
[[nodiscard]] BenchManifest read_manifest(const std::filesystem::path& path);

struct BenchRow {
    std::string image;
    std::string sigma2;
    std::uint64_t seed = 0;
    std::string method;
    std::string region;
    QualityReport quality;
    bool has_metrics = true;
    double seconds = 0.0;
    bool failed = false;
    std::string error;
};

struct BenchResult {
    std::vector<BenchRow> rows;  // manifest order: image, level, seed, method, region
    [[nodiscard]] bool any_failed() const noexcept;
};

/// Runs the grid with `jobs` concurrent cells (0 = default thread count) and
/// writes report.csv, report.md and any requested maps into `out_dir`.
[[nodiscard]] BenchResult run_bench(const BenchManifest& manifest, const std::filesystem::path& out_dir, int jobs);

void write_report_csv(const std::vector<BenchRow>& rows, std::ostream& out);
void write_report_markdown(const std::vector<BenchRow>& rows, std::ostream& out);

}  // namespace mlfe::cli
