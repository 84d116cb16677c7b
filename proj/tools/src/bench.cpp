#include "mlfe_cli/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "mlfe/errors.hpp"
#include "mlfe/io.hpp"
#include "mlfe/noise.hpp"
#include "mlfe/parallel.hpp"

namespace mlfe::cli {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kRegionPrefix = "region.";

std::string number(double v, const char* fmt) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string level_label(double v) { return number(v, "%g"); }

std::string stem_of(const fs::path& p) { return p.stem().string(); }

std::string run_prefix(const std::string& image, const std::string& level, std::uint64_t seed) {
    return level.empty() ? image : image + "_s" + level + "_seed" + std::to_string(seed);
}

Region parse_region(const std::string& name, const std::string& text) {
    const auto parts = parse_list("region." + name, text);
    if (parts.size() != 4) throw InvalidArgument("region." + name + ": expected x,y,w,h");
    Region r{name, 0, 0, 0, 0};
    int* fields[] = {&r.x, &r.y, &r.width, &r.height};
    for (int i = 0; i < 4; ++i) {
        const long long v = parse_integer("region." + name, parts[static_cast<std::size_t>(i)]);
        if (v < 0 || v > 1'000'000) throw InvalidArgument("region." + name + ": coordinates out of range");
        *fields[i] = static_cast<int>(v);
    }
    if (r.width <= 0 || r.height <= 0) throw InvalidArgument("region." + name + ": empty rectangle");
    return r;
}

struct Cell {
    std::size_t image = 0;
    std::size_t level = 0;
    std::size_t seed = 0;
};

}  // namespace

bool BenchResult::any_failed() const noexcept {
    for (const auto& r : rows)
        if (r.failed) return true;
    return false;
}

BenchManifest parse_manifest(const Settings& settings, const fs::path& base_dir) {
    BenchManifest m;
    Settings pipeline;
    bool have_methods = false;
    bool have_sigma = false;
    for (const auto& [key, value] : settings) {
        if (key == "images") {
            for (const auto& item : parse_list(key, value)) {
                const fs::path p(item);
                m.images.push_back(p.is_absolute() ? p : base_dir / p);
            }
        } else if (key == "inputs") {
            if (value == "clean") {
                m.noisy_inputs = false;
            } else if (value == "noisy") {
                m.noisy_inputs = true;
            } else {
                throw InvalidArgument("inputs: expected clean or noisy");
            }
        } else if (key == "sigma2") {
            m.sigma2 = parse_real_list(key, value);
            for (double v : m.sigma2)
                if (!(v > 0.0)) throw InvalidArgument("sigma2: levels must be positive");
        } else if (key == "sigma2_scale") {
            if (value == "level") {
                m.sigma2_is_level = true;
            } else if (value == "effective") {
                m.sigma2_is_level = false;
            } else {
                throw InvalidArgument("sigma2_scale: expected level or effective");
            }
        } else if (key == "methods") {
            have_methods = true;
            if (value.empty()) throw InvalidArgument("methods: empty method list");
            for (const auto& item : parse_list(key, value)) m.methods.push_back(parse_method(item, true));
        } else if (key == "seeds") {
            m.seeds.clear();
            for (const auto& item : parse_list(key, value)) {
                const long long s = parse_integer(key, item);
                if (s < 0) throw InvalidArgument("seeds: expected non-negative integers");
                m.seeds.push_back(static_cast<std::uint64_t>(s));
            }
        } else if (key == "sigma") {
            have_sigma = true;
            if (value == "calibrated") {
                m.sigma_mode = SigmaMode::Calibrated;
            } else if (value == "estimated") {
                m.sigma_mode = SigmaMode::Estimated;
            } else {
                m.sigma_mode = SigmaMode::Fixed;
                m.sigma = parse_real(key, value);
                if (!(m.sigma > 0.0)) throw InvalidArgument("sigma: must be positive");
            }
        } else if (key.rfind(kRegionPrefix, 0) == 0) {
            const std::string name = key.substr(kRegionPrefix.size());
            if (name.empty() || name == "whole") throw InvalidArgument(key + ": invalid region name");
            m.regions.push_back(parse_region(name, value));
        } else if (key == "ssim_maps") {
            m.ssim_maps = parse_bool(key, value);
        } else if (key == "save_images") {
            m.save_images = parse_bool(key, value);
        } else if (key == "timing") {
            m.timing = parse_bool(key, value);
        } else if (key == "snr_convention") {
            m.metrics.snr = parse_snr_convention(value);
        } else if (key == "mssim_convention") {
            m.metrics.mssim = parse_mssim_convention(value);
        } else {
            pipeline.emplace(key, value);
        }
    }
    std::vector<std::string_view> allowed;
    for (const auto& k : pipeline_keys())
        if (k.key != "sigma") allowed.push_back(k.key);
    require_known(pipeline, allowed, "manifest");
    (void)pipeline_config(pipeline);  // rejects bad values
    m.pipeline = std::move(pipeline);

    if (m.images.empty()) throw InvalidArgument("manifest: images is required");
    if (!have_methods) throw InvalidArgument("manifest: methods is required");
    if (m.noisy_inputs) {
        if (!m.sigma2.empty()) throw InvalidArgument("manifest: sigma2 does not apply to noisy inputs");
        if (!m.regions.empty() || m.ssim_maps)
            throw InvalidArgument("manifest: regions and ssim_maps need clean references");
        if (!have_sigma) m.sigma_mode = SigmaMode::Estimated;
        if (m.sigma_mode == SigmaMode::Calibrated)
            throw InvalidArgument("manifest: calibrated sigma needs clean inputs");
        m.seeds = {0};
        m.sigma2 = {std::numeric_limits<double>::quiet_NaN()};
    } else if (m.sigma2.empty()) {
        throw InvalidArgument("manifest: sigma2 is required");
    }
    m.regions.insert(m.regions.begin(), Region{"whole", 0, 0, 0, 0});
    return m;
}

BenchManifest read_manifest(const fs::path& path) {
    return parse_manifest(read_settings_file(path), path.parent_path());
}

BenchResult run_bench(const BenchManifest& manifest, const fs::path& out_dir, int jobs) {
    fs::create_directories(out_dir);
    if (manifest.ssim_maps) fs::create_directories(out_dir / "maps");
    if (manifest.save_images || manifest.noisy_inputs) fs::create_directories(out_dir / "images");

    std::vector<Cell> cells;
    for (std::size_t i = 0; i < manifest.images.size(); ++i)
        for (std::size_t l = 0; l < manifest.sigma2.size(); ++l)
            for (std::size_t s = 0; s < manifest.seeds.size(); ++s) cells.push_back({i, l, s});

    const std::size_t per_cell = manifest.methods.size() * manifest.regions.size();
    BenchResult result;
    result.rows.resize(cells.size() * per_cell);

    const int workers = jobs > 0 ? jobs : default_threads();
    MlfeConfig base = pipeline_config(manifest.pipeline);
    // Cells already run concurrently; keep each run single-threaded unless the
    // manifest asks otherwise. Output does not depend on either count.
    if (workers > 1 && manifest.pipeline.count("threads") == 0) base.threads = 1;

    parallel_for(0, static_cast<int>(cells.size()), workers, [&](int index) {
        const Cell& cell = cells[static_cast<std::size_t>(index)];
        const fs::path& path = manifest.images[cell.image];
        const std::string image = stem_of(path);
        const double level = manifest.sigma2[cell.level];
        const std::string level_text = manifest.noisy_inputs ? "" : level_label(level);
        const std::uint64_t seed = manifest.seeds[cell.seed];
        const std::string prefix = run_prefix(image, level_text, seed);

        BenchRow* rows = result.rows.data() + static_cast<std::size_t>(index) * per_cell;
        for (std::size_t m = 0; m < manifest.methods.size(); ++m) {
            for (std::size_t r = 0; r < manifest.regions.size(); ++r) {
                BenchRow& row = rows[m * manifest.regions.size() + r];
                row.image = image;
                row.sigma2 = manifest.noisy_inputs ? "-" : level_text;
                row.seed = seed;
                row.method = std::string(to_string(manifest.methods[m]));
                row.region = manifest.regions[r].name;
                row.has_metrics = !manifest.noisy_inputs;
            }
        }
        const auto fail_rows = [&](std::size_t m, const std::string& why) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            for (std::size_t r = 0; r < manifest.regions.size(); ++r) {
                BenchRow& row = rows[m * manifest.regions.size() + r];
                row.failed = true;
                row.error = why;
                row.quality = {nan, nan, nan, nan};
                row.seconds = nan;
            }
        };

        GrayImage clean;
        GrayImage noisy;
        MlfeConfig config = base;
        try {
            if (manifest.noisy_inputs) {
                noisy = read_image(path);
            } else {
                clean = read_image(path);
                const double target =
                    manifest.sigma2_is_level ? effective_variance_for_level(clean, level) : level;
                noisy = add_speckle(clean, NoiseSpec{NoiseModel::MultiplicativeGaussian, target, seed});
                if (manifest.sigma_mode == SigmaMode::Calibrated) {
                    config.sigma_source = SigmaSource::Supplied;
                    config.sigma = std::max(1.0, std::sqrt(target));
                }
                if (manifest.save_images) write_image(noisy, out_dir / "images" / (prefix + "_noisy.png"));
            }
            if (manifest.sigma_mode == SigmaMode::Fixed) {
                config.sigma_source = SigmaSource::Supplied;
                config.sigma = manifest.sigma;
            } else if (manifest.sigma_mode == SigmaMode::Estimated) {
                config.sigma_source = SigmaSource::Estimated;
            }
        } catch (const std::exception& e) {
            for (std::size_t m = 0; m < manifest.methods.size(); ++m) fail_rows(m, e.what());
            return;
        }

        std::vector<SsimMap> whole_maps(manifest.methods.size());
        std::vector<bool> have_map(manifest.methods.size(), false);
        for (std::size_t m = 0; m < manifest.methods.size(); ++m) {
            const Method method = manifest.methods[m];
            try {
                const auto t0 = std::chrono::steady_clock::now();
                const GrayImage out = run_method(method, noisy, config).output;
                const double seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                if (manifest.noisy_inputs || manifest.save_images)
                    write_image(out, out_dir / "images" / (prefix + "_" + std::string(to_string(method)) + ".png"));
                for (std::size_t r = 0; r < manifest.regions.size(); ++r) {
                    BenchRow& row = rows[m * manifest.regions.size() + r];
                    row.seconds = manifest.timing ? seconds : 0.0;
                    if (manifest.noisy_inputs) continue;
                    const Region& region = manifest.regions[r];
                    row.quality = region.whole()
                                      ? evaluate(out, clean, manifest.metrics)
                                      : evaluate(out.crop(region.x, region.y, region.width, region.height),
                                                 clean.crop(region.x, region.y, region.width, region.height),
                                                 manifest.metrics);
                }
                if (manifest.ssim_maps) {
                    whole_maps[m] = ssim_map(out, clean);
                    have_map[m] = true;
                    write_image(render_ssim(whole_maps[m]),
                                out_dir / "maps" / (prefix + "_" + std::string(to_string(method)) + "_ssim.png"));
                }
            } catch (const std::exception& e) {
                fail_rows(m, e.what());
            }
        }

        if (!manifest.ssim_maps) return;
        std::size_t mlfe_at = manifest.methods.size();
        std::size_t bm3d_at = manifest.methods.size();
        for (std::size_t m = 0; m < manifest.methods.size(); ++m) {
            if (!have_map[m]) continue;
            if (manifest.methods[m] == Method::MlfeBm3d) mlfe_at = m;
            if (manifest.methods[m] == Method::Bm3d) bm3d_at = m;
        }
        if (mlfe_at == manifest.methods.size() || bm3d_at == manifest.methods.size()) return;
        try {
            const Plane diff = ssim_diff_map(whole_maps[mlfe_at], whole_maps[bm3d_at]);
            for (const Region& region : manifest.regions) {
                const Plane part =
                    region.whole() ? diff : diff.crop(region.x, region.y, region.width, region.height);
                write_rgb(render_signed(part),
                          out_dir / "maps" / (prefix + "_" + region.name + "_mlfe-bm3d_minus_bm3d.png"));
            }
        } catch (const std::exception& e) {
            for (std::size_t m : {mlfe_at, bm3d_at}) fail_rows(m, std::string("difference map: ") + e.what());
        }
    });

    {
        std::ofstream csv(out_dir / "report.csv");
        if (!csv) throw IoError("cannot write " + (out_dir / "report.csv").string());
        write_report_csv(result.rows, csv);
    }
    {
        std::ofstream md(out_dir / "report.md");
        if (!md) throw IoError("cannot write " + (out_dir / "report.md").string());
        write_report_markdown(result.rows, md);
    }
    return result;
}

void write_report_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
    out << "image,sigma2,seed,method,region,snr_db,psnr_db,rmse,mssim,seconds\n";
    for (const auto& r : rows) {
        out << r.image << ',' << r.sigma2 << ',' << r.seed << ',' << r.method << ',' << r.region << ',';
        if (r.has_metrics || r.failed) {
            out << number(r.quality.snr, "%.4f") << ',' << number(r.quality.psnr, "%.4f") << ','
                << number(r.quality.rmse, "%.4f") << ',' << number(r.quality.mssim, "%.6f");
        } else {
            out << "n/a,n/a,n/a,n/a";
        }
        out << ',' << number(r.seconds, "%.3f") << '\n';
    }
}

void write_report_markdown(const std::vector<BenchRow>& rows, std::ostream& out) {
    out << "# Benchmark report\n\n";
    out << "| image | sigma2 | seed | method | region | SNR (dB) | PSNR (dB) | RMSE | MSSIM | seconds |\n";
    out << "|---|---|---|---|---|---:|---:|---:|---:|---:|\n";
    for (const auto& r : rows) {
        out << "| " << r.image << " | " << r.sigma2 << " | " << r.seed << " | " << r.method
            << (r.failed ? " **FAILED**" : "") << " | " << r.region << " | ";
        if (r.has_metrics || r.failed) {
            out << number(r.quality.snr, "%.2f") << " | " << number(r.quality.psnr, "%.2f") << " | "
                << number(r.quality.rmse, "%.2f") << " | " << number(r.quality.mssim, "%.4f");
        } else {
            out << "n/a | n/a | n/a | n/a";
        }
        out << " | " << number(r.seconds, "%.2f") << " |\n";
    }
    bool header = false;
    for (const auto& r : rows) {
        if (!r.failed || r.region != "whole") continue;
        if (!header) out << "\n## Failed runs\n\n";
        header = true;
        out << "- " << r.image << " sigma2=" << r.sigma2 << " seed=" << r.seed << " " << r.method << ": " << r.error
            << '\n';
    }
}

}  // namespace mlfe::cli
