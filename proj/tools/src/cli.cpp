#include "mlfe_cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "mlfe/errors.hpp"
#include "mlfe/io.hpp"
#include "mlfe/metrics.hpp"
#include "mlfe/noise.hpp"
#include "mlfe_cli/bench.hpp"
#include "mlfe_cli/settings.hpp"

namespace mlfe::cli {
namespace fs = std::filesystem;

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string flag_name(std::string_view key) {
    std::string s = "--";
    for (char c : key) s.push_back(c == '_' ? '-' : c);
    return s;
}

struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
};

Rect parse_rect(const std::string& text) {
    const auto parts = parse_list("--crop", text);
    if (parts.size() != 4) throw InvalidArgument("--crop: expected x,y,w,h");
    Rect r;
    int* fields[] = {&r.x, &r.y, &r.w, &r.h};
    for (int i = 0; i < 4; ++i) {
        const long long v = parse_integer("--crop", parts[static_cast<std::size_t>(i)]);
        if (v < 0 || v > 1'000'000) throw InvalidArgument("--crop: coordinates out of range");
        *fields[i] = static_cast<int>(v);
    }
    if (r.w <= 0 || r.h <= 0) throw InvalidArgument("--crop: empty rectangle");
    return r;
}

SsimMap load_map(const fs::path& path) {
    if (path.extension() == ".csv") {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path.string());
        return SsimMap{read_plane_csv(in)};
    }
    return decode_ssim(read_image(path));
}

void write_text(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    body(out);
    if (!out) throw IoError("write failed: " + path.string());
}

struct NoiseArgs {
    std::string input;
    std::string output;
    std::optional<double> sigma2;
    std::optional<double> level;
    std::uint64_t seed = 0;
};

struct DenoiseArgs {
    std::string input;
    std::string output;
    std::string method = "mlfe-bm3d";
    std::string config;
    std::string dump_dir;
    std::string trace;
    std::map<std::string, std::string> flags;  // pipeline key -> flag value
};

struct MetricsArgs {
    std::string denoised;
    std::string reference;
    std::string snr = "centered";
    std::string mssim = "mean";
    std::string crop;
};

struct MapArgs {
    std::string a;
    std::string b;
    std::string output;
    std::string csv;
    double scale = 0.0;
};

struct ProfileArgs {
    std::string input;
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;
    std::string output;
};

struct BenchArgs {
    std::string manifest;
    std::string out_dir = "bench_out";
    int jobs = 0;
};

int cmd_noise(const NoiseArgs& a, std::ostream& out) {
    const GrayImage clean = read_image(a.input);
    const double target = a.level ? effective_variance_for_level(clean, *a.level) : *a.sigma2;
    GrayImage noisy = add_speckle(clean, NoiseSpec{NoiseModel::MultiplicativeGaussian, target, a.seed});
    // Report on the 8-bit samples actually written.
    for (double& v : noisy.pixels()) v = to_byte(v);
    write_image(noisy, a.output);
    out << "sigma2_target: " << fmt(target, "%.4f") << '\n';
    out << "realized_variance: " << fmt(realized_variance(noisy, clean), "%.4f") << '\n';
    out << "psnr_db: " << fmt(psnr(noisy, clean), "%.4f") << '\n';
    return kOk;
}

int cmd_denoise(const DenoiseArgs& a, int threads, std::ostream& out) {
    Settings settings;
    if (!a.config.empty()) {
        settings = read_settings_file(a.config);
        std::vector<std::string_view> allowed;
        for (const auto& k : pipeline_keys()) allowed.push_back(k.key);
        require_known(settings, allowed, a.config);
    }
    settings = merged(std::move(settings), a.flags);
    if (threads >= 0) settings["threads"] = std::to_string(threads);
    const MlfeConfig config = pipeline_config(settings);
    const Method method = parse_method(a.method);
    if (!a.trace.empty() && method != Method::Bm3d)
        throw InvalidArgument("--trace is available for method bm3d only");

    const GrayImage noisy = read_image(a.input);
    std::vector<GroupTraceRow> trace;
    const auto t0 = std::chrono::steady_clock::now();
    const MethodRun r = run_method(method, noisy, config, a.trace.empty() ? nullptr : &trace);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_image(r.output, a.output);
    if (!a.dump_dir.empty()) {
        const fs::path dir = a.dump_dir;
        switch (method) {
            case Method::MlfeBm3d:
                dump_stages(r.stages, dir);
                break;
            case Method::Bm3d:
                fs::create_directories(dir);
                write_image(r.basic, dir / "basic.pgm");
                write_image(r.output, dir / "output.pgm");
                break;
            default:
                dump_stack(nsp_decompose(noisy, config.pyramid), dir / "noisy_pyramid");
                write_image(r.output, dir / "output.pgm");
                break;
        }
    }
    if (!a.trace.empty()) write_text(a.trace, [&](std::ostream& o) { write_trace_csv(trace, o); });

    out << "method: " << to_string(method) << '\n';
    if (method != Method::NsctHt) out << "sigma: " << fmt(r.sigma, "%.4f") << '\n';
    out << "seconds: " << fmt(seconds, "%.3f") << '\n';
    return kOk;
}

int cmd_metrics(const MetricsArgs& a, std::ostream& out) {
    MetricOptions options{parse_snr_convention(a.snr), parse_mssim_convention(a.mssim)};
    GrayImage den = read_image(a.denoised);
    GrayImage ref = read_image(a.reference);
    require_same_shape(den, ref, "metrics");
    if (!a.crop.empty()) {
        const Rect r = parse_rect(a.crop);
        den = den.crop(r.x, r.y, r.w, r.h);
        ref = ref.crop(r.x, r.y, r.w, r.h);
    }
    const QualityReport q = evaluate(den, ref, options);
    out << "snr_db,psnr_db,rmse,mssim\n"
        << fmt(q.snr, "%.4f") << ',' << fmt(q.psnr, "%.4f") << ',' << fmt(q.rmse, "%.4f") << ','
        << fmt(q.mssim, "%.6f") << '\n';
    return kOk;
}

int cmd_ssim_map(const MapArgs& a, std::ostream& out) {
    const GrayImage den = read_image(a.a);
    const GrayImage ref = read_image(a.b);
    require_same_shape(den, ref, "ssim-map");
    const SsimMap map = ssim_map(den, ref);
    write_image(render_ssim(map), a.output);
    if (!a.csv.empty()) write_text(a.csv, [&](std::ostream& o) { write_plane_csv(map.values, o); });
    out << "mssim: " << fmt(mssim(map), "%.6f") << '\n';
    return kOk;
}

int cmd_diff_map(const MapArgs& a, std::ostream& out) {
    if (a.scale < 0.0) throw InvalidArgument("--scale must be non-negative");
    const Plane diff = ssim_diff_map(load_map(a.a), load_map(a.b));
    write_rgb(render_signed(diff, a.scale), a.output);
    out << "mean_difference: " << fmt(mean(diff), "%.6f") << '\n';
    return kOk;
}

int cmd_profile(const ProfileArgs& a, std::ostream& out) {
    const GrayImage img = read_image(a.input);
    const auto samples = line_profile(img, {a.x0, a.y0}, {a.x1, a.y1});
    if (a.output.empty() || a.output == "-") {
        write_profile_csv(samples, out);
    } else {
        write_text(a.output, [&](std::ostream& o) { write_profile_csv(samples, o); });
    }
    return kOk;
}

int cmd_bench(const BenchArgs& a, int threads, std::ostream& out, std::ostream& err) {
    BenchManifest manifest = read_manifest(a.manifest);
    if (threads >= 0) manifest.pipeline["threads"] = std::to_string(threads);
    if (a.jobs < 0) throw InvalidArgument("--jobs must be non-negative");
    const BenchResult result = run_bench(manifest, a.out_dir, a.jobs);
    out << "rows: " << result.rows.size() << '\n';
    out << "report: " << (fs::path(a.out_dir) / "report.csv").string() << '\n';
    if (result.any_failed()) {
        for (const auto& r : result.rows)
            if (r.failed && r.region == "whole")
                err << "run failed: " << r.image << " sigma2=" << r.sigma2 << " seed=" << r.seed << ' ' << r.method
                    << ": " << r.error << '\n';
        return kIoFailure;
    }
    return kOk;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const TooSmall& e) {
        err << "error: " << e.what() << '\n';
        return kPrecondition;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kBadArguments;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kIoFailure;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Speckle denoising with multi-layer fusion enhanced BM3D", "mlfe"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");
    int threads = -1;
    app.add_option("--threads", threads, "Worker threads (default: MLFE_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);

    NoiseArgs noise;
    auto* noise_cmd = app.add_subcommand("noise", "Add multiplicative speckle noise");
    noise_cmd->add_option("input", noise.input, "Clean image (PGM or PNG)")->required();
    noise_cmd->add_option("output", noise.output, "Noisy image to write")->required();
    auto* sigma2_opt = noise_cmd->add_option("--sigma2", noise.sigma2, "Target mean squared deviation (gray levels^2)")
                           ->check(CLI::PositiveNumber);
    auto* level_opt = noise_cmd->add_option("--level", noise.level,
                                            "Noise level as a multiplier variance on the 0..255 scale")
                          ->check(CLI::PositiveNumber);
    sigma2_opt->excludes(level_opt);
    noise_cmd->add_option("--seed", noise.seed, "Noise seed");

    DenoiseArgs denoise;
    auto* denoise_cmd = app.add_subcommand("denoise", "Denoise an image");
    denoise_cmd->add_option("input", denoise.input, "Noisy image")->required();
    denoise_cmd->add_option("output", denoise.output, "Denoised image to write")->required();
    denoise_cmd->add_option("--method", denoise.method, "nsct-ht, bm3d or mlfe-bm3d")
        ->check(CLI::IsMember({"nsct-ht", "bm3d", "mlfe-bm3d"}))
        ->capture_default_str();
    denoise_cmd->add_option("--config", denoise.config, "key=value file; flags override it");
    denoise_cmd->add_option("--dump-stages", denoise.dump_dir, "Directory for intermediate images");
    denoise_cmd->add_option("--trace", denoise.trace, "Per-group trace CSV (bm3d only)");
    std::vector<std::pair<std::string, CLI::Option*>> pipeline_flags;
    std::map<std::string, std::string> flag_values;
    for (const auto& k : pipeline_keys()) {
        if (k.key == "threads") continue;
        auto& slot = flag_values[std::string(k.key)];
        pipeline_flags.emplace_back(std::string(k.key),
                                    denoise_cmd->add_option(flag_name(k.key), slot, std::string(k.help)));
    }

    MetricsArgs metrics;
    auto* metrics_cmd = app.add_subcommand("metrics", "Print SNR, PSNR, RMSE and MSSIM as CSV");
    metrics_cmd->add_option("denoised", metrics.denoised, "Denoised image")->required();
    metrics_cmd->add_option("reference", metrics.reference, "Clean reference")->required();
    metrics_cmd->add_option("--snr-convention", metrics.snr, "centered or reference")
        ->check(CLI::IsMember({"centered", "reference"}))
        ->capture_default_str();
    metrics_cmd->add_option("--mssim-convention", metrics.mssim, "mean or squared")
        ->check(CLI::IsMember({"mean", "squared"}))
        ->capture_default_str();
    metrics_cmd->add_option("--crop", metrics.crop, "Evaluate the rectangle x,y,w,h only");

    MapArgs ssim;
    auto* ssim_cmd = app.add_subcommand("ssim-map", "Render the SSIM map of a denoised image");
    ssim_cmd->add_option("denoised", ssim.a, "Denoised image")->required();
    ssim_cmd->add_option("reference", ssim.b, "Clean reference")->required();
    ssim_cmd->add_option("output", ssim.output, "Grayscale map to write")->required();
    ssim_cmd->add_option("--csv", ssim.csv, "Also write the raw map values as CSV");

    MapArgs diff;
    auto* diff_cmd = app.add_subcommand("diff-map", "Render map_a - map_b in signed color");
    diff_cmd->add_option("map_a", diff.a, "SSIM map (CSV or rendered image)")->required();
    diff_cmd->add_option("map_b", diff.b, "SSIM map (CSV or rendered image)")->required();
    diff_cmd->add_option("output", diff.output, "PNG to write")->required();
    diff_cmd->add_option("--scale", diff.scale, "Magnitude mapped to full color (0 = max |difference|)");

    ProfileArgs profile;
    auto* profile_cmd = app.add_subcommand("profile", "Gray levels along a line segment");
    profile_cmd->add_option("input", profile.input, "Image")->required();
    profile_cmd->add_option("x0", profile.x0)->required();
    profile_cmd->add_option("y0", profile.y0)->required();
    profile_cmd->add_option("x1", profile.x1)->required();
    profile_cmd->add_option("y1", profile.y1)->required();
    profile_cmd->add_option("output", profile.output, "CSV to write (default: standard output)");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark grid from a manifest");
    bench_cmd->add_option("manifest", bench.manifest, "key=value manifest")->required();
    bench_cmd->add_option("--out-dir", bench.out_dir, "Report directory")->capture_default_str();
    bench_cmd->add_option("--jobs", bench.jobs, "Concurrent grid cells (0 = default thread count)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kBadArguments;
    }

    return guarded(err, [&] {
        if (*noise_cmd) {
            if (!noise.sigma2 && !noise.level) throw InvalidArgument("noise: one of --sigma2 or --level is required");
            return cmd_noise(noise, out);
        }
        if (*denoise_cmd) {
            for (const auto& [key, opt] : pipeline_flags)
                if (opt->count() > 0) denoise.flags[key] = flag_values[key];
            return cmd_denoise(denoise, threads, out);
        }
        if (*metrics_cmd) return cmd_metrics(metrics, out);
        if (*ssim_cmd) return cmd_ssim_map(ssim, out);
        if (*diff_cmd) return cmd_diff_map(diff, out);
        if (*profile_cmd) return cmd_profile(profile, out);
        return cmd_bench(bench, threads, out, err);
    });
}

}  // namespace mlfe::cli
