#include "mlfe_cli/settings.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "mlfe/errors.hpp"

namespace mlfe::cli {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view text, std::string_view expected) {
    throw InvalidArgument("invalid value '" + std::string(text) + "' for " + std::string(key) + ": expected " +
                          std::string(expected));
}

int as_int(std::string_view key, std::string_view text) {
    const long long v = parse_integer(key, text);
    if (v < -1'000'000'000LL || v > 1'000'000'000LL) bad_value(key, text, "an integer in range");
    return static_cast<int>(v);
}

}  // namespace

const std::vector<KeyDoc>& pipeline_keys() {
    static const std::vector<KeyDoc> keys = {
        {"sigma", "noise standard deviation handed to BM3D; estimated from the finest pyramid layer when absent"},
        {"threads", "worker threads for block processing (0 = MLFE_THREADS or all cores)"},
        {"levels", "pyramid depth, 2..6 (default 4)"},
        {"filters", "pyramid filter bank: 9-7 or starlet (default 9-7)"},
        {"boundary", "pyramid boundary extension: symmetric or periodic (default symmetric)"},
        {"k", "hard-threshold multipliers per layer, coarse to fine (default 3,3,3,4)"},
        {"enhance_layer", "layer amplified after thresholding (default 3)"},
        {"enhance_gain", "gain for enhance_layer (default 2)"},
        {"fusion_gains", "per-layer gains after fusion, coarse to fine (default 1,2,2,1)"},
        {"final_stage", "pilot (Wiener on the noisy image with the fused pilot) or full (BM3D on the fused image)"},
        {"block", "block side, power of two (default 8)"},
        {"step", "reference block stride (default 3)"},
        {"search_radius", "half-width of the search window (default 19)"},
        {"group_max", "largest group, power of two (default 16)"},
        {"lambda3d", "hard-threshold multiplier (default 2.7)"},
        {"window_beta", "Kaiser window beta for aggregation (default 2)"},
        {"match_threshold_basic", "per-pixel squared distance cutoff, first stage (default 2500)"},
        {"match_threshold_final", "per-pixel squared distance cutoff, second stage (default 400)"},
        {"transform_basic", "2D transform of the first stage: bior1.5 or dct (default bior1.5)"},
        {"transform_final", "2D transform of the second stage: bior1.5 or dct (default dct)"},
    };
    return keys;
}

Settings parse_settings(std::istream& in, std::string_view origin) {
    Settings out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view text = line;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        text = trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        const std::string where = std::string(origin) + ":" + std::to_string(number);
        if (eq == std::string_view::npos) throw InvalidArgument(where + ": expected key = value");
        const std::string key(trim(text.substr(0, eq)));
        const std::string value(trim(text.substr(eq + 1)));
        if (key.empty()) throw InvalidArgument(where + ": empty key");
        if (!out.emplace(key, value).second) throw InvalidArgument(where + ": duplicate key '" + key + "'");
    }
    return out;
}

Settings read_settings_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_settings(in, path.string());
}

void require_known(const Settings& settings, const std::vector<std::string_view>& allowed, std::string_view origin) {
    for (const auto& [key, value] : settings) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw InvalidArgument(std::string(origin) + ": unknown key '" + key + "'");
    }
}

Settings merged(Settings base, const Settings& overrides) {
    for (const auto& [key, value] : overrides) base[key] = value;
    return base;
}

double parse_real(std::string_view key, std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v) || text.empty())
        bad_value(key, text, "a finite number");
    return v;
}

long long parse_integer(std::string_view key, std::string_view text) {
    text = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) bad_value(key, text, "an integer");
    return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
    text = trim(text);
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    bad_value(key, text, "true or false");
}

std::vector<std::string> parse_list(std::string_view key, std::string_view text) {
    std::vector<std::string> items;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (item.empty()) bad_value(key, text, "a comma-separated list without empty items");
        items.emplace_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return items;
}

std::vector<double> parse_real_list(std::string_view key, std::string_view text) {
    std::vector<double> out;
    for (const auto& item : parse_list(key, text)) out.push_back(parse_real(key, item));
    return out;
}

MlfeConfig pipeline_config(const Settings& settings) {
    std::vector<std::string_view> allowed;
    for (const auto& k : pipeline_keys()) allowed.push_back(k.key);
    require_known(settings, allowed, "settings");

    MlfeConfig cfg;
    const auto get = [&](std::string_view key) -> const std::string* {
        const auto it = settings.find(std::string(key));
        return it == settings.end() ? nullptr : &it->second;
    };

    if (const auto* v = get("sigma")) {
        cfg.sigma_source = SigmaSource::Supplied;
        cfg.sigma = parse_real("sigma", *v);
        if (!(cfg.sigma > 0.0)) bad_value("sigma", *v, "a positive number");
    }
    if (const auto* v = get("threads")) {
        cfg.threads = as_int("threads", *v);
        if (cfg.threads < 0) bad_value("threads", *v, "a count >= 0");
    }
    if (const auto* v = get("levels")) cfg.pyramid.levels = as_int("levels", *v);
    if (const auto* v = get("filters")) cfg.pyramid.filters = parse_filter_bank(*v);
    if (const auto* v = get("boundary")) {
        if (*v == "symmetric") {
            cfg.pyramid.boundary = Boundary::Symmetric;
        } else if (*v == "periodic") {
            cfg.pyramid.boundary = Boundary::Periodic;
        } else {
            bad_value("boundary", *v, "symmetric or periodic");
        }
    }
    if (const auto* v = get("k")) cfg.threshold.k = parse_real_list("k", *v);
    if (const auto* v = get("enhance_layer")) cfg.threshold.enhance_layer = as_int("enhance_layer", *v);
    if (const auto* v = get("enhance_gain")) cfg.threshold.enhance_gain = parse_real("enhance_gain", *v);
    if (const auto* v = get("fusion_gains")) cfg.fusion_gains = parse_real_list("fusion_gains", *v);
    if (const auto* v = get("final_stage")) {
        if (*v == "pilot") {
            cfg.final_mode = FinalStage::WienerWithFusedPilot;
        } else if (*v == "full") {
            cfg.final_mode = FinalStage::FullBm3dOnFused;
        } else {
            bad_value("final_stage", *v, "pilot or full");
        }
    }
    for (Bm3dProfile* p : {&cfg.basic, &cfg.final_stage}) {
        if (const auto* v = get("block")) p->block = as_int("block", *v);
        if (const auto* v = get("step")) p->step = as_int("step", *v);
        if (const auto* v = get("search_radius")) p->search_radius = as_int("search_radius", *v);
        if (const auto* v = get("group_max")) p->group_max = as_int("group_max", *v);
        if (const auto* v = get("lambda3d")) p->lambda3d = parse_real("lambda3d", *v);
        if (const auto* v = get("window_beta")) p->window_beta = parse_real("window_beta", *v);
    }
    if (const auto* v = get("match_threshold_basic")) cfg.basic.match_threshold = parse_real("match_threshold_basic", *v);
    if (const auto* v = get("match_threshold_final"))
        cfg.final_stage.match_threshold = parse_real("match_threshold_final", *v);
    if (const auto* v = get("transform_basic")) cfg.basic.transform2d = parse_transform(*v);
    if (const auto* v = get("transform_final")) cfg.final_stage.transform2d = parse_transform(*v);

    // Validate everything up front so a bad value fails before any work.
    (void)nsp_min_dimension(cfg.pyramid);
    if (static_cast<int>(cfg.threshold.k.size()) != cfg.pyramid.levels)
        throw InvalidArgument("k needs one value per pyramid layer");
    if (static_cast<int>(cfg.fusion_gains.size()) != cfg.pyramid.levels)
        throw InvalidArgument("fusion_gains needs one value per pyramid layer");
    for (double k : cfg.threshold.k)
        if (!(k > 0.0)) throw InvalidArgument("k values must be positive");
    if (cfg.threshold.enhance_layer < 1 || cfg.threshold.enhance_layer > cfg.pyramid.levels)
        throw InvalidArgument("enhance_layer out of range");
    Bm3dProfile probe = cfg.basic;
    probe.sigma = 1.0;
    probe.validate();
    probe = cfg.final_stage;
    probe.sigma = 1.0;
    probe.validate();
    return cfg;
}

SnrConvention parse_snr_convention(std::string_view text) {
    if (text == "centered") return SnrConvention::CenteredEstimate;
    if (text == "reference") return SnrConvention::ReferenceEnergy;
    bad_value("snr convention", text, "centered or reference");
}

MssimConvention parse_mssim_convention(std::string_view text) {
    if (text == "mean") return MssimConvention::Mean;
    if (text == "squared") return MssimConvention::MeanOfSquares;
    bad_value("mssim convention", text, "mean or squared");
}

Method parse_method(std::string_view text, bool allow_noisy) {
    if (text == "nsct-ht") return Method::NsctHt;
    if (text == "bm3d") return Method::Bm3d;
    if (text == "mlfe-bm3d") return Method::MlfeBm3d;
    if (allow_noisy && text == "noisy") return Method::Noisy;
    bad_value("method", text, allow_noisy ? "noisy, nsct-ht, bm3d or mlfe-bm3d" : "nsct-ht, bm3d or mlfe-bm3d");
}

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::Noisy: return "noisy";
        case Method::NsctHt: return "nsct-ht";
        case Method::Bm3d: return "bm3d";
        case Method::MlfeBm3d: return "mlfe-bm3d";
    }
    return "?";
}

MethodRun run_method(Method method, const GrayImage& noisy, const MlfeConfig& config,
                     std::vector<GroupTraceRow>* trace) {
    MethodRun r;
    switch (method) {
        case Method::Noisy:
            r.output = noisy;
            break;
        case Method::NsctHt:
            r.output = nsp_threshold_enhance(noisy, config.threshold, config.pyramid);
            break;
        case Method::Bm3d: {
            r.sigma = resolve_sigma(noisy, config);
            Bm3dProfile basic = config.basic;
            Bm3dProfile final_stage = config.final_stage;
            basic.sigma = final_stage.sigma = r.sigma;
            const Bm3dRun run{config.threads, trace};
            r.basic = bm3d_basic(noisy, basic, run);
            r.output = bm3d_final(noisy, r.basic, final_stage, run);
            break;
        }
        case Method::MlfeBm3d:
            r.stages = mlfe_bm3d_stages(noisy, config);
            r.sigma = r.stages.sigma;
            r.output = r.stages.output;
            break;
    }
    return r;
}

}  // namespace mlfe::cli
