#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mlfe/metrics.hpp"
#include "mlfe/mlfe.hpp"

namespace mlfe::cli {

/// Flat key=value settings. Later sources override earlier ones key by key.
using Settings = std::map<std::string, std::string>;

struct KeyDoc {
    std::string_view key;
    std::string_view help;
};

/// Keys that configure a denoising run; accepted by `denoise` and `bench`.
[[nodiscard]] const std::vector<KeyDoc>& pipeline_keys();

/// Parses `key = value` lines. `#` starts a comment; blank lines are ignored;
/// a key may appear once per source.
[[nodiscard]] Settings parse_settings(std::istream& in, std::string_view origin);
[[nodiscard]] Settings read_settings_file(const std::filesystem::path& path);

/// Throws InvalidArgument naming the first key not in `allowed`.
void require_known(const Settings& settings, const std::vector<std::string_view>& allowed, std::string_view origin);

/// `overrides` wins over `base` for every key it sets.
[[nodiscard]] Settings merged(Settings base, const Settings& overrides);

[[nodiscard]] double parse_real(std::string_view key, std::string_view text);
[[nodiscard]] long long parse_integer(std::string_view key, std::string_view text);
[[nodiscard]] bool parse_bool(std::string_view key, std::string_view text);
/// Comma-separated items, trimmed; empty items are rejected.
[[nodiscard]] std::vector<std::string> parse_list(std::string_view key, std::string_view text);
[[nodiscard]] std::vector<double> parse_real_list(std::string_view key, std::string_view text);

/// Pipeline configuration from the keys of pipeline_keys(); absent keys keep
/// their defaults. `sigma` switches the sigma source to Supplied.
[[nodiscard]] MlfeConfig pipeline_config(const Settings& settings);

[[nodiscard]] SnrConvention parse_snr_convention(std::string_view text);
[[nodiscard]] MssimConvention parse_mssim_convention(std::string_view text);

enum class Method { Noisy, NsctHt, Bm3d, MlfeBm3d };

/// "noisy" is accepted only where `allow_noisy` is set (bench reports).
[[nodiscard]] Method parse_method(std::string_view text, bool allow_noisy = false);
[[nodiscard]] std::string_view to_string(Method m) noexcept;

struct MethodRun {
    GrayImage output;
    double sigma = 0.0;
    GrayImage basic;    // first-stage estimate, bm3d only
    MlfeStages stages;  // mlfe-bm3d only
};

/// Runs one method on `noisy`. Sigma comes from the config (supplied or
/// estimated); the NSP preprocessing alone does not use it.
[[nodiscard]] MethodRun run_method(Method method, const GrayImage& noisy, const MlfeConfig& config,
                                   std::vector<GroupTraceRow>* trace = nullptr);

}  // namespace mlfe::cli
