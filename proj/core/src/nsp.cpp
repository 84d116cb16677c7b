#include "mlfe/nsp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <string>

#include "mlfe/errors.hpp"
#include "mlfe/io.hpp"

namespace mlfe {
namespace {

// CDF 9/7 biorthogonal lowpass pair, center tap first, scaled so that
// H0(0) = G0(0) = sqrt(2). With h1[n] = (-1)^n g0[n] and g1[n] = (-1)^n h0[n]
// the product filter satisfies P(w) + P(w + pi) = 2.
constexpr double kCdf97Analysis[] = {0.8526986790094, 0.37740285561265, -0.11062440441842,
                                     -0.023849465019380, 0.037828455506995};
constexpr double kCdf97Synthesis[] = {0.78848561640566, 0.41809227322221, -0.040689417609558,
                                      -0.064538882628938};

Kernel2D from_dense(const std::vector<double>& dense, int radius) {
    Kernel2D k;
    k.radius = radius;
    const int side = 2 * radius + 1;
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const double w = dense[static_cast<std::size_t>(y) * side + x];
            if (w != 0.0) k.taps.push_back({x - radius, y - radius, w});
        }
    }
    return k;
}

std::vector<double> modulated(std::vector<double> half) {
    for (std::size_t n = 1; n < half.size(); n += 2) half[n] = -half[n];
    return half;
}

std::vector<double> scaled(const double* taps, std::size_t n, double s) {
    std::vector<double> out(taps, taps + n);
    for (auto& v : out) v *= s;
    return out;
}

NspBank make_cdf97() {
    const double norm = 1.0 / std::numbers::sqrt2;
    const auto h0 = scaled(kCdf97Analysis, std::size(kCdf97Analysis), norm);
    const auto g0 = scaled(kCdf97Synthesis, std::size(kCdf97Synthesis), norm);
    return {mcclellan(h0), mcclellan(modulated(g0)), mcclellan(g0), mcclellan(modulated(h0))};
}

NspBank make_starlet() {
    constexpr double b3[] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
    std::vector<double> low(25);
    std::vector<double> high(25);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 5; ++x) {
            low[y * 5 + x] = b3[y] * b3[x];
            high[y * 5 + x] = -low[y * 5 + x];
        }
    }
    high[12] += 1.0;
    const Kernel2D delta{0, {{0, 0, 1.0}}};
    return {from_dense(low, 2), from_dense(high, 2), delta, delta};
}

int extend_index(int i, int n, Boundary boundary) {
    if (boundary == Boundary::Periodic) {
        const int m = i % n;
        return m < 0 ? m + n : m;
    }
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

Plane padded(const Plane& in, int margin, Boundary boundary) {
    const int w = in.width();
    const int h = in.height();
    Plane out(w + 2 * margin, h + 2 * margin);
    std::vector<int> xs(out.width());
    for (int x = 0; x < out.width(); ++x) xs[x] = extend_index(x - margin, w, boundary);
    for (int y = 0; y < out.height(); ++y) {
        auto src = in.row(extend_index(y - margin, h, boundary));
        auto dst = out.row(y);
        for (int x = 0; x < out.width(); ++x) dst[x] = src[xs[x]];
    }
    return out;
}

int deepest_radius(const NspBank& bank, int levels) {
    const int r = std::max({bank.analysis_low.radius, bank.analysis_high.radius,
                            bank.synthesis_low.radius, bank.synthesis_high.radius});
    return r << (levels - 1);
}

void check_options(const NspOptions& options) {
    if (options.levels < 2 || options.levels > 6)
        throw InvalidArgument("nsp: level count must be in 2..6");
}

}  // namespace

NspFilterBank parse_filter_bank(std::string_view name) {
    if (name == "9-7" || name == "cdf97") return NspFilterBank::Cdf97;
    if (name == "starlet") return NspFilterBank::Starlet;
    throw InvalidArgument("unknown pyramid filter bank '" + std::string(name) + "'");
}

std::string_view to_string(NspFilterBank bank) noexcept {
    return bank == NspFilterBank::Cdf97 ? "9-7" : "starlet";
}

double Kernel2D::at(int dx, int dy) const noexcept {
    for (const auto& t : taps) {
        if (t.dx == dx && t.dy == dy) return t.weight;
    }
    return 0.0;
}

double Kernel2D::l2_norm() const noexcept {
    double s = 0.0;
    for (const auto& t : taps) s += t.weight * t.weight;
    return std::sqrt(s);
}

Kernel2D mcclellan(const std::vector<double>& half_taps) {
    if (half_taps.empty()) throw InvalidArgument("mcclellan: empty filter");
    const int radius = static_cast<int>(half_taps.size()) - 1;
    const int side = 2 * radius + 1;
    const auto idx = [side, radius](int dx, int dy) {
        return static_cast<std::size_t>(dy + radius) * side + (dx + radius);
    };

    // Chebyshev recursion T_k = 2 F T_{k-1} - T_{k-2} on dense kernels, where
    // F has taps 1/4 at the four axial neighbours.
    const auto apply_f = [&](const std::vector<double>& t) {
        std::vector<double> out(t.size(), 0.0);
        for (int y = -radius; y <= radius; ++y) {
            for (int x = -radius; x <= radius; ++x) {
                const double v = t[idx(x, y)];
                if (v == 0.0) continue;
                if (x + 1 <= radius) out[idx(x + 1, y)] += 0.25 * v;
                if (x - 1 >= -radius) out[idx(x - 1, y)] += 0.25 * v;
                if (y + 1 <= radius) out[idx(x, y + 1)] += 0.25 * v;
                if (y - 1 >= -radius) out[idx(x, y - 1)] += 0.25 * v;
            }
        }
        return out;
    };

    std::vector<double> prev(static_cast<std::size_t>(side) * side, 0.0);
    prev[idx(0, 0)] = 1.0;
    std::vector<double> result(prev.size(), 0.0);
    result[idx(0, 0)] = half_taps[0];
    if (radius == 0) return from_dense(result, 0);

    std::vector<double> cur = apply_f(prev);
    for (int k = 1; k <= radius; ++k) {
        const double a = 2.0 * half_taps[k];
        for (std::size_t i = 0; i < result.size(); ++i) result[i] += a * cur[i];
        if (k == radius) break;
        auto next = apply_f(cur);
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = 2.0 * next[i] - prev[i];
        prev = std::move(cur);
        cur = std::move(next);
    }
    return from_dense(result, radius);
}

const NspBank& filter_bank(NspFilterBank which) {
    static const NspBank cdf97 = make_cdf97();
    static const NspBank starlet = make_starlet();
    return which == NspFilterBank::Cdf97 ? cdf97 : starlet;
}

Plane convolve(const Plane& in, const Kernel2D& kernel, int dilation, Boundary boundary) {
    const int margin = kernel.radius * dilation;
    const Plane src = margin > 0 ? padded(in, margin, boundary) : in;
    Plane out(in.width(), in.height());
    const int w = in.width();
    for (const auto& tap : kernel.taps) {
        const int ox = margin + tap.dx * dilation;
        const int oy = margin + tap.dy * dilation;
        for (int y = 0; y < in.height(); ++y) {
            const double* s = src.row(y + oy).data() + ox;
            double* d = out.row(y).data();
            for (int x = 0; x < w; ++x) d[x] += tap.weight * s[x];
        }
    }
    return out;
}

Plane& PyramidStack::layer(int index) {
    if (index < 1 || index > layer_count()) throw InvalidArgument("pyramid layer index out of range");
    return layers[static_cast<std::size_t>(index - 1)];
}

const Plane& PyramidStack::layer(int index) const {
    if (index < 1 || index > layer_count()) throw InvalidArgument("pyramid layer index out of range");
    return layers[static_cast<std::size_t>(index - 1)];
}

int nsp_min_dimension(const NspOptions& options) {
    check_options(options);
    return deepest_radius(filter_bank(options.filters), options.levels) + 1;
}

PyramidStack nsp_decompose(const GrayImage& img, const NspOptions& options) {
    const int min_side = nsp_min_dimension(options);
    if (img.width() < min_side || img.height() < min_side) {
        throw TooSmall("nsp_decompose: " + std::to_string(options.levels) +
                       "-level pyramid needs both sides >= " + std::to_string(min_side));
    }
    const NspBank& bank = filter_bank(options.filters);

    PyramidStack stack;
    stack.options = options;
    stack.layers.resize(static_cast<std::size_t>(options.levels));
    Plane approx = img;
    for (int j = 0; j < options.levels; ++j) {
        const int dilation = 1 << j;
        stack.layers[static_cast<std::size_t>(options.levels - 1 - j)] =
            convolve(approx, bank.analysis_high, dilation, options.boundary);
        approx = convolve(approx, bank.analysis_low, dilation, options.boundary);
    }
    stack.lowpass = std::move(approx);
    return stack;
}

GrayImage nsp_reconstruct(const PyramidStack& stack) {
    const int levels = stack.layer_count();
    if (levels != stack.options.levels)
        throw InvalidArgument("nsp_reconstruct: layer count does not match options");
    for (const auto& layer : stack.layers) require_same_shape(layer, stack.lowpass, "nsp_reconstruct");
    const NspBank& bank = filter_bank(stack.options.filters);

    Plane approx = stack.lowpass;
    for (int j = levels - 1; j >= 0; --j) {
        const int dilation = 1 << j;
        const Plane& detail = stack.layers[static_cast<std::size_t>(levels - 1 - j)];
        Plane next = convolve(approx, bank.synthesis_low, dilation, stack.options.boundary);
        next += convolve(detail, bank.synthesis_high, dilation, stack.options.boundary);
        approx = std::move(next);
    }
    return approx;
}

double estimate_sigma(const Plane& layer) {
    if (layer.empty()) throw InvalidArgument("estimate_sigma: empty plane");
    std::vector<double> mags(layer.size());
    auto px = layer.pixels();
    std::transform(px.begin(), px.end(), mags.begin(), [](double v) { return std::abs(v); });
    const std::size_t n = mags.size();
    const std::size_t mid = n / 2;
    std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(mid), mags.end());
    double median = mags[mid];
    if (n % 2 == 0) {
        const double lower = *std::max_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(mid));
        median = 0.5 * (lower + median);
    }
    return median / 0.6745;
}

Plane hard_threshold(const Plane& layer, double threshold) {
    if (threshold < 0.0) throw InvalidArgument("hard_threshold: negative threshold");
    Plane out = layer;
    for (auto& v : out.pixels()) {
        if (std::abs(v) < threshold) v = 0.0;
    }
    return out;
}

PyramidStack scale_layer(PyramidStack stack, int index, double gain) {
    stack.layer(index) *= gain;
    return stack;
}

double finest_layer_noise_gain(const NspOptions& options) {
    return filter_bank(options.filters).analysis_high.l2_norm();
}

double estimate_image_sigma(const GrayImage& img, const NspOptions& options) {
    const PyramidStack stack = nsp_decompose(img, options);
    return estimate_sigma(stack.layers.back()) / finest_layer_noise_gain(options);
}

GrayImage nsp_threshold_enhance(const GrayImage& noisy, const ThresholdPolicy& policy,
                                const NspOptions& options) {
    if (static_cast<int>(policy.k.size()) != options.levels)
        throw InvalidArgument("threshold policy needs one K per pyramid layer");
    for (double k : policy.k) {
        if (!(k > 0.0)) throw InvalidArgument("threshold policy K values must be positive");
    }
    if (policy.enhance_layer < 0 || policy.enhance_layer > options.levels)
        throw InvalidArgument("threshold policy enhance layer out of range");

    PyramidStack stack = nsp_decompose(noisy, options);
    for (int i = 1; i <= stack.layer_count(); ++i) {
        Plane& c = stack.layer(i);
        c = hard_threshold(c, policy.k[static_cast<std::size_t>(i - 1)] * estimate_sigma(c));
    }
    if (policy.enhance_layer > 0) stack = scale_layer(std::move(stack), policy.enhance_layer, policy.enhance_gain);
    return nsp_reconstruct(stack);
}

void dump_stack(const PyramidStack& stack, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["width"] = stack.width();
    manifest["height"] = stack.height();
    manifest["levels"] = stack.layer_count();
    manifest["filters"] = std::string(to_string(stack.options.filters));
    manifest["ordering"] = "coarse-to-fine";

    const auto normalized = [](const Plane& p) {
        const auto [lo, hi] = std::minmax_element(p.pixels().begin(), p.pixels().end());
        Plane out = p;
        const double range = *hi - *lo;
        for (auto& v : out.pixels()) v = range > 0.0 ? 255.0 * (v - *lo) / range : 0.0;
        return std::pair{out, std::pair{*lo, *hi}};
    };

    nlohmann::json planes = nlohmann::json::array();
    for (int i = 1; i <= stack.layer_count(); ++i) {
        const std::string name = "layer" + std::to_string(i) + ".pgm";
        auto [img, range] = normalized(stack.layer(i));
        write_image(img, dir / name);
        planes.push_back({{"file", name}, {"layer", i}, {"min", range.first}, {"max", range.second}});
    }
    auto [low, range] = normalized(stack.lowpass);
    write_image(low, dir / "lowpass.pgm");
    planes.push_back({{"file", "lowpass.pgm"}, {"layer", "lowpass"}, {"min", range.first}, {"max", range.second}});
    manifest["planes"] = planes;

    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
}

}  // namespace mlfe
