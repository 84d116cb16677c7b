#include "mlfe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "mlfe/errors.hpp"

namespace mlfe {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double squared_error_sum(const GrayImage& a, const GrayImage& b) {
    auto pa = a.pixels();
    auto pb = b.pixels();
    double s = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double d = pa[i] - pb[i];
        s += d * d;
    }
    return s;
}

// Sums over every k x k window, computed as vertical then horizontal k-sums.
Plane window_sums(const Plane& p, int k) {
    const int w = p.width();
    const int h = p.height();
    Plane vertical(w, h - k + 1);
    for (int y = 0; y + k <= h; ++y) {
        auto out = vertical.row(y);
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int j = 0; j < k; ++j) s += p(x, y + j);
            out[x] = s;
        }
    }
    Plane sums(w - k + 1, h - k + 1);
    for (int y = 0; y < sums.height(); ++y) {
        auto in = vertical.row(y);
        auto out = sums.row(y);
        for (int x = 0; x < sums.width(); ++x) {
            double s = 0.0;
            for (int j = 0; j < k; ++j) s += in[x + j];
            out[x] = s;
        }
    }
    return sums;
}

Plane product(const Plane& a, const Plane& b) {
    Plane out(a.width(), a.height());
    auto pa = a.pixels();
    auto pb = b.pixels();
    auto po = out.pixels();
    for (std::size_t i = 0; i < po.size(); ++i) po[i] = pa[i] * pb[i];
    return out;
}

}  // namespace

double mse(const GrayImage& denoised, const GrayImage& reference) {
    require_same_shape(denoised, reference, "mse");
    if (denoised.empty()) throw InvalidArgument("mse: empty images");
    return squared_error_sum(denoised, reference) / static_cast<double>(denoised.size());
}

double rmse(const GrayImage& denoised, const GrayImage& reference) {
    return std::sqrt(mse(denoised, reference));
}

double psnr(const GrayImage& denoised, const GrayImage& reference) {
    const double e = mse(denoised, reference);
    if (e == 0.0) return kInf;
    return 20.0 * std::log10(kPeak / std::sqrt(e));
}

double snr(const GrayImage& denoised, const GrayImage& reference, SnrConvention convention) {
    require_same_shape(denoised, reference, "snr");
    if (denoised.empty()) throw InvalidArgument("snr: empty images");
    const double noise = squared_error_sum(denoised, reference);
    if (noise == 0.0) return kInf;
    double signal = 0.0;
    if (convention == SnrConvention::CenteredEstimate) {
        const double mu = mean(denoised);
        for (double v : denoised.pixels()) signal += (v - mu) * (v - mu);
    } else {
        signal = sum_of_squares(reference);
    }
    return 10.0 * std::log10(signal / noise);
}

SsimMap ssim_map(const GrayImage& denoised, const GrayImage& reference) {
    require_same_shape(denoised, reference, "ssim_map");
    if (denoised.width() < kSsimWindow || denoised.height() < kSsimWindow)
        throw TooSmall("ssim_map: images must be at least 8x8");

    constexpr double c1 = (0.01 * kPeak) * (0.01 * kPeak);
    constexpr double c2 = (0.03 * kPeak) * (0.03 * kPeak);
    constexpr double c3 = c2 / 2.0;
    constexpr double n = kSsimWindow * kSsimWindow;

    const Plane sa = window_sums(denoised, kSsimWindow);
    const Plane sb = window_sums(reference, kSsimWindow);
    const Plane saa = window_sums(product(denoised, denoised), kSsimWindow);
    const Plane sbb = window_sums(product(reference, reference), kSsimWindow);
    const Plane sab = window_sums(product(denoised, reference), kSsimWindow);

    SsimMap map{Plane(sa.width(), sa.height())};
    auto out = map.values.pixels();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double ma = sa.pixels()[i] / n;
        const double mb = sb.pixels()[i] / n;
        const double va = std::max(0.0, saa.pixels()[i] / n - ma * ma);
        const double vb = std::max(0.0, sbb.pixels()[i] / n - mb * mb);
        const double cov = sab.pixels()[i] / n - ma * mb;
        const double sd_ab = std::sqrt(va) * std::sqrt(vb);

        const double luminance = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
        const double contrast = (2.0 * sd_ab + c2) / (va + vb + c2);
        const double structure = (cov + c3) / (sd_ab + c3);
        out[i] = std::clamp(luminance * contrast * structure, -1.0, 1.0);
    }
    return map;
}

double mssim(const SsimMap& map, MssimConvention convention) {
    if (map.values.empty()) throw InvalidArgument("mssim: empty map");
    double s = 0.0;
    for (double v : map.values.pixels()) s += convention == MssimConvention::Mean ? v : v * v;
    return s / static_cast<double>(map.values.size());
}

double mssim(const GrayImage& denoised, const GrayImage& reference, MssimConvention convention) {
    return mssim(ssim_map(denoised, reference), convention);
}

QualityReport evaluate(const GrayImage& denoised, const GrayImage& reference,
                       const MetricOptions& options) {
    QualityReport r;
    r.rmse = rmse(denoised, reference);
    r.psnr = r.rmse == 0.0 ? kInf : 20.0 * std::log10(kPeak / r.rmse);
    r.snr = snr(denoised, reference, options.snr);
    r.mssim = mssim(denoised, reference, options.mssim);
    return r;
}

Plane ssim_diff_map(const SsimMap& a, const SsimMap& b) {
    require_same_shape(a.values, b.values, "ssim_diff_map");
    return a.values - b.values;
}

RgbImage render_signed(const Plane& diff, double scale) {
    if (scale < 0.0) throw InvalidArgument("render_signed: negative scale");
    if (scale == 0.0) {
        for (double v : diff.pixels()) scale = std::max(scale, std::abs(v));
    }
    RgbImage img{diff.width(), diff.height(), {}};
    img.rgb.resize(diff.size() * 3);
    auto px = diff.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        const double t = scale > 0.0 ? std::min(std::abs(px[i]) / scale, 1.0) : 0.0;
        const auto fade = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - t)));
        std::uint8_t* p = &img.rgb[3 * i];
        if (px[i] > 0.0) {
            p[0] = 255, p[1] = fade, p[2] = fade;
        } else if (px[i] < 0.0) {
            p[0] = fade, p[1] = fade, p[2] = 255;
        } else {
            p[0] = p[1] = p[2] = 255;
        }
    }
    return img;
}

GrayImage render_ssim(const SsimMap& map) {
    GrayImage out = map.values;
    for (auto& v : out.pixels()) v = (v + 1.0) * 127.5;
    return out;
}

SsimMap decode_ssim(const GrayImage& rendered) {
    SsimMap map{rendered};
    for (auto& v : map.values.pixels()) v = v / 127.5 - 1.0;
    return map;
}

std::vector<ProfileSample> line_profile(const GrayImage& img, Point p0, Point p1) {
    if (!img.contains(p0) || !img.contains(p1))
        throw InvalidArgument("line_profile: endpoint outside the image");
    std::vector<ProfileSample> samples;
    const int dx = std::abs(p1.x - p0.x);
    const int dy = -std::abs(p1.y - p0.y);
    const int sx = p0.x < p1.x ? 1 : -1;
    const int sy = p0.y < p1.y ? 1 : -1;
    int err = dx + dy;
    Point p = p0;
    for (;;) {
        const double ex = p.x - p0.x;
        const double ey = p.y - p0.y;
        samples.push_back({std::hypot(ex, ey), p, img(p.x, p.y)});
        if (p == p1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            p.x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            p.y += sy;
        }
    }
    return samples;
}

void write_profile_csv(const std::vector<ProfileSample>& profile, std::ostream& out) {
    out << "distance,x,y,intensity\n";
    out << std::setprecision(10);
    for (const auto& s : profile) {
        out << s.distance << ',' << s.at.x << ',' << s.at.y << ',' << s.intensity << '\n';
    }
}

void write_plane_csv(const Plane& plane, std::ostream& out) {
    out << std::setprecision(17);
    for (int y = 0; y < plane.height(); ++y) {
        auto r = plane.row(y);
        for (int x = 0; x < plane.width(); ++x) {
            if (x) out << ',';
            out << r[x];
        }
        out << '\n';
    }
}

Plane read_plane_csv(std::istream& in) {
    std::vector<double> data;
    int width = -1;
    int height = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        int count = 0;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) throw FormatError("read_plane_csv: non-numeric cell '" + cell + "'");
            data.push_back(v);
            ++count;
        }
        if (width < 0) width = count;
        if (count != width) throw FormatError("read_plane_csv: ragged rows");
        ++height;
    }
    if (height == 0 || width <= 0) throw FormatError("read_plane_csv: empty map");
    return Plane(width, height, std::move(data));
}

}  // namespace mlfe
