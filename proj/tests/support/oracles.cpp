#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <tuple>

namespace mlfe::oracle {

Plane random_plane(int width, int height, std::uint64_t seed, double lo, double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Plane p(width, height);
    for (double& v : p.pixels()) v = dist(rng);
    return p;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    const std::size_t n = a.size(), m = b[0].size(), k = b.size();
    Matrix c(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l)
            for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a[0].size(), std::vector<double>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
    return t;
}

Matrix invert(Matrix a) {
    const std::size_t n = a.size();
    Matrix inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-14) throw std::runtime_error("singular matrix");
        std::swap(a[col], a[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double d = a[col][col];
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

const double kBior15DecLow[10] = {
    0.01657281518405971,  -0.01657281518405971, -0.12153397801643787, 0.12153397801643787,
    0.7071067811865476,   0.7071067811865476,   0.12153397801643787,  -0.12153397801643787,
    -0.01657281518405971, 0.01657281518405971,
};
const double kBior15DecHigh[10] = {0.0, 0.0, 0.0, 0.0, -0.7071067811865476, 0.7071067811865476, 0.0, 0.0, 0.0, 0.0};

Matrix bior15_analysis_matrix(int n) {
    Matrix total(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) total[i][i] = 1.0;
    for (int len = n; len >= 2; len /= 2) {
        Matrix level(n, std::vector<double>(n, 0.0));
        for (int i = len; i < n; ++i) level[i][i] = 1.0;
        const int half = len / 2;
        for (int k = 0; k < half; ++k) {
            for (int m = 0; m < 10; ++m) {
                const int src = ((2 * k + m - 4) % len + len) % len;
                level[k][src] += kBior15DecLow[m];
                level[half + k][src] += kBior15DecHigh[m];
            }
        }
        total = multiply(level, total);
    }
    return total;
}

Matrix dct_matrix(int n) {
    Matrix c(n, std::vector<double>(n));
    for (int k = 0; k < n; ++k) {
        const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
        for (int i = 0; i < n; ++i) c[k][i] = scale * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
    }
    return c;
}

Matrix haar_matrix(int n) {
    if (n == 1) return {{1.0}};
    const Matrix h = haar_matrix(n / 2);
    const int half = n / 2;
    Matrix out(n, std::vector<double>(n, 0.0));
    const double r = 1.0 / std::numbers::sqrt2;
    for (int i = 0; i < half; ++i)
        for (int j = 0; j < half; ++j) {
            out[i][2 * j] = h[i][j] * r;
            out[i][2 * j + 1] = h[i][j] * r;
        }
    for (int k = 0; k < half; ++k) {
        out[half + k][2 * k] = r;
        out[half + k][2 * k + 1] = -r;
    }
    return out;
}

namespace {

Matrix block_of(const std::vector<double>& v, std::size_t offset, int n) {
    Matrix b(n, std::vector<double>(n));
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) b[y][x] = v[offset + static_cast<std::size_t>(y) * n + x];
    return b;
}

}  // namespace

std::vector<double> transform_3d(const std::vector<double>& volume, int block, int count, Transform2D t,
                                 bool inverse) {
    Matrix a = t == Transform2D::Dct ? dct_matrix(block) : bior15_analysis_matrix(block);
    Matrix h = haar_matrix(count);
    if (inverse) {
        a = invert(a);
        h = transpose(h);
    }
    const Matrix at = transpose(a);
    const std::size_t area = static_cast<std::size_t>(block) * block;
    std::vector<double> out(volume.size());
    std::vector<double> planar(volume.size());
    auto apply_2d = [&](const std::vector<double>& src, std::vector<double>& dst) {
        for (int m = 0; m < count; ++m) {
            const Matrix r = multiply(multiply(a, block_of(src, m * area, block)), at);
            for (int y = 0; y < block; ++y)
                for (int x = 0; x < block; ++x) dst[m * area + y * block + x] = r[y][x];
        }
    };
    auto apply_group = [&](const std::vector<double>& src, std::vector<double>& dst) {
        for (std::size_t k = 0; k < area; ++k)
            for (int i = 0; i < count; ++i) {
                double s = 0.0;
                for (int j = 0; j < count; ++j) s += h[i][j] * src[j * area + k];
                dst[i * area + k] = s;
            }
    };
    if (!inverse) {
        apply_2d(volume, planar);
        apply_group(planar, out);
    } else {
        apply_group(volume, planar);
        apply_2d(planar, out);
    }
    return out;
}

std::vector<Point> brute_force_match(const GrayImage& img, Point ref, const Bm3dProfile& profile) {
    const int b = profile.block;
    std::vector<std::tuple<double, int, int>> all;
    for (int y = 0; y + b <= img.height(); ++y) {
        for (int x = 0; x + b <= img.width(); ++x) {
            if (std::abs(x - ref.x) > profile.search_radius || std::abs(y - ref.y) > profile.search_radius) continue;
            if (x == ref.x && y == ref.y) continue;
            double d = 0.0;
            for (int j = 0; j < b; ++j)
                for (int i = 0; i < b; ++i) {
                    const double diff = img(ref.x + i, ref.y + j) - img(x + i, y + j);
                    d += diff * diff;
                }
            d /= static_cast<double>(b * b);
            if (d <= profile.match_threshold) all.emplace_back(d, y, x);
        }
    }
    std::sort(all.begin(), all.end());
    int keep = 1;
    while (keep * 2 <= std::min<int>(profile.group_max, static_cast<int>(all.size()) + 1)) keep *= 2;
    std::vector<Point> members{ref};
    for (int i = 0; i + 1 < keep; ++i) members.push_back({std::get<2>(all[i]), std::get<1>(all[i])});
    return members;
}

FilterResult hard_threshold_group(const std::vector<double>& volume, int block, int count,
                                  const Bm3dProfile& profile) {
    std::vector<double> c = transform_3d(volume, block, count, profile.transform2d, false);
    const double t = profile.lambda3d * profile.sigma;
    FilterResult r;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const bool dc = i == 0;
        if (!dc && std::abs(c[i]) < t) c[i] = 0.0;
        if (c[i] != 0.0) ++r.retained;
    }
    r.weight = r.retained == 0 ? 1.0 : 1.0 / (profile.sigma * profile.sigma * r.retained);
    r.volume = transform_3d(c, block, count, profile.transform2d, true);
    return r;
}

FilterResult wiener_group(const std::vector<double>& noisy, const std::vector<double>& pilot, int block,
                          int count, const Bm3dProfile& profile) {
    std::vector<double> c = transform_3d(noisy, block, count, profile.transform2d, false);
    const std::vector<double> p = transform_3d(pilot, block, count, profile.transform2d, false);
    const double s2 = profile.sigma * profile.sigma;
    double energy = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const bool pilot_dc = i == 0 && p[i] != 0.0;
        const double w = pilot_dc ? 1.0 : p[i] * p[i] / (p[i] * p[i] + s2);
        c[i] *= w;
        energy += w * w;
    }
    FilterResult r;
    r.weight = energy == 0.0 ? 1.0 : 1.0 / (s2 * energy);
    r.volume = transform_3d(c, block, count, profile.transform2d, true);
    return r;
}

}  // namespace mlfe::oracle
