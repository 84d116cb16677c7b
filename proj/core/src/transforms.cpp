#include "mlfe/transforms.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "mlfe/errors.hpp"

namespace mlfe {
namespace {

constexpr int kMaxSide = 64;

void require_block(std::span<double> block, int n) {
    if (!is_power_of_two(n) || n > kMaxSide)
        throw InvalidArgument("block side must be a power of two <= 64");
    if (block.size() != static_cast<std::size_t>(n) * n)
        throw InvalidArgument("block buffer does not match side length");
}

// out = M * in (rows) or in * M^T, for an n x n block and n x n matrix.
void apply_rows(std::span<double> block, int n, const std::vector<double>& m, bool transpose) {
    std::array<double, kMaxSide> tmp{};
    for (int r = 0; r < n; ++r) {
        double* row = block.data() + static_cast<std::size_t>(r) * n;
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                s += (transpose ? m[static_cast<std::size_t>(i) * n + k] : m[static_cast<std::size_t>(k) * n + i]) * row[i];
            }
            tmp[k] = s;
        }
        for (int k = 0; k < n; ++k) row[k] = tmp[k];
    }
}

void apply_cols(std::span<double> block, int n, const std::vector<double>& m, bool transpose) {
    std::array<double, kMaxSide> tmp{};
    for (int c = 0; c < n; ++c) {
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                s += (transpose ? m[static_cast<std::size_t>(i) * n + k] : m[static_cast<std::size_t>(k) * n + i]) *
                     block[static_cast<std::size_t>(i) * n + c];
            }
            tmp[k] = s;
        }
        for (int k = 0; k < n; ++k) block[static_cast<std::size_t>(k) * n + c] = tmp[k];
    }
}

// Lifting correction applied to the Haar average: bior1.5 lowpass equals
// s[k] + (-3 d[k-2] + 22 d[k-1] - 22 d[k+1] + 3 d[k+2]) / 128.
double lift(const double* d, int half, int k) {
    const auto at = [&](int i) { return d[((i % half) + half) % half]; };
    return (-3.0 * at(k - 2) + 22.0 * at(k - 1) - 22.0 * at(k + 1) + 3.0 * at(k + 2)) / 128.0;
}

template <class Access>
void bior_forward_line(Access&& x, int n) {
    const int half = n / 2;
    std::array<double, kMaxSide> s{};
    std::array<double, kMaxSide> d{};
    for (int k = 0; k < half; ++k) {
        s[k] = (x(2 * k) + x(2 * k + 1)) / std::numbers::sqrt2;
        d[k] = (x(2 * k + 1) - x(2 * k)) / std::numbers::sqrt2;
    }
    for (int k = 0; k < half; ++k) {
        x(k) = s[k] + lift(d.data(), half, k);
        x(half + k) = d[k];
    }
}

template <class Access>
void bior_inverse_line(Access&& x, int n) {
    const int half = n / 2;
    std::array<double, kMaxSide> s{};
    std::array<double, kMaxSide> d{};
    for (int k = 0; k < half; ++k) d[k] = x(half + k);
    for (int k = 0; k < half; ++k) s[k] = x(k) - lift(d.data(), half, k);
    for (int k = 0; k < half; ++k) {
        x(2 * k) = (s[k] - d[k]) / std::numbers::sqrt2;
        x(2 * k + 1) = (s[k] + d[k]) / std::numbers::sqrt2;
    }
}

}  // namespace

Transform2D parse_transform(std::string_view name) {
    if (name == "bior1.5") return Transform2D::Bior15;
    if (name == "dct") return Transform2D::Dct;
    throw InvalidArgument("unknown 2D transform '" + std::string(name) + "'");
}

std::string_view to_string(Transform2D t) noexcept { return t == Transform2D::Bior15 ? "bior1.5" : "dct"; }

bool is_power_of_two(int n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

const std::vector<double>& dct_matrix(int n) {
    static std::mutex lock;
    static std::map<int, std::vector<double>> cache;
    std::lock_guard guard(lock);
    auto [it, inserted] = cache.try_emplace(n);
    if (inserted) {
        auto& m = it->second;
        m.resize(static_cast<std::size_t>(n) * n);
        for (int k = 0; k < n; ++k) {
            const double alpha = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
            for (int i = 0; i < n; ++i) {
                m[static_cast<std::size_t>(k) * n + i] =
                    alpha * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
            }
        }
    }
    return it->second;
}

void dct2d(std::span<double> block, int n) {
    require_block(block, n);
    const auto& m = dct_matrix(n);
    apply_rows(block, n, m, false);
    apply_cols(block, n, m, false);
}

void idct2d(std::span<double> block, int n) {
    require_block(block, n);
    const auto& m = dct_matrix(n);
    apply_cols(block, n, m, true);
    apply_rows(block, n, m, true);
}

const Bior15Filters& bior15_filters() {
    static const Bior15Filters f = [] {
        Bior15Filters out{};
        constexpr double lo[] = {3, -3, -22, 22, 128, 128, 22, -22, -3, 3};
        const double norm = 1.0 / (128.0 * std::numbers::sqrt2);
        for (int i = 0; i < Bior15Filters::kTaps; ++i) {
            out.analysis_low[i] = lo[i] * norm;
            out.analysis_high[i] = 0.0;
        }
        out.analysis_high[4] = -1.0 / std::numbers::sqrt2;
        out.analysis_high[5] = 1.0 / std::numbers::sqrt2;
        return out;
    }();
    return f;
}

void bior15_forward_1d(std::span<double> x, int n) {
    if (n < 2 || n % 2 != 0 || static_cast<std::size_t>(n) > x.size() || n > kMaxSide)
        throw InvalidArgument("bior15_forward_1d: invalid length");
    bior_forward_line([&](int i) -> double& { return x[static_cast<std::size_t>(i)]; }, n);
}

void bior15_inverse_1d(std::span<double> x, int n) {
    if (n < 2 || n % 2 != 0 || static_cast<std::size_t>(n) > x.size() || n > kMaxSide)
        throw InvalidArgument("bior15_inverse_1d: invalid length");
    bior_inverse_line([&](int i) -> double& { return x[static_cast<std::size_t>(i)]; }, n);
}

void bior15_forward_2d(std::span<double> block, int n) {
    require_block(block, n);
    // Separable: the full-depth 1D transform on every row, then every column.
    for (int r = 0; r < n; ++r) {
        double* row = block.data() + static_cast<std::size_t>(r) * n;
        for (int m = n; m >= 2; m /= 2) bior_forward_line([row](int i) -> double& { return row[i]; }, m);
    }
    for (int c = 0; c < n; ++c) {
        double* col = block.data() + c;
        for (int m = n; m >= 2; m /= 2)
            bior_forward_line([col, n](int i) -> double& { return col[static_cast<std::size_t>(i) * n]; }, m);
    }
}

void bior15_inverse_2d(std::span<double> block, int n) {
    require_block(block, n);
    for (int c = 0; c < n; ++c) {
        double* col = block.data() + c;
        for (int m = 2; m <= n; m *= 2)
            bior_inverse_line([col, n](int i) -> double& { return col[static_cast<std::size_t>(i) * n]; }, m);
    }
    for (int r = 0; r < n; ++r) {
        double* row = block.data() + static_cast<std::size_t>(r) * n;
        for (int m = 2; m <= n; m *= 2) bior_inverse_line([row](int i) -> double& { return row[i]; }, m);
    }
}

void forward_2d(Transform2D t, std::span<double> block, int n) {
    if (t == Transform2D::Dct) {
        dct2d(block, n);
    } else {
        bior15_forward_2d(block, n);
    }
}

void inverse_2d(Transform2D t, std::span<double> block, int n) {
    if (t == Transform2D::Dct) {
        idct2d(block, n);
    } else {
        bior15_inverse_2d(block, n);
    }
}

void haar_forward(std::span<double> v) {
    const int n = static_cast<int>(v.size());
    if (!is_power_of_two(n) || n > 1024) throw InvalidArgument("haar: length must be a power of two");
    std::array<double, 1024> tmp{};
    for (int len = n; len >= 2; len /= 2) {
        const int half = len / 2;
        for (int k = 0; k < half; ++k) {
            const double a = v[2 * k];
            const double b = v[2 * k + 1];
            tmp[k] = (a + b) / std::numbers::sqrt2;
            tmp[half + k] = (a - b) / std::numbers::sqrt2;
        }
        for (int k = 0; k < len; ++k) v[k] = tmp[k];
    }
}

void haar_inverse(std::span<double> v) {
    const int n = static_cast<int>(v.size());
    if (!is_power_of_two(n) || n > 1024) throw InvalidArgument("haar: length must be a power of two");
    std::array<double, 1024> tmp{};
    for (int len = 2; len <= n; len *= 2) {
        const int half = len / 2;
        for (int k = 0; k < half; ++k) {
            const double s = v[k];
            const double d = v[half + k];
            tmp[2 * k] = (s + d) / std::numbers::sqrt2;
            tmp[2 * k + 1] = (s - d) / std::numbers::sqrt2;
        }
        for (int k = 0; k < len; ++k) v[k] = tmp[k];
    }
}

}  // namespace mlfe
