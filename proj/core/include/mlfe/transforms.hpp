#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace mlfe {

// Block transforms used by collaborative filtering. All operate in place on
// square row-major blocks whose side is a power of two.

enum class Transform2D { Bior15, Dct };

[[nodiscard]] Transform2D parse_transform(std::string_view name);
[[nodiscard]] std::string_view to_string(Transform2D t) noexcept;

[[nodiscard]] bool is_power_of_two(int n) noexcept;

/// Orthonormal DCT-II basis: row k holds alpha_k * cos(pi * (2i + 1) * k / 2n).
[[nodiscard]] const std::vector<double>& dct_matrix(int n);

void dct2d(std::span<double> block, int n);
void idct2d(std::span<double> block, int n);

/// Biorthogonal 1.5 wavelet taps for the analysis/synthesis bank, in the
/// convention low[k] = sum_m lo[m] * x[(2k + m - 4) mod n].
struct Bior15Filters {
    static constexpr int kTaps = 10;
    double analysis_low[kTaps];
    double analysis_high[kTaps];
};
[[nodiscard]] const Bior15Filters& bior15_filters();

/// One analysis level of the 1D bior1.5 transform on the first `n` samples:
/// lowpass to [0, n/2), highpass to [n/2, n). Periodic extension.
void bior15_forward_1d(std::span<double> x, int n);
void bior15_inverse_1d(std::span<double> x, int n);

/// Separable full-depth 2D transform T * X * T^T, where T is the full-depth 1D
/// periodic bior1.5 analysis operator of length n.
void bior15_forward_2d(std::span<double> block, int n);
void bior15_inverse_2d(std::span<double> block, int n);

void forward_2d(Transform2D t, std::span<double> block, int n);
void inverse_2d(Transform2D t, std::span<double> block, int n);

/// Orthonormal full-depth Haar: output [approx, coarsest detail, ..., finest detail].
void haar_forward(std::span<double> v);
void haar_inverse(std::span<double> v);

}  // namespace mlfe
