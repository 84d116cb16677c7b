#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "mlfe/image.hpp"
#include "mlfe/transforms.hpp"

namespace mlfe {

/// Grouping and filtering parameters for one BM3D stage.
struct Bm3dProfile {
    int block = 8;
    int step = 3;
    int search_radius = 19;
    int group_max = 16;
    /// Cutoff on the per-pixel mean squared block difference, in gray levels^2.
    double match_threshold = 2500.0;
    double lambda3d = 2.7;
    double sigma = 25.0;
    Transform2D transform2d = Transform2D::Bior15;
    double window_beta = 2.0;

    /// Hard-threshold stage defaults (bior1.5, match cutoff 2500).
    [[nodiscard]] static Bm3dProfile basic(double sigma);
    /// Wiener stage defaults (DCT, match cutoff 400).
    [[nodiscard]] static Bm3dProfile wiener(double sigma);

    /// Throws InvalidArgument on any violated invariant.
    void validate() const;
};

struct BlockGroup {
    Point reference;
    /// Member top-left corners; members[0] is the reference, the rest ascend
    /// by (distance, y, x).
    std::vector<Point> members;
    std::vector<double> distances;
    /// count x block x block samples, member-major.
    std::vector<double> volume;
    int block = 0;

    [[nodiscard]] int count() const noexcept { return static_cast<int>(members.size()); }
};

/// Per-pixel mean squared difference between the blocks at `a` and `b`.
[[nodiscard]] double block_distance(const GrayImage& img, Point a, Point b, int block);

/// Exhaustive search of every block position within search_radius of `ref`.
/// Candidates with distance <= match_threshold are kept, the group is cut to
/// the largest power of two <= group_max, and `volume` is filled from `img`.
[[nodiscard]] BlockGroup block_match(const GrayImage& img, Point ref, const Bm3dProfile& profile);

/// Stacks the blocks of `img` at `positions` into a volume.
[[nodiscard]] std::vector<double> extract_volume(const GrayImage& img, std::span<const Point> positions,
                                                 int block);

struct FilteredGroup {
    std::vector<double> volume;
    double weight = 1.0;
    /// Surviving nonzero coefficients (hard-threshold stage only).
    int retained = 0;
};

/// Forward 3D transform (2D per block + Haar across blocks) of a volume.
void forward_3d(std::span<double> volume, int block, int count, Transform2D t);
void inverse_3d(std::span<double> volume, int block, int count, Transform2D t);

/// Collaborative hard thresholding at lambda3d * sigma; the volume DC is exempt.
[[nodiscard]] FilteredGroup ht_filter_group(const BlockGroup& group, const Bm3dProfile& profile);

/// Empirical Wiener shrinkage of `noisy` guided by the 3D spectrum of `pilot`:
/// w = P^2 / (P^2 + sigma^2) per coefficient. The volume DC keeps w = 1 when the
/// pilot DC is nonzero. Weight 1 / (sigma^2 * sum w^2), or 1 when the sum is 0.
[[nodiscard]] FilteredGroup wiener_filter_group(const BlockGroup& noisy, const BlockGroup& pilot,
                                                const Bm3dProfile& profile);

/// Separable Kaiser window, n x n, row-major.
[[nodiscard]] std::vector<double> kaiser_window(int n, double beta);

/// Weighted-mean accumulator for overlapping block estimates.
class Aggregator {
public:
    Aggregator(int width, int height, const Bm3dProfile& profile);

    void add(std::span<const Point> positions, std::span<const double> volume, double weight);
    /// Throws InvalidArgument if some pixel never received a contribution.
    [[nodiscard]] GrayImage result() const;

private:
    int block_;
    std::vector<double> window_;
    Plane numerator_;
    Plane denominator_;
};

struct Contribution {
    std::vector<Point> positions;
    std::vector<double> volume;
    double weight = 1.0;
};

[[nodiscard]] GrayImage aggregate(std::span<const Contribution> contributions, int width, int height,
                                  const Bm3dProfile& profile);

/// Reference coordinates 0, step, 2*step, ... with extent - block always included.
[[nodiscard]] std::vector<int> reference_coordinates(int extent, int block, int step);

struct GroupTraceRow {
    Point reference;
    int count = 0;
    int retained = 0;
    double weight = 0.0;
};

struct Bm3dRun {
    int threads = 0;  // 0 selects default_threads()
    std::vector<GroupTraceRow>* trace = nullptr;
};

void write_trace_csv(const std::vector<GroupTraceRow>& trace, std::ostream& out);

/// Stage 1: grouping on the noisy image and collaborative hard thresholding.
[[nodiscard]] GrayImage bm3d_basic(const GrayImage& noisy, const Bm3dProfile& profile, const Bm3dRun& run = {});

/// Stage 2: grouping on `pilot`, Wiener shrinkage of the noisy volumes.
[[nodiscard]] GrayImage bm3d_final(const GrayImage& noisy, const GrayImage& pilot, const Bm3dProfile& profile,
                                   const Bm3dRun& run = {});

/// Both stages with their default profiles for `sigma`.
[[nodiscard]] GrayImage bm3d(const GrayImage& noisy, double sigma, const Bm3dRun& run = {});

}  // namespace mlfe
