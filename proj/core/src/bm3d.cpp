#include "mlfe/bm3d.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <tuple>

#include "mlfe/errors.hpp"
#include "mlfe/parallel.hpp"

namespace mlfe {
namespace {

struct Candidate {
    double distance;
    Point at;
};

bool closer(const Candidate& a, const Candidate& b) noexcept {
    return std::tie(a.distance, a.at.y, a.at.x) < std::tie(b.distance, b.at.y, b.at.x);
}

int largest_power_of_two_at_most(int n) noexcept {
    int p = 1;
    while (p * 2 <= n) p *= 2;
    return p;
}

// Distance with early exit once the partial sum exceeds `bound` (per pixel).
double bounded_distance(const GrayImage& img, Point a, Point b, int block, double bound) {
    const double norm = 1.0 / (static_cast<double>(block) * block);
    const double limit = bound / norm;
    double s = 0.0;
    for (int r = 0; r < block; ++r) {
        const double* pa = img.row(a.y + r).data() + a.x;
        const double* pb = img.row(b.y + r).data() + b.x;
        double row = 0.0;
        for (int c = 0; c < block; ++c) {
            const double d = pa[c] - pb[c];
            row += d * d;
        }
        s += row;
        if (s > limit) return s * norm;
    }
    return s * norm;
}

void require_fits(const GrayImage& img, const Bm3dProfile& profile) {
    if (img.width() < profile.block || img.height() < profile.block) {
        throw TooSmall("BM3D: image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                       " is smaller than the " + std::to_string(profile.block) + "px block");
    }
}

struct StageItem {
    std::vector<Point> positions;
    FilteredGroup filtered;
};

template <class Filter>
GrayImage run_stage(int width, int height, const Bm3dProfile& profile, const Bm3dRun& run, Filter&& filter) {
    const auto ys = reference_coordinates(height, profile.block, profile.step);
    const auto xs = reference_coordinates(width, profile.block, profile.step);
    const int threads = run.threads > 0 ? run.threads : default_threads();

    Aggregator agg(width, height, profile);
    std::vector<StageItem> items(xs.size());
    for (int y : ys) {
        parallel_for(0, static_cast<int>(xs.size()), threads, [&](int i) {
            items[static_cast<std::size_t>(i)] = filter(Point{xs[static_cast<std::size_t>(i)], y});
        });
        for (const auto& item : items) {
            agg.add(item.positions, item.filtered.volume, item.filtered.weight);
            if (run.trace) {
                run.trace->push_back({item.positions.front(), static_cast<int>(item.positions.size()),
                                      item.filtered.retained, item.filtered.weight});
            }
        }
    }
    return agg.result();
}

}  // namespace

Bm3dProfile Bm3dProfile::basic(double sigma) {
    Bm3dProfile p;
    p.sigma = sigma;
    p.match_threshold = 2500.0;
    p.transform2d = Transform2D::Bior15;
    return p;
}

Bm3dProfile Bm3dProfile::wiener(double sigma) {
    Bm3dProfile p;
    p.sigma = sigma;
    p.match_threshold = 400.0;
    p.transform2d = Transform2D::Dct;
    return p;
}

void Bm3dProfile::validate() const {
    if (block < 4 || !is_power_of_two(block) || block > 64)
        throw InvalidArgument("bm3d profile: block must be a power of two in [4, 64]");
    if (step < 1) throw InvalidArgument("bm3d profile: step must be >= 1");
    if (group_max < 1 || !is_power_of_two(group_max) || group_max > 1024)
        throw InvalidArgument("bm3d profile: group_max must be a power of two");
    if (2 * search_radius + 1 < block)
        throw InvalidArgument("bm3d profile: search window must contain the block");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("bm3d profile: sigma must be > 0");
    if (!(match_threshold >= 0.0)) throw InvalidArgument("bm3d profile: match_threshold must be >= 0");
    if (!(lambda3d >= 0.0)) throw InvalidArgument("bm3d profile: lambda3d must be >= 0");
    if (!(window_beta >= 0.0)) throw InvalidArgument("bm3d profile: window_beta must be >= 0");
}

double block_distance(const GrayImage& img, Point a, Point b, int block) {
    return bounded_distance(img, a, b, block, std::numeric_limits<double>::infinity());
}

std::vector<double> extract_volume(const GrayImage& img, std::span<const Point> positions, int block) {
    const std::size_t area = static_cast<std::size_t>(block) * block;
    std::vector<double> volume(positions.size() * area);
    for (std::size_t m = 0; m < positions.size(); ++m) {
        double* dst = volume.data() + m * area;
        for (int r = 0; r < block; ++r) {
            const double* src = img.row(positions[m].y + r).data() + positions[m].x;
            std::copy(src, src + block, dst + static_cast<std::size_t>(r) * block);
        }
    }
    return volume;
}

BlockGroup block_match(const GrayImage& img, Point ref, const Bm3dProfile& profile) {
    const int b = profile.block;
    if (ref.x < 0 || ref.y < 0 || ref.x + b > img.width() || ref.y + b > img.height())
        throw InvalidArgument("block_match: reference block outside the image");

    const int x0 = std::max(0, ref.x - profile.search_radius);
    const int x1 = std::min(img.width() - b, ref.x + profile.search_radius);
    const int y0 = std::max(0, ref.y - profile.search_radius);
    const int y1 = std::min(img.height() - b, ref.y + profile.search_radius);

    // Best group_max - 1 non-reference candidates, kept sorted.
    const std::size_t capacity = static_cast<std::size_t>(profile.group_max - 1);
    std::vector<Candidate> best;
    best.reserve(capacity + 1);
    for (int y = y0; y <= y1 && capacity > 0; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (x == ref.x && y == ref.y) continue;
            double bound = profile.match_threshold;
            if (best.size() == capacity) bound = std::min(bound, best.back().distance);
            const Candidate c{bounded_distance(img, ref, {x, y}, b, bound), {x, y}};
            if (c.distance > profile.match_threshold) continue;
            if (best.size() == capacity && !closer(c, best.back())) continue;
            best.insert(std::upper_bound(best.begin(), best.end(), c, closer), c);
            if (best.size() > capacity) best.pop_back();
        }
    }

    BlockGroup group;
    group.reference = ref;
    group.block = b;
    const int keep = largest_power_of_two_at_most(static_cast<int>(best.size()) + 1);
    group.members.reserve(static_cast<std::size_t>(keep));
    group.members.push_back(ref);
    group.distances.push_back(0.0);
    for (int i = 0; i + 1 < keep; ++i) {
        group.members.push_back(best[static_cast<std::size_t>(i)].at);
        group.distances.push_back(best[static_cast<std::size_t>(i)].distance);
    }
    group.volume = extract_volume(img, group.members, b);
    return group;
}

void forward_3d(std::span<double> volume, int block, int count, Transform2D t) {
    const std::size_t area = static_cast<std::size_t>(block) * block;
    if (volume.size() != area * static_cast<std::size_t>(count))
        throw InvalidArgument("forward_3d: volume size mismatch");
    for (int m = 0; m < count; ++m) forward_2d(t, volume.subspan(m * area, area), block);
    if (count == 1) return;
    std::vector<double> line(static_cast<std::size_t>(count));
    for (std::size_t k = 0; k < area; ++k) {
        for (int m = 0; m < count; ++m) line[static_cast<std::size_t>(m)] = volume[m * area + k];
        haar_forward(line);
        for (int m = 0; m < count; ++m) volume[m * area + k] = line[static_cast<std::size_t>(m)];
    }
}

void inverse_3d(std::span<double> volume, int block, int count, Transform2D t) {
    const std::size_t area = static_cast<std::size_t>(block) * block;
    if (volume.size() != area * static_cast<std::size_t>(count))
        throw InvalidArgument("inverse_3d: volume size mismatch");
    if (count > 1) {
        std::vector<double> line(static_cast<std::size_t>(count));
        for (std::size_t k = 0; k < area; ++k) {
            for (int m = 0; m < count; ++m) line[static_cast<std::size_t>(m)] = volume[m * area + k];
            haar_inverse(line);
            for (int m = 0; m < count; ++m) volume[m * area + k] = line[static_cast<std::size_t>(m)];
        }
    }
    for (int m = 0; m < count; ++m) inverse_2d(t, volume.subspan(m * area, area), block);
}

FilteredGroup ht_filter_group(const BlockGroup& group, const Bm3dProfile& profile) {
    FilteredGroup out;
    out.volume = group.volume;
    forward_3d(out.volume, group.block, group.count(), profile.transform2d);

    const double threshold = profile.lambda3d * profile.sigma;
    int retained = 0;
    for (std::size_t i = 0; i < out.volume.size(); ++i) {
        double& c = out.volume[i];
        if (i != 0 && std::abs(c) < threshold) c = 0.0;
        if (c != 0.0) ++retained;
    }
    out.retained = retained;
    out.weight = retained > 0 ? 1.0 / (profile.sigma * profile.sigma * retained) : 1.0;

    inverse_3d(out.volume, group.block, group.count(), profile.transform2d);
    return out;
}

FilteredGroup wiener_filter_group(const BlockGroup& noisy, const BlockGroup& pilot, const Bm3dProfile& profile) {
    if (noisy.block != pilot.block || noisy.count() != pilot.count() ||
        noisy.volume.size() != pilot.volume.size())
        throw InvalidArgument("wiener_filter_group: group geometry mismatch");

    FilteredGroup out;
    out.volume = noisy.volume;
    std::vector<double> spectrum = pilot.volume;
    forward_3d(out.volume, noisy.block, noisy.count(), profile.transform2d);
    forward_3d(spectrum, pilot.block, pilot.count(), profile.transform2d);

    const double s2 = profile.sigma * profile.sigma;
    double energy = 0.0;
    for (std::size_t i = 0; i < out.volume.size(); ++i) {
        const double p2 = spectrum[i] * spectrum[i];
        // The volume DC is kept as is unless the pilot has no mean at all.
        const double w = (i == 0 && p2 > 0.0) ? 1.0 : p2 / (p2 + s2);
        out.volume[i] *= w;
        energy += w * w;
    }
    out.weight = energy > 0.0 ? 1.0 / (s2 * energy) : 1.0;

    inverse_3d(out.volume, noisy.block, noisy.count(), profile.transform2d);
    return out;
}

std::vector<double> kaiser_window(int n, double beta) {
    std::vector<double> w1(static_cast<std::size_t>(n), 1.0);
    if (n > 1) {
        const double norm = std::cyl_bessel_i(0.0, beta);
        for (int i = 0; i < n; ++i) {
            const double r = 2.0 * i / (n - 1) - 1.0;
            w1[static_cast<std::size_t>(i)] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
        }
    }
    std::vector<double> w2(static_cast<std::size_t>(n) * n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            w2[static_cast<std::size_t>(y) * n + x] = w1[static_cast<std::size_t>(y)] * w1[static_cast<std::size_t>(x)];
        }
    }
    return w2;
}

Aggregator::Aggregator(int width, int height, const Bm3dProfile& profile)
    : block_(profile.block),
      window_(kaiser_window(profile.block, profile.window_beta)),
      numerator_(width, height),
      denominator_(width, height) {}

void Aggregator::add(std::span<const Point> positions, std::span<const double> volume, double weight) {
    const std::size_t area = static_cast<std::size_t>(block_) * block_;
    if (volume.size() != positions.size() * area) throw InvalidArgument("aggregate: volume size mismatch");
    for (std::size_t m = 0; m < positions.size(); ++m) {
        const Point p = positions[m];
        if (p.x < 0 || p.y < 0 || p.x + block_ > numerator_.width() || p.y + block_ > numerator_.height())
            throw InvalidArgument("aggregate: block position outside the canvas");
        const double* est = volume.data() + m * area;
        for (int r = 0; r < block_; ++r) {
            double* num = numerator_.row(p.y + r).data() + p.x;
            double* den = denominator_.row(p.y + r).data() + p.x;
            const double* win = window_.data() + static_cast<std::size_t>(r) * block_;
            const double* e = est + static_cast<std::size_t>(r) * block_;
            for (int c = 0; c < block_; ++c) {
                const double k = weight * win[c];
                num[c] += k * e[c];
                den[c] += k;
            }
        }
    }
}

GrayImage Aggregator::result() const {
    GrayImage out(numerator_.width(), numerator_.height());
    auto num = numerator_.pixels();
    auto den = denominator_.pixels();
    auto px = out.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        if (!(den[i] > 0.0)) throw InvalidArgument("aggregate: pixel not covered by any block");
        px[i] = num[i] / den[i];
    }
    return out;
}

GrayImage aggregate(std::span<const Contribution> contributions, int width, int height, const Bm3dProfile& profile) {
    Aggregator agg(width, height, profile);
    for (const auto& c : contributions) agg.add(c.positions, c.volume, c.weight);
    return agg.result();
}

std::vector<int> reference_coordinates(int extent, int block, int step) {
    std::vector<int> out;
    const int last = extent - block;
    if (last < 0) return out;
    for (int v = 0; v < last; v += step) out.push_back(v);
    out.push_back(last);
    return out;
}

void write_trace_csv(const std::vector<GroupTraceRow>& trace, std::ostream& out) {
    out << "ref_x,ref_y,count,retained,weight\n" << std::setprecision(10);
    for (const auto& row : trace) {
        out << row.reference.x << ',' << row.reference.y << ',' << row.count << ',' << row.retained << ','
            << row.weight << '\n';
    }
}

GrayImage bm3d_basic(const GrayImage& noisy, const Bm3dProfile& profile, const Bm3dRun& run) {
    profile.validate();
    require_fits(noisy, profile);
    require_finite(noisy, "bm3d_basic");
    return run_stage(noisy.width(), noisy.height(), profile, run, [&](Point ref) {
        BlockGroup group = block_match(noisy, ref, profile);
        FilteredGroup filtered = ht_filter_group(group, profile);
        return StageItem{std::move(group.members), std::move(filtered)};
    });
}

GrayImage bm3d_final(const GrayImage& noisy, const GrayImage& pilot, const Bm3dProfile& profile, const Bm3dRun& run) {
    profile.validate();
    require_same_shape(noisy, pilot, "bm3d_final");
    require_fits(noisy, profile);
    require_finite(noisy, "bm3d_final");
    require_finite(pilot, "bm3d_final");
    return run_stage(noisy.width(), noisy.height(), profile, run, [&](Point ref) {
        BlockGroup pilot_group = block_match(pilot, ref, profile);
        BlockGroup noisy_group;
        noisy_group.reference = ref;
        noisy_group.block = pilot_group.block;
        noisy_group.members = pilot_group.members;
        noisy_group.distances = pilot_group.distances;
        noisy_group.volume = extract_volume(noisy, noisy_group.members, noisy_group.block);
        FilteredGroup filtered = wiener_filter_group(noisy_group, pilot_group, profile);
        return StageItem{std::move(noisy_group.members), std::move(filtered)};
    });
}

GrayImage bm3d(const GrayImage& noisy, double sigma, const Bm3dRun& run) {
    const GrayImage basic = bm3d_basic(noisy, Bm3dProfile::basic(sigma), run);
    return bm3d_final(noisy, basic, Bm3dProfile::wiener(sigma), run);
}

}  // namespace mlfe
