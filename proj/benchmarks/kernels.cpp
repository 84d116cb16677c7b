#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mlfe/bm3d.hpp"
#include "mlfe/metrics.hpp"
#include "mlfe/mlfe.hpp"
#include "mlfe/nsp.hpp"
#include "mlfe/transforms.hpp"

using namespace mlfe;

namespace {

GrayImage noise_image(int w, int h, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    GrayImage img(w, h);
    for (auto& v : img.pixels()) v = u(rng);
    return img;
}

std::vector<double> block_data(int n) {
    const GrayImage img = noise_image(n, n, 3);
    return {img.pixels().begin(), img.pixels().end()};
}

void BM_Bior15Forward(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto data = block_data(n);
    for (auto _ : state) {
        bior15_forward_2d(data, n);
        benchmark::DoNotOptimize(data.data());
    }
}
BENCHMARK(BM_Bior15Forward)->Arg(8)->Arg(16)->Arg(32);

void BM_Dct2d(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto data = block_data(n);
    for (auto _ : state) {
        dct2d(data, n);
        benchmark::DoNotOptimize(data.data());
    }
}
BENCHMARK(BM_Dct2d)->Arg(8)->Arg(16)->Arg(32);

void BM_Forward3d(benchmark::State& state) {
    const int count = static_cast<int>(state.range(0));
    std::vector<double> volume(static_cast<std::size_t>(64 * count));
    const auto src = block_data(8);
    for (std::size_t i = 0; i < volume.size(); ++i) volume[i] = src[i % src.size()];
    for (auto _ : state) {
        forward_3d(volume, 8, count, Transform2D::Bior15);
        inverse_3d(volume, 8, count, Transform2D::Bior15);
        benchmark::DoNotOptimize(volume.data());
    }
}
BENCHMARK(BM_Forward3d)->Arg(4)->Arg(16);

void BM_BlockMatch(benchmark::State& state) {
    const GrayImage img = noise_image(128, 128, 7);
    Bm3dProfile p = Bm3dProfile::basic(25.0);
    p.search_radius = static_cast<int>(state.range(0));
    p.match_threshold = 1e9;
    for (auto _ : state) benchmark::DoNotOptimize(block_match(img, {60, 60}, p));
}
BENCHMARK(BM_BlockMatch)->Arg(8)->Arg(19);

void BM_NspDecompose(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const GrayImage img = noise_image(n, n, 11);
    for (auto _ : state) benchmark::DoNotOptimize(nsp_decompose(img));
    state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_NspDecompose)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_NspRoundTrip(benchmark::State& state) {
    const GrayImage img = noise_image(256, 256, 13);
    for (auto _ : state) benchmark::DoNotOptimize(nsp_reconstruct(nsp_decompose(img)));
}
BENCHMARK(BM_NspRoundTrip)->Unit(benchmark::kMillisecond);

void BM_Bm3dBasic(benchmark::State& state) {
    const GrayImage img = noise_image(96, 96, 17);
    const Bm3dRun run{1, nullptr};
    for (auto _ : state) benchmark::DoNotOptimize(bm3d_basic(img, Bm3dProfile::basic(25.0), run));
}
BENCHMARK(BM_Bm3dBasic)->Unit(benchmark::kMillisecond);

void BM_SsimMap(benchmark::State& state) {
    const GrayImage a = noise_image(256, 256, 19);
    const GrayImage b = noise_image(256, 256, 23);
    for (auto _ : state) benchmark::DoNotOptimize(ssim_map(a, b));
}
BENCHMARK(BM_SsimMap)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
