#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "mlfe/errors.hpp"
#include "mlfe/io.hpp"
#include "mlfe/metrics.hpp"
#include "mlfe/noise.hpp"
#include "mlfe_cli/bench.hpp"
#include "mlfe_cli/cli.hpp"
#include "mlfe_cli/settings.hpp"

using namespace mlfe;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome mlfe_cmd(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("mlfe_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string scene(const std::string& name, int w, int h) const {
        GrayImage img(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                img(x, y) = 100.0 + 50.0 * ((x / 8 + y / 8) % 2) + 30.0 * std::sin(0.5 * x + 0.3 * y);
        write_image(img, path(name));
        return path(name);
    }

    std::string file_text(const std::string& name) const {
        std::ifstream in(path(name), std::ios::binary);
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    void write_file(const std::string& name, const std::string& text) const {
        std::ofstream(path(name)) << text;
    }

    fs::path dir_;
};

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

std::vector<std::string> cells_of(const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream in(line);
    for (std::string cell; std::getline(in, cell, ',');) cells.push_back(cell);
    return cells;
}

}  // namespace

TEST_F(CliTest, HelpExitsZero) {
    const auto r = mlfe_cmd({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("denoise"), std::string::npos);
}

TEST_F(CliTest, MissingSubcommandIsUsageError) {
    EXPECT_EQ(mlfe_cmd({}).code, cli::kBadArguments);
    EXPECT_EQ(mlfe_cmd({"frobnicate"}).code, cli::kBadArguments);
}

TEST_F(CliTest, NoiseWritesOutputAndReports) {
    const auto in = scene("clean.pgm", 64, 64);
    const auto r = mlfe_cmd({"noise", in, path("noisy.pgm"), "--sigma2", "200", "--seed", "7"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(path("noisy.pgm")));
    EXPECT_NE(r.out.find("realized_variance:"), std::string::npos);
    EXPECT_NE(r.out.find("psnr_db:"), std::string::npos);

    // Reported PSNR describes the written file.
    const double expected = psnr(read_image(path("noisy.pgm")), read_image(in));
    const auto pos = r.out.find("psnr_db: ");
    EXPECT_NEAR(std::stod(r.out.substr(pos + 9)), expected, 1e-4);
}

TEST_F(CliTest, NoiseZeroVarianceIsUsageError) {
    const auto in = scene("clean.pgm", 32, 32);
    const auto r = mlfe_cmd({"noise", in, path("noisy.pgm"), "--sigma2", "0"});
    EXPECT_EQ(r.code, cli::kBadArguments);
    EXPECT_NE(r.err.find("--help"), std::string::npos);
    EXPECT_FALSE(fs::exists(path("noisy.pgm")));
    EXPECT_EQ(mlfe_cmd({"noise", in, path("noisy.pgm")}).code, cli::kBadArguments);
    EXPECT_EQ(mlfe_cmd({"noise", in, path("n.pgm"), "--sigma2", "9", "--level", "9"}).code, cli::kBadArguments);
}

TEST_F(CliTest, NoiseIsByteReproducible) {
    const auto in = scene("clean.pgm", 48, 40);
    ASSERT_EQ(mlfe_cmd({"noise", in, path("a.pgm"), "--level", "1300", "--seed", "3"}).code, 0);
    ASSERT_EQ(mlfe_cmd({"noise", in, path("b.pgm"), "--level", "1300", "--seed", "3"}).code, 0);
    ASSERT_EQ(mlfe_cmd({"noise", in, path("c.pgm"), "--level", "1300", "--seed", "4"}).code, 0);
    EXPECT_EQ(file_text("a.pgm"), file_text("b.pgm"));
    EXPECT_NE(file_text("a.pgm"), file_text("c.pgm"));
}

TEST_F(CliTest, NoiseLevelUsesEffectiveVariance) {
    const auto in = scene("clean.pgm", 32, 32);
    const auto r = mlfe_cmd({"noise", in, path("n.pgm"), "--level", "1300"});
    ASSERT_EQ(r.code, 0);
    const double expected = effective_variance_for_level(read_image(in), 1300.0);
    EXPECT_NEAR(std::stod(r.out.substr(r.out.find(": ") + 2)), expected, 1e-3);
}

TEST_F(CliTest, NoiseMissingInputIsIoError) {
    EXPECT_EQ(mlfe_cmd({"noise", path("absent.pgm"), path("n.pgm"), "--sigma2", "10"}).code, cli::kIoFailure);
}

TEST_F(CliTest, DenoiseTinyImageIsPrecondition) {
    write_image(GrayImage(4, 4, 100.0), path("tiny.pgm"));
    for (const char* method : {"nsct-ht", "bm3d", "mlfe-bm3d"}) {
        EXPECT_EQ(mlfe_cmd({"denoise", path("tiny.pgm"), path("o.pgm"), "--method", method}).code,
                  cli::kPrecondition)
            << method;
        EXPECT_EQ(mlfe_cmd({"denoise", path("tiny.pgm"), path("o.pgm"), "--method", method, "--sigma", "5"}).code,
                  cli::kPrecondition)
            << method;
    }
}

TEST_F(CliTest, DenoiseArgumentErrors) {
    const auto in = scene("in.pgm", 64, 64);
    EXPECT_EQ(mlfe_cmd({"denoise", in, path("o.pgm"), "--method", "median"}).code, cli::kBadArguments);
    EXPECT_EQ(mlfe_cmd({"denoise", in, path("o.pgm"), "--block", "7"}).code, cli::kBadArguments);
    EXPECT_EQ(mlfe_cmd({"denoise", in, path("o.pgm"), "--sigma", "-1"}).code, cli::kBadArguments);
    EXPECT_EQ(mlfe_cmd({"denoise", in, path("o.pgm"), "--k", "3,3"}).code, cli::kBadArguments);
    EXPECT_EQ(mlfe_cmd({"denoise", in, path("o.pgm"), "--method", "nsct-ht", "--trace", path("t.csv")}).code,
              cli::kBadArguments);
    EXPECT_EQ(mlfe_cmd({"denoise", in, path("o.pgm"), "--config", path("absent.cfg")}).code, cli::kIoFailure);
    write_file("bad.cfg", "sigma = 10\nblok = 8\n");
    const auto r = mlfe_cmd({"denoise", in, path("o.pgm"), "--config", path("bad.cfg")});
    EXPECT_EQ(r.code, cli::kBadArguments);
    EXPECT_NE(r.err.find("blok"), std::string::npos);
}

TEST_F(CliTest, DenoiseConfigPrecedence) {
    const auto in = scene("in.pgm", 64, 64);
    write_file("run.cfg", "# fixed sigma\nsigma = 30\nstep = 4   # coarser grid\n");
    auto r = mlfe_cmd({"denoise", in, path("a.pgm"), "--method", "bm3d", "--config", path("run.cfg")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("sigma: 30.0000"), std::string::npos);
    r = mlfe_cmd({"denoise", in, path("b.pgm"), "--method", "bm3d", "--config", path("run.cfg"), "--sigma", "12"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("sigma: 12.0000"), std::string::npos);
    r = mlfe_cmd({"denoise", in, path("c.pgm"), "--method", "bm3d", "--sigma", "30", "--step", "4"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(file_text("a.pgm"), file_text("c.pgm"));
    EXPECT_NE(file_text("a.pgm"), file_text("b.pgm"));
}

TEST_F(CliTest, DenoiseDeterministicAcrossThreads) {
    const auto clean = scene("clean.pgm", 72, 64);
    ASSERT_EQ(mlfe_cmd({"noise", clean, path("n.pgm"), "--level", "1300", "--seed", "1"}).code, 0);
    for (const char* method : {"nsct-ht", "bm3d", "mlfe-bm3d"}) {
        ASSERT_EQ(mlfe_cmd({"--threads", "1", "denoise", path("n.pgm"), path("t1.pgm"), "--method", method}).code, 0);
        ASSERT_EQ(mlfe_cmd({"--threads", "3", "denoise", path("n.pgm"), path("t3.pgm"), "--method", method}).code, 0);
        EXPECT_EQ(file_text("t1.pgm"), file_text("t3.pgm")) << method;
    }
}

TEST_F(CliTest, DenoiseDumpsAndTrace) {
    const auto clean = scene("clean.pgm", 64, 64);
    ASSERT_EQ(mlfe_cmd({"noise", clean, path("n.pgm"), "--level", "900"}).code, 0);
    auto r = mlfe_cmd({"denoise", path("n.pgm"), path("m.pgm"), "--dump-stages", path("stages")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("seconds:"), std::string::npos);
    for (const char* f : {"u_R.pgm", "u_on.pgm", "u_oR.pgm", "u_F.pgm", "output.pgm", "manifest.json"})
        EXPECT_TRUE(fs::exists(dir_ / "stages" / f)) << f;
    EXPECT_EQ(file_text("m.pgm"), file_text("stages/output.pgm"));

    r = mlfe_cmd({"denoise", path("n.pgm"), path("b.pgm"), "--method", "bm3d", "--trace", path("trace.csv"),
                  "--dump-stages", path("bstages")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto trace = lines_of(file_text("trace.csv"));
    ASSERT_GT(trace.size(), 1u);
    EXPECT_EQ(trace[0], "ref_x,ref_y,count,retained,weight");
    EXPECT_TRUE(fs::exists(dir_ / "bstages" / "basic.pgm"));
}

TEST_F(CliTest, MetricsIdenticalFilesGiveSentinels) {
    const auto in = scene("a.pgm", 40, 40);
    const auto r = mlfe_cmd({"metrics", in, in});
    ASSERT_EQ(r.code, 0);
    const auto lines = lines_of(r.out);
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0], "snr_db,psnr_db,rmse,mssim");
    EXPECT_EQ(lines[1], "inf,inf,0.0000,1.000000");
}

TEST_F(CliTest, MetricsSwappedArguments) {
    const auto clean = scene("clean.pgm", 48, 48);
    ASSERT_EQ(mlfe_cmd({"noise", clean, path("n.pgm"), "--sigma2", "300"}).code, 0);
    const auto ab = cells_of(lines_of(mlfe_cmd({"metrics", path("n.pgm"), clean}).out)[1]);
    const auto ba = cells_of(lines_of(mlfe_cmd({"metrics", clean, path("n.pgm")}).out)[1]);
    EXPECT_EQ(ab[2], ba[2]);
    EXPECT_NE(ab[0], ba[0]);
}

TEST_F(CliTest, MetricsMatchLibraryAndConventions) {
    const auto clean = scene("clean.pgm", 48, 48);
    ASSERT_EQ(mlfe_cmd({"noise", clean, path("n.pgm"), "--sigma2", "300"}).code, 0);
    const GrayImage den = read_image(path("n.pgm"));
    const GrayImage ref = read_image(clean);
    const auto row = cells_of(
        lines_of(mlfe_cmd({"metrics", path("n.pgm"), clean, "--snr-convention", "reference", "--mssim-convention",
                           "squared"})
                     .out)[1]);
    EXPECT_NEAR(std::stod(row[0]), snr(den, ref, SnrConvention::ReferenceEnergy), 1e-4);
    EXPECT_NEAR(std::stod(row[1]), psnr(den, ref), 1e-4);
    EXPECT_NEAR(std::stod(row[3]), mssim(den, ref, MssimConvention::MeanOfSquares), 1e-6);

    const auto crop = cells_of(lines_of(mlfe_cmd({"metrics", path("n.pgm"), clean, "--crop", "8,4,20,24"}).out)[1]);
    EXPECT_NEAR(std::stod(crop[2]), rmse(den.crop(8, 4, 20, 24), ref.crop(8, 4, 20, 24)), 1e-4);
    EXPECT_EQ(mlfe_cmd({"metrics", path("n.pgm"), clean, "--crop", "40,40,20,20"}).code, cli::kBadArguments);
}

TEST_F(CliTest, MetricsDimensionMismatch) {
    const auto a = scene("a.pgm", 40, 40);
    const auto b = scene("b.pgm", 40, 41);
    EXPECT_EQ(mlfe_cmd({"metrics", a, b}).code, cli::kBadArguments);
    EXPECT_EQ(mlfe_cmd({"ssim-map", a, b, path("m.png")}).code, cli::kBadArguments);
}

TEST_F(CliTest, SsimMapOfIdenticalPairIsWhite) {
    const auto a = scene("a.pgm", 40, 32);
    const auto r = mlfe_cmd({"ssim-map", a, a, path("map.png"), "--csv", path("map.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const GrayImage map = read_image(path("map.png"));
    for (double v : map.pixels()) ASSERT_EQ(v, 255.0);
    std::ifstream csv(path("map.csv"));
    const Plane values = read_plane_csv(csv);
    for (double v : values.pixels()) ASSERT_EQ(v, 1.0);
}

TEST_F(CliTest, DiffMapOfSelfIsNeutral) {
    const auto clean = scene("clean.pgm", 40, 40);
    ASSERT_EQ(mlfe_cmd({"noise", clean, path("n.pgm"), "--sigma2", "300"}).code, 0);
    ASSERT_EQ(mlfe_cmd({"ssim-map", path("n.pgm"), clean, path("m.png"), "--csv", path("m.csv")}).code, 0);
    for (const char* src : {"m.png", "m.csv"}) {
        ASSERT_EQ(mlfe_cmd({"diff-map", path(src), path(src), path("d.ppm")}).code, 0) << src;
        const std::string ppm = file_text("d.ppm");
        const GrayImage map = read_image(path("m.png"));
        const std::string header =
            "P6\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n255\n";
        ASSERT_EQ(ppm.substr(0, header.size()), header);
        const std::string body = ppm.substr(header.size());
        ASSERT_EQ(body.size(), map.size() * 3u);
        for (char c : body) ASSERT_EQ(static_cast<unsigned char>(c), 255);
    }
}

TEST_F(CliTest, DiffMapSignAndMismatch) {
    std::ofstream(path("hi.csv")) << "0.9,0.9\n0.9,0.9\n";
    std::ofstream(path("lo.csv")) << "0.5,0.5\n0.5,0.5\n";
    std::ofstream(path("odd.csv")) << "0.5,0.5,0.5\n";
    auto r = mlfe_cmd({"diff-map", path("hi.csv"), path("lo.csv"), path("d.ppm")});
    ASSERT_EQ(r.code, 0);
    const std::string ppm = file_text("d.ppm");
    const auto body = ppm.substr(ppm.size() - 12);
    EXPECT_EQ(static_cast<unsigned char>(body[0]), 255);  // red dominant
    EXPECT_EQ(static_cast<unsigned char>(body[2]), 0);
    EXPECT_EQ(mlfe_cmd({"diff-map", path("hi.csv"), path("odd.csv"), path("d.ppm")}).code, cli::kBadArguments);
    EXPECT_EQ(mlfe_cmd({"diff-map", path("hi.csv"), path("lo.csv"), path("d.ppm"), "--scale", "-1"}).code,
              cli::kBadArguments);
}

TEST_F(CliTest, ProfileExamples) {
    write_image(GrayImage(20, 10, 77.0), path("flat.pgm"));
    ASSERT_EQ(mlfe_cmd({"profile", path("flat.pgm"), "1", "2", "15", "8", path("p.csv")}).code, 0);
    auto lines = lines_of(file_text("p.csv"));
    ASSERT_GT(lines.size(), 2u);
    for (std::size_t i = 1; i < lines.size(); ++i) EXPECT_EQ(std::stod(cells_of(lines[i])[3]), 77.0);

    auto r = mlfe_cmd({"profile", path("flat.pgm"), "4", "4", "4", "4"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(lines_of(r.out).size(), 2u);

    GrayImage ramp(30, 30);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 30; ++x) ramp(x, y) = 3.0 * x + 4.0 * y;
    write_image(ramp, path("ramp.pgm"));
    lines = lines_of(mlfe_cmd({"profile", path("ramp.pgm"), "0", "0", "29", "20"}).out);
    for (std::size_t i = 2; i < lines.size(); ++i)
        EXPECT_GT(std::stod(cells_of(lines[i])[3]), std::stod(cells_of(lines[i - 1])[3]));

    EXPECT_EQ(mlfe_cmd({"profile", path("flat.pgm"), "0", "0", "20", "5"}).code, cli::kBadArguments);
    EXPECT_EQ(mlfe_cmd({"profile", path("flat.pgm"), "-1", "0", "2", "5"}).code, cli::kBadArguments);
}

TEST_F(CliTest, BenchTwoMethodsGiveTwoRows) {
    scene("img.pgm", 64, 64);
    write_file("m.cfg", "images = img.pgm\nsigma2 = 900\nmethods = noisy, nsct-ht\n");
    const auto r = mlfe_cmd({"bench", path("m.cfg"), "--out-dir", path("out")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto lines = lines_of(file_text("out/report.csv"));
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0], "image,sigma2,seed,method,region,snr_db,psnr_db,rmse,mssim,seconds");
    EXPECT_EQ(cells_of(lines[1])[3], "noisy");
    EXPECT_EQ(cells_of(lines[2])[3], "nsct-ht");
    EXPECT_TRUE(fs::exists(dir_ / "out" / "report.md"));
}

TEST_F(CliTest, BenchEmptyMethodsIsUsageError) {
    scene("img.pgm", 64, 64);
    write_file("m.cfg", "images = img.pgm\nsigma2 = 900\nmethods =\n");
    EXPECT_EQ(mlfe_cmd({"bench", path("m.cfg"), "--out-dir", path("out")}).code, cli::kBadArguments);
    write_file("n.cfg", "images = img.pgm\nsigma2 = 900\n");
    EXPECT_EQ(mlfe_cmd({"bench", path("n.cfg"), "--out-dir", path("out")}).code, cli::kBadArguments);
    write_file("u.cfg", "images = img.pgm\nsigma2 = 900\nmethods = bm3d\nbogus = 1\n");
    EXPECT_EQ(mlfe_cmd({"bench", path("u.cfg"), "--out-dir", path("out")}).code, cli::kBadArguments);
}

TEST_F(CliTest, BenchFailureKeepsPartialResults) {
    scene("img.pgm", 64, 64);
    write_file("m.cfg", "images = img.pgm, absent.pgm\nsigma2 = 900\nmethods = noisy\n");
    const auto r = mlfe_cmd({"bench", path("m.cfg"), "--out-dir", path("out")});
    EXPECT_EQ(r.code, cli::kIoFailure);
    const auto lines = lines_of(file_text("out/report.csv"));
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_NE(cells_of(lines[1])[6], "nan");
    EXPECT_EQ(cells_of(lines[2])[6], "nan");
    EXPECT_NE(file_text("out/report.md").find("FAILED"), std::string::npos);
}

TEST_F(CliTest, BenchGridOrderRegionsAndReproducibility) {
    scene("a.pgm", 64, 64);
    scene("b.pgm", 72, 64);
    write_file("m.cfg",
               "images = a.pgm, b.pgm\nsigma2 = 600, 1300\nseeds = 2\nmethods = noisy, bm3d, mlfe-bm3d\n"
               "region.center = 16,16,32,32\nssim_maps = true\ntiming = false\n");
    ASSERT_EQ(mlfe_cmd({"bench", path("m.cfg"), "--out-dir", path("o1"), "--jobs", "1"}).code, 0);
    ASSERT_EQ(mlfe_cmd({"bench", path("m.cfg"), "--out-dir", path("o3"), "--jobs", "3"}).code, 0);
    const std::string csv = file_text("o1/report.csv");
    EXPECT_EQ(csv, file_text("o3/report.csv"));
    EXPECT_EQ(file_text("o1/report.md"), file_text("o3/report.md"));
    for (const auto& entry : fs::directory_iterator(dir_ / "o1" / "maps")) {
        const auto name = entry.path().filename().string();
        EXPECT_EQ(file_text("o1/maps/" + name), file_text("o3/maps/" + name)) << name;
    }
    EXPECT_TRUE(fs::exists(dir_ / "o1" / "maps" / "a_s600_seed2_center_mlfe-bm3d_minus_bm3d.png"));

    const auto lines = lines_of(csv);
    ASSERT_EQ(lines.size(), 1u + 2 * 2 * 1 * 3 * 2);
    const auto first = cells_of(lines[1]);
    EXPECT_EQ(first[0], "a");
    EXPECT_EQ(first[1], "600");
    EXPECT_EQ(first[2], "2");
    EXPECT_EQ(first[3], "noisy");
    EXPECT_EQ(first[4], "whole");
    EXPECT_EQ(cells_of(lines[2])[4], "center");
    EXPECT_EQ(cells_of(lines.back())[0], "b");
    EXPECT_EQ(cells_of(lines.back())[9], "0.000");
}

TEST_F(CliTest, BenchNoisyInputsGiveReducedReport) {
    const auto clean = scene("clean.pgm", 64, 64);
    ASSERT_EQ(mlfe_cmd({"noise", clean, path("scan.pgm"), "--level", "900"}).code, 0);
    write_file("m.cfg", "images = scan.pgm\ninputs = noisy\nmethods = bm3d\ntiming = false\n");
    ASSERT_EQ(mlfe_cmd({"bench", path("m.cfg"), "--out-dir", path("out")}).code, 0);
    const auto lines = lines_of(file_text("out/report.csv"));
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[1], "scan,-,0,bm3d,whole,n/a,n/a,n/a,n/a,0.000");
    EXPECT_TRUE(fs::exists(dir_ / "out" / "images" / "scan_bm3d.png"));
    write_file("c.cfg", "images = scan.pgm\ninputs = noisy\nmethods = bm3d\nsigma = calibrated\n");
    EXPECT_EQ(mlfe_cmd({"bench", path("c.cfg"), "--out-dir", path("out")}).code, cli::kBadArguments);
}

TEST(CliSettings, ParsesCommentsAndRejectsDuplicates) {
    std::istringstream ok("# comment\n\n a = 1 \nb=x,y # trailing\n");
    const auto s = cli::parse_settings(ok, "t");
    EXPECT_EQ(s.at("a"), "1");
    EXPECT_EQ(s.at("b"), "x,y");
    std::istringstream dup("a=1\na=2\n");
    EXPECT_THROW((void)cli::parse_settings(dup, "t"), InvalidArgument);
    std::istringstream nokey("just text\n");
    EXPECT_THROW((void)cli::parse_settings(nokey, "t"), InvalidArgument);
}

TEST(CliSettings, PipelineKeysMapToConfig) {
    const auto cfg = cli::pipeline_config({{"sigma", "12.5"},
                                           {"levels", "3"},
                                           {"k", "2,3,4"},
                                           {"fusion_gains", "1,2,1"},
                                           {"enhance_layer", "2"},
                                           {"final_stage", "full"},
                                           {"block", "4"},
                                           {"transform_basic", "dct"},
                                           {"match_threshold_final", "300"}});
    EXPECT_EQ(cfg.sigma_source, SigmaSource::Supplied);
    EXPECT_EQ(cfg.sigma, 12.5);
    EXPECT_EQ(cfg.pyramid.levels, 3);
    EXPECT_EQ(cfg.threshold.k, (std::vector<double>{2, 3, 4}));
    EXPECT_EQ(cfg.final_mode, FinalStage::FullBm3dOnFused);
    EXPECT_EQ(cfg.basic.block, 4);
    EXPECT_EQ(cfg.final_stage.block, 4);
    EXPECT_EQ(cfg.basic.transform2d, Transform2D::Dct);
    EXPECT_EQ(cfg.final_stage.match_threshold, 300.0);
    EXPECT_EQ(cfg.basic.match_threshold, 2500.0);
    EXPECT_THROW((void)cli::pipeline_config({{"levels", "3"}}), InvalidArgument);  // k length mismatch
    EXPECT_THROW((void)cli::pipeline_config({{"sigma", "abc"}}), InvalidArgument);
    EXPECT_THROW((void)cli::pipeline_config({{"unknown", "1"}}), InvalidArgument);
}

TEST(CliSettings, EveryDocumentedKeyIsAccepted) {
    const cli::Settings samples = {
        {"sigma", "10"},           {"threads", "2"},          {"levels", "4"},
        {"filters", "starlet"},    {"boundary", "periodic"},  {"k", "3,3,3,4"},
        {"enhance_layer", "3"},    {"enhance_gain", "2"},     {"fusion_gains", "1,2,2,1"},
        {"final_stage", "pilot"},  {"block", "8"},            {"step", "3"},
        {"search_radius", "19"},   {"group_max", "16"},       {"lambda3d", "2.7"},
        {"window_beta", "2"},      {"match_threshold_basic", "2500"},
        {"match_threshold_final", "400"}, {"transform_basic", "bior1.5"}, {"transform_final", "dct"},
    };
    ASSERT_EQ(samples.size(), cli::pipeline_keys().size());
    for (const auto& k : cli::pipeline_keys()) {
        ASSERT_TRUE(samples.count(std::string(k.key))) << k.key;
        EXPECT_FALSE(k.help.empty());
        EXPECT_NO_THROW((void)cli::pipeline_config({{std::string(k.key), samples.at(std::string(k.key))}}))
            << k.key;
    }
}
