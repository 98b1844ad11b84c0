#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <set>

#include "ctkit/ctkit.hpp"

using namespace ctkit;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("ctkit_pipe_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string str() const { return path.string(); }
};

DatasetOptions tiny_options(std::uint64_t seed) {
    DatasetOptions opt;
    opt.n_train = 3;
    opt.n_val = 1;
    opt.n_test = 2;
    opt.image_size = 32;
    opt.n_angles = 8;
    opt.i0 = 1e4;
    opt.seed = seed;
    return opt;
}

} // namespace

TEST_CASE("dataset defaults mirror the low-dose experiment shape") {
    DatasetOptions opt;
    REQUIRE(opt.image_size == 128);
    REQUIRE(opt.n_angles == 20);
    REQUIRE(opt.i0 == 1e4);
    const auto geom = make_geometry(opt.n_angles, GridShape(opt.image_size, opt.image_size, 1.0));
    for (std::size_t k = 0; k < 20; ++k)
        REQUIRE(geom.angles[k] == Catch::Approx(std::numbers::pi * k / 20.0).margin(1e-15));
}

TEST_CASE("dataset splits are disjoint, exhaustive and hash-stable") {
    TempDir dir_a("a"), dir_b("b"), dir_c("c");
    auto m1 = build_dataset(tiny_options(7), dir_a.str());
    auto m2 = build_dataset(tiny_options(7), dir_b.str());
    auto m3 = build_dataset(tiny_options(8), dir_c.str());

    REQUIRE(m1.samples.size() == 3 + 1 + 2);
    REQUIRE(m1.split("train").size() == 3);
    REQUIRE(m1.split("val").size() == 1);
    REQUIRE(m1.split("test").size() == 2);

    std::set<std::string> files;
    for (const auto& s : m1.samples) {
        REQUIRE(files.insert(s.phantom).second);
        REQUIRE(files.insert(s.sino_noisy).second);
    }

    // same seed: identical content hashes; different seed: different phantoms
    for (std::size_t i = 0; i < m1.samples.size(); ++i) {
        REQUIRE(m1.samples[i].hashes == m2.samples[i].hashes);
        REQUIRE(m1.samples[i].hashes.at(m1.samples[i].phantom) !=
                m3.samples[i].hashes.at(m3.samples[i].phantom));
    }

    // manifest round trip
    auto loaded = read_manifest(dir_a.str() + "/manifest.jsonl");
    REQUIRE(loaded.samples.size() == m1.samples.size());
    REQUIRE(loaded.seed == 7);
    REQUIRE(loaded.geometry.n_angles() == 8);
    REQUIRE(loaded.i0 == 1e4);
    for (std::size_t i = 0; i < m1.samples.size(); ++i)
        REQUIRE(loaded.samples[i].hashes == m1.samples[i].hashes);
}

TEST_CASE("parameter arithmetic matches the published example exactly") {
    AutomapArch arch;
    arch.n_detectors = 512;
    arch.n_angles = 128;
    arch.image_side = 512;
    auto est = estimate_params(arch);
    REQUIRE(est.param_count == 85899345920ull); // 128*512^3 + 512^4
    REQUIRE(est.memory_bytes == 343597383680ull);
    REQUIRE(est.memory_bytes >= 340ull * 1000 * 1000 * 1000);
}

TEST_CASE("parameter arithmetic edge and desk-scale cases") {
    AutomapArch tiny;
    tiny.n_detectors = 1;
    tiny.n_angles = 1;
    tiny.image_side = 1;
    REQUIRE(estimate_params(tiny).param_count == 2); // 1 + 1

    AutomapArch desk;
    desk.n_detectors = 64;
    desk.n_angles = 16;
    desk.image_side = 64;
    REQUIRE(estimate_params(desk).param_count == 20971520ull);
}

TEST_CASE("estimates agree with the parameters actually allocated") {
    DenoiserArch den;
    den.depth = 5;
    auto den_net = build_denoiser<float>(den, 1);
    REQUIRE(den_net.parameter_count() == estimate_params(den).param_count);

    DenoiserArch den32; // spec default depth
    REQUIRE(den32.depth == 32);
    auto den32_net = build_denoiser<float>(den32, 1);
    REQUIRE(den32_net.parameter_count() == estimate_params(den32).param_count);

    AutomapArch amap;
    amap.n_detectors = 12;
    amap.n_angles = 4;
    amap.image_side = 8;
    amap.conv_channels = 6;
    auto amap_net = build_automap<float>(amap, 2);
    REQUIRE(amap_net.parameter_count() == estimate_params(amap).total_params);
}

TEST_CASE("denoiser dilations cycle from one to ten") {
    DenoiserArch arch;
    REQUIRE(arch.dilation_of(0) == 1);
    REQUIRE(arch.dilation_of(9) == 10);
    REQUIRE(arch.dilation_of(10) == 1);
    REQUIRE(arch.dilation_of(31) == 2);
}

TEST_CASE("tiny denoiser training reduces the loss and is reproducible") {
    TempDir dir("train");
    auto manifest = build_dataset(tiny_options(21), dir.str());

    DenoiserArch arch;
    arch.depth = 4;
    TrainOptions opt;
    opt.epochs = 4;
    opt.batch = 2;
    opt.lr = 2e-3;
    opt.seed = 5;

    auto [net, log] = train_denoiser(manifest, arch, opt);
    REQUIRE(log.train_loss.size() == 4);
    REQUIRE(log.val_loss.size() == 4);
    REQUIRE(log.train_loss.back() < log.train_loss.front());

    auto [net2, log2] = train_denoiser(manifest, arch, opt);
    REQUIRE(log2.train_loss == log.train_loss); // bit-identical trajectory
    REQUIRE(log2.val_loss == log.val_loss);
}

TEST_CASE("zero learning rate freezes the parameters") {
    TempDir dir("frozen");
    auto manifest = build_dataset(tiny_options(31), dir.str());
    DenoiserArch arch;
    arch.depth = 3;
    TrainOptions opt;
    opt.epochs = 2;
    opt.batch = 2;
    opt.lr = 0.0;
    opt.seed = 9;
    auto [net, log] = train_denoiser(manifest, arch, opt);
    auto fresh = build_denoiser<float>(arch, derive_seed(opt.seed, 0xD0153));
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        REQUIRE(net.layers[i].weight.data == fresh.layers[i].weight.data);
        REQUIRE(net.layers[i].bias.data == fresh.layers[i].bias.data);
    }
}

TEST_CASE("end-to-end training respects the dense parameter guard") {
    TempDir dir("guard");
    auto manifest = build_dataset(tiny_options(41), dir.str());

    AutomapArch arch;
    arch.n_detectors = manifest.geometry.n_detectors;
    arch.n_angles = manifest.geometry.n_angles();
    arch.image_side = manifest.geometry.image.width;
    arch.conv_channels = 4;

    TrainOptions opt;
    opt.epochs = 3;
    opt.batch = 2;
    opt.lr = 1e-3;
    opt.seed = 3;

    SECTION("under the guard it trains to a decreasing loss") {
        auto [net, log] = train_end_to_end(manifest, arch, opt);
        REQUIRE(log.train_loss.back() < log.train_loss.front());
    }
    SECTION("a tight guard rejects with the estimate in the message") {
        opt.dense_param_guard = 1000;
        REQUIRE_THROWS_WITH(train_end_to_end(manifest, arch, opt),
                            Catch::Matchers::ContainsSubstring("exceeds guard"));
    }
}

TEST_CASE("evaluation reports the method table and writes artifacts") {
    TempDir dir("eval");
    auto manifest = build_dataset(tiny_options(51), dir.str());

    DenoiserArch arch;
    arch.depth = 3;
    TrainOptions opt;
    opt.epochs = 2;
    opt.batch = 2;
    opt.lr = 1e-3;
    opt.seed = 6;
    opt.checkpoint_path = dir.str() + "/den.ctn";
    train_denoiser(manifest, arch, opt);

    const std::string eval_dir = dir.str() + "/eval";
    auto result = evaluate(manifest, opt.checkpoint_path, "", eval_dir);
    REQUIRE(result.methods.size() == 2); // fbp + denoiser
    REQUIRE(result.by_name("fbp").rmse_per_item.size() == 2);
    REQUIRE(result.by_name("denoiser").rmse_per_item.size() == 2);
    REQUIRE(std::filesystem::exists(eval_dir + "/metrics.csv"));
    REQUIRE(std::filesystem::exists(eval_dir + "/panel_0000.pgm"));
    REQUIRE(std::filesystem::exists(eval_dir + "/denoised_0001.ctr"));

    // csv: per-item rows plus one summary row per method
    std::ifstream csv(eval_dir + "/metrics.csv");
    std::string line;
    std::size_t rows = 0, means = 0;
    std::getline(csv, line); // header
    while (std::getline(csv, line)) {
        ++rows;
        if (line.find(",mean,") != std::string::npos) ++means;
    }
    REQUIRE(rows == 2 * (2 + 1));
    REQUIRE(means == 2);

    // rerun is byte-identical
    const std::string eval_dir2 = dir.str() + "/eval2";
    evaluate(manifest, opt.checkpoint_path, "", eval_dir2);
    REQUIRE(detail::read_file_bytes(eval_dir + "/metrics.csv") ==
            detail::read_file_bytes(eval_dir2 + "/metrics.csv"));
    REQUIRE(detail::read_file_bytes(eval_dir + "/denoised_0000.ctr") ==
            detail::read_file_bytes(eval_dir2 + "/denoised_0000.ctr"));
}

TEST_CASE("missing test split is rejected") {
    TempDir dir("nosplit");
    auto manifest = build_dataset(tiny_options(61), dir.str());
    manifest.samples.erase(std::remove_if(manifest.samples.begin(), manifest.samples.end(),
                                          [](const SampleRecord& s) { return s.split == "test"; }),
                           manifest.samples.end());
    REQUIRE_THROWS_AS(evaluate(manifest, "", "", dir.str() + "/out"), invalid_input);
}

TEST_CASE("raising the dose strictly improves the analytic reconstruction") {
    auto run = [&](double i0, const std::string& tag) {
        TempDir dir("dose_" + tag);
        auto opt = tiny_options(71);
        opt.n_train = 1;
        opt.n_val = 1;
        opt.n_test = 6;
        opt.image_size = 48;
        opt.n_angles = 20;
        opt.i0 = i0;
        auto manifest = build_dataset(opt, dir.str());
        double acc = 0.0;
        for (const auto* s : manifest.split("test")) {
            auto truth = read_image(manifest.resolve(s->phantom));
            auto recon = read_image(manifest.resolve(s->fbp));
            acc += rmse(recon, truth);
        }
        return acc / 6.0;
    };
    const double low = run(1e3, "low");
    const double high = run(1e5, "high");
    CAPTURE(low, high);
    REQUIRE(high < low);
}

TEST_CASE("loss trajectory does not depend on the thread cap") {
    TempDir dir("threads");
    auto manifest = build_dataset(tiny_options(81), dir.str());
    DenoiserArch arch;
    arch.depth = 3;
    TrainOptions opt;
    opt.epochs = 2;
    opt.batch = 2;
    opt.lr = 1e-3;
    opt.seed = 4;

    set_max_threads(1);
    auto [net1, log1] = train_denoiser(manifest, arch, opt);
    set_max_threads(4);
    auto [net4, log4] = train_denoiser(manifest, arch, opt);
    set_max_threads(0);
    REQUIRE(log1.train_loss == log4.train_loss); // gather-only parallelism: bit-identical
    for (std::size_t i = 0; i < net1.layers.size(); ++i)
        REQUIRE(net1.layers[i].weight.data == net4.layers[i].weight.data);
}

TEST_CASE("thread cap falls back to the environment variable") {
    ::setenv("CTKIT_THREADS", "3", 1);
    set_max_threads(0); // re-resolve from the environment
    REQUIRE(max_threads() == 3);
    ::unsetenv("CTKIT_THREADS");
    set_max_threads(0);
    REQUIRE(max_threads() >= 1);
}

TEST_CASE("metric helpers pin the published definitions") {
    REQUIRE(psnr(1.0, 0.0) == 99.0); // exact recovery reports the cap
    // hand case: range 2, rmse 0.5 -> 20*log10(4)
    REQUIRE(psnr(2.0, 0.5) == Catch::Approx(20.0 * std::log10(4.0)));
    ImageGrid a(2, 1), b(2, 1);
    a.data = {1.0, 2.0};
    b.data = {0.0, 0.0};
    REQUIRE(rmse(a, b) == Catch::Approx(std::sqrt(2.5)));
}
