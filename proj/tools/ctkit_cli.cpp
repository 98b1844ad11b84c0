// Command-line front end: every subcommand maps onto one library operation
// and echoes its fully resolved configuration to run.json next to its
// outputs. Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctkit/ctkit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_run_json(const std::string& anchor_path, bool anchor_is_dir, const json& config) {
    fs::path dir = anchor_is_dir ? fs::path(anchor_path) : fs::path(anchor_path).parent_path();
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    std::ofstream out((dir / "run.json").string());
    out << config.dump(2) << "\n";
}

std::vector<double> resolve_angles(std::size_t n_angles, const std::string& angles_file) {
    if (!angles_file.empty()) return ctkit::read_angles_file(angles_file);
    return ctkit::equispaced_angles(n_angles);
}

ctkit::FilterSpec parse_filter(const std::string& name, double cutoff, std::size_t pad) {
    ctkit::FilterSpec spec;
    if (name == "ramlak")
        spec.kind = ctkit::FilterKind::RamLak;
    else if (name == "hann")
        spec.kind = ctkit::FilterKind::Hann;
    else
        throw ctkit::invalid_input("unknown filter: " + name + " (expected ramlak or hann)");
    spec.cutoff = cutoff;
    spec.padded_length = pad;
    return spec;
}

ctkit::Sinogram load_sinogram(const std::string& path, const std::string& angles_file) {
    ctkit::Sinogram sino = ctkit::read_sinogram(path);
    if (!angles_file.empty()) {
        auto angles = ctkit::read_angles_file(angles_file);
        ctkit::require(angles.size() == sino.n_angles(),
                       "angles file row count does not match the sinogram");
        sino.geometry.angles = std::move(angles);
        sino.geometry.validate();
    }
    return sino;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ctkit: parallel-beam CT simulation, FBP/SIRT reconstruction and "
                 "from-scratch learned low-dose pipelines"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default(); // show defaults in --help

    unsigned threads = 0;
    app.add_option("--threads", threads, "cap worker threads (default: CTKIT_THREADS or all cores)");

    // ---- phantom -------------------------------------------------------
    auto* cmd_phantom = app.add_subcommand("phantom", "generate a phantom image");
    struct {
        std::string kind = "shepp";
        std::size_t size = 128;
        double pixel_size = 1.0;
        std::size_t nell_min = 3, nell_max = 8;
        double att_min = 0.1, att_max = 1.0, clip_max = 1.0;
        std::uint64_t seed = 0;
        std::string out;
    } ph;
    cmd_phantom->add_option("--kind", ph.kind, "shepp | ellipses")->default_str("shepp");
    cmd_phantom->add_option("--size", ph.size, "image side in pixels");
    cmd_phantom->add_option("--pixel-size", ph.pixel_size, "pixel edge length (length units)");
    cmd_phantom->add_option("--n-ellipses-min", ph.nell_min, "ellipses: minimum count");
    cmd_phantom->add_option("--n-ellipses-max", ph.nell_max, "ellipses: maximum count");
    cmd_phantom->add_option("--att-min", ph.att_min, "ellipses: minimum added attenuation");
    cmd_phantom->add_option("--att-max", ph.att_max, "ellipses: maximum added attenuation");
    cmd_phantom->add_option("--clip-max", ph.clip_max, "ellipses: clip summed attenuation here");
    cmd_phantom->add_option("--seed", ph.seed, "phantom seed");
    cmd_phantom->add_option("--out", ph.out, "output CTR1 path")->required();
    cmd_phantom->callback([&] {
        ctkit::PhantomSpec spec;
        if (ph.kind == "shepp")
            spec.kind = ctkit::PhantomKind::SheppLogan;
        else if (ph.kind == "ellipses")
            spec.kind = ctkit::PhantomKind::RandomEllipses;
        else
            throw ctkit::invalid_input("unknown phantom kind: " + ph.kind);
        spec.size = ph.size;
        spec.pixel_size = ph.pixel_size;
        spec.n_ellipses_min = ph.nell_min;
        spec.n_ellipses_max = ph.nell_max;
        spec.attenuation_min = ph.att_min;
        spec.attenuation_max = ph.att_max;
        spec.clip_max = ph.clip_max;
        spec.seed = ph.seed;
        ctkit::write_image(ph.out, ctkit::make_phantom(spec));
        write_run_json(ph.out, false,
                       {{"subcommand", "phantom"},
                        {"kind", ph.kind},
                        {"size", ph.size},
                        {"pixel_size", ph.pixel_size},
                        {"n_ellipses_min", ph.nell_min},
                        {"n_ellipses_max", ph.nell_max},
                        {"att_min", ph.att_min},
                        {"att_max", ph.att_max},
                        {"clip_max", ph.clip_max},
                        {"seed", ph.seed},
                        {"out", ph.out},
                        {"threads", ctkit::max_threads()}});
    });

    // ---- project ---------------------------------------------------------
    auto* cmd_project = app.add_subcommand("project", "forward project an image to a sinogram");
    struct {
        std::string image, out, angles_file;
        std::size_t n_angles = 180, n_det = 0;
        double det_spacing = 0.0, pixel_size = 0.0;
    } pr;
    cmd_project->add_option("--image", pr.image, "input image CTR1")->required();
    cmd_project->add_option("--n-angles", pr.n_angles, "equispaced angle count over [0, pi)");
    cmd_project->add_option("--angles-file", pr.angles_file, "one radian value per line");
    cmd_project->add_option("--n-det", pr.n_det, "detector count (0: cover the diagonal)");
    cmd_project->add_option("--det-spacing", pr.det_spacing, "detector spacing (0: pixel size)");
    cmd_project->add_option("--pixel-size", pr.pixel_size, "override image pixel size");
    cmd_project->add_option("--out", pr.out, "output sinogram CTR1")->required();
    cmd_project->callback([&] {
        ctkit::ImageGrid img = ctkit::read_image(pr.image, pr.pixel_size);
        ctkit::GridShape shape(img);
        std::size_t n_det = pr.n_det ? pr.n_det
                                     : ctkit::default_detector_count(img.width, img.height);
        double spacing = pr.det_spacing > 0.0 ? pr.det_spacing : img.pixel_size;
        ctkit::ParallelGeometry geom(resolve_angles(pr.n_angles, pr.angles_file), n_det, spacing,
                                     shape);
        ctkit::write_sinogram(pr.out, ctkit::forward_project(img, geom));
        write_run_json(pr.out, false,
                       {{"subcommand", "project"},
                        {"image", pr.image},
                        {"n_angles", geom.n_angles()},
                        {"angles_file", pr.angles_file},
                        {"n_det", n_det},
                        {"det_spacing", spacing},
                        {"pixel_size", img.pixel_size},
                        {"out", pr.out},
                        {"threads", ctkit::max_threads()}});
    });

    // ---- acquire ---------------------------------------------------------
    auto* cmd_acquire = app.add_subcommand("acquire", "simulate photon counts from a sinogram");
    struct {
        std::string sino, out;
        double i0 = 1e4;
        bool noiseless = false;
        std::uint64_t seed = 0;
    } ac;
    cmd_acquire->add_option("--sino", ac.sino, "input sinogram CTR1")->required();
    cmd_acquire->add_option("--i0", ac.i0, "source photons per detector bin");
    cmd_acquire->add_flag("--noiseless", ac.noiseless, "skip Poisson sampling");
    cmd_acquire->add_option("--seed", ac.seed, "noise seed");
    cmd_acquire->add_option("--out", ac.out, "output counts CTR1")->required();
    cmd_acquire->callback([&] {
        ctkit::Sinogram sino = ctkit::read_sinogram(ac.sino);
        auto rec = ctkit::simulate_intensity(sino, ac.i0, !ac.noiseless, ac.seed);
        ctkit::write_intensity(ac.out, rec);
        write_run_json(ac.out, false,
                       {{"subcommand", "acquire"},
                        {"sino", ac.sino},
                        {"i0", ac.i0},
                        {"noisy", !ac.noiseless},
                        {"seed", ac.seed},
                        {"out", ac.out},
                        {"threads", ctkit::max_threads()}});
    });

    // ---- lognorm ---------------------------------------------------------
    auto* cmd_lognorm = app.add_subcommand("lognorm", "log-normalize counts back to a sinogram");
    struct {
        std::string counts, out;
    } ln;
    cmd_lognorm->add_option("--counts", ln.counts, "input counts CTR1")->required();
    cmd_lognorm->add_option("--out", ln.out, "output sinogram CTR1")->required();
    cmd_lognorm->callback([&] {
        auto rec = ctkit::read_intensity(ln.counts);
        ctkit::write_sinogram(ln.out, ctkit::log_normalize(rec));
        write_run_json(ln.out, false,
                       {{"subcommand", "lognorm"},
                        {"counts", ln.counts},
                        {"out", ln.out},
                        {"threads", ctkit::max_threads()}});
    });

    // ---- fbp -------------------------------------------------------------
    auto* cmd_fbp = app.add_subcommand("fbp", "filtered back projection");
    struct {
        std::string sino, out, angles_file;
        std::string filter = "ramlak";
        double cutoff = 1.0;
        std::size_t pad = 0;
    } fb;
    cmd_fbp->add_option("--sino", fb.sino, "input sinogram CTR1")->required();
    cmd_fbp->add_option("--angles-file", fb.angles_file, "override sidecar angles (radians/line)");
    cmd_fbp->add_option("--filter", fb.filter, "ramlak | hann");
    cmd_fbp->add_option("--cutoff", fb.cutoff, "cutoff as a fraction of Nyquist, (0, 1]");
    cmd_fbp->add_option("--pad", fb.pad, "padded row length (0: next power of two >= 2x detectors)");
    cmd_fbp->add_option("--out", fb.out, "output image CTR1")->required();
    cmd_fbp->callback([&] {
        ctkit::Sinogram sino = load_sinogram(fb.sino, fb.angles_file);
        auto spec = parse_filter(fb.filter, fb.cutoff, fb.pad);
        ctkit::write_image(fb.out, ctkit::fbp_reconstruct(sino, spec));
        write_run_json(fb.out, false,
                       {{"subcommand", "fbp"},
                        {"sino", fb.sino},
                        {"angles_file", fb.angles_file},
                        {"filter", fb.filter},
                        {"cutoff", fb.cutoff},
                        {"pad", fb.pad},
                        {"out", fb.out},
                        {"threads", ctkit::max_threads()}});
    });

    // ---- sirt ------------------------------------------------------------
    auto* cmd_sirt = app.add_subcommand("sirt", "simultaneous iterative reconstruction");
    struct {
        std::string sino, out, residuals, angles_file;
        std::size_t iters = 100;
        bool nonneg = false;
        double tol = 0.0;
    } si;
    cmd_sirt->add_option("--sino", si.sino, "input sinogram CTR1")->required();
    cmd_sirt->add_option("--angles-file", si.angles_file, "override sidecar angles (radians/line)");
    cmd_sirt->add_option("--iters", si.iters, "iteration count");
    cmd_sirt->add_flag("--nonneg", si.nonneg, "clamp the estimate at zero after each step");
    cmd_sirt->add_option("--tol", si.tol, "stop when residual/initial < tol (0: run all iters)");
    cmd_sirt->add_option("--residuals", si.residuals, "write residual history CSV here");
    cmd_sirt->add_option("--out", si.out, "output image CTR1")->required();
    cmd_sirt->callback([&] {
        ctkit::Sinogram sino = load_sinogram(si.sino, si.angles_file);
        auto [img, state] = ctkit::sirt_reconstruct(sino, si.iters, si.nonneg, si.tol);
        ctkit::write_image(si.out, img);
        if (!si.residuals.empty()) ctkit::write_residual_csv(state, si.residuals);
        write_run_json(si.out, false,
                       {{"subcommand", "sirt"},
                        {"sino", si.sino},
                        {"angles_file", si.angles_file},
                        {"iters", si.iters},
                        {"nonneg", si.nonneg},
                        {"tol", si.tol},
                        {"residuals", si.residuals},
                        {"out", si.out},
                        {"threads", ctkit::max_threads()}});
    });

    // ---- dataset -----------------------------------------------------------
    auto* cmd_dataset = app.add_subcommand("dataset", "build a synthetic low-dose dataset");
    ctkit::DatasetOptions ds;
    std::string ds_out_dir;
    std::string ds_kind = "ellipses";
    cmd_dataset->add_option("--out-dir", ds_out_dir, "dataset directory")->required();
    cmd_dataset->add_option("--n-train", ds.n_train, "training sample count");
    cmd_dataset->add_option("--n-val", ds.n_val, "validation samples (0: n_train/10)");
    cmd_dataset->add_option("--n-test", ds.n_test, "test sample count");
    cmd_dataset->add_option("--size", ds.image_size, "image side in pixels");
    cmd_dataset->add_option("--n-angles", ds.n_angles, "projection angle count");
    cmd_dataset->add_option("--n-det", ds.n_detectors, "detector count (0: cover the diagonal)");
    cmd_dataset->add_option("--i0", ds.i0, "source photons per bin (low dose ~1e4)");
    cmd_dataset->add_option("--seed", ds.seed, "master seed");
    cmd_dataset->add_option("--kind", ds_kind, "ellipses | shepp");
    cmd_dataset->callback([&] {
        ds.kind = ds_kind == "shepp" ? ctkit::PhantomKind::SheppLogan
                                     : ctkit::PhantomKind::RandomEllipses;
        ctkit::build_dataset(ds, ds_out_dir);
        write_run_json(ds_out_dir, true,
                       {{"subcommand", "dataset"},
                        {"out_dir", ds_out_dir},
                        {"n_train", ds.n_train},
                        {"n_val", ds.val_count()},
                        {"n_test", ds.n_test},
                        {"size", ds.image_size},
                        {"n_angles", ds.n_angles},
                        {"n_det", ds.n_detectors},
                        {"i0", ds.i0},
                        {"seed", ds.seed},
                        {"kind", ds_kind},
                        {"threads", ctkit::max_threads()}});
    });

    // ---- training -----------------------------------------------------------
    auto* cmd_den = app.add_subcommand("train-denoiser", "train the FBP post-processing denoiser");
    struct {
        std::string manifest, out, log;
        std::size_t depth = 32;
        ctkit::TrainOptions opt;
    } td;
    cmd_den->add_option("--manifest", td.manifest, "dataset manifest.jsonl")->required();
    cmd_den->add_option("--depth", td.depth, "dilated conv layer count");
    cmd_den->add_option("--epochs", td.opt.epochs, "training epochs");
    cmd_den->add_option("--batch", td.opt.batch, "mini-batch size");
    cmd_den->add_option("--lr", td.opt.lr, "learning rate (eta)");
    cmd_den->add_option("--seed", td.opt.seed, "training seed");
    cmd_den->add_flag("--adam-paper-bias", td.opt.adam_paper_bias,
                      "bias-correct with constant 1-beta denominators");
    cmd_den->add_flag("--sgd", td.opt.use_sgd, "plain SGD instead of the adaptive update");
    cmd_den->add_option("--out", td.out, "checkpoint CTN1 path")->required();
    cmd_den->add_option("--log", td.log, "per-epoch loss CSV");
    cmd_den->callback([&] {
        auto manifest = ctkit::read_manifest(td.manifest);
        ctkit::DenoiserArch arch;
        arch.depth = td.depth;
        td.opt.checkpoint_path = td.out;
        td.opt.log_path = td.log;
        auto [net, log] = ctkit::train_denoiser(manifest, arch, td.opt);
        std::cout << "final train loss " << log.train_loss.back() << ", best epoch "
                  << log.best_epoch << "\n";
        write_run_json(td.out, false,
                       {{"subcommand", "train-denoiser"},
                        {"manifest", td.manifest},
                        {"depth", td.depth},
                        {"epochs", td.opt.epochs},
                        {"batch", td.opt.batch},
                        {"lr", td.opt.lr},
                        {"seed", td.opt.seed},
                        {"adam_paper_bias", td.opt.adam_paper_bias},
                        {"sgd", td.opt.use_sgd},
                        {"out", td.out},
                        {"log", td.log},
                        {"threads", ctkit::max_threads()}});
    });

    auto* cmd_e2e = app.add_subcommand("train-e2e", "train the sinogram-to-image model");
    struct {
        std::string manifest, out, log;
        std::size_t channels = 64;
        ctkit::TrainOptions opt;
    } te;
    cmd_e2e->add_option("--manifest", te.manifest, "dataset manifest.jsonl")->required();
    cmd_e2e->add_option("--channels", te.channels, "convolution channels");
    cmd_e2e->add_option("--epochs", te.opt.epochs, "training epochs");
    cmd_e2e->add_option("--batch", te.opt.batch, "mini-batch size");
    cmd_e2e->add_option("--lr", te.opt.lr, "learning rate (eta)");
    cmd_e2e->add_option("--seed", te.opt.seed, "training seed");
    cmd_e2e->add_flag("--adam-paper-bias", te.opt.adam_paper_bias,
                      "bias-correct with constant 1-beta denominators");
    cmd_e2e->add_flag("--sgd", te.opt.use_sgd, "plain SGD instead of the adaptive update");
    cmd_e2e->add_option("--dense-guard", te.opt.dense_param_guard,
                        "refuse architectures above this dense weight count");
    cmd_e2e->add_option("--out", te.out, "checkpoint CTN1 path")->required();
    cmd_e2e->add_option("--log", te.log, "per-epoch loss CSV");
    cmd_e2e->callback([&] {
        auto manifest = ctkit::read_manifest(te.manifest);
        ctkit::AutomapArch arch;
        arch.n_detectors = manifest.geometry.n_detectors;
        arch.n_angles = manifest.geometry.n_angles();
        arch.image_side = manifest.geometry.image.width;
        arch.conv_channels = te.channels;
        te.opt.checkpoint_path = te.out;
        te.opt.log_path = te.log;
        auto [net, log] = ctkit::train_end_to_end(manifest, arch, te.opt);
        std::cout << "final train loss " << log.train_loss.back() << ", best epoch "
                  << log.best_epoch << "\n";
        write_run_json(te.out, false,
                       {{"subcommand", "train-e2e"},
                        {"manifest", te.manifest},
                        {"channels", te.channels},
                        {"epochs", te.opt.epochs},
                        {"batch", te.opt.batch},
                        {"lr", te.opt.lr},
                        {"seed", te.opt.seed},
                        {"adam_paper_bias", te.opt.adam_paper_bias},
                        {"sgd", te.opt.use_sgd},
                        {"dense_guard", te.opt.dense_param_guard},
                        {"out", te.out},
                        {"log", te.log},
                        {"threads", ctkit::max_threads()}});
    });

    // ---- eval ------------------------------------------------------------
    auto* cmd_eval = app.add_subcommand("eval", "score models on the test split");
    struct {
        std::string manifest, denoiser, e2e, out_dir;
    } ev;
    cmd_eval->add_option("--manifest", ev.manifest, "dataset manifest.jsonl")->required();
    cmd_eval->add_option("--denoiser", ev.denoiser, "denoiser checkpoint CTN1");
    cmd_eval->add_option("--e2e", ev.e2e, "end-to-end checkpoint CTN1");
    cmd_eval->add_option("--out-dir", ev.out_dir, "metrics/panel output directory")->required();
    cmd_eval->callback([&] {
        auto manifest = ctkit::read_manifest(ev.manifest);
        auto result = ctkit::evaluate(manifest, ev.denoiser, ev.e2e, ev.out_dir);
        for (const auto& m : result.methods)
            std::cout << m.method << ": mean rmse " << m.mean_rmse << ", mean psnr " << m.mean_psnr
                      << " dB\n";
        write_run_json(ev.out_dir, true,
                       {{"subcommand", "eval"},
                        {"manifest", ev.manifest},
                        {"denoiser", ev.denoiser},
                        {"e2e", ev.e2e},
                        {"out_dir", ev.out_dir},
                        {"threads", ctkit::max_threads()}});
    });

    // ---- estimate-params -----------------------------------------------
    auto* cmd_est = app.add_subcommand("estimate-params",
                                       "parameter count and memory for a model family");
    struct {
        bool automap = false, denoiser = false;
        std::size_t det = 512, angles = 128, img = 512, channels = 64, depth = 32;
        std::uint64_t bytes_per_param = 4;
    } es;
    cmd_est->add_flag("--automap", es.automap, "size the end-to-end model");
    cmd_est->add_flag("--denoiser", es.denoiser, "size the mixed-scale dense denoiser");
    cmd_est->add_option("--det", es.det, "detector count");
    cmd_est->add_option("--angles", es.angles, "projection angle count");
    cmd_est->add_option("--img", es.img, "image side in pixels");
    cmd_est->add_option("--channels", es.channels, "conv channels (end-to-end)");
    cmd_est->add_option("--depth", es.depth, "denoiser depth");
    cmd_est->add_option("--bytes-per-param", es.bytes_per_param, "bytes per variable");
    cmd_est->callback([&] {
        ctkit::require(es.automap != es.denoiser, "pass exactly one of --automap / --denoiser");
        ctkit::ParamEstimate e;
        if (es.automap) {
            ctkit::AutomapArch arch;
            arch.n_detectors = es.det;
            arch.n_angles = es.angles;
            arch.image_side = es.img;
            arch.conv_channels = es.channels;
            e = ctkit::estimate_params(arch, es.bytes_per_param);
        } else {
            ctkit::DenoiserArch arch;
            arch.depth = es.depth;
            e = ctkit::estimate_params(arch, es.bytes_per_param);
        }
        std::cout << e.param_count << "\n";
        std::cout << "total_params " << e.total_params << "\n";
        std::cout << "memory_bytes " << e.memory_bytes << "\n";
        std::cout << "memory_gb " << static_cast<double>(e.memory_bytes) / 1e9 << "\n";
    });

    // ---- export-pgm ------------------------------------------------------
    auto* cmd_pgm = app.add_subcommand("export-pgm", "export a CTR1 raster as 16-bit PGM");
    struct {
        std::string in, out;
    } xp;
    cmd_pgm->add_option("--in", xp.in, "input CTR1")->required();
    cmd_pgm->add_option("--out", xp.out, "output PGM")->required();
    cmd_pgm->callback([&] {
        ctkit::write_pgm16(xp.out, ctkit::read_image(xp.in));
        write_run_json(xp.out, false,
                       {{"subcommand", "export-pgm"},
                        {"in", xp.in},
                        {"out", xp.out},
                        {"threads", ctkit::max_threads()}});
    });

    app.parse_complete_callback([&] {
        if (threads) ctkit::set_max_threads(threads);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
