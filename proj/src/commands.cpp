#include "sparseloc/commands.hpp"

#include <filesystem>
#include <set>

#include "sparseloc/eval.hpp"
#include "sparseloc/io.hpp"
#include "sparseloc/solvers.hpp"
#include "sparseloc/train.hpp"
#include "sparseloc/unrolled.hpp"

namespace sparseloc {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

[[noreturn]] void config_error(const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
}

void require_object(const json& j, const std::string& context) {
    if (!j.is_object()) config_error(context + " must be an object");
}

/// Unknown keys are rejected so config typos cannot silently change a run.
void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) config_error("unknown key '" + key + "' in " + context);
}

template <typename T>
T get_required(const json& obj, const std::string& key, const std::string& context) {
    if (!obj.contains(key)) config_error("missing key '" + key + "' in " + context);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        config_error("key '" + key + "' in " + context + " has the wrong type");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback, const std::string& context) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        config_error("key '" + key + "' in " + context + " has the wrong type");
    }
}

GridGeometry parse_geometry(const json& cfg) {
    if (!cfg.contains("geometry")) config_error("missing 'geometry'");
    const json& g = cfg.at("geometry");
    require_object(g, "geometry");
    check_keys(g, {"low_res_side", "ratio"}, "geometry");
    GridGeometry geom{get_required<int>(g, "low_res_side", "geometry"),
                      get_required<int>(g, "ratio", "geometry")};
    geom.validate();
    return geom;
}

GaussianPsf parse_psf(const json& cfg) {
    if (!cfg.contains("psf")) config_error("missing 'psf'");
    const json& p = cfg.at("psf");
    require_object(p, "psf");
    check_keys(p, {"sigma", "truncation_radius"}, "psf");
    const double sigma = get_required<double>(p, "sigma", "psf");
    GaussianPsf psf{sigma, get_or<double>(p, "truncation_radius", 4.0 * sigma, "psf")};
    psf.validate();
    return psf;
}

NoiseModel parse_noise(const json& cfg) {
    NoiseModel noise;
    if (!cfg.contains("noise")) return noise;
    const json& n = cfg.at("noise");
    require_object(n, "noise");
    check_keys(n, {"gaussian_sigma", "background", "poisson"}, "noise");
    noise.gaussian_sigma = get_or<double>(n, "gaussian_sigma", 0.0, "noise");
    noise.background = get_or<double>(n, "background", 0.0, "noise");
    noise.poisson = get_or<bool>(n, "poisson", false, "noise");
    if (noise.gaussian_sigma < 0.0 || noise.background < 0.0)
        config_error("noise parameters must be >= 0");
    return noise;
}

uint64_t resolve_seed(const json& cfg, const CliOptions& opts) {
    if (opts.seed) return *opts.seed;
    return get_or<uint64_t>(cfg, "seed", 0, "config");
}

struct ExtractionParams {
    double threshold_rel = 0.05;
    double min_separation = 1.0;
    std::optional<double> radius;  // defaults to ratio (one low-res pixel)
};

ExtractionParams parse_extraction(const json& cfg) {
    ExtractionParams ex;
    if (!cfg.contains("extract")) return ex;
    const json& e = cfg.at("extract");
    require_object(e, "extract");
    check_keys(e, {"threshold_rel", "min_separation", "radius"}, "extract");
    ex.threshold_rel = get_or<double>(e, "threshold_rel", ex.threshold_rel, "extract");
    ex.min_separation = get_or<double>(e, "min_separation", ex.min_separation, "extract");
    if (e.contains("radius")) ex.radius = get_required<double>(e, "radius", "extract");
    return ex;
}

std::string out_path(const CliOptions& opts, const std::string& name) {
    fs::create_directories(opts.out_dir);
    return (fs::path(opts.out_dir) / name).string();
}

/// Output filenames are stored relative to the out dir so a rerun into a
/// different directory still produces byte-identical files.
void write_manifest(const CliOptions& opts, const std::string& command, json resolved_config,
                    uint64_t seed, const json& outputs) {
    json manifest;
    manifest["command"] = command;
    resolved_config["seed"] = seed;
    manifest["config"] = std::move(resolved_config);
    manifest["seed"] = seed;
    manifest["outputs"] = outputs;
    manifest["format_versions"] = {{"frame", kFrameFileVersion}, {"net", kNetFileVersion}};
    atomic_write(out_path(opts, "manifest.json"), manifest.dump(2) + "\n");
}

json metrics_to_json(const Metrics& m) {
    json doc;
    doc["precision"] = m.precision;
    doc["recall"] = m.recall;
    doc["jaccard"] = m.jaccard;
    doc["rmse_loc"] = m.rmse_loc;
    if (m.nmse)
        doc["nmse"] = *m.nmse;
    else
        doc["nmse"] = nullptr;
    return doc;
}

Metrics evaluate_grid(const Mat& grid, const std::vector<Emitter>& truth_emitters,
                      const Mat* truth_grid, const ExtractionParams& ex, int ratio) {
    const double top = grid.maxCoeff();
    const auto pred = extract_localizations(grid, ex.threshold_rel * std::max(top, 0.0),
                                            ex.min_separation);
    const auto truth = emitters_to_localizations(truth_emitters);
    const double radius = ex.radius.value_or(static_cast<double>(ratio));
    const auto match = match_points(pred, truth, radius);
    return compute_metrics(match, truth_grid ? &grid : nullptr, truth_grid);
}

Mat sparcom_input_image(const FrameSequence& seq) {
    const auto cov = empirical_covariance(seq, true);
    return to_image(cov.g_y, seq.geometry.low_res_side);
}

FrameSequence frames_from_file(const std::string& path, const GridGeometry& geom) {
    const FrameFileData data = read_frame_file(path);
    if (data.stored_side != geom.low_res_side || data.high_res_side != geom.high_res_side())
        config_error("frame file geometry does not match config geometry");
    FrameSequence seq;
    seq.frames = data.frames;
    seq.geometry = geom;
    return seq;
}

}  // namespace

json load_config(const std::string& path) {
    json cfg;
    try {
        cfg = json::parse(read_file_bytes(path));
    } catch (const json::exception& e) {
        config_error(std::string("cannot parse ") + path + ": " + e.what());
    }
    require_object(cfg, "config");
    return cfg;
}

void cmd_simulate(const json& config, const CliOptions& opts) {
    check_keys(config,
               {"seed", "geometry", "psf", "noise", "frames", "mode", "structure", "density",
                "bubble_intensity"},
               "simulate config");
    const GridGeometry geom = parse_geometry(config);
    const GaussianPsf psf = parse_psf(config);
    const NoiseModel noise = parse_noise(config);
    const int frames = get_required<int>(config, "frames", "simulate config");
    const uint64_t seed = resolve_seed(config, opts);
    const std::string mode = get_or<std::string>(config, "mode", "smlm", "simulate config");

    const MeasurementOperator op = build_measurement_matrix(psf, geom);
    RenderResult rendered;
    json resolved = config;

    if (mode == "smlm") {
        if (!config.contains("structure")) config_error("smlm mode requires 'structure'");
        const json& s = config.at("structure");
        require_object(s, "structure");
        check_keys(s,
                   {"kind", "count", "mean_photons", "on_probability", "filament_count",
                    "segments_per_filament", "min_segment_length", "max_segment_length",
                    "thickness", "region"},
                   "structure");
        StructureParams params;
        const std::string kind = get_required<std::string>(s, "kind", "structure");
        if (kind == "uniform-points")
            params.kind = StructureKind::UniformPoints;
        else if (kind == "polyline-filament")
            params.kind = StructureKind::PolylineFilament;
        else
            config_error("structure.kind must be uniform-points or polyline-filament");
        params.count = get_required<int>(s, "count", "structure");
        params.mean_photons = get_or<double>(s, "mean_photons", params.mean_photons, "structure");
        params.on_probability =
            get_or<double>(s, "on_probability", params.on_probability, "structure");
        params.filament_count =
            get_or<int>(s, "filament_count", params.filament_count, "structure");
        params.segments_per_filament =
            get_or<int>(s, "segments_per_filament", params.segments_per_filament, "structure");
        params.min_segment_length =
            get_or<double>(s, "min_segment_length", params.min_segment_length, "structure");
        params.max_segment_length =
            get_or<double>(s, "max_segment_length", params.max_segment_length, "structure");
        params.thickness = get_or<double>(s, "thickness", params.thickness, "structure");
        if (s.contains("region")) {
            const auto region = get_required<std::vector<double>>(s, "region", "structure");
            if (region.size() != 4) config_error("structure.region must be [x0, y0, x1, y1]");
            params.region_x0 = region[0];
            params.region_y0 = region[1];
            params.region_x1 = region[2];
            params.region_y1 = region[3];
        }
        const auto emitters = sample_structure(params, geom, seed);
        rendered = render_sequence(emitters, op, noise, frames, seed, opts.threads);
    } else if (mode == "ulm") {
        const double density = get_required<double>(config, "density", "simulate config");
        const double intensity =
            get_or<double>(config, "bubble_intensity", 1.0, "simulate config");
        rendered = render_ulm_sequence(density, op, noise, frames, seed, intensity, opts.threads);
    } else {
        config_error("mode must be smlm or ulm");
    }

    write_frame_file(out_path(opts, "frames.slfr"), rendered.sequence);

    std::vector<Mat> truth_frames;
    truth_frames.reserve(rendered.truth.per_frame_x.size());
    for (const auto& x : rendered.truth.per_frame_x)
        truth_frames.push_back(to_image(x, geom.high_res_side()));
    write_frame_file(out_path(opts, "truth_frames.slfr"), truth_frames, geom.high_res_side());
    write_grid_file(out_path(opts, "truth_static.slfr"),
                    to_image(rendered.truth.static_grid, geom.high_res_side()));
    write_emitters_csv(out_path(opts, "emitters.csv"), rendered.truth.emitters);

    json outputs = {{"frames", "frames.slfr"},
                    {"truth_frames", "truth_frames.slfr"},
                    {"truth_static", "truth_static.slfr"},
                    {"emitters", "emitters.csv"}};
    write_manifest(opts, "simulate", std::move(resolved), seed, outputs);
}

void cmd_solve(const json& config, const CliOptions& opts) {
    check_keys(config,
               {"seed", "geometry", "psf", "solver", "frames", "lambda", "lambda_preset",
                "iterations", "stop_tol", "nonneg", "accumulate", "truth_emitters", "truth_grid",
                "extract"},
               "solve config");
    const GridGeometry geom = parse_geometry(config);
    const GaussianPsf psf = parse_psf(config);
    const uint64_t seed = resolve_seed(config, opts);
    const std::string solver = get_required<std::string>(config, "solver", "solve config");
    const std::string frames_path = get_required<std::string>(config, "frames", "solve config");

    double lambda = 0.0;
    json resolved = config;
    if (config.contains("lambda_preset")) {
        if (config.contains("lambda")) config_error("give either lambda or lambda_preset");
        const auto preset = get_required<std::string>(config, "lambda_preset", "solve config");
        if (preset == "high")
            lambda = 0.25;
        else if (preset == "low")
            lambda = 0.05;
        else
            config_error("lambda_preset must be 'high' (0.25) or 'low' (0.05)");
        resolved["lambda"] = lambda;
    } else {
        lambda = get_required<double>(config, "lambda", "solve config");
    }

    const int iterations = get_or<int>(config, "iterations", 100, "solve config");
    const double stop_tol = get_or<double>(config, "stop_tol", 0.0, "solve config");
    const bool nonneg = get_or<bool>(config, "nonneg", false, "solve config");
    const bool accumulate = get_or<bool>(config, "accumulate", true, "solve config");

    const MeasurementOperator op = build_measurement_matrix(psf, geom);
    const FrameSequence seq = frames_from_file(frames_path, geom);

    Mat recovered;
    if (solver == "sparcom") {
        const auto cov = empirical_covariance(seq, true);
        const auto pre = sparcom_precompute(op);
        const auto res = sparcom_ista(cov, pre, lambda, iterations, stop_tol);
        recovered = to_image(res.m, geom.high_res_side());
    } else if (solver == "ista" || solver == "fista") {
        IstaConfig cfg;
        cfg.lambda = lambda;
        cfg.max_iters = iterations;
        cfg.stop_tol = stop_tol;
        cfg.nonneg = nonneg;
        const double lf = gradient_lipschitz(op);
        std::vector<Mat> estimates;
        estimates.reserve(seq.frames.size());
        for (const Mat& frame : seq.frames) {
            const Vec y = to_vector(frame);
            const SolveResult res = solver == "ista" ? ista(op.matrix(), y, cfg, lf)
                                                     : fista(op.matrix(), y, cfg, lf);
            estimates.push_back(to_image(res.x, geom.high_res_side()));
        }
        if (!accumulate && estimates.size() > 1)
            config_error("accumulate=false requires a single-frame input");
        recovered = accumulate_frames(estimates);
    } else {
        config_error("solver must be ista, fista or sparcom");
    }

    write_grid_file(out_path(opts, "recovered.slfr"), recovered);
    json outputs = {{"recovered", "recovered.slfr"}};

    if (config.contains("truth_emitters")) {
        const auto truth_emitters =
            read_emitters_csv(get_required<std::string>(config, "truth_emitters", "solve config"));
        std::optional<Mat> truth_grid;
        if (config.contains("truth_grid")) {
            const auto data =
                read_frame_file(get_required<std::string>(config, "truth_grid", "solve config"));
            truth_grid = data.frames.front();
        }
        const Metrics metrics = evaluate_grid(recovered, truth_emitters,
                                              truth_grid ? &*truth_grid : nullptr,
                                              parse_extraction(config), geom.ratio);
        atomic_write(out_path(opts, "metrics.json"), metrics_to_json(metrics).dump(2) + "\n");
        outputs["metrics"] = "metrics.json";
    }
    write_manifest(opts, "solve", std::move(resolved), seed, outputs);
}

void cmd_train(const json& config, const CliOptions& opts) {
    check_keys(config,
               {"seed", "geometry", "psf", "net", "depth", "filter_size", "frames",
                "truth_frames", "truth_static", "init", "lambda_init", "patch_size", "stride",
                "target_blur_sigma", "epochs", "batch_size", "learning_rate", "optimizer"},
               "train config");
    const GridGeometry geom = parse_geometry(config);
    const GaussianPsf psf = parse_psf(config);
    const uint64_t seed = resolve_seed(config, opts);
    const auto kind = net_kind_from_name(get_required<std::string>(config, "net", "train config"));
    const int depth = get_or<int>(config, "depth", 10, "train config");
    const int filter_size = get_or<int>(config, "filter_size", 5, "train config");
    const std::string frames_path = get_required<std::string>(config, "frames", "train config");

    TrainConfig tc;
    tc.epochs = get_required<int>(config, "epochs", "train config");
    tc.batch_size = get_or<int>(config, "batch_size", 32, "train config");
    tc.learning_rate = get_or<double>(config, "learning_rate", 1e-3, "train config");
    const std::string optimizer = get_or<std::string>(config, "optimizer", "adam", "train config");
    if (optimizer == "adam")
        tc.optimizer = OptimizerKind::Adam;
    else if (optimizer == "sgd")
        tc.optimizer = OptimizerKind::Sgd;
    else
        config_error("optimizer must be adam or sgd");

    const int patch_size =
        get_or<int>(config, "patch_size", std::min(16, geom.low_res_side), "train config");
    const int stride = get_or<int>(config, "stride", std::max(1, patch_size / 2), "train config");
    const double blur = get_or<double>(config, "target_blur_sigma", 1.0, "train config");

    const FrameSequence seq = frames_from_file(frames_path, geom);

    std::vector<TrainSample> samples;
    UnrolledNet net;
    const std::string init = get_or<std::string>(
        config, "init", kind == NetKind::ListaDense ? "model" : "random", "train config");
    if (kind == NetKind::ListaDense) {
        if (patch_size != geom.low_res_side)
            config_error("lista-dense training requires patch_size == low_res_side");
        if (init != "model") config_error("lista-dense nets are always model-initialized");
        const MeasurementOperator op = build_measurement_matrix(psf, geom);
        net = init_lista_from_model(op, get_or<double>(config, "lambda_init", 0.1, "train config"),
                                    depth);
    } else if (init == "model") {
        if (kind != NetKind::UlmConv)
            config_error("model init is available for lista-dense and ulm-conv nets");
        const MeasurementOperator op = build_measurement_matrix(psf, geom);
        net = init_ulm_from_model(op, get_or<double>(config, "lambda_init", 0.01, "train config"),
                                  depth, filter_size);
    } else if (init == "random") {
        net = make_conv_net(kind, geom, depth, filter_size, seed);
    } else {
        config_error("init must be 'model' or 'random'");
    }

    if (kind == NetKind::LsparcomConv) {
        const std::string static_path =
            get_required<std::string>(config, "truth_static", "train config");
        const auto truth = read_frame_file(static_path);
        if (truth.stored_side != geom.high_res_side())
            config_error("truth_static side does not match geometry");
        const Mat g_image = upsample_nearest(sparcom_input_image(seq), geom.ratio);
        samples = make_patches({g_image}, {truth.frames.front()}, 1, patch_size, stride, seed,
                               blur);
    } else {
        const std::string truth_path =
            get_required<std::string>(config, "truth_frames", "train config");
        const auto truth = read_frame_file(truth_path);
        if (truth.stored_side != geom.high_res_side() ||
            truth.frames.size() != seq.frames.size())
            config_error("truth_frames do not match the input sequence");
        samples = make_patches(seq.frames, truth.frames, geom.ratio, patch_size, stride, seed,
                               blur);
    }

    const TrainResult result = train_net(std::move(net), samples, tc, seed);
    write_net_file(out_path(opts, "net.slnt"), result.net);
    write_loss_csv(out_path(opts, "loss.csv"), result.loss_curve);
    json outputs = {{"net", "net.slnt"}, {"loss", "loss.csv"}};
    write_manifest(opts, "train", config, seed, outputs);
}

void cmd_infer(const json& config, const CliOptions& opts) {
    check_keys(config, {"seed", "net", "frames", "accumulate"}, "infer config");
    const uint64_t seed = resolve_seed(config, opts);
    const UnrolledNet net =
        read_net_file(get_required<std::string>(config, "net", "infer config"));
    const FrameFileData data =
        read_frame_file(get_required<std::string>(config, "frames", "infer config"));
    const bool accumulate = get_or<bool>(config, "accumulate", true, "infer config");

    const GridGeometry& geom = net.geometry;
    if (data.stored_side != geom.low_res_side || data.high_res_side != geom.high_res_side())
        config_error("net geometry (" + std::to_string(geom.low_res_side) + "x ratio " +
                     std::to_string(geom.ratio) + ") does not match the frame file");

    std::vector<Mat> estimates;
    if (net.kind == NetKind::LsparcomConv) {
        FrameSequence seq;
        seq.frames = data.frames;
        seq.geometry = geom;
        const Mat g_image = upsample_nearest(sparcom_input_image(seq), geom.ratio);
        estimates.push_back(conv_net_forward(net, g_image));
    } else {
        estimates.reserve(data.frames.size());
        for (const Mat& frame : data.frames) {
            if (net.kind == NetKind::ListaDense) {
                const Vec x = lista_forward(net, to_vector(frame));
                estimates.push_back(to_image(x, geom.high_res_side()));
            } else {
                estimates.push_back(conv_net_forward(net, frame));
            }
        }
    }

    json outputs;
    if (accumulate || estimates.size() == 1) {
        write_grid_file(out_path(opts, "recovered.slfr"), accumulate_frames(estimates));
        outputs["recovered"] = "recovered.slfr";
    } else {
        write_frame_file(out_path(opts, "recovered.slfr"), estimates,
                         net.geometry.high_res_side());
        outputs["recovered"] = "recovered.slfr";
    }
    write_manifest(opts, "infer", config, seed, outputs);
}

void cmd_eval(const json& config, const CliOptions& opts) {
    check_keys(config,
               {"seed", "recovered", "truth_emitters", "truth_grid", "radius", "extract"},
               "eval config");
    const uint64_t seed = resolve_seed(config, opts);
    const auto data =
        read_frame_file(get_required<std::string>(config, "recovered", "eval config"));
    const Mat& grid = data.frames.front();
    if (!config.contains("truth_emitters") && !config.contains("truth_grid"))
        config_error("eval needs truth_emitters and/or truth_grid");

    std::vector<Emitter> truth_emitters;
    if (config.contains("truth_emitters"))
        truth_emitters =
            read_emitters_csv(get_required<std::string>(config, "truth_emitters", "eval config"));
    std::optional<Mat> truth_grid;
    if (config.contains("truth_grid")) {
        const auto truth =
            read_frame_file(get_required<std::string>(config, "truth_grid", "eval config"));
        truth_grid = truth.frames.front();
    }

    ExtractionParams ex = parse_extraction(config);
    if (config.contains("radius"))
        ex.radius = get_required<double>(config, "radius", "eval config");
    const int ratio = data.high_res_side > 0 && data.stored_side > 0 &&
                              data.high_res_side >= data.stored_side
                          ? data.high_res_side / data.stored_side
                          : 1;
    const Metrics metrics =
        evaluate_grid(grid, truth_emitters, truth_grid ? &*truth_grid : nullptr, ex, ratio);
    atomic_write(out_path(opts, "metrics.json"), metrics_to_json(metrics).dump(2) + "\n");
    write_manifest(opts, "eval", config, seed, json{{"metrics", "metrics.json"}});
}

void cmd_render(const json& config, const CliOptions& opts) {
    check_keys(config, {"seed", "grid", "gamma", "image"}, "render config");
    const uint64_t seed = resolve_seed(config, opts);
    const auto data = read_frame_file(get_required<std::string>(config, "grid", "render config"));
    const double gamma = get_or<double>(config, "gamma", 1.0, "render config");
    const std::string name = get_or<std::string>(config, "image", "render.pgm", "render config");

    const bool had_range = write_pgm16(out_path(opts, name), data.frames.front(), gamma);
    if (!had_range)
        std::fputs("warning: grid has no dynamic range, wrote flat mid-gray image\n", stderr);
    write_manifest(opts, "render", config, seed, json{{"image", name}});
}

}  // namespace sparseloc
