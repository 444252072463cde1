#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sparseloc/eval.hpp"
#include "sparseloc/io.hpp"
#include "sparseloc/measurement.hpp"
#include "sparseloc/solvers.hpp"
#include "sparseloc/thresholds.hpp"
#include "sparseloc/train.hpp"
#include "sparseloc/unrolled.hpp"

namespace py = pybind11;
using namespace sparseloc;

PYBIND11_MODULE(_sparseloc, m) {
    m.doc() = "Sparse source localization: iterative solvers, unrolled networks, "
              "simulators and evaluation metrics.";

    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);

    // ---- model ----
    py::class_<OpticsParams>(m, "OpticsParams")
        .def(py::init<double, double>(), py::arg("wavelength_nm"), py::arg("numerical_aperture"))
        .def_readwrite("wavelength_nm", &OpticsParams::wavelength_nm)
        .def_readwrite("numerical_aperture", &OpticsParams::numerical_aperture);
    m.def("diffraction_limit", &diffraction_limit, py::arg("optics"));

    py::class_<GridGeometry>(m, "GridGeometry")
        .def(py::init<int, int>(), py::arg("low_res_side"), py::arg("ratio"))
        .def_readwrite("low_res_side", &GridGeometry::low_res_side)
        .def_readwrite("ratio", &GridGeometry::ratio)
        .def_property_readonly("high_res_side", &GridGeometry::high_res_side)
        .def_property_readonly("low_res_count", &GridGeometry::low_res_count)
        .def_property_readonly("high_res_count", &GridGeometry::high_res_count);

    py::class_<GaussianPsf>(m, "GaussianPsf")
        .def(py::init<double, double>(), py::arg("sigma"), py::arg("truncation_radius"))
        .def_static("with_default_truncation", &GaussianPsf::with_default_truncation,
                    py::arg("sigma"))
        .def_readwrite("sigma", &GaussianPsf::sigma)
        .def_readwrite("truncation_radius", &GaussianPsf::truncation_radius);

    py::class_<MeasurementOperator>(m, "MeasurementOperator")
        .def(py::init<GridGeometry, GaussianPsf>(), py::arg("geometry"), py::arg("psf"))
        .def_property_readonly("geometry", &MeasurementOperator::geometry)
        .def_property_readonly("psf", &MeasurementOperator::psf)
        .def_property_readonly("matrix", &MeasurementOperator::matrix,
                               py::return_value_policy::copy)
        .def("apply", &MeasurementOperator::apply, py::arg("x"))
        .def("apply_conv", &MeasurementOperator::apply_conv, py::arg("x"))
        .def("apply_adjoint", &MeasurementOperator::apply_adjoint, py::arg("r"));
    m.def("build_measurement_matrix", &build_measurement_matrix, py::arg("psf"),
          py::arg("geometry"));
    m.def("gradient_lipschitz",
          py::overload_cast<const MeasurementOperator&, double, int>(&gradient_lipschitz),
          py::arg("op"), py::arg("tol") = 1e-6, py::arg("max_iters") = 10000);
    m.def("gradient_lipschitz_matrix",
          py::overload_cast<const Mat&, double, int>(&gradient_lipschitz), py::arg("a"),
          py::arg("tol") = 1e-6, py::arg("max_iters") = 10000);

    // ---- thresholds ----
    m.def("soft_threshold", py::overload_cast<const Vec&, double>(&soft_threshold),
          py::arg("x"), py::arg("alpha"));
    m.def("positive_soft_threshold",
          py::overload_cast<const Vec&, double>(&positive_soft_threshold), py::arg("x"),
          py::arg("alpha"));
    m.def("smooth_plus_threshold",
          py::vectorize([](double x, double a, double b) { return smooth_plus_threshold(x, a, b); }),
          py::arg("x"), py::arg("alpha"), py::arg("beta"));
    m.def("smooth_soft_threshold",
          py::vectorize([](double x, double l, double b) { return smooth_soft_threshold(x, l, b); }),
          py::arg("x"), py::arg("lambda_"), py::arg("beta"));

    // ---- simulate ----
    py::class_<Emitter>(m, "Emitter")
        .def(py::init<>())
        .def(py::init([](double x, double y, double photons, double p) {
                 return Emitter{x, y, photons, p};
             }),
             py::arg("x"), py::arg("y"), py::arg("mean_photons") = 1.0,
             py::arg("on_probability") = 1.0)
        .def_readwrite("x", &Emitter::x)
        .def_readwrite("y", &Emitter::y)
        .def_readwrite("mean_photons", &Emitter::mean_photons)
        .def_readwrite("on_probability", &Emitter::on_probability);

    py::class_<NoiseModel>(m, "NoiseModel")
        .def(py::init<>())
        .def(py::init([](double sigma, double bg, bool poisson) {
                 return NoiseModel{sigma, bg, poisson};
             }),
             py::arg("gaussian_sigma") = 0.0, py::arg("background") = 0.0,
             py::arg("poisson") = false)
        .def_readwrite("gaussian_sigma", &NoiseModel::gaussian_sigma)
        .def_readwrite("background", &NoiseModel::background)
        .def_readwrite("poisson", &NoiseModel::poisson);

    py::class_<FrameSequence>(m, "FrameSequence")
        .def(py::init<>())
        .def_readwrite("frames", &FrameSequence::frames)
        .def_readwrite("geometry", &FrameSequence::geometry)
        .def_readwrite("seed", &FrameSequence::seed)
        .def_property_readonly("frame_count", &FrameSequence::frame_count);

    py::class_<GroundTruth>(m, "GroundTruth")
        .def_readwrite("emitters", &GroundTruth::emitters)
        .def_readwrite("per_frame_x", &GroundTruth::per_frame_x)
        .def_readwrite("static_grid", &GroundTruth::static_grid);

    py::class_<RenderResult>(m, "RenderResult")
        .def_readonly("sequence", &RenderResult::sequence)
        .def_readonly("truth", &RenderResult::truth);

    py::enum_<StructureKind>(m, "StructureKind")
        .value("UniformPoints", StructureKind::UniformPoints)
        .value("PolylineFilament", StructureKind::PolylineFilament);

    py::class_<StructureParams>(m, "StructureParams")
        .def(py::init<>())
        .def_readwrite("kind", &StructureParams::kind)
        .def_readwrite("count", &StructureParams::count)
        .def_readwrite("mean_photons", &StructureParams::mean_photons)
        .def_readwrite("on_probability", &StructureParams::on_probability)
        .def_readwrite("filament_count", &StructureParams::filament_count)
        .def_readwrite("segments_per_filament", &StructureParams::segments_per_filament)
        .def_readwrite("min_segment_length", &StructureParams::min_segment_length)
        .def_readwrite("max_segment_length", &StructureParams::max_segment_length)
        .def_readwrite("thickness", &StructureParams::thickness);

    m.def("sample_structure", &sample_structure, py::arg("params"), py::arg("geometry"),
          py::arg("seed"));
    m.def("render_sequence", &render_sequence, py::arg("emitters"), py::arg("op"),
          py::arg("noise"), py::arg("frame_count"), py::arg("seed"), py::arg("threads") = 1);
    m.def("render_ulm_sequence", &render_ulm_sequence, py::arg("density"), py::arg("op"),
          py::arg("noise"), py::arg("frame_count"), py::arg("seed"),
          py::arg("bubble_intensity") = 1.0, py::arg("threads") = 1);

    // ---- solvers ----
    py::class_<IstaConfig>(m, "IstaConfig")
        .def(py::init<>())
        .def_readwrite("lambda_", &IstaConfig::lambda)
        .def_readwrite("max_iters", &IstaConfig::max_iters)
        .def_readwrite("stop_tol", &IstaConfig::stop_tol)
        .def_readwrite("nonneg", &IstaConfig::nonneg)
        .def_readwrite("step_override", &IstaConfig::step_override);

    py::class_<SolveResult>(m, "SolveResult")
        .def_readonly("x", &SolveResult::x)
        .def_readonly("objective", &SolveResult::objective)
        .def_readonly("iterations", &SolveResult::iterations);

    m.def("lasso_objective", &lasso_objective, py::arg("a"), py::arg("y"), py::arg("x"),
          py::arg("lambda_"));
    m.def("ista",
          py::overload_cast<const Mat&, const Vec&, const IstaConfig&, std::optional<double>>(
              &ista),
          py::arg("a"), py::arg("y"), py::arg("config"), py::arg("lipschitz") = std::nullopt);
    m.def("ista_op",
          py::overload_cast<const MeasurementOperator&, const Vec&, const IstaConfig&>(&ista),
          py::arg("op"), py::arg("y"), py::arg("config"));
    m.def("fista",
          py::overload_cast<const Mat&, const Vec&, const IstaConfig&, std::optional<double>>(
              &fista),
          py::arg("a"), py::arg("y"), py::arg("config"), py::arg("lipschitz") = std::nullopt);
    m.def("fista_op",
          py::overload_cast<const MeasurementOperator&, const Vec&, const IstaConfig&>(&fista),
          py::arg("op"), py::arg("y"), py::arg("config"));
    m.def("lasso_oracle_cd", &lasso_oracle_cd, py::arg("a"), py::arg("y"), py::arg("lambda_"),
          py::arg("nonneg") = false, py::arg("obj_tol") = 1e-12, py::arg("max_sweeps") = 100000);

    py::class_<CovarianceSummary>(m, "CovarianceSummary")
        .def_readonly("g_y", &CovarianceSummary::g_y)
        .def_readonly("m_y", &CovarianceSummary::m_y)
        .def_readonly("frame_count", &CovarianceSummary::frame_count);
    m.def("empirical_covariance", &empirical_covariance, py::arg("sequence"),
          py::arg("diagonal_only") = true);

    py::class_<SparcomPrecompute>(m, "SparcomPrecompute")
        .def_readonly("a_tilde", &SparcomPrecompute::a_tilde)
        .def_readonly("gram_sq", &SparcomPrecompute::gram_sq)
        .def_readonly("lipschitz", &SparcomPrecompute::lipschitz);
    m.def("sparcom_precompute", &sparcom_precompute, py::arg("op"),
          py::arg("max_high_res_count") = 4096);

    py::class_<SparcomResult>(m, "SparcomResult")
        .def_readonly("m", &SparcomResult::m)
        .def_readonly("objective", &SparcomResult::objective)
        .def_readonly("iterations", &SparcomResult::iterations);
    m.def("sparcom_ista", &sparcom_ista, py::arg("cov"), py::arg("pre"), py::arg("lambda_"),
          py::arg("max_iters"), py::arg("stop_tol") = 0.0);

    // ---- unrolled ----
    py::enum_<NetKind>(m, "NetKind")
        .value("ListaDense", NetKind::ListaDense)
        .value("LsparcomConv", NetKind::LsparcomConv)
        .value("UlmConv", NetKind::UlmConv);

    py::class_<UnrolledNet>(m, "UnrolledNet")
        .def_readonly("kind", &UnrolledNet::kind)
        .def_readonly("geometry", &UnrolledNet::geometry)
        .def_property_readonly("depth", &UnrolledNet::depth)
        .def_property_readonly("filter_size", &UnrolledNet::filter_size)
        .def("flatten", &UnrolledNet::flatten)
        .def("unflatten", &UnrolledNet::unflatten, py::arg("flat"));

    m.def("init_lista_from_model", &init_lista_from_model, py::arg("op"), py::arg("lambda_"),
          py::arg("depth"));
    m.def("init_ulm_from_model", &init_ulm_from_model, py::arg("op"), py::arg("lambda_"),
          py::arg("depth"), py::arg("filter_size"));
    m.def("make_conv_net", &make_conv_net, py::arg("kind"), py::arg("geometry"), py::arg("depth"),
          py::arg("filter_size"), py::arg("seed"));
    m.def("lista_forward", &lista_forward, py::arg("net"), py::arg("y"));
    m.def("conv_net_forward", &conv_net_forward, py::arg("net"), py::arg("input"));
    m.def("conv2_same", &conv2_same, py::arg("image"), py::arg("kernel"));
    m.def("upsample_nearest", &upsample_nearest, py::arg("image"), py::arg("ratio"));
    m.def("accumulate_frames", &accumulate_frames, py::arg("estimates"));
    m.def("count_parameters", &count_parameters, py::arg("net"));

    // ---- train ----
    py::class_<TrainSample>(m, "TrainSample")
        .def(py::init<>())
        .def(py::init([](Mat input, Mat target) { return TrainSample{input, target}; }),
             py::arg("input"), py::arg("target"))
        .def_readwrite("input", &TrainSample::input)
        .def_readwrite("target", &TrainSample::target);

    m.def("loss_mse", &loss_mse, py::arg("prediction"), py::arg("target"));
    m.def("backprop", &backprop, py::arg("net"), py::arg("sample"));
    m.def("gaussian_blur", &gaussian_blur, py::arg("image"), py::arg("sigma"));
    m.def("make_patches",
          py::overload_cast<const std::vector<Mat>&, const std::vector<Mat>&, int, int, int,
                            uint64_t, double>(&make_patches),
          py::arg("inputs"), py::arg("targets"), py::arg("scale_ratio"), py::arg("patch_size"),
          py::arg("stride"), py::arg("seed"), py::arg("target_blur_sigma") = 0.0);
    m.def("make_patches_from_sequence",
          py::overload_cast<const FrameSequence&, const GroundTruth&, int, int, uint64_t, double>(
              &make_patches),
          py::arg("sequence"), py::arg("truth"), py::arg("patch_size"), py::arg("stride"),
          py::arg("seed"), py::arg("target_blur_sigma") = 0.0);

    py::enum_<OptimizerKind>(m, "OptimizerKind")
        .value("Adam", OptimizerKind::Adam)
        .value("Sgd", OptimizerKind::Sgd);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("optimizer", &TrainConfig::optimizer)
        .def_readwrite("beta1", &TrainConfig::beta1)
        .def_readwrite("beta2", &TrainConfig::beta2)
        .def_readwrite("epsilon", &TrainConfig::epsilon);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("net", &TrainResult::net)
        .def_readonly("loss_curve", &TrainResult::loss_curve);
    m.def("train_net", &train_net, py::arg("net"), py::arg("samples"), py::arg("config"),
          py::arg("seed"));

    // ---- eval ----
    py::class_<Localization>(m, "Localization")
        .def(py::init<>())
        .def(py::init([](double x, double y, double intensity) {
                 return Localization{x, y, intensity, {}};
             }),
             py::arg("x"), py::arg("y"), py::arg("intensity") = 1.0)
        .def_readwrite("x", &Localization::x)
        .def_readwrite("y", &Localization::y)
        .def_readwrite("intensity", &Localization::intensity);

    py::class_<MatchPair>(m, "MatchPair")
        .def_readonly("pred_index", &MatchPair::pred_index)
        .def_readonly("truth_index", &MatchPair::truth_index)
        .def_readonly("distance", &MatchPair::distance);

    py::class_<MatchResult>(m, "MatchResult")
        .def_readonly("pairs", &MatchResult::pairs)
        .def_readonly("unmatched_pred", &MatchResult::unmatched_pred)
        .def_readonly("unmatched_truth", &MatchResult::unmatched_truth)
        .def_readonly("greedy", &MatchResult::greedy);

    py::class_<Metrics>(m, "Metrics")
        .def_readonly("precision", &Metrics::precision)
        .def_readonly("recall", &Metrics::recall)
        .def_readonly("jaccard", &Metrics::jaccard)
        .def_readonly("rmse_loc", &Metrics::rmse_loc)
        .def_readonly("nmse", &Metrics::nmse);

    m.def("extract_localizations", &extract_localizations, py::arg("grid"), py::arg("threshold"),
          py::arg("min_separation") = 0.0);
    m.def("emitters_to_localizations", &emitters_to_localizations, py::arg("emitters"));
    m.def("match_points", &match_points, py::arg("pred"), py::arg("truth"), py::arg("radius"),
          py::arg("assignment_cap") = 500);
    m.def(
        "compute_metrics",
        [](const MatchResult& match, std::optional<Mat> pred_grid, std::optional<Mat> truth_grid) {
            return compute_metrics(match, pred_grid ? &*pred_grid : nullptr,
                                   truth_grid ? &*truth_grid : nullptr);
        },
        py::arg("match"), py::arg("pred_grid") = std::nullopt,
        py::arg("truth_grid") = std::nullopt);

    // ---- io ----
    m.def("write_frame_file",
          py::overload_cast<const std::string&, const FrameSequence&>(&write_frame_file),
          py::arg("path"), py::arg("sequence"));
    m.def("write_grid_file", &write_grid_file, py::arg("path"), py::arg("grid"));
    m.def(
        "read_frame_file",
        [](const std::string& path) {
            const FrameFileData data = read_frame_file(path);
            return py::make_tuple(data.frames, data.stored_side, data.high_res_side);
        },
        py::arg("path"));
    m.def("write_net_file", &write_net_file, py::arg("path"), py::arg("net"));
    m.def("read_net_file", &read_net_file, py::arg("path"));
    m.def("write_emitters_csv", &write_emitters_csv, py::arg("path"), py::arg("emitters"));
    m.def("read_emitters_csv", &read_emitters_csv, py::arg("path"));
}
