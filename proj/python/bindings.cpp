#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jano/experiments.hpp"
#include "jano/flow.hpp"
#include "jano/io.hpp"

namespace py = pybind11;
using namespace jano;

namespace {

LatentTensor latent_from_array(py::array_t<float, py::array::c_style | py::array::forcecast> arr) {
    if (arr.ndim() != 4) throw InvalidInputError("expected a (C, F, H, W) float32 array");
    const auto c = static_cast<uint32_t>(arr.shape(0));
    const auto f = static_cast<uint32_t>(arr.shape(1));
    const auto h = static_cast<uint32_t>(arr.shape(2));
    const auto w = static_cast<uint32_t>(arr.shape(3));
    std::vector<float> data(arr.data(), arr.data() + arr.size());
    return LatentTensor::from_data(c, f, h, w, std::move(data));
}

py::array_t<float> latent_to_array(const LatentTensor& x) {
    py::array_t<float> arr({x.channels, x.frames, x.height, x.width});
    std::copy(x.data.begin(), x.data.end(), arr.mutable_data());
    return arr;
}

SceneSpec scene_from_dict(const py::dict& d) {
    SceneSpec s;
    s.channels = d["channels"].cast<uint32_t>();
    s.frames = d["frames"].cast<uint32_t>();
    s.height = d["height"].cast<uint32_t>();
    s.width = d["width"].cast<uint32_t>();
    if (d.contains("seed")) s.seed = d["seed"].cast<uint64_t>();
    for (const auto item : d["regions"].cast<py::list>()) {
        const py::dict rd = item.cast<py::dict>();
        Region r;
        const auto box = rd["box"].cast<std::vector<uint32_t>>();
        if (box.size() != 6) throw InvalidInputError("region box must be [f0,f1,h0,h1,w0,w1]");
        r.f0 = box[0];
        r.f1 = box[1];
        r.h0 = box[2];
        r.h1 = box[3];
        r.w0 = box[4];
        r.w1 = box[5];
        r.kind = pattern_from_name(rd["pattern"].cast<std::string>());
        r.amplitude = rd["amplitude"].cast<double>();
        if (rd.contains("freq")) r.freq = rd["freq"].cast<double>();
        if (rd.contains("period")) r.period = rd["period"].cast<uint32_t>();
        if (rd.contains("velocity")) r.velocity = rd["velocity"].cast<double>();
        s.regions.push_back(r);
    }
    s.validate();
    return s;
}

ScheduleConfig schedule_from_kwargs(uint32_t total_steps, uint32_t warmup_steps,
                                    uint32_t cooldown_steps, double static_threshold,
                                    uint32_t static_interval, double moderate_threshold,
                                    uint32_t moderate_interval) {
    ScheduleConfig cfg;
    cfg.total_steps = total_steps;
    cfg.warmup_steps = warmup_steps;
    cfg.cooldown_steps = cooldown_steps;
    cfg.static_threshold = static_threshold;
    cfg.static_interval = static_interval;
    cfg.moderate_threshold = moderate_threshold;
    cfg.moderate_interval = moderate_interval;
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Region-aware diffusion acceleration testbed: block complexity analysis, "
              "convergence-level scheduling, and a token-sparse DiT pipeline with KV caching.";

    py::register_exception<InvalidInputError>(m, "InvalidInputError", PyExc_ValueError);
    py::register_exception<InvalidStateError>(m, "InvalidStateError", PyExc_RuntimeError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<SingularityError>(m, "SingularityError", PyExc_ArithmeticError);
    py::register_exception<CorrelationUndefinedError>(m, "CorrelationUndefinedError",
                                                      PyExc_ValueError);
    py::register_exception<BudgetInfeasibleError>(m, "BudgetInfeasibleError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

    // Latent persistence.
    m.def("save_latent",
          [](py::array_t<float, py::array::c_style | py::array::forcecast> arr,
             const std::string& path) { save_latent(latent_from_array(arr), path); },
          py::arg("latent"), py::arg("path"));
    m.def("load_latent",
          [](const std::string& path) { return latent_to_array(load_latent(path)); },
          py::arg("path"));

    // Scenes and trajectories.
    m.def("render_scene",
          [](const py::dict& spec) { return latent_to_array(render_scene(scene_from_dict(spec))); },
          py::arg("scene"));
    m.def("standard_suite_scene_count", [](uint32_t count, uint64_t seed) {
        return standard_suite(count, seed).size();
    });
    m.def("synth_trajectory",
          [](py::array_t<float, py::array::c_style | py::array::forcecast> clean, uint32_t steps,
             uint64_t seed) {
              const DenoisingRun run = synth_trajectory(latent_from_array(clean), steps, seed);
              py::list out;
              for (const LatentTensor& x : run.steps) out.append(latent_to_array(x));
              return py::make_tuple(out, latent_to_array(run.noise));
          },
          py::arg("clean"), py::arg("steps"), py::arg("seed"));

    // Analyzer.
    m.def("complexity_map",
          [](const py::list& steps, uint32_t warmup_steps, double temporal_weight,
             double spatial_weight, std::tuple<uint32_t, uint32_t, uint32_t> block) {
              std::vector<LatentTensor> latents;
              for (const auto& s : steps)
                  latents.push_back(latent_from_array(
                      s.cast<py::array_t<float, py::array::c_style | py::array::forcecast>>()));
              AnalyzerConfig cfg;
              cfg.warmup_steps = warmup_steps;
              cfg.temporal_weight = temporal_weight;
              cfg.spatial_weight = spatial_weight;
              cfg.block = {std::get<0>(block), std::get<1>(block), std::get<2>(block)};
              return complexity_map(latents, cfg).normalized;
          },
          py::arg("steps"), py::arg("warmup_steps"), py::arg("temporal_weight") = 0.7,
          py::arg("spatial_weight") = 0.3, py::arg("block") = std::make_tuple(2u, 16u, 16u));
    m.def("fft_ground_truth",
          [](py::array_t<float, py::array::c_style | py::array::forcecast> clean,
             std::tuple<uint32_t, uint32_t, uint32_t> block) {
              const LatentTensor x = latent_from_array(clean);
              const BlockGrid grid = BlockGrid::make(
                  x.frames, x.height, x.width,
                  {std::get<0>(block), std::get<1>(block), std::get<2>(block)});
              return fft_ground_truth(x, grid);
          },
          py::arg("clean"), py::arg("block") = std::make_tuple(2u, 16u, 16u));
    m.def("rank_correlation", [](const std::vector<double>& a, const std::vector<double>& b) {
        const Correlation c = rank_correlation(a, b);
        return py::make_tuple(c.pearson, c.spearman);
    });
    m.def("recognition_accuracy",
          [](const std::vector<double>& predicted, const std::vector<double>& reference) {
              return recognition_accuracy(predicted, reference);
          });

    // Scheduler.
    m.def("classify_levels",
          [](const std::vector<double>& scores, double static_threshold, double moderate_threshold) {
              ScheduleConfig cfg;
              cfg.static_threshold = static_threshold;
              cfg.moderate_threshold = moderate_threshold;
              std::vector<int> out;
              for (Level l : classify_levels(scores, cfg).levels) out.push_back(static_cast<int>(l));
              return out;
          },
          py::arg("scores"), py::arg("static_threshold"), py::arg("moderate_threshold"));
    m.def("plan_cost_fraction",
          [](const std::vector<int>& levels, uint32_t frames, uint32_t height, uint32_t width,
             std::tuple<uint32_t, uint32_t, uint32_t> block, uint32_t total_steps,
             uint32_t warmup_steps, uint32_t cooldown_steps, uint32_t static_interval,
             uint32_t moderate_interval) {
              const BlockGrid grid = BlockGrid::make(
                  frames, height, width,
                  {std::get<0>(block), std::get<1>(block), std::get<2>(block)});
              ScheduleConfig cfg;
              cfg.total_steps = total_steps;
              cfg.warmup_steps = warmup_steps;
              cfg.cooldown_steps = cooldown_steps;
              cfg.static_interval = static_interval;
              cfg.moderate_interval = moderate_interval;
              LevelMap map;
              for (int l : levels) map.levels.push_back(static_cast<Level>(l));
              return estimate_cost(build_step_plan(map, cfg), grid).fraction;
          });
    m.def("optimize_thresholds",
          [](const std::vector<double>& scores, double budget, uint32_t frames, uint32_t height,
             uint32_t width, std::tuple<uint32_t, uint32_t, uint32_t> block, uint32_t total_steps,
             uint32_t warmup_steps, uint32_t cooldown_steps, uint32_t static_interval,
             uint32_t moderate_interval) {
              const BlockGrid grid = BlockGrid::make(
                  frames, height, width,
                  {std::get<0>(block), std::get<1>(block), std::get<2>(block)});
              ScheduleConfig cfg;
              cfg.total_steps = total_steps;
              cfg.warmup_steps = warmup_steps;
              cfg.cooldown_steps = cooldown_steps;
              cfg.static_interval = static_interval;
              cfg.moderate_interval = moderate_interval;
              const ThresholdChoice th = optimize_thresholds(scores, budget, cfg, grid);
              return py::make_tuple(th.static_threshold, th.moderate_threshold);
          });

    // Flow machinery.
    m.def("oracle_velocity",
          [](const std::vector<std::vector<double>>& means, const std::vector<double>& weights,
             const std::vector<double>& x_t, double t) {
              std::vector<MixtureComponent> comps;
              for (size_t i = 0; i < means.size(); ++i)
                  comps.push_back({weights[i], means[i], 0.0});
              return oracle_velocity(MixtureTarget::make(std::move(comps)), x_t, t);
          },
          py::arg("means"), py::arg("weights"), py::arg("x_t"), py::arg("t"));
    m.def("latent_distance", &latent_distance);

    // Toy DiT runtime.
    py::class_<ToyDiT>(m, "ToyDiT")
        .def(py::init([](uint32_t layers, uint32_t d_model, uint32_t heads, uint32_t ff_dim,
                         uint32_t token_dim, uint64_t seed) {
                 DiTConfig cfg;
                 cfg.layers = layers;
                 cfg.d_model = d_model;
                 cfg.heads = heads;
                 cfg.ff_dim = ff_dim;
                 cfg.token_dim = token_dim;
                 cfg.seed = seed;
                 return ToyDiT::make(cfg);
             }),
             py::arg("layers") = 4, py::arg("d_model") = 64, py::arg("heads") = 4,
             py::arg("ff_dim") = 256, py::arg("token_dim") = 4, py::arg("seed") = 0)
        .def("full_forward",
             [](const ToyDiT& model,
                py::array_t<float, py::array::c_style | py::array::forcecast> tokens, double t) {
                 if (tokens.ndim() != 2 ||
                     tokens.shape(1) != static_cast<py::ssize_t>(model.cfg.token_dim))
                     throw InvalidInputError("expected (n, token_dim) float32 tokens");
                 const auto n = static_cast<uint32_t>(tokens.shape(0));
                 py::array_t<float> out({tokens.shape(0), tokens.shape(1)});
                 full_forward(model, tokens.data(), n, t, out.mutable_data());
                 return out;
             },
             py::arg("tokens"), py::arg("t"));

    // End-to-end pipeline on the exact oracle field.
    m.def("run_oracle_pipeline",
          [](const py::dict& scene, double sigma_scale, uint32_t total_steps, uint32_t warmup_steps,
             uint32_t cooldown_steps, double static_threshold, uint32_t static_interval,
             double moderate_threshold, uint32_t moderate_interval, uint32_t analyzer_warmup,
             std::tuple<uint32_t, uint32_t, uint32_t> block, uint64_t seed) {
              const SceneSpec spec = scene_from_dict(scene);
              TrajectoryConfig traj;
              traj.steps = total_steps;
              traj.mode = TrajectoryMode::OracleRollout;
              traj.sigma_scale = sigma_scale;
              AnalyzerConfig analyzer =
                  AnalyzerConfig::defaults(total_steps, spec.frames,
                                           {std::get<0>(block), std::get<1>(block), std::get<2>(block)});
              analyzer.warmup_steps = analyzer_warmup;
              const ScheduleConfig schedule = schedule_from_kwargs(
                  total_steps, warmup_steps, cooldown_steps, static_threshold, static_interval,
                  moderate_threshold, moderate_interval);
              const RunExperiment exp =
                  run_experiment(spec, traj, analyzer, schedule, nullptr, seed);
              py::dict out;
              out["token_step_fraction"] = exp.token_step_fraction;
              out["rel_l2_vs_full"] = exp.final_rel_l2;
              out["speedup_wall"] = exp.speedup_wall;
              out["level_counts"] =
                  py::make_tuple(exp.adaptive.result.levels.count(Level::Static),
                                 exp.adaptive.result.levels.count(Level::Moderate),
                                 exp.adaptive.result.levels.count(Level::Active));
              out["final"] = latent_to_array(exp.adaptive.result.final_latent);
              return out;
          },
          py::arg("scene"), py::arg("sigma_scale") = 0.25, py::arg("total_steps") = 50,
          py::arg("warmup_steps") = 6, py::arg("cooldown_steps") = 2,
          py::arg("static_threshold") = 0.4, py::arg("static_interval") = 6,
          py::arg("moderate_threshold") = 0.6, py::arg("moderate_interval") = 4,
          py::arg("analyzer_warmup") = 5, py::arg("block") = std::make_tuple(2u, 16u, 16u),
          py::arg("seed") = 1);

    m.attr("__version__") = "0.1.0";
}
