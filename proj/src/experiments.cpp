#include "jano/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "jano/flow.hpp"
#include "jano/parallel.hpp"
#include "jano/rng.hpp"

namespace jano {

namespace {
using Clock = std::chrono::steady_clock;

double wall_ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}
}  // namespace

double relative_l2(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) throw InvalidInputError("relative_l2: size mismatch");
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        num += d * d;
        den += static_cast<double>(b[i]) * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

double relative_l2(const LatentTensor& a, const LatentTensor& b) {
    if (!a.same_shape(b)) throw InvalidInputError("relative_l2: shape mismatch");
    return relative_l2(a.data, b.data);
}

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidInputError("median of empty set");
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

DenoisingRun make_trajectory(const SceneSpec& spec, const TrajectoryConfig& cfg, uint64_t seed) {
    const LatentTensor clean = render_scene(spec);
    if (cfg.mode == TrajectoryMode::Interpolate) return synth_trajectory(clean, cfg.steps, seed);
    return oracle_rollout(clean, region_sigma_map(spec, cfg.sigma_scale), cfg.steps, seed);
}

SceneAnalysis analyze_scene(const SceneSpec& spec, const TrajectoryConfig& traj,
                            const AnalyzerConfig& analyzer, uint64_t seed, uint32_t scene_index) {
    const uint64_t scene_seed = splitmix64(seed ^ (0xa11ce00ULL + scene_index));
    const DenoisingRun run = make_trajectory(spec, traj, scene_seed);

    SceneAnalysis out;
    out.scene_index = scene_index;
    out.grid = BlockGrid::make(spec.frames, spec.height, spec.width, analyzer.block);

    const ComplexityMap map = complexity_map(run, analyzer);
    out.analyzer_norm = map.normalized;
    out.fft_gt = fft_ground_truth(run.clean, out.grid);
    out.conv_gt = convergence_ground_truth(run, out.grid);
    out.fft_baseline = fft_ground_truth(run.step(analyzer.warmup_steps), out.grid);

    out.acc_analyzer = recognition_accuracy(out.analyzer_norm, out.fft_gt);
    out.acc_baseline = recognition_accuracy(out.fft_baseline, out.fft_gt);
    out.corr_fft = rank_correlation(out.analyzer_norm, out.fft_gt);
    out.corr_conv = rank_correlation(out.analyzer_norm, out.conv_gt);
    return out;
}

SuiteAnalysis analyze_suite(const std::vector<SceneSpec>& scenes, const TrajectoryConfig& traj,
                            const AnalyzerConfig& analyzer, uint64_t seed,
                            uint32_t pvalue_shuffles) {
    SuiteAnalysis suite;
    suite.scenes.resize(scenes.size());
    parallel_for(scenes.size(), [&](size_t begin, size_t end, uint32_t) {
        for (size_t i = begin; i < end; ++i)
            suite.scenes[i] =
                analyze_scene(scenes[i], traj, analyzer, seed, static_cast<uint32_t>(i));
    });

    std::vector<double> acc_an, acc_base;
    std::vector<double> pooled_an, pooled_fft, pooled_conv;
    for (const SceneAnalysis& s : suite.scenes) {
        acc_an.push_back(s.acc_analyzer);
        acc_base.push_back(s.acc_baseline);
        pooled_an.insert(pooled_an.end(), s.analyzer_norm.begin(), s.analyzer_norm.end());
        pooled_fft.insert(pooled_fft.end(), s.fft_gt.begin(), s.fft_gt.end());
        pooled_conv.insert(pooled_conv.end(), s.conv_gt.begin(), s.conv_gt.end());
    }
    suite.median_acc_analyzer = median(acc_an);
    suite.median_acc_baseline = median(acc_base);
    suite.pooled_rho_fft = rank_correlation(pooled_an, pooled_fft).spearman;
    const Correlation conv = rank_correlation(pooled_an, pooled_conv);
    suite.pooled_rho_conv = conv.spearman;
    suite.pooled_r_conv = conv.pearson;
    if (pvalue_shuffles > 0)
        suite.pvalue_conv =
            spearman_permutation_pvalue(pooled_an, pooled_conv, pvalue_shuffles, seed);
    return suite;
}

ConstancyExperiment constancy_experiment(const ConstancyConfig& cfg, uint64_t seed) {
    ConstancyExperiment exp;
    for (double t = 0.0; t <= cfg.grid_max + 1e-12; t += cfg.grid_step)
        exp.grid.push_back(std::min(t, cfg.grid_max));

    const uint32_t d = cfg.dimension;

    // Shared point-mass target: the profile is exactly ||x0A - x0B|| everywhere.
    {
        Rng rng = Rng::stream(seed, 0x706d31ULL);
        Vec mu(d);
        for (double& v : mu) v = 3.0 * rng.normal();
        const MixtureTarget target = MixtureTarget::point_masses({mu});
        SourceTargetPair a, b;
        a.x1 = b.x1 = mu;
        a.x0.resize(d);
        b.x0.resize(d);
        for (double& v : a.x0) v = rng.normal();
        for (double& v : b.x0) v = rng.normal();
        exp.pointmass_profile = velocity_constancy_profile(target, a, b, exp.grid);
        Vec diff(d);
        for (uint32_t j = 0; j < d; ++j) diff[j] = a.x0[j] - b.x0[j];
        const double base = norm2(diff);
        for (double v : exp.pointmass_profile)
            exp.pointmass_max_deviation = std::max(exp.pointmass_max_deviation, std::abs(v - base));
    }

    Vec mu1(d, 0.0), mu2(d, 0.0);
    mu2[0] = cfg.separation;
    const MixtureTarget target = MixtureTarget::point_masses({mu1, mu2});

    uint32_t exceed = 0;
    for (uint32_t trial = 0; trial < cfg.trials; ++trial) {
        Rng rng = Rng::stream(seed, 0x747269ULL + trial);
        SourceTargetPair a, b, c;
        a.x0.resize(d);
        b.x0.resize(d);
        c.x0.resize(d);
        for (double& v : a.x0) v = rng.normal();
        for (double& v : b.x0) v = rng.normal();
        for (double& v : c.x0) v = rng.normal();
        a.x1 = mu1;
        b.x1 = mu1;  // same component as A
        c.x1 = mu2;  // cross component

        ConstancyTrial t;
        t.same_component = velocity_constancy_profile(target, a, b, exp.grid);
        t.cross_component = velocity_constancy_profile(target, a, c, exp.grid);

        double mean = 0.0;
        for (double v : t.same_component) mean += v;
        mean /= static_cast<double>(t.same_component.size());
        double var = 0.0;
        for (double v : t.same_component) var += (v - mean) * (v - mean);
        var /= static_cast<double>(t.same_component.size());
        t.same_std_over_mean = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
        t.cross_exceeds_at_end = t.cross_component.back() > t.same_component.back();

        exp.max_same_std_over_mean = std::max(exp.max_same_std_over_mean, t.same_std_over_mean);
        exceed += t.cross_exceeds_at_end;
        exp.trials.push_back(std::move(t));
    }
    exp.frac_cross_exceeds =
        cfg.trials ? static_cast<double>(exceed) / static_cast<double>(cfg.trials) : 0.0;
    return exp;
}

namespace {

PipelineRun timed_pipeline(VelocityBackend& backend, const LatentTensor& x0, const BlockGrid& grid,
                           const StepPlan& plan, const LevelMap& levels, const PipelineConfig& cfg) {
    const auto t0 = Clock::now();
    PipelineRun run;
    run.result = run_pipeline(backend, x0, grid, plan, levels, cfg);
    run.wall_ms = wall_ms_since(t0);
    return run;
}

std::unique_ptr<VelocityBackend> make_backend(const SceneSpec& scene, const TrajectoryConfig& traj,
                                              const DiTConfig* model, const ToyDiT*& model_out,
                                              std::unique_ptr<ToyDiT>& model_store) {
    const LatentTensor clean = render_scene(scene);
    if (model) {
        DiTConfig cfg = *model;
        cfg.token_dim = scene.channels;
        model_store = std::make_unique<ToyDiT>(ToyDiT::make(cfg));
        model_out = model_store.get();
        const uint32_t tokens =
            static_cast<uint32_t>(static_cast<size_t>(scene.frames) * scene.height * scene.width);
        return std::make_unique<DiTBackend>(*model_store, tokens);
    }
    model_out = nullptr;
    return std::make_unique<OracleFieldBackend>(clean,
                                                region_sigma_map(scene, traj.sigma_scale));
}

LatentTensor seeded_noise(const SceneSpec& scene, uint64_t seed) {
    LatentTensor x0(scene.channels, scene.frames, scene.height, scene.width);
    Rng rng = Rng::stream(seed, 0x6e6f697365ULL);
    for (float& v : x0.data) v = rng.normal_f();
    return x0;
}

}  // namespace

RunExperiment run_experiment(const SceneSpec& scene, const TrajectoryConfig& traj,
                             const AnalyzerConfig& analyzer, const ScheduleConfig& schedule,
                             const DiTConfig* model, uint64_t seed) {
    const BlockGrid grid = BlockGrid::make(scene.frames, scene.height, scene.width, analyzer.block);
    const LatentTensor x0 = seeded_noise(scene, seed);

    PipelineConfig pcfg;
    pcfg.schedule = schedule;
    pcfg.analyzer = analyzer;

    RunExperiment exp;
    {
        const ToyDiT* m = nullptr;
        std::unique_ptr<ToyDiT> store;
        auto backend = make_backend(scene, traj, model, m, store);
        const LevelMap all = all_active_levels(grid);
        pcfg.replan_after_warmup = false;
        exp.reference =
            timed_pipeline(*backend, x0, grid, build_step_plan(all, schedule), all, pcfg);
    }
    {
        const ToyDiT* m = nullptr;
        std::unique_ptr<ToyDiT> store;
        auto backend = make_backend(scene, traj, model, m, store);
        const LevelMap all = all_active_levels(grid);
        pcfg.replan_after_warmup = true;
        exp.adaptive =
            timed_pipeline(*backend, x0, grid, build_step_plan(all, schedule), all, pcfg);
    }
    exp.speedup_wall = exp.adaptive.wall_ms > 0.0 ? exp.reference.wall_ms / exp.adaptive.wall_ms : 1.0;
    exp.token_step_fraction = exp.adaptive.result.cost.fraction;
    exp.final_rel_l2 = relative_l2(exp.adaptive.result.final_latent, exp.reference.result.final_latent);
    return exp;
}

LevelMap random_static_levels(uint32_t block_count, uint32_t frozen, uint64_t seed) {
    if (frozen > block_count) throw InvalidInputError("random_static_levels: too many frozen blocks");
    std::vector<uint32_t> ids(block_count);
    for (uint32_t i = 0; i < block_count; ++i) ids[i] = i;
    Rng rng = Rng::stream(seed, 0x6d61736bULL);
    for (size_t i = ids.size() - 1; i > 0; --i) std::swap(ids[i], ids[rng.below(i + 1)]);
    LevelMap levels;
    levels.levels.assign(block_count, Level::Active);
    for (uint32_t i = 0; i < frozen; ++i) levels.levels[ids[i]] = Level::Static;
    return levels;
}

uint32_t match_random_freeze_count(const BlockGrid& grid, const ScheduleConfig& schedule,
                                   double target_fraction) {
    uint32_t best = 0;
    for (uint32_t n = 0; n <= grid.block_count(); ++n) {
        LevelMap levels;
        levels.levels.assign(grid.block_count(), Level::Active);
        for (uint32_t b = 0; b < n; ++b) levels.levels[b] = Level::Static;
        const double fraction = estimate_cost(build_step_plan(levels, schedule), grid).fraction;
        if (fraction >= target_fraction - 1e-12)
            best = n;
        else
            break;  // fraction decreases monotonically in n
    }
    return best;
}

AblateExperiment ablate_experiment(const SceneSpec& scene, const TrajectoryConfig& traj,
                                   const AnalyzerConfig& analyzer, const ScheduleConfig& schedule,
                                   const std::vector<double>& ratios, uint64_t seed) {
    if (traj.mode != TrajectoryMode::OracleRollout)
        throw InvalidInputError("ablate_experiment: requires oracle-rollout dynamics");
    const BlockGrid grid = BlockGrid::make(scene.frames, scene.height, scene.width, analyzer.block);
    const LatentTensor clean = render_scene(scene);
    const std::vector<float> sigma = region_sigma_map(scene, traj.sigma_scale);
    const LatentTensor x0 = seeded_noise(scene, seed);

    PipelineConfig pcfg;
    pcfg.schedule = schedule;
    pcfg.analyzer = analyzer;
    pcfg.replan_after_warmup = false;

    AblateExperiment exp;
    OracleFieldBackend full_backend(clean, sigma);
    const LevelMap all = all_active_levels(grid);
    const PipelineRun full =
        timed_pipeline(full_backend, x0, grid, build_step_plan(all, schedule), all, pcfg);
    exp.wall_ms_full = full.wall_ms;

    // The analyzer consumes the run's own warm-up latents; with everything
    // active those match the plain rollout trajectory.
    const DenoisingRun run = oracle_rollout(clean, sigma, schedule.total_steps, seed);
    std::vector<LatentTensor> warmup(run.steps.begin(),
                                     run.steps.begin() + analyzer.warmup_steps);
    const ComplexityMap map = complexity_map(warmup, analyzer);

    for (size_t ri = 0; ri < ratios.size(); ++ri) {
        AblateArm arm;
        arm.ratio = ratios[ri];
        arm.random_frozen =
            static_cast<uint32_t>(std::llround(arm.ratio * grid.block_count()));

        const LevelMap rnd_levels = random_static_levels(
            grid.block_count(), arm.random_frozen, splitmix64(seed ^ (0xab1a7eULL + ri)));
        const StepPlan rnd_plan = build_step_plan(rnd_levels, schedule);
        arm.fraction_random = estimate_cost(rnd_plan, grid).fraction;

        LevelMap aware_levels;
        if (arm.random_frozen == 0) {
            aware_levels = all;  // the only plan matching a full-run budget
        } else {
            ScheduleConfig aware_cfg = schedule;
            const ThresholdChoice th =
                optimize_thresholds(map.normalized, arm.fraction_random, schedule, grid);
            aware_cfg.static_threshold = th.static_threshold;
            aware_cfg.moderate_threshold = th.moderate_threshold;
            aware_levels = classify_levels(map, aware_cfg);
        }
        const StepPlan aware_plan = build_step_plan(aware_levels, schedule);
        arm.fraction_aware = estimate_cost(aware_plan, grid).fraction;

        {
            OracleFieldBackend backend(clean, sigma);
            const PipelineRun r = timed_pipeline(backend, x0, grid, rnd_plan, rnd_levels, pcfg);
            arm.err_random = relative_l2(r.result.final_latent, full.result.final_latent);
            arm.wall_ms_random = r.wall_ms;
        }
        {
            OracleFieldBackend backend(clean, sigma);
            const PipelineRun r = timed_pipeline(backend, x0, grid, aware_plan, aware_levels, pcfg);
            arm.err_aware = relative_l2(r.result.final_latent, full.result.final_latent);
            arm.wall_ms_aware = r.wall_ms;
        }
        arm.flops_speedup_random = 1.0 / arm.fraction_random;
        arm.flops_speedup_aware = 1.0 / arm.fraction_aware;
        exp.arms.push_back(arm);
    }
    return exp;
}

}  // namespace jano
