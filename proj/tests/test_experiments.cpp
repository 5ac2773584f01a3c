#include <cmath>

#include "doctest.h"

#include "jano/experiments.hpp"

using namespace jano;

namespace {

TrajectoryConfig interpolate_traj() {
    TrajectoryConfig t;
    t.steps = 50;
    t.mode = TrajectoryMode::Interpolate;
    return t;
}

TrajectoryConfig rollout_traj(double sigma_scale = 0.2) {
    TrajectoryConfig t;
    t.steps = 50;
    t.mode = TrajectoryMode::OracleRollout;
    t.sigma_scale = sigma_scale;
    return t;
}

ScheduleConfig wan_schedule() {
    ScheduleConfig cfg;
    cfg.total_steps = 50;
    cfg.warmup_steps = 6;
    cfg.cooldown_steps = 2;
    cfg.static_threshold = 0.4;
    cfg.static_interval = 6;
    cfg.moderate_threshold = 0.6;
    cfg.moderate_interval = 4;
    return cfg;
}

}  // namespace

TEST_CASE("analyzer beats the spectral baseline on a standard scene") {
    const SceneSpec spec = standard_suite(1, 1234)[0];
    const AnalyzerConfig cfg = AnalyzerConfig::defaults(50, spec.frames, suite_block());
    const SceneAnalysis s = analyze_scene(spec, interpolate_traj(), cfg, 7, 0);
    CHECK(s.acc_analyzer > s.acc_baseline);
    CHECK(s.acc_analyzer >= 0.6);
    CHECK(s.corr_fft.spearman > 0.5);
    CHECK(s.corr_conv.spearman > 0.5);
}

TEST_CASE("small suite analysis aggregates sensibly") {
    const auto scenes = standard_suite(4, 55);
    const AnalyzerConfig cfg = AnalyzerConfig::defaults(50, scenes[0].frames, suite_block());
    const SuiteAnalysis suite = analyze_suite(scenes, interpolate_traj(), cfg, 3, 500);
    CHECK(suite.scenes.size() == 4);
    CHECK(suite.median_acc_analyzer > suite.median_acc_baseline);
    CHECK(suite.pooled_rho_conv >= 0.6);
    CHECK(suite.pvalue_conv < 0.01);
}

TEST_CASE("constancy experiment summarizes flatness and growth") {
    ConstancyConfig cfg;
    cfg.trials = 20;
    const ConstancyExperiment exp = constancy_experiment(cfg, 5);
    CHECK(exp.pointmass_max_deviation <= 1e-9);
    CHECK(exp.max_same_std_over_mean <= 0.05);
    CHECK(exp.frac_cross_exceeds == doctest::Approx(1.0));
    CHECK(exp.trials.size() == 20);
    CHECK(exp.grid.front() == 0.0);
    CHECK(exp.grid.back() == doctest::Approx(0.5));
}

TEST_CASE("oracle run experiment freezes most of a static-heavy scene") {
    const SceneSpec spec = rollout_suite(1, 77)[0];
    const AnalyzerConfig analyzer = AnalyzerConfig::defaults(50, spec.frames, suite_block());
    const RunExperiment exp =
        run_experiment(spec, rollout_traj(), analyzer, wan_schedule(), nullptr, 11);
    CHECK(exp.reference.result.cost.fraction == doctest::Approx(1.0));
    CHECK(exp.token_step_fraction <= 0.55);
    CHECK(exp.final_rel_l2 <= 0.05);
    // Ledger rows match the external wall measurement within 2 percent.
    const double rows = exp.adaptive.result.state.total_ms();
    CHECK(rows <= exp.adaptive.wall_ms);
    CHECK(rows >= 0.90 * exp.adaptive.wall_ms);
}

TEST_CASE("ablation: ratio zero is exact, aware never loses at matched budget") {
    const SceneSpec spec = rollout_suite(1, 31)[0];
    const AnalyzerConfig analyzer = AnalyzerConfig::defaults(50, spec.frames, suite_block());
    const AblateExperiment exp = ablate_experiment(spec, rollout_traj(), analyzer, wan_schedule(),
                                                   {0.0, 0.5, 0.8}, 17);
    REQUIRE(exp.arms.size() == 3);
    CHECK(exp.arms[0].err_random <= 1e-7);
    CHECK(exp.arms[0].err_aware <= 1e-7);
    CHECK(exp.arms[0].fraction_random == doctest::Approx(1.0));
    for (const AblateArm& arm : exp.arms) {
        CHECK(arm.fraction_aware <= arm.fraction_random + 1e-9);
        CHECK(arm.err_aware <= std::max(arm.err_random, 1e-5));
    }
    CHECK(exp.arms[2].err_random > exp.arms[2].err_aware);
}

TEST_CASE("random level maps freeze the requested count") {
    const LevelMap levels = random_static_levels(36, 12, 3);
    CHECK(levels.count(Level::Static) == 12);
    CHECK(levels.count(Level::Active) == 24);
    CHECK_THROWS_AS(random_static_levels(4, 5, 1), InvalidInputError);
}

TEST_CASE("freeze-count matching brackets the target fraction") {
    const BlockGrid grid = BlockGrid::make(8, 48, 48, suite_block());
    const ScheduleConfig cfg = wan_schedule();
    const uint32_t n = match_random_freeze_count(grid, cfg, 0.6);
    LevelMap levels;
    levels.levels.assign(grid.block_count(), Level::Active);
    for (uint32_t b = 0; b < n; ++b) levels.levels[b] = Level::Static;
    const double fraction = estimate_cost(build_step_plan(levels, cfg), grid).fraction;
    CHECK(fraction >= 0.6);
    if (n < grid.block_count()) {
        levels.levels[n] = Level::Static;
        CHECK(estimate_cost(build_step_plan(levels, cfg), grid).fraction < 0.6);
    }
}

TEST_CASE("relative l2 and median helpers") {
    CHECK(relative_l2(std::vector<float>{1.0f, 0.0f}, std::vector<float>{1.0f, 0.0f}) == 0.0);
    CHECK(relative_l2(std::vector<float>{2.0f}, std::vector<float>{1.0f}) == doctest::Approx(1.0));
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == doctest::Approx(2.5));
}
