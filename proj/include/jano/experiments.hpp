#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jano/config.hpp"
#include "jano/pipeline.hpp"
#include "jano/suite.hpp"

namespace jano {

double relative_l2(const std::vector<float>& a, const std::vector<float>& b);
double relative_l2(const LatentTensor& a, const LatentTensor& b);
double median(std::vector<double> values);

/// Trajectory for a scene under the configured dynamics.
DenoisingRun make_trajectory(const SceneSpec& spec, const TrajectoryConfig& cfg, uint64_t seed);

// ---------------------------------------------------------------------------
// Recognition / correlation experiments (analyze)

struct SceneAnalysis {
    uint32_t scene_index = 0;
    BlockGrid grid;
    std::vector<double> analyzer_norm;
    std::vector<double> fft_gt;
    std::vector<double> conv_gt;
    std::vector<double> fft_baseline;  // spectral scores on the step-K latent
    double acc_analyzer = 0.0;
    double acc_baseline = 0.0;
    Correlation corr_fft;   // analyzer vs spectral ground truth
    Correlation corr_conv;  // analyzer vs convergence ground truth
};

SceneAnalysis analyze_scene(const SceneSpec& spec, const TrajectoryConfig& traj,
                            const AnalyzerConfig& analyzer, uint64_t seed, uint32_t scene_index);

struct SuiteAnalysis {
    std::vector<SceneAnalysis> scenes;
    double median_acc_analyzer = 0.0;
    double median_acc_baseline = 0.0;
    double pooled_rho_fft = 0.0;
    double pooled_rho_conv = 0.0;
    double pooled_r_conv = 0.0;
    double pvalue_conv = 1.0;  // permutation test on the pooled conv pairing
};

SuiteAnalysis analyze_suite(const std::vector<SceneSpec>& scenes, const TrajectoryConfig& traj,
                            const AnalyzerConfig& analyzer, uint64_t seed,
                            uint32_t pvalue_shuffles = 10000);

// ---------------------------------------------------------------------------
// Velocity constancy (Fig. 4 style profiles)

struct ConstancyTrial {
    std::vector<double> same_component;   // ||vA - vB|| per grid time
    std::vector<double> cross_component;
    double same_std_over_mean = 0.0;
    bool cross_exceeds_at_end = false;
};

struct ConstancyExperiment {
    std::vector<double> grid;
    std::vector<double> pointmass_profile;  // single shared point-mass target
    double pointmass_max_deviation = 0.0;   // vs ||x0A - x0B||
    std::vector<ConstancyTrial> trials;
    double max_same_std_over_mean = 0.0;
    double frac_cross_exceeds = 0.0;
};

ConstancyExperiment constancy_experiment(const ConstancyConfig& cfg, uint64_t seed);

// ---------------------------------------------------------------------------
// Pipeline runs (run / ablate)

struct PipelineRun {
    PipelineResult result;
    double wall_ms = 0.0;
};

/// Adaptive pipeline with analyzer replan vs the all-active reference.
struct RunExperiment {
    PipelineRun reference;
    PipelineRun adaptive;
    double speedup_wall = 1.0;
    double token_step_fraction = 1.0;
    double final_rel_l2 = 0.0;
};

RunExperiment run_experiment(const SceneSpec& scene, const TrajectoryConfig& traj,
                             const AnalyzerConfig& analyzer, const ScheduleConfig& schedule,
                             const DiTConfig* model, uint64_t seed);

struct AblateArm {
    double ratio = 0.0;           // random mask ratio (fraction of blocks frozen)
    uint32_t random_frozen = 0;   // blocks frozen in the random arm
    double fraction_random = 1.0;
    double fraction_aware = 1.0;
    double err_random = 0.0;
    double err_aware = 0.0;
    double flops_speedup_random = 1.0;  // query-side, from the cost model
    double flops_speedup_aware = 1.0;
    double wall_ms_random = 0.0;
    double wall_ms_aware = 0.0;
};

struct AblateExperiment {
    double wall_ms_full = 0.0;
    std::vector<AblateArm> arms;
};

/// Random-mask vs convergence-aware comparison at matched token-step budgets,
/// run on oracle-rollout dynamics.
AblateExperiment ablate_experiment(const SceneSpec& scene, const TrajectoryConfig& traj,
                                   const AnalyzerConfig& analyzer, const ScheduleConfig& schedule,
                                   const std::vector<double>& ratios, uint64_t seed);

/// Level map with `frozen` random blocks Static and the rest Active.
LevelMap random_static_levels(uint32_t block_count, uint32_t frozen, uint64_t seed);

/// Largest random-arm freeze count whose cost fraction stays at or above
/// `target_fraction` (so the random arm never gets less compute).
uint32_t match_random_freeze_count(const BlockGrid& grid, const ScheduleConfig& schedule,
                                   double target_fraction);

}  // namespace jano
