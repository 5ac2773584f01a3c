#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "jano/analyzer.hpp"
#include "jano/dit.hpp"
#include "jano/scenes.hpp"
#include "jano/scheduler.hpp"

namespace jano {

enum class TrajectoryMode : uint8_t { Interpolate, OracleRollout };

struct TrajectoryConfig {
    uint32_t steps = 50;
    TrajectoryMode mode = TrajectoryMode::Interpolate;
    double sigma_scale = 0.0;  // oracle-rollout target width, per unit amplitude
};

struct AblateConfig {
    std::vector<double> mask_ratios = {0.0, 0.25, 0.5, 0.75};
};

struct ConstancyConfig {
    uint32_t dimension = 4;
    double separation = 200.0;
    uint32_t trials = 100;
    double grid_step = 0.05;
    double grid_max = 0.5;
};

struct SuiteConfig {
    std::string preset = "standard";  // "standard" | "rollout"
    uint32_t count = 20;
};

/// Parsed and schema-checked run configuration. Unknown keys anywhere in the
/// document are rejected; missing required keys are reported by path.
struct RunConfig {
    uint64_t seed = 1;
    std::optional<SceneSpec> scene;
    std::optional<SuiteConfig> suite;
    TrajectoryConfig trajectory;
    std::optional<AnalyzerConfig> analyzer;
    std::optional<ScheduleConfig> schedule;
    std::optional<DiTConfig> model;
    AblateConfig ablate;
    ConstancyConfig constancy;

    static RunConfig parse_file(const std::filesystem::path& path);
    static RunConfig parse_text(const std::string& text, const std::string& origin = "<config>");

    /// The scenes a command operates on: the explicit scene, or the suite.
    std::vector<SceneSpec> resolve_scenes() const;

    /// Throws ConfigError naming the missing section.
    const AnalyzerConfig& require_analyzer() const;
    const ScheduleConfig& require_schedule() const;
    const DiTConfig& require_model() const;
};

}  // namespace jano
