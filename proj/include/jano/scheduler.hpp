#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jano/analyzer.hpp"
#include "jano/block_grid.hpp"

namespace jano {

enum class Level : uint8_t { Static = 1, Moderate = 2, Active = 3 };

struct LevelMap {
    std::vector<Level> levels;  // one per block

    uint32_t count(Level l) const;
};

struct ScheduleConfig {
    uint32_t total_steps = 50;
    uint32_t warmup_steps = 6;
    uint32_t cooldown_steps = 2;
    double static_threshold = 0.4;
    uint32_t static_interval = 6;
    double moderate_threshold = 0.6;
    uint32_t moderate_interval = 4;

    static uint32_t default_cooldown(uint32_t total_steps);  // max(2, ceil(0.04 T))
    void validate() const;

    uint32_t interleaved_begin() const { return warmup_steps + 1; }        // 1-based, inclusive
    uint32_t interleaved_end() const { return total_steps - cooldown_steps; }  // inclusive
};

enum class Phase : uint8_t { Warmup, Interleaved, Cooldown };

const char* phase_name(Phase p);

/// Per-step active block sets. Steps are 1-based; index [k-1] addresses step k.
struct StepPlan {
    uint32_t total_steps = 0;
    uint32_t block_count = 0;
    std::vector<Phase> phases;
    std::vector<std::vector<uint32_t>> active_blocks;  // sorted ids per step

    Phase phase(uint32_t step) const { return phases.at(step - 1); }
    const std::vector<uint32_t>& active(uint32_t step) const { return active_blocks.at(step - 1); }
};

/// score <= static_threshold -> Static; <= moderate_threshold -> Moderate;
/// else Active. Boundary equality resolves to the cheaper level.
LevelMap classify_levels(std::span<const double> normalized_scores, const ScheduleConfig& cfg);
LevelMap classify_levels(const ComplexityMap& map, const ScheduleConfig& cfg);

StepPlan build_step_plan(const LevelMap& levels, const ScheduleConfig& cfg);

struct CostEstimate {
    uint64_t token_steps = 0;     // sum over steps of active token counts
    double attention_flops = 0;   // per-layer query-key token pairs: sum_k active_k * total
    double fraction = 0;          // token_steps / (T * total_tokens)
};

CostEstimate estimate_cost(const StepPlan& plan, const BlockGrid& grid);

struct ThresholdChoice {
    double static_threshold = 0.0;
    double moderate_threshold = 0.0;
};

/// Grid search over score quantiles (step 0.05). Feasible pairs keep the plan
/// cost fraction within the budget; among those the result maximizes Active
/// blocks, then Moderate blocks, then prefers the lower static threshold,
/// then the lower moderate threshold. Throws BudgetInfeasibleError (with the
/// minimum achievable fraction) when nothing fits.
ThresholdChoice optimize_thresholds(std::span<const double> normalized_scores, double budget,
                                    const ScheduleConfig& base, const BlockGrid& grid);

}  // namespace jano
