#include "jano/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jano {

uint32_t LevelMap::count(Level l) const {
    uint32_t n = 0;
    for (Level v : levels) n += v == l;
    return n;
}

uint32_t ScheduleConfig::default_cooldown(uint32_t total_steps) {
    return std::max<uint32_t>(2, (total_steps * 4 + 99) / 100);
}

void ScheduleConfig::validate() const {
    if (total_steps == 0) throw InvalidInputError("schedule: total steps must be positive");
    if (warmup_steps + cooldown_steps >= total_steps)
        throw InvalidInputError("schedule: warm-up plus cool-down must leave interleaved steps");
    if (static_interval == 0 || moderate_interval == 0)
        throw InvalidInputError("schedule: intervals must be >= 1");
    if (static_threshold < 0.0 || moderate_threshold > 1.0 ||
        static_threshold > moderate_threshold)
        throw InvalidInputError("schedule: thresholds must satisfy 0 <= static <= moderate <= 1");
}

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Warmup: return "warmup";
        case Phase::Interleaved: return "interleaved";
        case Phase::Cooldown: return "cooldown";
    }
    return "?";
}

LevelMap classify_levels(std::span<const double> scores, const ScheduleConfig& cfg) {
    cfg.validate();
    LevelMap map;
    map.levels.reserve(scores.size());
    for (double s : scores) {
        if (s < 0.0 || s > 1.0)
            throw InvalidInputError("classify_levels: scores must be normalized to [0, 1]");
        if (s <= cfg.static_threshold)
            map.levels.push_back(Level::Static);
        else if (s <= cfg.moderate_threshold)
            map.levels.push_back(Level::Moderate);
        else
            map.levels.push_back(Level::Active);
    }
    return map;
}

LevelMap classify_levels(const ComplexityMap& map, const ScheduleConfig& cfg) {
    return classify_levels(std::span<const double>(map.normalized), cfg);
}

StepPlan build_step_plan(const LevelMap& levels, const ScheduleConfig& cfg) {
    cfg.validate();
    const uint32_t nb = static_cast<uint32_t>(levels.levels.size());
    if (nb == 0) throw InvalidInputError("build_step_plan: empty level map");

    std::vector<uint32_t> all(nb);
    for (uint32_t b = 0; b < nb; ++b) all[b] = b;

    StepPlan plan;
    plan.total_steps = cfg.total_steps;
    plan.block_count = nb;
    plan.phases.resize(cfg.total_steps);
    plan.active_blocks.resize(cfg.total_steps);

    for (uint32_t k = 1; k <= cfg.total_steps; ++k) {
        const bool warm = k <= cfg.warmup_steps;
        const bool cool = k > cfg.total_steps - cfg.cooldown_steps;
        Phase phase = warm ? Phase::Warmup : cool ? Phase::Cooldown : Phase::Interleaved;
        plan.phases[k - 1] = phase;
        if (phase != Phase::Interleaved) {
            plan.active_blocks[k - 1] = all;
            continue;
        }
        const uint32_t offset = k - cfg.warmup_steps - 1;  // 0 at the first interleaved step
        const bool static_due = offset % cfg.static_interval == 0;
        const bool moderate_due = offset % cfg.moderate_interval == 0;
        std::vector<uint32_t>& act = plan.active_blocks[k - 1];
        for (uint32_t b = 0; b < nb; ++b) {
            switch (levels.levels[b]) {
                case Level::Static:
                    if (static_due) act.push_back(b);
                    break;
                case Level::Moderate:
                    if (moderate_due) act.push_back(b);
                    break;
                case Level::Active:
                    act.push_back(b);
                    break;
            }
        }
    }
    return plan;
}

CostEstimate estimate_cost(const StepPlan& plan, const BlockGrid& grid) {
    if (plan.block_count != grid.block_count())
        throw InvalidInputError("estimate_cost: plan and grid disagree on block count");
    std::vector<uint32_t> tokens_per_block(grid.block_count());
    for (uint32_t b = 0; b < grid.block_count(); ++b) {
        const BlockGrid::Extent e = grid.extent(b);
        tokens_per_block[b] = (e.f1 - e.f0) * (e.h1 - e.h0) * (e.w1 - e.w0);
    }
    const double total_tokens = static_cast<double>(grid.token_count());

    CostEstimate cost;
    for (uint32_t k = 1; k <= plan.total_steps; ++k) {
        uint64_t active = 0;
        for (uint32_t b : plan.active(k)) active += tokens_per_block[b];
        cost.token_steps += active;
        cost.attention_flops += static_cast<double>(active) * total_tokens;
    }
    cost.fraction = static_cast<double>(cost.token_steps) /
                    (static_cast<double>(plan.total_steps) * total_tokens);
    return cost;
}

ThresholdChoice optimize_thresholds(std::span<const double> scores, double budget,
                                    const ScheduleConfig& base, const BlockGrid& grid) {
    if (budget <= 0.0 || budget > 1.0)
        throw InvalidInputError("optimize_thresholds: budget must be in (0, 1]");
    if (scores.empty()) throw InvalidInputError("optimize_thresholds: empty score map");

    // Candidate thresholds are the empirical quantiles on a 0.05 grid.
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> qs;
    for (int i = 0; i <= 20; ++i) {
        const double q = 0.05 * i;
        const size_t idx = std::min(sorted.size() - 1,
                                    static_cast<size_t>(q * static_cast<double>(sorted.size())));
        qs.push_back(q == 0.0 ? 0.0 : sorted[idx]);
    }
    qs.push_back(0.0);
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());

    struct Candidate {
        double cost = 0.0;
        uint32_t active = 0;
        uint32_t moderate = 0;
        ThresholdChoice thresholds;
    };

    bool found = false;
    Candidate best;
    double min_cost = std::numeric_limits<double>::infinity();

    for (double lo : qs) {
        for (double hi : qs) {
            if (hi < lo) continue;
            ScheduleConfig cfg = base;
            cfg.static_threshold = lo;
            cfg.moderate_threshold = hi;
            const LevelMap levels = classify_levels(scores, cfg);
            const CostEstimate cost = estimate_cost(build_step_plan(levels, cfg), grid);
            min_cost = std::min(min_cost, cost.fraction);
            if (cost.fraction > budget) continue;
            Candidate cand{cost.fraction, levels.count(Level::Active), levels.count(Level::Moderate),
                           {lo, hi}};
            const bool better =
                !found || cand.active > best.active ||
                (cand.active == best.active &&
                 (cand.moderate > best.moderate ||
                  (cand.moderate == best.moderate &&
                   (cand.thresholds.static_threshold < best.thresholds.static_threshold ||
                    (cand.thresholds.static_threshold == best.thresholds.static_threshold &&
                     cand.thresholds.moderate_threshold < best.thresholds.moderate_threshold)))));
            if (better) {
                best = cand;
                found = true;
            }
        }
    }
    if (!found)
        throw BudgetInfeasibleError("optimize_thresholds: no threshold pair fits the budget",
                                    min_cost);
    return best.thresholds;
}

}  // namespace jano
