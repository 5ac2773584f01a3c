#pragma once

#include <memory>
#include <optional>

#include "jano/analyzer.hpp"
#include "jano/dit.hpp"
#include "jano/scenes.hpp"
#include "jano/scheduler.hpp"

namespace jano {

/// Tokens are the (f, h, w) cells of a latent in flat order; each token
/// carries the channel values as its feature vector.
std::vector<float> tokens_from_latent(const LatentTensor& x);
LatentTensor latent_to_tokens_inverse(const std::vector<float>& tokens, uint32_t channels,
                                      uint32_t frames, uint32_t height, uint32_t width);

/// Velocity source driven by the pipeline. Implementations own any caching
/// state tied to the level partition.
class VelocityBackend {
public:
    virtual ~VelocityBackend() = default;
    virtual uint32_t token_dim() const = 0;
    /// Velocities for all tokens; capture_kv requests freeze-ready state.
    virtual void forward_full(const float* tokens, uint32_t n, double t, float* out,
                              bool capture_kv) = 0;
    /// Velocities for the active subset; frozen tokens are represented by
    /// whatever the backend cached at their last computed step.
    virtual void forward_masked(const float* active_tokens, std::span<const uint32_t> active_ids,
                                double t, float* out_active, int64_t step) = 0;
    /// Install the level partition decided after warm-up.
    virtual void on_levels(const LevelMap& levels, const BlockGrid& grid) = 0;
    virtual size_t cache_bytes() const { return 0; }
    virtual const KVCacheStore* cache() const { return nullptr; }
};

class DiTBackend final : public VelocityBackend {
public:
    DiTBackend(const ToyDiT& model, uint32_t total_tokens);
    uint32_t token_dim() const override { return model_.cfg.token_dim; }
    void forward_full(const float* tokens, uint32_t n, double t, float* out,
                      bool capture_kv) override;
    void forward_masked(const float* active_tokens, std::span<const uint32_t> active_ids, double t,
                        float* out_active, int64_t step) override;
    void on_levels(const LevelMap& levels, const BlockGrid& grid) override;
    size_t cache_bytes() const override;
    const KVCacheStore* cache() const override { return &cache_; }

private:
    const ToyDiT& model_;
    uint32_t total_tokens_;
    KVCacheStore cache_;
    KVCapture pending_capture_;
    bool has_capture_ = false;
    int64_t capture_step_ = -1;
};

/// Exact per-token Gaussian-target field (sigma 0 falls back to point mass).
class OracleFieldBackend final : public VelocityBackend {
public:
    OracleFieldBackend(const LatentTensor& clean, std::vector<float> sigma);
    uint32_t token_dim() const override { return channels_; }
    void forward_full(const float* tokens, uint32_t n, double t, float* out, bool) override;
    void forward_masked(const float* active_tokens, std::span<const uint32_t> active_ids, double t,
                        float* out_active, int64_t) override;
    void on_levels(const LevelMap&, const BlockGrid&) override {}

private:
    uint32_t channels_ = 0;
    uint32_t tokens_ = 0;
    std::vector<float> target_;  // token-major [token][channel]
    std::vector<float> sigma_;   // per token
};

struct PipelineConfig {
    ScheduleConfig schedule;
    AnalyzerConfig analyzer;
    /// When set, the level map is computed from warm-up latents and the plan
    /// rebuilt; otherwise the caller-provided plan and levels are used as is.
    bool replan_after_warmup = true;
};

struct StepTiming {
    uint32_t step = 0;
    Phase phase = Phase::Warmup;
    uint32_t active_tokens = 0;
    double ms = 0.0;
    // Wall time attributed proportionally to the active token counts per level.
    std::array<double, 3> level_ms = {0.0, 0.0, 0.0};
};

struct PipelineState {
    std::vector<float> tokens;
    std::vector<float> last_velocity;
    std::vector<uint8_t> has_velocity;
    uint32_t current_step = 0;
    std::vector<StepTiming> timing;
    uint64_t token_steps = 0;
    size_t cache_bytes = 0;

    double total_ms() const;
};

struct PipelineResult {
    LatentTensor final_latent;
    PipelineState state;
    LevelMap levels;
    StepPlan plan;
    std::optional<ComplexityMap> analyzer_map;
    CostEstimate cost;
};

/// Integrate the frozen subset with the velocities cached at their last
/// computed step. Throws InvalidStateError when a velocity is missing.
void advance_frozen(PipelineState& state, std::span<const uint32_t> frozen_ids, double dt,
                    uint32_t token_dim);

/// Three-phase run: full forwards through warm-up (recording latents for the
/// analyzer), an optional replan, masked forwards plus frozen advancement
/// through the interleaved phase, full forwards through cool-down. `levels`
/// is the block partition behind `plan`; both are replaced after warm-up when
/// cfg.replan_after_warmup is set.
PipelineResult run_pipeline(VelocityBackend& backend, const LatentTensor& x0,
                            const BlockGrid& grid, const StepPlan& plan, const LevelMap& levels,
                            const PipelineConfig& cfg);

/// All-Active level map sized for a grid.
LevelMap all_active_levels(const BlockGrid& grid);

}  // namespace jano
