#include "jano/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstring>

namespace jano {

namespace {
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}
}  // namespace

std::vector<float> tokens_from_latent(const LatentTensor& x) {
    const size_t plane = static_cast<size_t>(x.frames) * x.height * x.width;
    std::vector<float> tokens(plane * x.channels);
    for (size_t tok = 0; tok < plane; ++tok)
        for (uint32_t c = 0; c < x.channels; ++c)
            tokens[tok * x.channels + c] = x.data[static_cast<size_t>(c) * plane + tok];
    return tokens;
}

LatentTensor latent_to_tokens_inverse(const std::vector<float>& tokens, uint32_t channels,
                                      uint32_t frames, uint32_t height, uint32_t width) {
    LatentTensor x(channels, frames, height, width);
    const size_t plane = static_cast<size_t>(frames) * height * width;
    if (tokens.size() != plane * channels)
        throw InvalidInputError("latent_to_tokens_inverse: token buffer size mismatch");
    for (size_t tok = 0; tok < plane; ++tok)
        for (uint32_t c = 0; c < channels; ++c)
            x.data[static_cast<size_t>(c) * plane + tok] = tokens[tok * channels + c];
    return x;
}

DiTBackend::DiTBackend(const ToyDiT& model, uint32_t total_tokens)
    : model_(model),
      total_tokens_(total_tokens),
      cache_(KVCacheStore::empty(model.cfg.layers, model.cfg.d_model, total_tokens)) {}

void DiTBackend::forward_full(const float* tokens, uint32_t n, double t, float* out,
                              bool capture_kv) {
    if (capture_kv) {
        full_forward(model_, tokens, n, t, out, &pending_capture_);
        has_capture_ = true;
        ++capture_step_;
    } else {
        full_forward(model_, tokens, n, t, out, nullptr);
    }
}

void DiTBackend::forward_masked(const float* active_tokens, std::span<const uint32_t> active_ids,
                                double t, float* out_active, int64_t step) {
    masked_forward(model_, active_tokens, active_ids, t, cache_, out_active, step);
}

void DiTBackend::on_levels(const LevelMap& levels, const BlockGrid& grid) {
    cache_ = KVCacheStore::for_levels(model_.cfg.layers, model_.cfg.d_model, levels, grid);
    if (!has_capture_)
        throw InvalidStateError("dit backend: level partition installed before any KV capture");
    cache_.fill_from_capture(pending_capture_, capture_step_);
}

size_t DiTBackend::cache_bytes() const { return cache_memory_report(cache_).total_bytes; }

OracleFieldBackend::OracleFieldBackend(const LatentTensor& clean, std::vector<float> sigma)
    : channels_(clean.channels),
      tokens_(static_cast<uint32_t>(static_cast<size_t>(clean.frames) * clean.height * clean.width)),
      target_(tokens_from_latent(clean)),
      sigma_(std::move(sigma)) {
    if (sigma_.empty()) sigma_.assign(tokens_, 0.0f);
    if (sigma_.size() != tokens_)
        throw InvalidInputError("oracle backend: sigma map size mismatch");
}

void OracleFieldBackend::forward_full(const float* tokens, uint32_t n, double t, float* out,
                                      bool) {
    if (n != tokens_) throw InvalidInputError("oracle backend: token count mismatch");
    for (uint32_t tok = 0; tok < n; ++tok)
        for (uint32_t c = 0; c < channels_; ++c) {
            const size_t i = static_cast<size_t>(tok) * channels_ + c;
            out[i] = static_cast<float>(
                gaussian_cell_velocity(tokens[i], t, target_[i], sigma_[tok]));
        }
}

void OracleFieldBackend::forward_masked(const float* active_tokens,
                                        std::span<const uint32_t> active_ids, double t,
                                        float* out_active, int64_t) {
    for (size_t a = 0; a < active_ids.size(); ++a) {
        const uint32_t tok = active_ids[a];
        for (uint32_t c = 0; c < channels_; ++c) {
            const size_t i = a * channels_ + c;
            out_active[i] = static_cast<float>(gaussian_cell_velocity(
                active_tokens[i], t, target_[static_cast<size_t>(tok) * channels_ + c],
                sigma_[tok]));
        }
    }
}

double PipelineState::total_ms() const {
    double acc = 0.0;
    for (const StepTiming& s : timing) acc += s.ms;
    return acc;
}

void advance_frozen(PipelineState& state, std::span<const uint32_t> frozen_ids, double dt,
                    uint32_t token_dim) {
    for (uint32_t id : frozen_ids) {
        if (!state.has_velocity[id])
            throw InvalidStateError("advance_frozen: token " + std::to_string(id) +
                                    " has no cached velocity");
        for (uint32_t c = 0; c < token_dim; ++c) {
            const size_t i = static_cast<size_t>(id) * token_dim + c;
            state.tokens[i] =
                static_cast<float>(state.tokens[i] + dt * state.last_velocity[i]);
        }
    }
}

LevelMap all_active_levels(const BlockGrid& grid) {
    LevelMap m;
    m.levels.assign(grid.block_count(), Level::Active);
    return m;
}

PipelineResult run_pipeline(VelocityBackend& backend, const LatentTensor& x0,
                            const BlockGrid& grid, const StepPlan& plan, const LevelMap& levels,
                            const PipelineConfig& cfg) {
    const uint32_t channels = x0.channels;
    if (backend.token_dim() != channels)
        throw InvalidInputError("run_pipeline: backend token_dim does not match latent channels");
    if (grid.frames != x0.frames || grid.height != x0.height || grid.width != x0.width)
        throw InvalidInputError("run_pipeline: grid does not match latent");
    if (plan.block_count != grid.block_count() || plan.total_steps != cfg.schedule.total_steps)
        throw InvalidInputError("run_pipeline: plan does not match grid/schedule");
    if (levels.levels.size() != grid.block_count())
        throw InvalidInputError("run_pipeline: level map does not match grid");
    cfg.schedule.validate();

    const uint32_t T = cfg.schedule.total_steps;
    const uint32_t n_tokens = static_cast<uint32_t>(grid.token_count());
    const double dt = 1.0 / static_cast<double>(T);
    const auto token_map = grid.token_index_map();

    PipelineResult result;
    result.plan = plan;
    result.levels = levels;

    PipelineState& st = result.state;
    st.tokens = tokens_from_latent(x0);
    st.last_velocity.assign(st.tokens.size(), 0.0f);
    st.has_velocity.assign(n_tokens, 0);

    std::vector<float> velocities(st.tokens.size());
    std::vector<float> active_buf;
    std::vector<float> out_buf;
    std::vector<LatentTensor> warmup_latents;
    std::vector<uint32_t> all_tokens(n_tokens);
    for (uint32_t i = 0; i < n_tokens; ++i) all_tokens[i] = i;

    StepPlan active_plan = plan;
    const uint32_t W = cfg.schedule.warmup_steps;

    for (uint32_t k = 1; k <= T; ++k) {
        const Phase phase = active_plan.phase(k);
        const double t = static_cast<double>(k - 1) * dt;
        const auto start = Clock::now();
        st.current_step = k;

        StepTiming timing;
        timing.step = k;
        timing.phase = phase;

        if (phase != Phase::Interleaved) {
            const bool capture = k == W;  // freeze-ready state for the first interleaved step
            backend.forward_full(st.tokens.data(), n_tokens, t, velocities.data(), capture);
            for (size_t i = 0; i < velocities.size(); ++i)
                st.tokens[i] = static_cast<float>(st.tokens[i] + dt * velocities[i]);
            st.last_velocity = velocities;
            std::fill(st.has_velocity.begin(), st.has_velocity.end(), 1);
            st.token_steps += n_tokens;
            timing.active_tokens = n_tokens;
        } else {
            // Active token ids for this step, in ascending order.
            std::vector<uint32_t> active;
            for (uint32_t b : active_plan.active(k)) {
                const auto& ids = token_map[b];
                active.insert(active.end(), ids.begin(), ids.end());
            }
            std::sort(active.begin(), active.end());

            active_buf.resize(active.size() * channels);
            out_buf.resize(active.size() * channels);
            for (size_t a = 0; a < active.size(); ++a)
                std::memcpy(&active_buf[a * channels],
                            &st.tokens[static_cast<size_t>(active[a]) * channels],
                            channels * sizeof(float));

            backend.forward_masked(active_buf.data(), active, t, out_buf.data(),
                                   static_cast<int64_t>(k));

            std::vector<uint8_t> is_active(n_tokens, 0);
            for (uint32_t id : active) is_active[id] = 1;
            std::vector<uint32_t> frozen;
            frozen.reserve(n_tokens - active.size());
            for (uint32_t id = 0; id < n_tokens; ++id)
                if (!is_active[id]) frozen.push_back(id);

            for (size_t a = 0; a < active.size(); ++a) {
                const uint32_t id = active[a];
                for (uint32_t c = 0; c < channels; ++c) {
                    const size_t i = static_cast<size_t>(id) * channels + c;
                    const float v = out_buf[a * channels + c];
                    st.tokens[i] = static_cast<float>(st.tokens[i] + dt * v);
                    st.last_velocity[i] = v;
                }
                st.has_velocity[id] = 1;
            }
            advance_frozen(st, frozen, dt, channels);
            st.token_steps += active.size();
            timing.active_tokens = static_cast<uint32_t>(active.size());
        }

        if (k <= W) {
            warmup_latents.push_back(latent_to_tokens_inverse(st.tokens, channels, grid.frames,
                                                              grid.height, grid.width));
        }

        // Analyzer and replanning work belongs to the warm-up step that
        // triggers it, so ledger rows keep summing to the run's wall time.
        if (k == W) {
            if (cfg.replan_after_warmup) {
                result.analyzer_map = complexity_map(warmup_latents, cfg.analyzer);
                result.levels = classify_levels(*result.analyzer_map, cfg.schedule);
                active_plan = build_step_plan(result.levels, cfg.schedule);
            }
            backend.on_levels(result.levels, grid);
        }

        timing.ms = ms_since(start);
        if (phase == Phase::Interleaved) {
            std::array<uint64_t, 3> per_level = {0, 0, 0};
            for (uint32_t b : active_plan.active(k))
                per_level[static_cast<int>(result.levels.levels[b]) - 1] += token_map[b].size();
            const uint64_t total_active = per_level[0] + per_level[1] + per_level[2];
            for (int lv = 0; lv < 3; ++lv)
                timing.level_ms[lv] = total_active
                                          ? timing.ms * static_cast<double>(per_level[lv]) /
                                                static_cast<double>(total_active)
                                          : 0.0;
        }
        st.timing.push_back(timing);
    }

    st.cache_bytes = backend.cache_bytes();
    result.final_latent =
        latent_to_tokens_inverse(st.tokens, channels, grid.frames, grid.height, grid.width);
    result.cost = estimate_cost(active_plan, grid);
    result.plan = active_plan;
    return result;
}

}  // namespace jano
