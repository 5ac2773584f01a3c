#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jano/tensor.hpp"

namespace jano {

enum class PatternKind : uint8_t {
    Constant,
    LinearRamp,
    Sinusoid,
    Checkerboard,
    MovingSinusoid,
};

const char* pattern_name(PatternKind k);
PatternKind pattern_from_name(const std::string& name);

/// One painted region. Boxes are half-open in (frames, height, width).
/// freq is in cycles per pixel (<= 0.5); period is the checkerboard repeat
/// length in pixels (even, >= 2; period 2 alternates every pixel); velocity
/// is in pixels per frame for MovingSinusoid.
struct Region {
    uint32_t f0 = 0, f1 = 0;
    uint32_t h0 = 0, h1 = 0;
    uint32_t w0 = 0, w1 = 0;
    PatternKind kind = PatternKind::Constant;
    double amplitude = 1.0;
    double freq = 0.0;
    uint32_t period = 2;
    double velocity = 0.0;
};

struct SceneSpec {
    uint32_t channels = 1;
    uint32_t frames = 1;
    uint32_t height = 1;
    uint32_t width = 1;
    std::vector<Region> regions;
    uint64_t seed = 0;

    /// Regions inside the canvas and jointly covering it; frequencies at or
    /// below Nyquist. Throws InvalidInputError otherwise.
    void validate() const;
};

/// Deterministic clean latent x1. Sinusoid phases vary per channel; constant,
/// ramp and checkerboard values repeat across channels.
LatentTensor render_scene(const SceneSpec& spec);

/// Denoising trajectory: per-step latents x_{t_k} for k = 1..T plus endpoints.
struct DenoisingRun {
    std::vector<LatentTensor> steps;
    std::vector<double> times;
    LatentTensor clean;
    LatentTensor noise;

    uint32_t step_count() const { return static_cast<uint32_t>(steps.size()); }
    const LatentTensor& step(uint32_t k) const { return steps.at(k - 1); }  // 1-based
};

/// Exact rectified path x_{t_k} = t_k x1 + (1 - t_k) x0 on the uniform grid,
/// final time capped at 1 - kTimeEps; x0 is seeded standard normal.
DenoisingRun synth_trajectory(const LatentTensor& clean, uint32_t steps, uint64_t seed);

/// Conditional-mean velocity of a per-cell Gaussian target N(mu, sigma^2) on
/// the rectified path; sigma == 0 gives the point-mass field (mu - x)/(1 - t).
double gaussian_cell_velocity(double x, double t, double mu, double sigma);

/// Per-token target width for oracle-rollout dynamics: sigma_scale * amplitude
/// on textured (non-constant) regions, 0 elsewhere. One value per (f,h,w) token.
std::vector<float> region_sigma_map(const SceneSpec& spec, double sigma_scale);

/// Oracle-rollout trajectory: per-token Euler integration of the Gaussian
/// target field given by (clean, sigma). sigma may be empty for all-zero.
DenoisingRun oracle_rollout(const LatentTensor& clean, const std::vector<float>& sigma,
                            uint32_t steps, uint64_t seed);

}  // namespace jano
