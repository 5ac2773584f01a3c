#include "jano/scenes.hpp"

#include <cmath>

#include "jano/flow.hpp"
#include "jano/rng.hpp"

namespace jano {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
}

const char* pattern_name(PatternKind k) {
    switch (k) {
        case PatternKind::Constant: return "constant";
        case PatternKind::LinearRamp: return "linear-ramp";
        case PatternKind::Sinusoid: return "sinusoid";
        case PatternKind::Checkerboard: return "checkerboard";
        case PatternKind::MovingSinusoid: return "moving-sinusoid";
    }
    return "?";
}

PatternKind pattern_from_name(const std::string& name) {
    if (name == "constant") return PatternKind::Constant;
    if (name == "linear-ramp") return PatternKind::LinearRamp;
    if (name == "sinusoid") return PatternKind::Sinusoid;
    if (name == "checkerboard") return PatternKind::Checkerboard;
    if (name == "moving-sinusoid") return PatternKind::MovingSinusoid;
    throw InvalidInputError("unknown pattern kind: " + name);
}

void SceneSpec::validate() const {
    if (channels == 0 || frames == 0 || height == 0 || width == 0)
        throw InvalidInputError("scene: canvas dimensions must be positive");
    if (regions.empty()) throw InvalidInputError("scene: needs at least one region");
    std::vector<uint8_t> covered(static_cast<size_t>(frames) * height * width, 0);
    for (size_t i = 0; i < regions.size(); ++i) {
        const Region& r = regions[i];
        if (r.f1 <= r.f0 || r.h1 <= r.h0 || r.w1 <= r.w0)
            throw InvalidInputError("scene: region " + std::to_string(i) + " box is empty");
        if (r.f1 > frames || r.h1 > height || r.w1 > width)
            throw InvalidInputError("scene: region " + std::to_string(i) + " outside canvas");
        if (r.kind == PatternKind::Sinusoid || r.kind == PatternKind::MovingSinusoid) {
            if (r.freq < 0.0 || r.freq > 0.5)
                throw InvalidInputError("scene: region " + std::to_string(i) +
                                        " frequency above Nyquist");
        }
        if (r.kind == PatternKind::Checkerboard && (r.period < 2 || r.period % 2 != 0))
            throw InvalidInputError("scene: region " + std::to_string(i) +
                                    " checkerboard period must be even and >= 2");
        for (uint32_t f = r.f0; f < r.f1; ++f)
            for (uint32_t h = r.h0; h < r.h1; ++h)
                for (uint32_t w = r.w0; w < r.w1; ++w)
                    covered[(static_cast<size_t>(f) * height + h) * width + w] = 1;
    }
    for (size_t i = 0; i < covered.size(); ++i)
        if (!covered[i])
            throw InvalidInputError("scene: regions do not cover the canvas (token " +
                                    std::to_string(i) + " unpainted)");
}

LatentTensor render_scene(const SceneSpec& spec) {
    spec.validate();
    LatentTensor out(spec.channels, spec.frames, spec.height, spec.width);
    for (size_t ri = 0; ri < spec.regions.size(); ++ri) {
        const Region& r = spec.regions[ri];
        for (uint32_t c = 0; c < spec.channels; ++c) {
            Rng rng = Rng::stream(spec.seed, (ri << 20) ^ c);
            const double phase = rng.uniform() * kTwoPi;
            const double phase2 = rng.uniform() * kTwoPi;
            for (uint32_t f = r.f0; f < r.f1; ++f) {
                for (uint32_t h = r.h0; h < r.h1; ++h) {
                    for (uint32_t w = r.w0; w < r.w1; ++w) {
                        double v = 0.0;
                        switch (r.kind) {
                            case PatternKind::Constant:
                                v = r.amplitude;
                                break;
                            case PatternKind::LinearRamp: {
                                const double u = (r.w1 - r.w0) > 1
                                                     ? double(w - r.w0) / double(r.w1 - r.w0 - 1)
                                                     : 0.0;
                                const double q = (r.h1 - r.h0) > 1
                                                     ? double(h - r.h0) / double(r.h1 - r.h0 - 1)
                                                     : 0.0;
                                v = r.amplitude * 0.5 * (u + q);
                                break;
                            }
                            case PatternKind::Sinusoid:
                                v = r.amplitude *
                                    std::cos(kTwoPi * r.freq * double(w) + phase) *
                                    std::cos(kTwoPi * r.freq * double(h) + phase2);
                                break;
                            case PatternKind::Checkerboard: {
                                const uint32_t cell = r.period / 2;
                                const uint32_t par = ((w - r.w0) / cell + (h - r.h0) / cell) & 1u;
                                v = par ? -r.amplitude : r.amplitude;
                                break;
                            }
                            case PatternKind::MovingSinusoid:
                                v = r.amplitude *
                                    std::cos(kTwoPi * r.freq *
                                                 (double(w) - r.velocity * double(f)) +
                                             phase) *
                                    std::cos(kTwoPi * r.freq * double(h) + phase2);
                                break;
                        }
                        out.at(c, f, h, w) = static_cast<float>(v);
                    }
                }
            }
        }
    }
    return out;
}

DenoisingRun synth_trajectory(const LatentTensor& clean, uint32_t steps, uint64_t seed) {
    if (steps < 2) throw InvalidInputError("synth_trajectory: needs at least 2 steps");
    clean.validate();

    DenoisingRun run;
    run.clean = clean;
    run.noise = clean;  // shape copy
    Rng rng = Rng::stream(seed, 0x6e6f697365ULL);
    for (float& v : run.noise.data) v = rng.normal_f();

    run.steps.reserve(steps);
    run.times.reserve(steps);
    for (uint32_t k = 1; k <= steps; ++k) {
        double t = static_cast<double>(k) / steps;
        if (t > 1.0 - kTimeEps) t = 1.0 - kTimeEps;
        LatentTensor x = clean;  // shape copy
        const float tf = static_cast<float>(t);
        for (size_t i = 0; i < x.data.size(); ++i)
            x.data[i] = tf * clean.data[i] + (1.0f - tf) * run.noise.data[i];
        run.steps.push_back(std::move(x));
        run.times.push_back(t);
    }
    return run;
}

double gaussian_cell_velocity(double x, double t, double mu, double sigma) {
    if (t > 1.0 - kTimeEps) throw SingularityError("gaussian_cell_velocity: t too close to 1");
    const double s = 1.0 - t;
    if (sigma == 0.0) return (mu - x) / s;
    const double var = sigma * sigma;
    const double marg = t * t * var + s * s;
    const double m = mu + (t * var / marg) * (x - t * mu);
    return (m - x) / s;
}

std::vector<float> region_sigma_map(const SceneSpec& spec, double sigma_scale) {
    spec.validate();
    std::vector<float> sigma(static_cast<size_t>(spec.frames) * spec.height * spec.width, 0.0f);
    if (sigma_scale == 0.0) return sigma;
    for (const Region& r : spec.regions) {
        const float v = r.kind == PatternKind::Constant
                            ? 0.0f
                            : static_cast<float>(sigma_scale * std::abs(r.amplitude));
        for (uint32_t f = r.f0; f < r.f1; ++f)
            for (uint32_t h = r.h0; h < r.h1; ++h)
                for (uint32_t w = r.w0; w < r.w1; ++w)
                    sigma[(static_cast<size_t>(f) * spec.height + h) * spec.width + w] = v;
    }
    return sigma;
}

DenoisingRun oracle_rollout(const LatentTensor& clean, const std::vector<float>& sigma,
                            uint32_t steps, uint64_t seed) {
    if (steps < 2) throw InvalidInputError("oracle_rollout: needs at least 2 steps");
    clean.validate();
    const size_t tokens = static_cast<size_t>(clean.frames) * clean.height * clean.width;
    if (!sigma.empty() && sigma.size() != tokens)
        throw InvalidInputError("oracle_rollout: sigma map size mismatch");

    DenoisingRun run;
    run.clean = clean;
    run.noise = clean;
    Rng rng = Rng::stream(seed, 0x6e6f697365ULL);
    for (float& v : run.noise.data) v = rng.normal_f();

    LatentTensor x = run.noise;
    const double dt = 1.0 / steps;
    run.steps.reserve(steps);
    run.times.reserve(steps);
    const size_t plane = tokens;
    for (uint32_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        for (size_t i = 0; i < x.data.size(); ++i) {
            const double sg = sigma.empty() ? 0.0 : sigma[i % plane];
            const double v = gaussian_cell_velocity(x.data[i], t, clean.data[i], sg);
            x.data[i] = static_cast<float>(x.data[i] + dt * v);
        }
        double tk = static_cast<double>(k + 1) * dt;
        if (tk > 1.0 - kTimeEps) tk = 1.0 - kTimeEps;
        run.steps.push_back(x);
        run.times.push_back(tk);
    }
    return run;
}

}  // namespace jano
