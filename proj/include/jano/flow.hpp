#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "jano/errors.hpp"

namespace jano {

using Vec = std::vector<double>;

/// Guard against the 1/(1-t) singularity at the end of the path.
inline constexpr double kTimeEps = 1e-4;

/// Isotropic Gaussian mixture target; variance 0 components are point masses.
struct MixtureComponent {
    double weight = 1.0;
    Vec mean;
    double variance = 0.0;
};

struct MixtureTarget {
    std::vector<MixtureComponent> components;
    uint32_t dim = 0;

    static MixtureTarget make(std::vector<MixtureComponent> components);
    static MixtureTarget point_masses(const std::vector<Vec>& means);
};

/// x_t = t*x1 + (1-t)*x0.
Vec interpolate(const Vec& x0, const Vec& x1, double t);

/// Posterior mixture statistics of x1 given x_t under x_t = a*x1 + s*eps,
/// eps ~ N(0, I). Component weights are a log-space softmax.
struct Posterior {
    std::vector<double> weights;
    Vec mean_x1;
};
Posterior posterior_x1(const MixtureTarget& target, const Vec& x_t, double a, double s);

/// Conditional-mean noise prediction E[eps | x_t] under the same path.
Vec posterior_eps(const MixtureTarget& target, const Vec& x_t, double a, double s);

/// Exact velocity field v*(x_t, t) = (E[x1 | x_t] - x_t)/(1 - t) on the
/// rectified path. Requires t in [0, 1 - kTimeEps].
Vec oracle_velocity(const MixtureTarget& target, const Vec& x_t, double t);

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    Vec source;
    int target_component = -1;
};

using VelocityFn = std::function<Vec(const Vec&, double)>;

/// Plain Euler on the uniform grid t_k = k/steps; the final time entry is
/// capped at 1 - kTimeEps. Throws NumericError naming the step on non-finite
/// velocity values.
Trajectory euler_integrate(const VelocityFn& velocity, const Vec& x0, uint32_t steps);

/// D_{A,B} = ||vA - vB|| - ||x0A - x0B||; signed, larger means the
/// trajectories head to more dissimilar final states.
double latent_distance(const Vec& vA, const Vec& vB, const Vec& x0A, const Vec& x0B);

struct SourceTargetPair {
    Vec x0;
    Vec x1;
};

/// ||v(x_tA, t) - v(x_tB, t)|| sampled over time_grid, with x_t taken on the
/// exact interpolation paths of the two pairs. Grid must lie in [0, 0.9].
std::vector<double> velocity_constancy_profile(const MixtureTarget& target,
                                               const SourceTargetPair& pairA,
                                               const SourceTargetPair& pairB,
                                               const std::vector<double>& time_grid);

/// Discrete (alpha, sigma) schedule over sampler times.
struct NoiseSchedule {
    std::vector<double> times;
    std::vector<double> alpha;
    std::vector<double> sigma;

    size_t size() const { return times.size(); }
    void validate() const;

    /// alpha(t) = t, sigma(t) = 1 - t on k/steps, k = 0..steps.
    static NoiseSchedule rectified(uint32_t steps);
    /// alpha(t) = cos(pi t / 2), sigma(t) = sin(pi t / 2).
    static NoiseSchedule cosine(uint32_t steps);
};

struct ScheduleDerivs {
    double alpha_dot = 0.0;
    double sigma_dot = 0.0;
};

/// Backward difference between adjacent schedule indices. k == 0 throws
/// InvalidInputError unless allow_forward is set.
ScheduleDerivs finite_diff_derivatives(const NoiseSchedule& schedule, size_t k,
                                       bool allow_forward = false);

/// eps-prediction to flow-matching velocity:
///   v = (alpha_dot/alpha) x_t + (sigma_dot - alpha_dot sigma / alpha) eps_hat
/// with finite-difference schedule derivatives at index k.
Vec eps_to_v(const Vec& eps_hat, const Vec& x_t, const NoiseSchedule& schedule, size_t k);

double norm2(const Vec& v);

}  // namespace jano
