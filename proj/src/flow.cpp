#include "jano/flow.hpp"

#include <algorithm>
#include <cmath>

namespace jano {

namespace {
constexpr double kPi = 3.14159265358979323846;

void require_same_dim(const Vec& a, const Vec& b, const char* what) {
    if (a.size() != b.size())
        throw InvalidInputError(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}
}  // namespace

double norm2(const Vec& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

MixtureTarget MixtureTarget::make(std::vector<MixtureComponent> components) {
    if (components.empty()) throw InvalidInputError("mixture target needs at least one component");
    MixtureTarget t;
    t.dim = static_cast<uint32_t>(components.front().mean.size());
    double wsum = 0.0;
    for (const MixtureComponent& c : components) {
        if (c.mean.size() != t.dim)
            throw InvalidInputError("mixture target: component dimension mismatch");
        if (c.weight < 0.0) throw InvalidInputError("mixture target: negative weight");
        if (c.variance < 0.0) throw InvalidInputError("mixture target: negative variance");
        wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-9)
        throw InvalidInputError("mixture target: weights sum to " + std::to_string(wsum));
    t.components = std::move(components);
    return t;
}

MixtureTarget MixtureTarget::point_masses(const std::vector<Vec>& means) {
    std::vector<MixtureComponent> comps;
    comps.reserve(means.size());
    const double w = 1.0 / static_cast<double>(means.size());
    for (const Vec& m : means) comps.push_back({w, m, 0.0});
    return make(std::move(comps));
}

Vec interpolate(const Vec& x0, const Vec& x1, double t) {
    require_same_dim(x0, x1, "interpolate");
    if (t < 0.0 || t > 1.0) throw InvalidInputError("interpolate: t outside [0, 1]");
    Vec out(x0.size());
    for (size_t i = 0; i < x0.size(); ++i) out[i] = t * x1[i] + (1.0 - t) * x0[i];
    return out;
}

Posterior posterior_x1(const MixtureTarget& target, const Vec& x_t, double a, double s) {
    if (x_t.size() != target.dim) throw InvalidInputError("posterior_x1: dimension mismatch");
    if (s <= 0.0) throw SingularityError("posterior_x1: path noise scale must be positive");

    const size_t n = target.components.size();
    const size_t d = x_t.size();
    // Marginal of x_t given component i is N(a*mu_i, (a^2 var_i + s^2) I).
    std::vector<double> logw(n);
    std::vector<double> marg_var(n);
    for (size_t i = 0; i < n; ++i) {
        const MixtureComponent& c = target.components[i];
        marg_var[i] = a * a * c.variance + s * s;
        double sq = 0.0;
        for (size_t j = 0; j < d; ++j) {
            const double r = x_t[j] - a * c.mean[j];
            sq += r * r;
        }
        logw[i] = std::log(std::max(c.weight, 1e-300)) - 0.5 * sq / marg_var[i] -
                  0.5 * static_cast<double>(d) * std::log(marg_var[i]);
    }
    const double m = *std::max_element(logw.begin(), logw.end());
    double z = 0.0;
    for (size_t i = 0; i < n; ++i) {
        logw[i] = std::exp(logw[i] - m);
        z += logw[i];
    }

    Posterior p;
    p.weights.resize(n);
    p.mean_x1.assign(d, 0.0);
    for (size_t i = 0; i < n; ++i) {
        p.weights[i] = logw[i] / z;
        const MixtureComponent& c = target.components[i];
        // E[x1 | x_t, i] = mu_i + (a var_i / marg_var_i) (x_t - a mu_i)
        const double gain = a * c.variance / marg_var[i];
        for (size_t j = 0; j < d; ++j)
            p.mean_x1[j] += p.weights[i] * (c.mean[j] + gain * (x_t[j] - a * c.mean[j]));
    }
    return p;
}

Vec posterior_eps(const MixtureTarget& target, const Vec& x_t, double a, double s) {
    const Posterior p = posterior_x1(target, x_t, a, s);
    Vec eps(x_t.size());
    for (size_t j = 0; j < x_t.size(); ++j) eps[j] = (x_t[j] - a * p.mean_x1[j]) / s;
    return eps;
}

Vec oracle_velocity(const MixtureTarget& target, const Vec& x_t, double t) {
    if (t < 0.0 || t > 1.0 - kTimeEps)
        throw SingularityError("oracle_velocity: t = " + std::to_string(t) +
                               " outside [0, 1 - 1e-4]");
    const Posterior p = posterior_x1(target, x_t, t, 1.0 - t);
    Vec v(x_t.size());
    const double inv = 1.0 / (1.0 - t);
    for (size_t j = 0; j < x_t.size(); ++j) v[j] = (p.mean_x1[j] - x_t[j]) * inv;
    return v;
}

Trajectory euler_integrate(const VelocityFn& velocity, const Vec& x0, uint32_t steps) {
    if (steps == 0) throw InvalidInputError("euler_integrate: steps must be >= 1");
    Trajectory traj;
    traj.source = x0;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(x0);

    Vec x = x0;
    const double dt = 1.0 / static_cast<double>(steps);
    for (uint32_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Vec v = velocity(x, t);
        require_same_dim(v, x, "euler_integrate velocity");
        for (size_t j = 0; j < x.size(); ++j) {
            if (!std::isfinite(v[j]))
                throw NumericError("euler_integrate: non-finite velocity at step " +
                                   std::to_string(k));
            x[j] += dt * v[j];
        }
        traj.times.push_back(std::min(static_cast<double>(k + 1) * dt, 1.0 - kTimeEps));
        traj.states.push_back(x);
    }
    return traj;
}

double latent_distance(const Vec& vA, const Vec& vB, const Vec& x0A, const Vec& x0B) {
    require_same_dim(vA, vB, "latent_distance");
    require_same_dim(x0A, x0B, "latent_distance");
    require_same_dim(vA, x0A, "latent_distance");
    double dv = 0.0, dx = 0.0;
    for (size_t j = 0; j < vA.size(); ++j) {
        const double a = vA[j] - vB[j];
        const double b = x0A[j] - x0B[j];
        dv += a * a;
        dx += b * b;
    }
    return std::sqrt(dv) - std::sqrt(dx);
}

std::vector<double> velocity_constancy_profile(const MixtureTarget& target,
                                               const SourceTargetPair& pairA,
                                               const SourceTargetPair& pairB,
                                               const std::vector<double>& time_grid) {
    for (double t : time_grid)
        if (t < 0.0 || t > 0.9)
            throw InvalidInputError("velocity_constancy_profile: time grid outside [0, 0.9]");
    std::vector<double> profile;
    profile.reserve(time_grid.size());
    for (double t : time_grid) {
        const Vec xa = interpolate(pairA.x0, pairA.x1, t);
        const Vec xb = interpolate(pairB.x0, pairB.x1, t);
        const Vec va = oracle_velocity(target, xa, t);
        const Vec vb = oracle_velocity(target, xb, t);
        double acc = 0.0;
        for (size_t j = 0; j < va.size(); ++j) acc += (va[j] - vb[j]) * (va[j] - vb[j]);
        profile.push_back(std::sqrt(acc));
    }
    return profile;
}

void NoiseSchedule::validate() const {
    if (times.size() < 2) throw InvalidInputError("noise schedule needs at least two indices");
    if (alpha.size() != times.size() || sigma.size() != times.size())
        throw InvalidInputError("noise schedule arrays must have equal length");
    for (size_t k = 1; k < times.size(); ++k)
        if (times[k] <= times[k - 1])
            throw InvalidInputError("noise schedule times must be strictly increasing");
    for (size_t k = 0; k < times.size(); ++k) {
        if (!std::isfinite(alpha[k]) || !std::isfinite(sigma[k]))
            throw InvalidInputError("noise schedule has non-finite entries");
        if (alpha[k] * alpha[k] + sigma[k] * sigma[k] > 4.0)
            throw InvalidInputError("noise schedule magnitudes out of range");
    }
}

NoiseSchedule NoiseSchedule::rectified(uint32_t steps) {
    if (steps == 0) throw InvalidInputError("rectified schedule: steps must be >= 1");
    NoiseSchedule s;
    for (uint32_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) / steps;
        s.times.push_back(t);
        s.alpha.push_back(t);
        s.sigma.push_back(1.0 - t);
    }
    return s;
}

NoiseSchedule NoiseSchedule::cosine(uint32_t steps) {
    if (steps == 0) throw InvalidInputError("cosine schedule: steps must be >= 1");
    NoiseSchedule s;
    for (uint32_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) / steps;
        s.times.push_back(t);
        s.alpha.push_back(std::cos(0.5 * kPi * t));
        s.sigma.push_back(std::sin(0.5 * kPi * t));
    }
    return s;
}

ScheduleDerivs finite_diff_derivatives(const NoiseSchedule& schedule, size_t k,
                                       bool allow_forward) {
    schedule.validate();
    if (k >= schedule.size())
        throw InvalidInputError("finite_diff_derivatives: index out of range");
    if (k == 0) {
        if (!allow_forward)
            throw InvalidInputError("finite_diff_derivatives: k == 0 has no backward neighbor");
        const double dt = schedule.times[1] - schedule.times[0];
        return {(schedule.alpha[1] - schedule.alpha[0]) / dt,
                (schedule.sigma[1] - schedule.sigma[0]) / dt};
    }
    const double dt = schedule.times[k] - schedule.times[k - 1];
    return {(schedule.alpha[k] - schedule.alpha[k - 1]) / dt,
            (schedule.sigma[k] - schedule.sigma[k - 1]) / dt};
}

Vec eps_to_v(const Vec& eps_hat, const Vec& x_t, const NoiseSchedule& schedule, size_t k) {
    require_same_dim(eps_hat, x_t, "eps_to_v");
    if (k == 0 || k >= schedule.size())
        throw InvalidInputError("eps_to_v: index must satisfy 1 <= k < schedule length");
    const double a = schedule.alpha[k];
    if (a == 0.0) throw SingularityError("eps_to_v: alpha(t_k) == 0");
    const ScheduleDerivs d = finite_diff_derivatives(schedule, k);
    const double cx = d.alpha_dot / a;
    const double ce = d.sigma_dot - d.alpha_dot * schedule.sigma[k] / a;
    Vec v(x_t.size());
    for (size_t j = 0; j < x_t.size(); ++j) v[j] = cx * x_t[j] + ce * eps_hat[j];
    return v;
}

}  // namespace jano
