#include <cmath>

#include "doctest.h"

#include "jano/flow.hpp"
#include "jano/rng.hpp"

using namespace jano;

namespace {

Vec random_vec(Rng& rng, size_t d, double scale = 1.0) {
    Vec v(d);
    for (double& x : v) x = scale * rng.normal();
    return v;
}

}  // namespace

TEST_CASE("interpolate endpoints and midpoint") {
    const Vec x0{1.0, 1.0}, x1{3.0, 5.0};
    CHECK(interpolate(x0, x1, 0.0) == x0);
    CHECK(interpolate(x0, x1, 1.0) == x1);
    const Vec mid = interpolate(x0, x1, 0.5);
    CHECK(mid[0] == doctest::Approx(2.0));
    CHECK(mid[1] == doctest::Approx(3.0));
}

TEST_CASE("interpolate matches scalar loop and rejects mismatches") {
    Rng rng(5);
    const Vec x0 = random_vec(rng, 7), x1 = random_vec(rng, 7);
    const double t = 0.37;
    const Vec out = interpolate(x0, x1, t);
    for (size_t i = 0; i < out.size(); ++i) CHECK(out[i] == t * x1[i] + (1 - t) * x0[i]);
    CHECK_THROWS_AS(interpolate(x0, Vec{1.0}, 0.5), InvalidInputError);
    CHECK_THROWS_AS(interpolate(x0, x1, 1.5), InvalidInputError);
}

TEST_CASE("oracle velocity for a single point mass") {
    Rng rng(6);
    const Vec mu = random_vec(rng, 4, 3.0);
    const MixtureTarget target = MixtureTarget::point_masses({mu});
    const Vec x0 = random_vec(rng, 4);
    // At t=0 the velocity equals x1 - x0.
    const Vec v0 = oracle_velocity(target, x0, 0.0);
    for (size_t i = 0; i < v0.size(); ++i) CHECK(v0[i] == doctest::Approx(mu[i] - x0[i]));
    // At general t it is (mu - x_t)/(1 - t).
    const double t = 0.6;
    const Vec xt = interpolate(x0, mu, t);
    const Vec vt = oracle_velocity(target, xt, t);
    for (size_t i = 0; i < vt.size(); ++i)
        CHECK(vt[i] == doctest::Approx((mu[i] - xt[i]) / (1 - t)));
}

TEST_CASE("oracle velocity vanishes at the symmetry point") {
    const Vec mu{2.5, 0.0};
    Vec neg{-2.5, 0.0};
    const MixtureTarget target = MixtureTarget::point_masses({mu, neg});
    const Vec v = oracle_velocity(target, Vec{0.0, 0.0}, 0.3);
    CHECK(std::abs(v[0]) < 1e-12);
    CHECK(std::abs(v[1]) < 1e-12);
}

TEST_CASE("oracle velocity near t=1 is a singularity error") {
    const MixtureTarget target = MixtureTarget::point_masses({Vec{0.0}});
    CHECK_THROWS_AS(oracle_velocity(target, Vec{0.0}, 1.0), SingularityError);
    CHECK_THROWS_AS(oracle_velocity(target, Vec{0.0}, 1.0 - 1e-6), SingularityError);
}

TEST_CASE("oracle velocity agrees with Monte-Carlo conditional expectation") {
    // 3-component 2-D mixture; E[x1 - x0 | x_t] regressed from path samples
    // binned around x_t.
    const MixtureTarget target = MixtureTarget::make({{0.5, Vec{2.0, 0.0}, 0.0},
                                                      {0.3, Vec{-1.5, 1.0}, 0.0},
                                                      {0.2, Vec{0.0, -2.0}, 0.0}});
    const double t = 0.35;
    const Vec x_t{0.4, -0.1};
    const double radius = 0.12;

    Rng rng(123);
    Vec acc{0.0, 0.0};
    Vec acc_sq{0.0, 0.0};
    size_t hits = 0;
    for (size_t s = 0; s < 1000000; ++s) {
        const double u = rng.uniform();
        size_t comp = 0;
        double cum = 0.0;
        for (size_t i = 0; i < target.components.size(); ++i) {
            cum += target.components[i].weight;
            if (u <= cum) {
                comp = i;
                break;
            }
        }
        const Vec& mu = target.components[comp].mean;
        const double x0a = rng.normal(), x0b = rng.normal();
        const double xa = t * mu[0] + (1 - t) * x0a;
        const double xb = t * mu[1] + (1 - t) * x0b;
        const double da = xa - x_t[0], db = xb - x_t[1];
        if (da * da + db * db > radius * radius) continue;
        const double va = mu[0] - x0a, vb = mu[1] - x0b;
        acc[0] += va;
        acc[1] += vb;
        acc_sq[0] += va * va;
        acc_sq[1] += vb * vb;
        ++hits;
    }
    REQUIRE(hits > 500);
    const Vec v = oracle_velocity(target, x_t, t);
    for (int i = 0; i < 2; ++i) {
        const double mean = acc[i] / hits;
        const double var = acc_sq[i] / hits - mean * mean;
        const double stderr_i = std::sqrt(var / hits);
        // 5 sigma plus a binning-bias allowance proportional to the radius.
        CHECK(std::abs(v[i] - mean) <= 5.0 * stderr_i + 2.0 * radius);
    }
}

TEST_CASE("euler integration is exact on a point-mass field") {
    Rng rng(7);
    const Vec mu = random_vec(rng, 3, 2.0);
    const MixtureTarget target = MixtureTarget::point_masses({mu});
    const Vec x0 = random_vec(rng, 3);
    const Trajectory traj = euler_integrate(
        [&](const Vec& x, double t) { return oracle_velocity(target, x, t); }, x0, 50);
    REQUIRE(traj.states.size() == 51);
    for (size_t k = 0; k < traj.times.size(); ++k) {
        const double t = static_cast<double>(k) / 50;
        const Vec expect = interpolate(x0, mu, t);
        for (size_t i = 0; i < 3; ++i) CHECK(std::abs(traj.states[k][i] - expect[i]) <= 1e-6);
    }
    CHECK(traj.times.back() == doctest::Approx(1.0 - kTimeEps));
}

TEST_CASE("euler single step definition") {
    const MixtureTarget target = MixtureTarget::point_masses({Vec{4.0}});
    const Vec x0{1.0};
    const Trajectory traj = euler_integrate(
        [&](const Vec& x, double t) { return oracle_velocity(target, x, t); }, x0, 1);
    CHECK(traj.states.back()[0] == doctest::Approx(x0[0] + (4.0 - 1.0)));
}

TEST_CASE("euler endpoint error is first order on a mixture field") {
    const MixtureTarget target = MixtureTarget::point_masses({Vec{3.0, 0.0}, Vec{-3.0, 1.0}});
    Rng rng(11);
    const Vec x0 = random_vec(rng, 2);
    const auto field = [&](const Vec& x, double t) { return oracle_velocity(target, x, t); };
    const Vec ref = euler_integrate(field, x0, 4000).states.back();
    auto endpoint_err = [&](uint32_t steps) {
        const Vec end = euler_integrate(field, x0, steps).states.back();
        double acc = 0.0;
        for (size_t i = 0; i < end.size(); ++i) acc += (end[i] - ref[i]) * (end[i] - ref[i]);
        return std::sqrt(acc);
    };
    const double e50 = endpoint_err(50);
    const double e100 = endpoint_err(100);
    const double e200 = endpoint_err(200);
    CHECK(e100 < e50);
    CHECK(e200 < e100);
    // Halving the step roughly halves the endpoint error.
    CHECK(e50 / e100 == doctest::Approx(2.0).epsilon(0.45));
}

TEST_CASE("euler surfaces non-finite velocities with the step index") {
    const auto bad = [](const Vec& x, double) { return Vec{x[0] * 0.0 / 0.0}; };
    try {
        euler_integrate(bad, Vec{1.0}, 4);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("step 0") != std::string::npos);
    }
}

TEST_CASE("latent distance vanishes for a shared point-mass target") {
    Rng rng(13);
    for (int rep = 0; rep < 20; ++rep) {
        const Vec mu = random_vec(rng, 5, 4.0);
        const MixtureTarget target = MixtureTarget::point_masses({mu});
        const Vec x0A = random_vec(rng, 5), x0B = random_vec(rng, 5);
        for (double t : {0.0, 0.1, 0.5, 0.9}) {
            const Vec vA = oracle_velocity(target, interpolate(x0A, mu, t), t);
            const Vec vB = oracle_velocity(target, interpolate(x0B, mu, t), t);
            CHECK(std::abs(latent_distance(vA, vB, x0A, x0B)) <= 1e-11);
        }
    }
}

TEST_CASE("latent distance is zero for identical points and positive across targets") {
    const Vec mu1{8.0, 0.0}, mu2{-8.0, 0.0};
    const MixtureTarget target = MixtureTarget::point_masses({mu1, mu2});
    Rng rng(17);
    const Vec x0 = random_vec(rng, 2);
    const Vec v = oracle_velocity(target, interpolate(x0, mu1, 0.1), 0.1);
    CHECK(latent_distance(v, v, x0, x0) == 0.0);

    const Vec x0B = random_vec(rng, 2);
    const Vec vA = oracle_velocity(target, interpolate(x0, mu1, 0.1), 0.1);
    const Vec vB = oracle_velocity(target, interpolate(x0B, mu2, 0.1), 0.1);
    CHECK(latent_distance(vA, vB, x0, x0B) > 0.0);
}

TEST_CASE("constancy profile is exactly flat for a shared point mass") {
    Rng rng(19);
    const Vec mu = random_vec(rng, 3, 5.0);
    const MixtureTarget target = MixtureTarget::point_masses({mu});
    SourceTargetPair a{random_vec(rng, 3), mu}, b{random_vec(rng, 3), mu};
    std::vector<double> grid;
    for (double t = 0.0; t <= 0.9; t += 0.1) grid.push_back(t);
    const std::vector<double> prof = velocity_constancy_profile(target, a, b, grid);
    Vec d(3);
    for (int i = 0; i < 3; ++i) d[i] = a.x0[i] - b.x0[i];
    const double base = norm2(d);
    for (double v : prof) CHECK(v == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("constancy: same-component flat, cross-component grows") {
    const double sep = 200.0;
    Vec mu2(4, 0.0);
    mu2[0] = sep;
    const MixtureTarget target = MixtureTarget::point_masses({Vec(4, 0.0), mu2});
    std::vector<double> grid;
    for (double t = 0.0; t <= 0.5 + 1e-9; t += 0.05) grid.push_back(t);

    Rng rng(23);
    for (int rep = 0; rep < 10; ++rep) {
        SourceTargetPair a{random_vec(rng, 4), Vec(4, 0.0)};
        SourceTargetPair b{random_vec(rng, 4), Vec(4, 0.0)};
        SourceTargetPair c{random_vec(rng, 4), mu2};
        const auto same = velocity_constancy_profile(target, a, b, grid);
        double mean = 0.0;
        for (double v : same) mean += v;
        mean /= same.size();
        double var = 0.0;
        for (double v : same) var += (v - mean) * (v - mean);
        var /= same.size();
        CHECK(std::sqrt(var) / mean <= 0.05);

        const auto cross = velocity_constancy_profile(target, a, c, grid);
        CHECK(cross.back() > cross.front());
        CHECK(cross.back() > 10.0 * same.back());
        for (size_t g = 1; g < cross.size(); ++g) CHECK(cross[g] > 5.0 * same[g]);
    }
}

TEST_CASE("constancy profile rejects grids beyond 0.9") {
    const MixtureTarget target = MixtureTarget::point_masses({Vec{0.0}});
    SourceTargetPair a{Vec{0.0}, Vec{0.0}}, b{Vec{1.0}, Vec{0.0}};
    CHECK_THROWS_AS(velocity_constancy_profile(target, a, b, {0.95}), InvalidInputError);
}

TEST_CASE("mixture target validation") {
    CHECK_THROWS_AS(MixtureTarget::make({}), InvalidInputError);
    CHECK_THROWS_AS(MixtureTarget::make({{0.5, Vec{0.0}, 0.0}}), InvalidInputError);
    CHECK_THROWS_AS(MixtureTarget::make({{0.5, Vec{0.0}, 0.0}, {0.5, Vec{0.0, 1.0}, 0.0}}),
                    InvalidInputError);
}

TEST_CASE("finite difference derivatives") {
    NoiseSchedule s;
    for (int k = 0; k <= 10; ++k) {
        s.times.push_back(0.1 * k);
        s.alpha.push_back(0.1 * k);
        s.sigma.push_back(0.7);
    }
    const ScheduleDerivs d = finite_diff_derivatives(s, 5);
    CHECK(d.alpha_dot == doctest::Approx(1.0));
    CHECK(d.sigma_dot == doctest::Approx(0.0));
    CHECK_THROWS_AS(finite_diff_derivatives(s, 0), InvalidInputError);
    const ScheduleDerivs fwd = finite_diff_derivatives(s, 0, true);
    CHECK(fwd.alpha_dot == doctest::Approx(1.0));
}

TEST_CASE("cosine schedule derivative error obeys the Taylor bound") {
    const uint32_t T = 40;
    const NoiseSchedule s = NoiseSchedule::cosine(T);
    const double dt = 1.0 / T;
    const double half_pi = 1.5707963267948966;
    const double max_second = half_pi * half_pi;  // |alpha''| <= (pi/2)^2
    for (size_t k = 1; k <= T; ++k) {
        const ScheduleDerivs d = finite_diff_derivatives(s, k);
        const double exact = -half_pi * std::sin(half_pi * s.times[k]);
        CHECK(std::abs(d.alpha_dot - exact) <= 0.5 * dt * max_second + 1e-12);
    }
}

TEST_CASE("eps_to_v algebraic identity") {
    Rng rng(29);
    const Vec x_data = random_vec(rng, 3, 2.0);
    const Vec eps = random_vec(rng, 3);
    const NoiseSchedule s = NoiseSchedule::cosine(100);
    const size_t k = 37;
    Vec x_t(3);
    for (int i = 0; i < 3; ++i) x_t[i] = s.alpha[k] * x_data[i] + s.sigma[k] * eps[i];
    const Vec v = eps_to_v(eps, x_t, s, k);
    const ScheduleDerivs d = finite_diff_derivatives(s, k);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(v[i] - (d.alpha_dot * x_data[i] + d.sigma_dot * eps[i])) <= 1e-9);
}

TEST_CASE("eps_to_v on the rectified schedule reduces to x1 - x0") {
    Rng rng(31);
    const Vec x1 = random_vec(rng, 4, 2.0);
    const Vec x0 = random_vec(rng, 4);
    const NoiseSchedule s = NoiseSchedule::rectified(50);
    const size_t k = 20;  // t = 0.4
    Vec x_t(4);
    for (int i = 0; i < 4; ++i) x_t[i] = s.alpha[k] * x1[i] + s.sigma[k] * x0[i];
    const Vec v = eps_to_v(x0, x_t, s, k);
    for (int i = 0; i < 4; ++i) CHECK(v[i] == doctest::Approx(x1[i] - x0[i]).epsilon(1e-9));
}

TEST_CASE("eps_to_v finite-difference error halves with the step") {
    // Transformed velocity vs the analytic-derivative velocity at t = 0.5.
    const MixtureTarget target =
        MixtureTarget::point_masses({Vec{1.5, 0.0}, Vec{-1.0, 0.5}, Vec{0.0, -1.5}});
    Rng rng(37);
    const Vec x_t = random_vec(rng, 2, 0.8);
    const double half_pi = 1.5707963267948966;

    auto err_at = [&](uint32_t T) {
        const NoiseSchedule s = NoiseSchedule::cosine(T);
        const size_t k = T / 2;
        const double a = s.alpha[k], sg = s.sigma[k];
        const Vec eps = posterior_eps(target, x_t, a, sg);
        const Vec v = eps_to_v(eps, x_t, s, k);
        const double ad = -half_pi * std::sin(half_pi * s.times[k]);
        const double sd = half_pi * std::cos(half_pi * s.times[k]);
        const Posterior p = posterior_x1(target, x_t, a, sg);
        double worst = 0.0;
        for (size_t i = 0; i < x_t.size(); ++i)
            worst = std::max(worst, std::abs(v[i] - (ad * p.mean_x1[i] + sd * eps[i])));
        return worst;
    };
    const double e1 = err_at(40), e2 = err_at(80), e3 = err_at(160);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.2));
    CHECK(e2 / e3 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("eps_to_v rejects alpha zero and bad indices") {
    NoiseSchedule s;
    s.times = {0.0, 0.5, 1.0};
    s.alpha = {1.0, 0.0, 0.5};
    s.sigma = {0.0, 1.0, 0.5};
    CHECK_THROWS_AS(eps_to_v(Vec{1.0}, Vec{1.0}, s, 1), SingularityError);
    CHECK_THROWS_AS(eps_to_v(Vec{1.0}, Vec{1.0}, s, 0), InvalidInputError);
    CHECK_THROWS_AS(eps_to_v(Vec{1.0}, Vec{1.0}, s, 3), InvalidInputError);
}

TEST_CASE("gaussian components shrink the posterior mean toward observations") {
    // Dual route: 1-component Gaussian posterior mean has the closed form
    // mu + (t var / (t^2 var + (1-t)^2)) (x - t mu).
    const double mu = 1.3, var = 0.49, t = 0.45, x = 0.2;
    const MixtureTarget target = MixtureTarget::make({{1.0, Vec{mu}, var}});
    const Posterior p = posterior_x1(target, Vec{x}, t, 1.0 - t);
    const double marg = t * t * var + (1 - t) * (1 - t);
    CHECK(p.mean_x1[0] == doctest::Approx(mu + t * var / marg * (x - t * mu)));
}
