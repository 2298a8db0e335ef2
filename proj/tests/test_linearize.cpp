#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "dsm/linearize.hpp"
#include "oracles.hpp"

using namespace dsm;

namespace {

// Plain Koenigs iteration, no local model: (i/x) mu^{-n} (g^{nq}(z) - x), stopped
// once |g^{nq}(z) - x| drops below `stop`.
complex direct_koenigs(const Parameter& p, const AttractingCycle& c, complex z, double stop = 1e-8) {
    const complex x = circle_to_plane(c.points[c.distinguished_index]);
    complex scale = 1.0;
    for (int n = 0; n < 100000; ++n) {
        if (std::abs(z - x) < stop) return complex(0.0, 1.0) / x * scale * (z - x);
        for (int i = 0; i < c.period; ++i) z = eval_complex(p, z);
        scale /= c.lambda;
    }
    ADD_FAILURE() << "direct Koenigs iteration did not converge";
    return 0.0;
}

KoenigsFrame frame_for(const Parameter& p) {
    const auto cls = classify(p, 12);
    EXPECT_TRUE(cls.in_tongue());
    return make_koenigs_frame(p, *cls.cycle);
}

std::vector<Parameter> random_window_parameters(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ua(-0.5, 0.5), ub(0.5, 0.995);
    std::vector<Parameter> out;
    while (static_cast<int>(out.size()) < count) {
        const Parameter p(ua(rng), ub(rng));
        const auto cls = classify(p, 8);
        if (cls.in_tongue() && cls.cycle->lambda > 1e-3 && cls.cycle->lambda < 0.999) out.push_back(p);
    }
    return out;
}

}  // namespace

TEST(Series, ExpAndReciprocalMatchScalarFunctions) {
    series::Series s{complex(0.3, 0.1), complex(1.0, -0.5), complex(0.2, 0.0), complex(0.0, 0.7)};
    s.resize(24, 0.0);
    for (complex w : {complex(0.01, 0.02), complex(-0.03, 0.0), complex(0.0, -0.05)}) {
        const complex sv = series::eval(s, w);
        EXPECT_LT(std::abs(series::eval(series::exp(s), w) - std::exp(sv)), 1e-13);
        EXPECT_LT(std::abs(series::eval(series::reciprocal(s), w) - 1.0 / sv), 1e-12);
        EXPECT_LT(std::abs(series::eval(series::mul(s, s), w) - sv * sv), 1e-13);
    }
}

TEST(Koenigs, JetMatchesReturnMap) {
    const auto f = frame_for(Parameter(0.1028, 0.98));
    const auto G = detail::return_map_jet(f.parameter, f.x_star, f.cycle.period, 20);
    for (complex w : {complex(1e-3, 0.0), complex(0.0, 2e-3), complex(-1e-3, 1e-3)}) {
        complex y = f.x_star + w;
        for (int i = 0; i < f.cycle.period; ++i) y = eval_complex(f.parameter, y);
        EXPECT_LT(std::abs(series::eval(G, w) - (y - f.x_star)), 1e-13);
    }
    EXPECT_NEAR(std::abs(G[1]), f.lambda, 1e-12);
}

TEST(Koenigs, Normalization) {
    for (const Parameter& p : {Parameter(0.5, 0.75), Parameter(0.45, 0.9), Parameter(0.1028, 0.98)}) {
        const auto f = frame_for(p);
        EXPECT_EQ(koenigs_value(f, f.x_star), complex(0.0, 0.0));
        const double h = 1e-5;
        for (complex dir : {complex(1.0, 0.0), complex(0.0, 1.0)}) {
            const complex d = (koenigs_value(f, f.x_star + h * dir) - koenigs_value(f, f.x_star - h * dir)) / (2 * h * dir);
            EXPECT_LT(std::abs(d - complex(0.0, 1.0) / f.x_star), 1e-6);
        }
    }
}

TEST(Koenigs, AgreesWithDirectIteration) {
    std::mt19937_64 rng(31);
    for (const auto& p : random_window_parameters(32, 10)) {
        const auto f = frame_for(p);
        std::uniform_real_distribution<double> u(-0.3, 0.3);
        for (int i = 0; i < 5; ++i) {
            const complex z = f.x_star + complex(u(rng), u(rng)) * 0.3;
            const complex fast = koenigs_value(f, z);
            const complex slow = direct_koenigs(p, f.cycle, z);
            EXPECT_LT(std::abs(fast - slow), 1e-6 * std::abs(slow)) << p.a << " " << p.b;
        }
    }
}

TEST(Koenigs, FunctionalEquationAndReflection) {
    std::mt19937_64 rng(33);
    for (const auto& p : random_window_parameters(34, 20)) {
        const auto f = frame_for(p);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 10; ++i) {
            const complex z = f.x_star * (1.0 + 0.03 * complex(u(rng), u(rng)));
            const complex k = koenigs_value(f, z);
            complex gz = z;
            for (int j = 0; j < f.cycle.period; ++j) gz = eval_complex(p, gz);
            EXPECT_LT(std::abs(koenigs_value(f, gz) - f.lambda * k), 1e-7 * std::abs(f.lambda * k));
            EXPECT_LT(std::abs(koenigs_value(f, reflect(z)) - std::conj(k)), 1e-8 * std::abs(k));
        }
    }
}

TEST(Koenigs, DivergenceSignalled) {
    const auto f = frame_for(Parameter(0.5, 0.75));
    try {
        koenigs_value(f, complex(-1e-3, 0.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.status(), Status::divergence);
    }
}

TEST(Koenigs, LambdaWindow) {
    const Parameter p(0.5, 1.0);
    const auto c = find_attracting_cycle(p, 4);
    ASSERT_TRUE(c);
    try {
        make_koenigs_frame(p, *c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.status(), Status::outside_lambda_window);
    }
}

TEST(CriticalAngle, SymmetryLine) {
    for (double b : {0.6, 0.75, 0.9}) {
        const Parameter p(0.5, b);
        const auto c = *find_attracting_cycle(p, 5);
        EXPECT_NEAR(critical_angle(p, c), M_PI / 2, 1e-6);
        const auto [c1, c2] = critical_points(p);
        EXPECT_NEAR(std::arg(direct_koenigs(p, c, c1)), M_PI / 2, 1e-6);
    }
}

TEST(CriticalAngle, InUpperHalfPlane) {
    for (const auto& p : random_window_parameters(35, 50)) {
        const auto cls = classify(p, 8);
        const double nu = critical_angle(p, *cls.cycle);
        EXPECT_GT(nu, 0.0);
        EXPECT_LT(nu, M_PI);
    }
}

TEST(Uniformize, ClosedFormAndCodomain) {
    const auto u = uniformize(Parameter(0.5, 0.75));
    EXPECT_LT(std::abs(u.xi - complex(-0.5, 0.0)), 1e-10);
    EXPECT_NEAR(u.lambda, 0.5, 1e-12);
    for (const auto& p : random_window_parameters(36, 30)) {
        const auto v = uniformize(p);
        EXPECT_NEAR(std::abs(v.xi), v.lambda, 1e-10);
        EXPECT_FALSE(v.xi.imag() == 0.0 && v.xi.real() >= 0.0);
        EXPECT_LT(std::abs(v.xi - std::polar(v.lambda, 2 * v.nu)), 1e-10);
        const auto m = uniformize(p.mirrored());
        EXPECT_LT(std::abs(m.xi - std::conj(v.xi)), 1e-8);
        EXPECT_NEAR(m.nu, M_PI - v.nu, 1e-8);
    }
    try {
        uniformize(Parameter(0.0, 0.3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.status(), Status::not_in_tongue);
    }
}

TEST(Invert, FixedPointOfRoundTrip) {
    const auto p = invert_uniformization(Parameter(0.5, 0.75), complex(-0.5, 0.0));
    EXPECT_LT(circle_distance(p.a, 0.5), 1e-7);
    EXPECT_NEAR(p.b, 0.75, 1e-7);
}

TEST(Invert, SymmetryLine) {
    const auto p = invert_uniformization(Parameter(0.5, 0.75), complex(-0.2, 0.0));
    EXPECT_LT(circle_distance(p.a, 0.5), 1e-6);
    EXPECT_NEAR(p.b, 0.9, 1e-6);
}

TEST(Invert, RoundTrips) {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> ul(0.15, 0.85), un(0.3, M_PI - 0.3);
    for (int i = 0; i < 5; ++i) {
        const complex w = std::polar(ul(rng), 2 * un(rng));
        const auto p = invert_uniformization(Parameter(0.5, 0.75), w);
        EXPECT_LT(std::abs(uniformize(p).xi - w), 1e-7);
        // and back from the other direction
        const auto q = invert_uniformization(p, complex(-0.5, 0.0));
        EXPECT_LT(circle_distance(q.a, 0.5), 1e-6);
        EXPECT_NEAR(q.b, 0.75, 1e-6);
    }
}

TEST(Invert, Errors) {
    const Parameter seed(0.5, 0.75);
    try {
        invert_uniformization(seed, complex(0.3, 0.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.status(), Status::invalid_argument);
    }
    try {
        invert_uniformization(seed, complex(-1.2, 0.1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.status(), Status::outside_lambda_window);
    }
    try {
        invert_uniformization(Parameter(0.0, 0.2), complex(-0.5, 0.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.status(), Status::not_in_tongue);
    }
}

TEST(InternalRay, SymmetryLineClosedForm) {
    const std::vector<double> lambdas{0.8, 0.6, 0.4, 0.2};
    const auto ray = trace_internal_ray(Parameter(0.5, 0.75), M_PI / 2, lambdas);
    ASSERT_EQ(ray.size(), lambdas.size());
    for (std::size_t i = 0; i < ray.size(); ++i) {
        EXPECT_LT(circle_distance(ray[i].a, 0.5), 1e-6);
        EXPECT_NEAR(ray[i].b, 1.0 - lambdas[i] / 2, 1e-6);
    }
}

TEST(InternalRay, MirrorImagesAndSameTongue) {
    const std::vector<double> lambdas{0.7, 0.55, 0.4, 0.25};
    const double nu = 1.1;
    const auto r1 = trace_internal_ray(Parameter(0.5, 0.75), nu, lambdas);
    const auto r2 = trace_internal_ray(Parameter(0.5, 0.75), M_PI - nu, lambdas);
    double prev = 1.0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        EXPECT_LT(circle_distance(r1[i].a, -r2[i].a), 1e-6);
        EXPECT_NEAR(r1[i].b, r2[i].b, 1e-6);
        const auto cls = classify(r1[i], 10);
        ASSERT_TRUE(cls.in_tongue());
        EXPECT_EQ(cls.cycle->period, 1);
        EXPECT_EQ(cls.type->k, 0);
        const double m = std::abs(uniformize(r1[i]).xi);
        EXPECT_LT(m, prev);
        prev = m;
    }
    EXPECT_THROW(trace_internal_ray(Parameter(0.5, 0.75), 4.0, lambdas), Error);
    EXPECT_THROW(trace_internal_ray(Parameter(0.5, 0.75), 1.0, {0.2, 0.4}), Error);
}

TEST(Superattracting, CountsMatchDoublingEnumeration) {
    for (int q = 1; q <= 5; ++q) {
        const auto sols = superattracting_parameters(q);
        EXPECT_EQ(static_cast<int>(sols.size()), oracle::exact_period_count(q)) << q;
        std::set<long long> types;
        for (const auto& s : sols) {
            EXPECT_LT(oracle::ceiling_orbit_error(s.a, q), 1e-10);
            EXPECT_GE(s.a, -0.5);
            EXPECT_LT(s.a, 0.5);
            EXPECT_EQ(s.type.q, q);
            types.insert(s.type.k);
        }
        EXPECT_EQ(types.size(), sols.size());
    }
    EXPECT_EQ(oracle::exact_period_count(1), 1);
    EXPECT_EQ(oracle::exact_period_count(2), 2);
    EXPECT_EQ(oracle::exact_period_count(3), 6);
}

TEST(Superattracting, LowPeriods) {
    const auto one = superattracting_parameters(1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].a, -0.5);
    EXPECT_EQ(one[0].type.k, 0);
    const auto two = superattracting_parameters(2);
    ASSERT_EQ(two.size(), 2u);
    EXPECT_NEAR(two[0].a, -two[1].a, 1e-12);
    EXPECT_NEAR(std::abs(two[0].a), 0.1028, 1e-4);
    EXPECT_EQ(two[0].type.k + two[1].type.k, 3);
    EXPECT_THROW(superattracting_parameters(0), Error);
}
