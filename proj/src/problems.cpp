#include "sgsde/problems.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sgsde/errors.hpp"

namespace sgsde {

namespace {

// sin(t)/t with the removable singularity filled in.
double sinc(double t) {
    if (std::abs(t) < 1e-4) {
        const double t2 = t * t;
        return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    }
    return std::sin(t) / t;
}

Mat const_skew2(double upper) {
    Mat s(2, 2);
    s(0, 1) = upper;
    s(1, 0) = -upper;
    return s;
}

void check_positive_coordinates(const Vec& x) {
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] == 0.0) {
            std::ostringstream msg;
            msg << "Lotka-Volterra SG matrices are singular: coordinate " << (k + 1)
                << " is zero";
            throw SingularDenominatorError(msg.str());
        }
    }
}

}  // namespace

ProblemSpec pendulum(double c1, double c2) {
    ProblemSpec spec;
    spec.name = "pendulum";
    spec.x0 = {0.2, 1.0};
    spec.horizon = 1.0;

    Invariant inv;
    inv.value = [](const Vec& x) { return 0.5 * x[0] * x[0] - std::cos(x[1]); };
    inv.gradient = [](const Vec& x) { return Vec{x[0], std::sin(x[1])}; };
    inv.separable_parts = {
        {[](double p) { return 0.5 * p * p; }, [](double p) { return p; }},
        {[](double q) { return -std::cos(q); }, [](double q) { return std::sin(q); }},
    };
    // int_0^1 sin(q + tau dq) dtau = sin(q + dq/2) sinc(dq/2)
    inv.exact_avg_gradient = [](const Vec& x, const Vec& y) {
        const double dq = y[1] - x[1];
        return Vec{0.5 * (x[0] + y[0]), std::sin(0.5 * (x[1] + y[1])) * sinc(0.5 * dq)};
    };

    SdeProblem& p = spec.problem;
    p.dim = 2;
    p.noise_count = 2;
    p.invariant = inv;
    p.drift = [](const Vec& x) { return Vec{-std::sin(x[1]), x[0]}; };
    const double c[2] = {c1, c2};
    for (int r = 0; r < 2; ++r) {
        const double cr = c[r];
        p.diffusions.push_back([cr](const Vec& x) {
            const double cq = std::cos(x[1]);
            return Vec{-cr * std::sin(x[1]) * cq, cr * x[0] * cq};
        });
        p.diffusion_jacobians.push_back([cr](const Vec& x) {
            Mat j(2, 2);
            j(0, 1) = -cr * std::cos(2.0 * x[1]);
            j(1, 0) = cr * std::cos(x[1]);
            j(1, 1) = -cr * x[0] * std::sin(x[1]);
            return j;
        });
    }

    SkewGradientForm form;
    form.dim = 2;
    form.noise_count = 2;
    form.invariant = inv;
    form.s_matrix = [](const Vec&) { return const_skew2(-1.0); };
    for (int r = 0; r < 2; ++r) {
        const double cr = c[r];
        form.t_matrices.push_back(
            [cr](const Vec& x) { return const_skew2(-cr * std::cos(x[1])); });
    }
    spec.explicit_form = form;

    spec.weak_functionals = {
        {"sinp_plus_q2", [](const Vec& x) { return std::sin(x[0]) + x[1] * x[1]; }},
    };
    return spec;
}

ProblemSpec cyclic_lotka_volterra() {
    ProblemSpec spec;
    spec.name = "lotka_volterra";
    spec.x0 = {0.01, 0.01, 0.01};
    spec.horizon = 1.0;
    spec.positivity_floor = 1e-12;

    Invariant inv;
    inv.value = [](const Vec& x) { return x[0] * x[1] * x[2]; };
    inv.gradient = [](const Vec& x) { return Vec{x[1] * x[2], x[0] * x[2], x[0] * x[1]}; };
    // grad I is quadratic along a segment; average the products exactly.
    inv.exact_avg_gradient = [](const Vec& x, const Vec& y) {
        const double d1 = y[0] - x[0], d2 = y[1] - x[1], d3 = y[2] - x[2];
        return Vec{x[1] * x[2] + 0.5 * (x[1] * d3 + x[2] * d2) + d2 * d3 / 3.0,
                   x[0] * x[2] + 0.5 * (x[0] * d3 + x[2] * d1) + d1 * d3 / 3.0,
                   x[0] * x[1] + 0.5 * (x[0] * d2 + x[1] * d1) + d1 * d2 / 3.0};
    };

    SdeProblem& p = spec.problem;
    p.dim = 3;
    p.noise_count = 3;
    p.invariant = inv;
    p.drift = [](const Vec& x) {
        return Vec{x[0] * (x[2] - x[1]), x[1] * (x[0] - x[2]), x[2] * (x[1] - x[0])};
    };
    const std::array<std::array<double, 3>, 3> rates = {
        {{1.0, 1.0, -2.0}, {1.0, -2.0, 1.0}, {-2.0, 1.0, 1.0}}};
    for (int r = 0; r < 3; ++r) {
        const std::array<double, 3> a = rates[r];
        p.diffusions.push_back(
            [a](const Vec& x) { return Vec{a[0] * x[0], a[1] * x[1], a[2] * x[2]}; });
        p.diffusion_jacobians.push_back([a](const Vec&) {
            Mat j(3, 3);
            j(0, 0) = a[0];
            j(1, 1) = a[1];
            j(2, 2) = a[2];
            return j;
        });
    }

    SkewGradientForm form;
    form.dim = 3;
    form.noise_count = 3;
    form.invariant = inv;
    form.s_matrix = [](const Vec&) {
        Mat s(3, 3);
        s(0, 1) = 1.0;
        s(0, 2) = -1.0;
        s(1, 0) = -1.0;
        s(1, 2) = 1.0;
        s(2, 0) = 1.0;
        s(2, 1) = -1.0;
        return s;
    };
    // T_r entries are (0,1) = a/(2 x3), (0,2) = b/(2 x2), (1,2) = c/(2 x1),
    // determined by T_r grad I = g_r: a + b = 2 g_r^1/x1, c - a = 2 g_r^2/x2,
    // -b - c = 2 g_r^3/x3.
    const std::array<std::array<double, 3>, 3> halves = {
        {{1.0, 1.0, 3.0}, {1.0, 1.0, -3.0}, {-1.0, -3.0, 1.0}}};
    for (int r = 0; r < 3; ++r) {
        const std::array<double, 3> e = halves[r];
        form.t_matrices.push_back([e](const Vec& x) {
            check_positive_coordinates(x);
            Mat t(3, 3);
            t(0, 1) = e[0] * 0.5 / x[2];
            t(0, 2) = e[1] * 0.5 / x[1];
            t(1, 2) = e[2] * 0.5 / x[0];
            t(1, 0) = -t(0, 1);
            t(2, 0) = -t(0, 2);
            t(2, 1) = -t(1, 2);
            return t;
        });
    }
    spec.explicit_form = form;

    spec.weak_functionals = {
        {"x1x2", [](const Vec& x) { return x[0] * x[1]; }},
        {"x2x3", [](const Vec& x) { return x[1] * x[2]; }},
        {"x1sq", [](const Vec& x) { return x[0] * x[0]; }},
        {"normsq", [](const Vec& x) { return dot(x, x); }},
    };
    return spec;
}

ProblemSpec quartic_fixture() {
    ProblemSpec spec;
    spec.name = "quartic";
    spec.x0 = {1.0, 0.5};
    spec.horizon = 1.0;

    Invariant inv;
    inv.value = [](const Vec& x) {
        return 0.25 * (std::pow(x[0], 4) + std::pow(x[1], 4));
    };
    inv.gradient = [](const Vec& x) {
        return Vec{x[0] * x[0] * x[0], x[1] * x[1] * x[1]};
    };
    auto quartic_part = SeparablePart{[](double v) { return 0.25 * v * v * v * v; },
                                      [](double v) { return v * v * v; }};
    inv.separable_parts = {quartic_part, quartic_part};
    // int_0^1 (x + tau (y-x))^3 dtau = (x^3 + x^2 y + x y^2 + y^3)/4 per coordinate
    inv.exact_avg_gradient = [](const Vec& x, const Vec& y) {
        Vec d(2);
        for (int k = 0; k < 2; ++k)
            d[k] = 0.25 * (x[k] * x[k] * x[k] + x[k] * x[k] * y[k] + x[k] * y[k] * y[k] +
                           y[k] * y[k] * y[k]);
        return d;
    };

    SdeProblem& p = spec.problem;
    p.dim = 2;
    p.noise_count = 1;
    p.invariant = inv;
    p.drift = [inv](const Vec& x) {
        const Vec g = inv.gradient(x);
        return Vec{g[1], -g[0]};
    };
    p.diffusions.push_back([inv](const Vec& x) {
        const Vec g = inv.gradient(x);
        return Vec{0.2 * g[1], -0.2 * g[0]};
    });
    p.diffusion_jacobians.push_back([](const Vec& x) {
        Mat j(2, 2);
        j(0, 1) = 0.2 * 3.0 * x[1] * x[1];
        j(1, 0) = -0.2 * 3.0 * x[0] * x[0];
        return j;
    });

    SkewGradientForm form;
    form.dim = 2;
    form.noise_count = 1;
    form.invariant = inv;
    form.s_matrix = [](const Vec&) { return const_skew2(1.0); };
    form.t_matrices.push_back([](const Vec&) { return const_skew2(0.2); });
    spec.explicit_form = form;

    spec.weak_functionals = {
        {"normsq", [](const Vec& x) { return dot(x, x); }},
    };
    return spec;
}

ProblemSpec problem_by_name(const std::string& name, double c1, double c2) {
    if (name == "pendulum") return pendulum(c1, c2);
    if (name == "lotka_volterra") return cyclic_lotka_volterra();
    if (name == "quartic") return quartic_fixture();
    throw std::invalid_argument("unknown problem '" + name + "'");
}

std::vector<std::string> problem_names() { return {"pendulum", "lotka_volterra", "quartic"}; }

}  // namespace sgsde
