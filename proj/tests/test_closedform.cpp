#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "secord/closedform.hpp"
#include "secord/fit.hpp"
#include "secord/mathutil.hpp"

using secord::GaussMixtureModel;
using secord::GaussSigmoidModel;
using secord::OrJointTable;
using secord::TanhBinaryKernel;

TEST_CASE("the threshold-response input probability is the Gaussian tail mass") {
    CHECK(std::abs(secord::unique_gamma(0.0, 1.0, 0.0) - 0.5) < 1e-12);
    CHECK(std::abs(secord::unique_gamma(0.0, 1.0, 40.0) - 1.0) < 1e-10);
    CHECK(std::abs(secord::unique_gamma(0.0, 1.0, 1.0) - 0.8413447460685429) < 1e-6);

    SUBCASE("location/scale reduce to the standardized case") {
        CHECK(secord::unique_gamma(2.0, 0.5, 2.0) == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(secord::unique_gamma(1.0, 2.0, 3.0) ==
              doctest::Approx(secord::unique_gamma(0.0, 1.0, 1.0)).epsilon(1e-10));
    }
}

TEST_CASE("the anti-causal response parameters invert the mixture by Bayes' rule") {
    SUBCASE("symmetric means give a unit offset") {
        const GaussMixtureModel model(0.5, -1.3, 1.3, 0.8);
        const auto [alpha, beta] = secord::noncausal_sigmoid_params(model);
        CHECK(beta == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(alpha == doctest::Approx(-2.6 / 0.64).epsilon(1e-12));
    }

    SUBCASE("the documented point value") {
        const GaussMixtureModel model(0.5, 0.0, 1.0, 1.0);
        const auto [alpha, beta] = secord::noncausal_sigmoid_params(model);
        CHECK(alpha == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(std::abs(beta - 1.6487212707001282) < 1e-6);
    }

    SUBCASE("the sigmoid equals the exact posterior at random points") {
        const GaussMixtureModel model(0.3, -0.7, 1.9, 1.1);
        const auto [alpha, beta] = secord::noncausal_sigmoid_params(model);
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> unif(-6.0, 6.0);
        for (int i = 0; i < 100; ++i) {
            const double y = unif(rng);
            const double sigmoid = 1.0 / (beta * std::exp(alpha * y) + 1.0);
            const double hi = model.gamma * secord::normal_pdf(y, model.nu1, model.rho);
            const double lo = (1.0 - model.gamma) * secord::normal_pdf(y, model.nu0, model.rho);
            CHECK(std::abs(sigmoid - hi / (hi + lo)) < 1e-10);
        }
    }

    SUBCASE("degenerate mixing weights are rejected") {
        CHECK_THROWS_AS(secord::noncausal_sigmoid_params(GaussMixtureModel(1.0, 0.0, 1.0, 1.0)),
                        std::invalid_argument);
        CHECK_THROWS_AS(secord::noncausal_sigmoid_params(GaussMixtureModel(0.0, 0.0, 1.0, 1.0)),
                        std::invalid_argument);
    }
}

TEST_CASE("tanh kernels evaluate the gate construction") {
    SUBCASE("no parents, zero offset: a fair coin") {
        TanhBinaryKernel kernel;
        CHECK(secord::tanh_kernel_probability(kernel, {}) == doctest::Approx(0.5));
    }

    SUBCASE("the disjunction kernel saturates correctly") {
        const TanhBinaryKernel kernel = secord::or_gate_kernel(10.0, 3);
        CHECK(kernel.lambda0 == doctest::Approx(-10.0));
        REQUIRE(kernel.lambda.size() == 3);
        for (double l : kernel.lambda) CHECK(l == doctest::Approx(20.0));

        CHECK(secord::tanh_kernel_probability(kernel, {0, 0, 0}) < 1e-8);
        CHECK(secord::tanh_kernel_probability(kernel, {1, 0, 0}) > 1.0 - 1e-8);
        CHECK(secord::tanh_kernel_probability(kernel, {0, 1, 1}) > 1.0 - 1e-8);
    }
}

TEST_CASE("the exp/tanh identity holds across the working range") {
    for (int i = -3000; i <= 3000; ++i) {
        const double a = 0.01 * i;
        const double lhs = 1.0 / (1.0 + std::exp(-a));  // e^a / (1 + e^a), stable
        const double rhs = 0.5 * (1.0 + std::tanh(a / 2.0));
        CHECK(std::abs(lhs - rhs) < 1e-14);
    }
}

TEST_CASE("the exact gate joint reproduces the limiting reverse conditionals") {
    const OrJointTable table(4, 30.0);

    // output given inputs is the kernel itself
    CHECK(table.conditional(3, {{0, 0}, {1, 0}, {2, 0}}) < 1e-6);
    CHECK(table.conditional(3, {{0, 1}, {1, 0}, {2, 0}}) > 1.0 - 1e-6);

    // one input given the others and the output
    CHECK(table.conditional(0, {{1, 0}, {2, 0}, {3, 1}}) > 1.0 - 1e-6);
    CHECK(table.conditional(0, {{1, 1}, {3, 1}}) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(table.conditional(0, {{1, 0}, {2, 0}, {3, 0}}) < 1e-6);

    SUBCASE("joint probabilities sum to one") {
        double total = 0.0;
        for (int s = 0; s < 16; ++s) {
            std::vector<int> state(4);
            for (int b = 0; b < 4; ++b) state[static_cast<std::size_t>(b)] = (s >> b) & 1;
            total += table.joint_probability(state);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("conditioning on an impossible event is an error") {
        const OrJointTable sharp(4, 600.0);  // output saturates to exact zero
        CHECK_THROWS_AS(sharp.conditional(0, {{0, 1}, {3, 0}}), std::invalid_argument);
    }

    SUBCASE("the variable count is range checked") {
        CHECK_THROWS_AS(secord::or_joint_table(2, 10.0), std::invalid_argument);
        CHECK_THROWS_AS(secord::or_joint_table(13, 10.0), std::invalid_argument);
        CHECK_NOTHROW(secord::or_joint_table(3, 10.0));
    }
}

TEST_CASE("interaction degree separates the gate's two directions") {
    SUBCASE("the causal conditional is linear") {
        const OrJointTable table(4, 10.0);
        const auto fit = secord::minimal_tanh_degree(table.causal_table(), 3);
        CHECK(fit.fitted);
        CHECK(fit.degree == 1);
    }

    SUBCASE("the reverse conditional needs degree n-2") {
        const OrJointTable table(4, 30.0);
        const auto fit = secord::minimal_tanh_degree(table.reverse_table(), 3);
        CHECK(fit.fitted);
        CHECK(fit.degree == 2);
        // the rejected degree sits far above the accepted one
        REQUIRE(fit.rms_residuals.size() >= 3);
        CHECK(fit.rms_residuals[1] >= 10.0 * std::max(fit.rms_residuals[2], 1e-12));
    }

    SUBCASE("a constant-half table has degree zero") {
        secord::ConditionalTable table;
        table.input_count = 2;
        for (int s = 0; s < 4; ++s) {
            secord::ConditionalTable::Entry entry;
            entry.bits = {s & 1, (s >> 1) & 1};
            entry.probability = 0.5;
            entry.weight = 0.25;
            table.entries.push_back(entry);
        }
        const auto fit = secord::minimal_tanh_degree(table, 2);
        CHECK(fit.fitted);
        CHECK(fit.degree == 0);
    }

    SUBCASE("an unfittable table reports max degree plus one") {
        // XOR-style table restricted to degree 0: nothing constant fits.
        secord::ConditionalTable table;
        table.input_count = 2;
        for (int s = 0; s < 4; ++s) {
            secord::ConditionalTable::Entry entry;
            entry.bits = {s & 1, (s >> 1) & 1};
            const int parity = (s & 1) ^ ((s >> 1) & 1);
            entry.probability = parity ? 0.9 : 0.1;
            entry.weight = 0.25;
            table.entries.push_back(entry);
        }
        const auto fit = secord::minimal_tanh_degree(table, 1);
        CHECK(!fit.fitted);
        CHECK(fit.degree == 2);
    }
}

TEST_CASE("mixture sampling matches its analytic law") {
    std::mt19937_64 rng(90210);

    SUBCASE("a degenerate weight collapses to one component") {
        const GaussMixtureModel model(1.0, -5.0, 2.0, 0.5);
        const auto xy = secord::sample_gauss_mixture(model, 500, rng);
        double mean = 0.0;
        for (const auto& [x, y] : xy) {
            CHECK(x == 1.0);
            mean += y;
        }
        mean /= 500.0;
        CHECK(std::abs(mean - 2.0) < 3.0 * 0.5 / std::sqrt(500.0));
    }

    SUBCASE("the balanced mixture is centered") {
        const GaussMixtureModel model(0.5, -2.0, 2.0, 1.0);
        const auto xy = secord::sample_gauss_mixture(model, 10000, rng);
        double mean = 0.0, ones = 0.0;
        for (const auto& [x, y] : xy) {
            mean += y;
            ones += x;
        }
        mean /= 10000.0;
        ones /= 10000.0;
        CHECK(std::abs(mean) < 0.1);
        CHECK(std::abs(ones - 0.5) < 3.0 * std::sqrt(0.25 / 10000.0));
    }

    SUBCASE("the marginal density integrates to one") {
        const GaussMixtureModel model(0.4, -1.0, 1.5, 0.8);
        const double lo = -1.0 - 8.0 * 0.8, hi = 1.5 + 8.0 * 0.8;
        const int cells = 4096;
        const double width = (hi - lo) / cells;
        double mass = 0.0;
        for (int c = 0; c < cells; ++c) {
            mass += width * model.marginal_density(lo + width * (c + 0.5));
        }
        CHECK(std::abs(mass - 1.0) < 1e-9);
    }
}

TEST_CASE("sigmoid-response sampling matches its analytic law") {
    std::mt19937_64 rng(60601);

    SUBCASE("a flat response is an independent fair coin") {
        const GaussSigmoidModel model(0.0, 1.0, 0.0, 0.0);
        const auto xy = secord::sample_gauss_sigmoid(model, 10000, rng);
        double ones = 0.0;
        for (const auto& [x, y] : xy) ones += x;
        ones /= 10000.0;
        CHECK(std::abs(ones - 0.5) < 3.0 * std::sqrt(0.25 / 10000.0));
    }

    SUBCASE("a steep response is nearly a hard threshold") {
        const GaussSigmoidModel model(0.0, 1.0, 50.0, 0.0);
        const auto xy = secord::sample_gauss_sigmoid(model, 10000, rng);
        int disagreements = 0;
        for (const auto& [x, y] : xy) disagreements += (x > 0.5) != (y > 0.0);
        CHECK(disagreements < 100);  // below 1%
    }

    SUBCASE("the response rate matches the marginalized probability") {
        const GaussSigmoidModel model(0.3, 1.2, 1.0, 0.4);
        // independent integration oracle for p(x=1)
        const int cells = 20000;
        const double lo = 0.3 - 10.0 * 1.2, hi = 0.3 + 10.0 * 1.2;
        const double width = (hi - lo) / cells;
        double p = 0.0;
        for (int c = 0; c < cells; ++c) {
            const double y = lo + width * (c + 0.5);
            p += width * secord::normal_pdf(y, 0.3, 1.2) *
                 0.5 * (1.0 + std::tanh(1.0 * y + 0.4));
        }
        const long n = 20000;
        const auto xy = secord::sample_gauss_sigmoid(model, n, rng);
        double ones = 0.0;
        for (const auto& [x, y] : xy) ones += x;
        ones /= static_cast<double>(n);
        CHECK(std::abs(ones - p) < 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)));
    }
}

TEST_CASE("a separated mixture is visibly non-Gaussian") {
    const GaussMixtureModel model(0.5, -0.6, 0.6, 1.0);  // |nu0 - nu1| >= rho
    const double mean = model.mean();
    const double sd = std::sqrt(model.variance());

    const int cells = 2048;
    const double lo = mean - 8.0 * sd, hi = mean + 8.0 * sd;
    const double width = (hi - lo) / cells;
    double tv = 0.0;
    for (int c = 0; c < cells; ++c) {
        const double y = lo + width * (c + 0.5);
        tv += 0.5 * width *
              std::abs(model.marginal_density(y) - secord::normal_pdf(y, mean, sd));
    }
    CHECK(tv > 1e-3);
}

TEST_CASE("fitting the causal factorization recovers the mixture parameters") {
    // Sampled mixtures refit under the causal ordering should land within
    // three asymptotic standard errors of the truth nearly always.
    const GaussMixtureModel truth(0.5, -2.0, 2.0, 1.0);
    const long n = 2000;
    int hits = 0;
    const int runs = 100;
    for (int run = 0; run < runs; ++run) {
        std::mt19937_64 rng(1000 + static_cast<unsigned>(run));
        const auto xy = secord::sample_gauss_mixture(truth, n, rng);
        std::vector<double> xs, ys;
        for (const auto& [x, y] : xy) {
            xs.push_back(x);
            ys.push_back(y);
        }
        const auto data = secord::make_fit_context({xs, ys}, {"x", "y"});
        const auto chain = secord::fit_ordering(data, {0, 1});
        if (!chain.all_converged()) continue;

        const auto mx = secord::moments(chain.steps[0].kernel, {});
        const double gamma_hat = mx.mean(0);

        Eigen::VectorXd zero(1), one(1);
        zero << 0.0;
        one << 1.0;
        const auto m0 = secord::moments(chain.steps[1].kernel, {zero});
        const auto m1 = secord::moments(chain.steps[1].kernel, {one});
        const double nu0_hat = m0.mean(0);
        const double nu1_hat = m1.mean(0);
        const double var0 = m0.second(0, 0) - nu0_hat * nu0_hat;
        const double var1 = m1.second(0, 0) - nu1_hat * nu1_hat;
        const double rho_hat = std::sqrt(0.5 * (var0 + var1));

        const double se_gamma = std::sqrt(0.25 / n);
        const double se_nu = 1.0 / std::sqrt(n * 0.5);
        const double se_rho = 1.0 / std::sqrt(2.0 * n);
        const bool ok = std::abs(gamma_hat - 0.5) < 3.0 * se_gamma &&
                        std::abs(nu0_hat - (-2.0)) < 3.0 * se_nu &&
                        std::abs(nu1_hat - 2.0) < 3.0 * se_nu &&
                        std::abs(rho_hat - 1.0) < 3.0 * se_rho;
        hits += ok;
    }
    CHECK(hits >= 95);
}
