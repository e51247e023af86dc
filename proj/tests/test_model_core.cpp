#include <doctest.h>

#include <cmath>
#include <vector>

#include "snmc/budget.hpp"
#include "snmc/groups.hpp"
#include "snmc/model.hpp"

using namespace snmc;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("degenerate uniform bounds are rejected at construction") {
    CHECK_THROWS_AS(InputSpec::uniform(1, 0.0, 0.0), ValidationError);
    CHECK_THROWS_AS(InputSpec::uniform(2, 1.0, -1.0), ValidationError);
    CHECK_THROWS_AS(InputSpec::standard_normal(0), ValidationError);
}

TEST_CASE("sampling is deterministic under re-derived streams") {
    const InputSpec spec = InputSpec::standard_normal(2);
    NoiseStream s1 = NoiseStream::derive(99, StreamRole::DesignBase, 0, 5, 0, 0);
    NoiseStream s2 = NoiseStream::derive(99, StreamRole::DesignBase, 0, 5, 0, 0);
    CHECK(sample_input(spec, s1) == sample_input(spec, s2));
}

TEST_CASE("uniform(-pi,pi) coordinates average to zero") {
    const InputSpec spec = InputSpec::uniform(3, -kPi, kPi);
    const int n = 100000;
    double acc[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) {
        NoiseStream s = NoiseStream::derive(123, StreamRole::DesignBase, 0,
                                            static_cast<std::uint64_t>(i), 0, 0);
        const auto x = spec.sample(s);
        for (int j = 0; j < 3; ++j) acc[j] += x[static_cast<std::size_t>(j)];
    }
    const double se = kPi / std::sqrt(3.0 * n); // sd of U(-pi,pi) over sqrt(n)
    for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(acc[j] / n) < 3 * se);
    }
}

TEST_CASE("linear model evaluates exactly with sigma = 0") {
    const StochasticModel model = builtin_linear(0.0);
    BudgetLedger ledger = BudgetLedger::unlimited();
    NoiseStream s = NoiseStream::derive(1, StreamRole::Base, 0, 0, 0, 0);
    const std::vector<double> x{1.0, 1.0};
    CHECK(evaluate_phi(model, QoITransform::identity(), x, s, ledger) == 4.0);
}

TEST_CASE("evaluate_phi is deterministic and charges one unit per call") {
    const StochasticModel model = builtin_linear(1.0);
    BudgetLedger ledger(10);
    const std::vector<double> x{0.5, -0.5};
    NoiseStream s1 = NoiseStream::derive(7, StreamRole::Base, 0, 3, 2, 0);
    NoiseStream s2 = NoiseStream::derive(7, StreamRole::Base, 0, 3, 2, 0);
    const double v1 = evaluate_phi(model, QoITransform::identity(), x, s1, ledger);
    const double v2 = evaluate_phi(model, QoITransform::identity(), x, s2, ledger);
    CHECK(v1 == v2);
    CHECK(ledger.spent() == 2);

    // Sampling inputs does not touch the ledger.
    NoiseStream d = NoiseStream::derive(7, StreamRole::DesignBase, 0, 0, 0, 0);
    sample_input(model.inputs, d);
    CHECK(ledger.spent() == 2);
}

TEST_CASE("evaluate_phi rejects wrong-dimension points") {
    const StochasticModel model = builtin_linear(1.0);
    BudgetLedger ledger = BudgetLedger::unlimited();
    NoiseStream s = NoiseStream::derive(1, StreamRole::Base, 0, 0, 0, 0);
    const std::vector<double> x{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(evaluate_phi(model, QoITransform::identity(), x, s, ledger),
                    DimensionMismatch);
}

TEST_CASE("linear model moments at the origin") {
    // phi(0, 0) = 1 + z: mean 1, variance 1.
    const StochasticModel model = builtin_linear(1.0);
    BudgetLedger ledger = BudgetLedger::unlimited();
    const std::vector<double> x{0.0, 0.0};
    const int n = 100000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
        NoiseStream s = NoiseStream::derive(55, StreamRole::Base, 0,
                                            static_cast<std::uint64_t>(i), 0, 0);
        const double v = evaluate_phi(model, QoITransform::identity(), x, s, ledger);
        acc += v;
        acc2 += v * v;
    }
    const double mean = acc / n;
    const double var = acc2 / n - mean * mean;
    CHECK(std::abs(mean - 1.0) < 3 * std::sqrt(1.0 / n));
    CHECK(std::abs(var - 1.0) < 3 * std::sqrt(2.0 / n));
    CHECK(ledger.spent() == n);
}

TEST_CASE("linear model moments at random inputs") {
    // mean(phi) = 1, Var(phi) = 1 + 4 + sigma^2 = 6 at sigma = 1.
    const StochasticModel model = builtin_linear(1.0);
    BudgetLedger ledger = BudgetLedger::unlimited();
    const int n = 50000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
        NoiseStream d = NoiseStream::derive(77, StreamRole::DesignBase, 0,
                                            static_cast<std::uint64_t>(i), 0, 0);
        const auto x = model.inputs.sample(d);
        NoiseStream s = NoiseStream::derive(77, StreamRole::Base, 0,
                                            static_cast<std::uint64_t>(i), 0, 0);
        const double v = evaluate_phi(model, QoITransform::identity(), x, s, ledger);
        acc += v;
        acc2 += v * v;
    }
    const double mean = acc / n;
    const double var = acc2 / n - mean * mean;
    // Var of the sample variance of a sum of normals: Var ~ 2*6^2/n + kurtosis
    // terms; 3 * sqrt(3) * 6 / sqrt(n) is a comfortable 3-SE envelope.
    CHECK(std::abs(mean - 1.0) < 3 * std::sqrt(6.0 / n));
    CHECK(std::abs(var - 6.0) < 3 * std::sqrt(3.0) * 6.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("model parameter validation") {
    CHECK_THROWS_AS(builtin_linear(-0.5), ValidationError);
    CHECK_THROWS_AS(builtin_ishigami(0.0, 0.1), ValidationError);
    CHECK_THROWS_AS(builtin_ishigami(7.0, -0.1), ValidationError);
}

TEST_CASE("ishigami odd symmetry in (x1, x3)") {
    // The x2 term is even, so mirroring (x1, x3) negates everything else:
    // f(-x1, x2, -x3, z) + f(x1, x2, x3, z) = 2 a sin^2(x2). With x2 = 0 the
    // negation is exact in floating point.
    const double a = 7.0, b = 0.1;
    const StochasticModel model = builtin_ishigami(a, b);
    BudgetLedger ledger = BudgetLedger::unlimited();
    for (int i = 0; i < 200; ++i) {
        NoiseStream d = NoiseStream::derive(31, StreamRole::DesignBase, 0,
                                            static_cast<std::uint64_t>(i), 0, 0);
        auto x = model.inputs.sample(d);
        const auto eval_pair = [&](const std::vector<double>& point) {
            NoiseStream s = NoiseStream::derive(31, StreamRole::Base, 0,
                                                static_cast<std::uint64_t>(i), 0, 0);
            return evaluate_phi(model, QoITransform::identity(), point, s, ledger);
        };

        const std::vector<double> mirrored{-x[0], x[1], -x[2]};
        const double v = eval_pair(x);
        const double w = eval_pair(mirrored);
        const double even_part = 2.0 * a * std::sin(x[1]) * std::sin(x[1]);
        CHECK(v + w == doctest::Approx(even_part).epsilon(1e-12));

        std::vector<double> x20{x[0], 0.0, x[2]};
        const std::vector<double> x20m{-x[0], 0.0, -x[2]};
        CHECK(eval_pair(x20m) == -eval_pair(x20));
    }
}

TEST_CASE("analytic first-order indices") {
    const BuiltinModel linear = LinearModelParams{1.0};
    CHECK(*analytic_first_order(linear, {1}) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(*analytic_first_order(linear, {2}) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(*analytic_first_order(linear, {1, 2}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(analytic_first_order(linear, {3}).has_value());

    // Frozen values computed from the closed forms:
    //   S1 = (1/2)(1 + b pi^4/5)^2 / D,  S2 = (a^2/8) / D,
    //   D  = a^2/8 + b pi^4/5 + b^2 pi^8/18 + 1/2.
    const BuiltinModel ish1 = IshigamiModelParams{7.0, 0.05};
    CHECK(*analytic_first_order(ish1, {1}) == doctest::Approx(0.21851935).epsilon(1e-5));
    CHECK(*analytic_first_order(ish1, {2}) == doctest::Approx(0.68689577).epsilon(1e-5));
    CHECK(*analytic_first_order(ish1, {3}) == 0.0);

    const BuiltinModel ish2 = IshigamiModelParams{7.0, 0.1};
    CHECK(*analytic_first_order(ish2, {1}) == doctest::Approx(0.31390532).epsilon(1e-5));
    CHECK(*analytic_first_order(ish2, {2}) == doctest::Approx(0.44241127).epsilon(1e-5));
    CHECK(*analytic_first_order(ish2, {3}) == 0.0);
    CHECK_FALSE(analytic_first_order(ish2, {1, 2}).has_value());
}

TEST_CASE("group spec validation and canonical labels") {
    CHECK_THROWS_AS(GroupSpec({{0}}, 2), ValidationError);
    CHECK_THROWS_AS(GroupSpec({{3}}, 2), ValidationError);
    CHECK_THROWS_AS(GroupSpec({{1, 1}}, 2), ValidationError);
    CHECK_THROWS_AS(GroupSpec({}, 2), ValidationError);
    CHECK_THROWS_AS(GroupSpec({{}}, 2), ValidationError);

    const GroupSpec groups({{2, 1}, {3}}, 3);
    CHECK(groups.count() == 2);
    CHECK(groups.label(0) == "1+2");
    CHECK(groups.complement(0) == std::vector<int>{3});
    CHECK(groups.find_complement(1) == 0);

    const GroupSpec parsed = GroupSpec::parse("1;2;1,2", 2);
    CHECK(parsed.count() == 3);
    CHECK(parsed.label(2) == "1+2");
    CHECK(parsed.find_complement(0) == 1);
}

TEST_CASE("custom qoi transforms are applied in place of the model output") {
    const StochasticModel model = builtin_linear(0.0);
    const QoITransform squared = QoITransform::custom(
        [&model](std::span<const double> x, NoiseStream& stream) {
            const double y = model.evaluator(x, stream);
            return y * y;
        });
    BudgetLedger ledger = BudgetLedger::unlimited();
    NoiseStream s = NoiseStream::derive(1, StreamRole::Base, 0, 0, 0, 0);
    const std::vector<double> x{1.0, 1.0};
    CHECK(evaluate_phi(model, squared, x, s, ledger) == 16.0);
    CHECK(ledger.spent() == 1);
}
