#include "snmc/model.hpp"

#include <cmath>

namespace snmc {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

InputSpec::InputSpec(std::vector<CoordinateDist> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw ValidationError("input dimension must be >= 1");
    for (const auto& c : coords_) {
        if (const auto* u = std::get_if<UniformDist>(&c)) {
            if (!(u->a < u->b)) {
                throw ValidationError("uniform bounds require a < b");
            }
        }
    }
}

InputSpec InputSpec::standard_normal(int dimension) {
    if (dimension < 1) throw ValidationError("input dimension must be >= 1");
    return InputSpec(std::vector<CoordinateDist>(static_cast<std::size_t>(dimension),
                                                 StandardNormalDist{}));
}

InputSpec InputSpec::uniform(int dimension, double a, double b) {
    if (dimension < 1) throw ValidationError("input dimension must be >= 1");
    return InputSpec(std::vector<CoordinateDist>(static_cast<std::size_t>(dimension),
                                                 UniformDist{a, b}));
}

std::vector<double> InputSpec::sample(NoiseStream& stream) const {
    std::vector<double> x(coords_.size());
    for (std::size_t j = 0; j < coords_.size(); ++j) {
        x[j] = std::visit(
            [&stream](const auto& dist) -> double {
                using T = std::decay_t<decltype(dist)>;
                if constexpr (std::is_same_v<T, StandardNormalDist>) {
                    return stream.next_normal();
                } else {
                    return stream.next_uniform(dist.a, dist.b);
                }
            },
            coords_[j]);
    }
    return x;
}

std::vector<double> sample_input(const InputSpec& spec, NoiseStream& stream) {
    return spec.sample(stream);
}

double evaluate_phi(const StochasticModel& model, const QoITransform& qoi,
                    std::span<const double> x, NoiseStream& stream, BudgetLedger& ledger) {
    if (static_cast<int>(x.size()) != model.inputs.dimension()) {
        throw DimensionMismatch("evaluate_phi: point has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(model.inputs.dimension()));
    }
    ledger.charge(1);
    return qoi.apply(model, x, stream);
}

StochasticModel builtin_linear(double sigma) {
    if (sigma < 0.0) throw ValidationError("linear model: sigma must be >= 0");
    StochasticModel m{
        InputSpec::standard_normal(2),
        [sigma](std::span<const double> x, NoiseStream& stream) {
            return 1.0 + x[0] + 2.0 * x[1] + sigma * stream.next_normal();
        },
        "linear(sigma=" + std::to_string(sigma) + ")",
    };
    return m;
}

StochasticModel builtin_ishigami(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("ishigami model: a and b must be > 0");
    StochasticModel m{
        InputSpec::uniform(3, -kPi, kPi),
        [a, b](std::span<const double> x, NoiseStream& stream) {
            const double s1 = std::sin(x[0]);
            const double s2 = std::sin(x[1]);
            const double z = stream.next_normal();
            const double x3sq = x[2] * x[2];
            return s1 + a * s2 * s2 + b * x3sq * x3sq * s1 * z * z;
        },
        "ishigami(a=" + std::to_string(a) + ",b=" + std::to_string(b) + ")",
    };
    return m;
}

StochasticModel make_builtin(const BuiltinModel& which) {
    return std::visit(
        [](const auto& p) -> StochasticModel {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LinearModelParams>) {
                return builtin_linear(p.sigma);
            } else {
                return builtin_ishigami(p.a, p.b);
            }
        },
        which);
}

std::string builtin_label(const BuiltinModel& which) {
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LinearModelParams>) {
                return "linear(sigma=" + std::to_string(p.sigma) + ")";
            } else {
                return "ishigami(a=" + std::to_string(p.a) + ",b=" + std::to_string(p.b) + ")";
            }
        },
        which);
}

std::optional<double> analytic_first_order(const BuiltinModel& which, const std::vector<int>& group) {
    if (const auto* lin = std::get_if<LinearModelParams>(&which)) {
        (void)lin; // indices do not depend on sigma
        if (group == std::vector<int>{1}) return 1.0 / 5.0;
        if (group == std::vector<int>{2}) return 4.0 / 5.0;
        if (group == std::vector<int>{1, 2}) return 1.0;
        return std::nullopt;
    }
    const auto& ish = std::get<IshigamiModelParams>(which);
    const double a = ish.a;
    const double b = ish.b;
    const double pi4 = kPi * kPi * kPi * kPi;
    const double pi8 = pi4 * pi4;
    const double var_q = a * a / 8.0 + b * pi4 / 5.0 + b * b * pi8 / 18.0 + 0.5;
    if (group == std::vector<int>{1}) {
        const double c = 1.0 + b * pi4 / 5.0;
        return 0.5 * c * c / var_q;
    }
    if (group == std::vector<int>{2}) return (a * a / 8.0) / var_q;
    if (group == std::vector<int>{3}) return 0.0;
    return std::nullopt;
}

} // namespace snmc
