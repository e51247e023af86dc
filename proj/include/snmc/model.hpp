#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "snmc/budget.hpp"
#include "snmc/errors.hpp"
#include "snmc/rng.hpp"

namespace snmc {

// ---------------------------------------------------------------------------
// Input space
// ---------------------------------------------------------------------------

struct StandardNormalDist {};

struct UniformDist {
    double a;
    double b;
};

using CoordinateDist = std::variant<StandardNormalDist, UniformDist>;

// Input dimension plus one marginal distribution per coordinate. Coordinates
// are sampled independently; coordinate j consumes only descriptor j.
class InputSpec {
public:
    InputSpec(std::vector<CoordinateDist> coords);

    static InputSpec standard_normal(int dimension);
    static InputSpec uniform(int dimension, double a, double b);

    int dimension() const { return static_cast<int>(coords_.size()); }
    const CoordinateDist& coordinate(int j) const { return coords_.at(static_cast<std::size_t>(j)); }

    std::vector<double> sample(NoiseStream& stream) const;

private:
    std::vector<CoordinateDist> coords_;
};

std::vector<double> sample_input(const InputSpec& spec, NoiseStream& stream);

// ---------------------------------------------------------------------------
// Stochastic models and quantities of interest
// ---------------------------------------------------------------------------

// Y = f(x, Z): the evaluator must be deterministic given (x, stream state) and
// must draw its intrinsic randomness only from the stream argument. Immutable
// after construction, safe to share across workers.
struct StochasticModel {
    InputSpec inputs;
    std::function<double(std::span<const double>, NoiseStream&)> evaluator;
    std::string name;
};

// phi in Q(x) = E[phi(x, Z) | x]. Identity means phi is the model output
// itself; a custom transform supplies its own map built from the model.
// Either way one call costs one budget unit.
struct QoITransform {
    static QoITransform identity() { return QoITransform{}; }
    static QoITransform custom(std::function<double(std::span<const double>, NoiseStream&)> fn) {
        QoITransform q;
        q.fn_ = std::move(fn);
        return q;
    }

    bool is_identity() const { return !fn_; }

    double apply(const StochasticModel& model, std::span<const double> x, NoiseStream& stream) const {
        return fn_ ? fn_(x, stream) : model.evaluator(x, stream);
    }

private:
    std::function<double(std::span<const double>, NoiseStream&)> fn_;
};

// One realization of phi(x, Z). Charges the ledger exactly one unit; nothing
// else in the library charges per-evaluation.
double evaluate_phi(const StochasticModel& model, const QoITransform& qoi,
                    std::span<const double> x, NoiseStream& stream, BudgetLedger& ledger);

// ---------------------------------------------------------------------------
// Built-in benchmark models
// ---------------------------------------------------------------------------

struct LinearModelParams {
    double sigma = 1.0;
};

struct IshigamiModelParams {
    double a = 7.0;
    double b = 0.05;
};

using BuiltinModel = std::variant<LinearModelParams, IshigamiModelParams>;

// f(x1, x2, z) = 1 + x1 + 2*x2 + sigma*z, all inputs standard normal.
// sigma = 0 is accepted as a deterministic test fixture.
StochasticModel builtin_linear(double sigma);

// f(x1, x2, x3, z) = sin(x1) + a*sin^2(x2) + b*x3^4*sin(x1)*z^2,
// x_j ~ U[-pi, pi], z standard normal.
StochasticModel builtin_ishigami(double a, double b);

StochasticModel make_builtin(const BuiltinModel& which);
std::string builtin_label(const BuiltinModel& which);

// Closed-form first-order index for a built-in model and a coordinate group
// (1-based coordinates, sorted). Returns nullopt for combinations without a
// known closed form rather than failing.
std::optional<double> analytic_first_order(const BuiltinModel& which, const std::vector<int>& group);

} // namespace snmc
