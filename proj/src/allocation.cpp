#include "snmc/allocation.hpp"

#include <algorithm>
#include <cmath>

namespace snmc {

std::string rho_mode_label(RhoMode mode) {
    return mode == RhoMode::SquaredDiff ? "squared-diff" : "corrected";
}

RhoMode parse_rho_mode(const std::string& text) {
    if (text == "squared-diff") return RhoMode::SquaredDiff;
    if (text == "corrected") return RhoMode::Corrected;
    throw ValidationError("unknown rho mode '" + text + "' (expected squared-diff or corrected)");
}

RhoEstimate estimate_rho(const std::vector<std::array<double, 2>>& pilot_pairs, RhoMode mode) {
    if (pilot_pairs.empty()) throw ValidationError("rho estimation requires at least one pilot pair");
    double acc = 0.0;
    for (const auto& p : pilot_pairs) {
        const double d = p[0] - p[1];
        acc += d * d;
    }
    RhoEstimate est;
    est.mean_squared_diff = acc / static_cast<double>(pilot_pairs.size());
    est.mode = mode;
    est.r0 = static_cast<std::int64_t>(pilot_pairs.size());
    est.pairs = pilot_pairs;
    return est;
}

double optimal_repetitions_real(double rho, std::int64_t budget) {
    if (budget < 1) throw ValidationError("budget must be >= 1");
    if (rho < 0.0) throw ValidationError("rho must be >= 0");
    return std::cbrt(2.0 * rho * rho) * std::cbrt(static_cast<double>(budget));
}

std::int64_t optimal_repetitions(double rho, std::int64_t budget) {
    const double real = optimal_repetitions_real(rho, budget);
    // nearest, ties up
    const auto rounded = static_cast<std::int64_t>(std::floor(real + 0.5));
    return std::clamp<std::int64_t>(rounded, 1, budget);
}

double trade_off_objective(double kappa, double rho) {
    if (!(kappa > 0.0)) throw ValidationError("kappa must be > 0");
    return kappa + rho * rho / (kappa * kappa);
}

double optimal_kappa(double rho) { return std::cbrt(2.0 * rho * rho); }

std::string Strategy::label() const {
    switch (kind) {
        case Kind::Fixed: return "fixed(" + std::to_string(fixed_m) + ")";
        case Kind::Sqrt: return "sqrt";
        case Kind::Opt: return "opt";
    }
    return "?";
}

Strategy Strategy::parse(const std::string& text) {
    if (text == "sqrt") return sqrt();
    if (text == "opt") return opt();
    if (text.rfind("fixed(", 0) == 0 && text.back() == ')') {
        const std::string inner = text.substr(6, text.size() - 7);
        try {
            std::size_t pos = 0;
            const long long m = std::stoll(inner, &pos);
            if (pos == inner.size() && m >= 1) return fixed(m);
        } catch (const std::exception&) {
        }
    }
    throw ValidationError("unknown strategy '" + text + "' (expected fixed(c), sqrt or opt)");
}

AllocationPlan make_plan(std::int64_t budget, const Strategy& strategy, std::optional<double> rho) {
    if (budget < 1) throw ValidationError("budget must be >= 1");
    AllocationPlan plan;
    plan.budget = budget;
    plan.strategy = strategy;
    switch (strategy.kind) {
        case Strategy::Kind::Fixed:
            if (strategy.fixed_m < 1) throw ValidationError("fixed strategy needs m >= 1");
            plan.m = strategy.fixed_m;
            break;
        case Strategy::Kind::Sqrt:
            plan.m = static_cast<std::int64_t>(
                std::floor(std::sqrt(static_cast<double>(budget)) + 0.5));
            plan.m = std::clamp<std::int64_t>(plan.m, 1, budget);
            break;
        case Strategy::Kind::Opt:
            if (!rho.has_value()) throw ValidationError("opt strategy needs a rho estimate");
            plan.m = optimal_repetitions(*rho, budget);
            plan.rho = rho;
            break;
    }
    if (budget < plan.m) {
        throw ValidationError("budget " + std::to_string(budget) + " is below m = " +
                              std::to_string(plan.m) + "; no explorations would remain");
    }
    plan.n = budget / plan.m;
    return plan;
}

namespace {

// ceil(a / b) for positive integers.
std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

} // namespace

CompletionPlan completion_plan(std::int64_t n, std::int64_t m, std::int64_t r0, std::int64_t l) {
    if (n < 1 || m < 1) throw ValidationError("completion plan: n and m must be >= 1");
    if (r0 < 1) throw ValidationError("completion plan: r0 must be >= 1");
    if (l < 1) throw ValidationError("completion plan: l must be >= 1");

    CompletionPlan plan;
    if (n >= r0) {
        if (m >= 2) {
            plan.new_cells.push_back(CellRange{0, r0, 2, m});
            plan.new_cells.push_back(CellRange{r0, n, 0, m});
            plan.n_adjusted = n;
            plan.m_adjusted = m;
            return plan;
        }
        // m == 1
        const std::int64_t n_adj = n - r0 - ceil_div(r0, l + 1);
        if (n_adj < 1) {
            throw BudgetAlreadyConsumed("completion plan: m = 1 leaves no explorations (n = " +
                                        std::to_string(n) + ", r0 = " + std::to_string(r0) + ")");
        }
        plan.new_cells.push_back(CellRange{r0, n_adj, 0, 1});
        plan.n_adjusted = n_adj;
        plan.m_adjusted = 1;
        return plan;
    }

    // n < r0: the pilot overshot the exploration count; repetitions pay it back.
    const std::int64_t cut = 2 * ceil_div(r0 - n, (l + 1) * n);
    if (m <= 2 + cut) {
        throw BudgetAlreadyConsumed("completion plan: budget already consumed (n = " +
                                    std::to_string(n) + " < r0 = " + std::to_string(r0) +
                                    ", m = " + std::to_string(m) + " <= " +
                                    std::to_string(2 + cut) + ")");
    }
    plan.new_cells.push_back(CellRange{0, n, 2, m - cut});
    plan.n_adjusted = n;
    plan.m_adjusted = m - cut;
    return plan;
}

} // namespace snmc
