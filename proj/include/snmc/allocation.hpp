#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snmc/errors.hpp"

namespace snmc {

// The intrinsic-noise magnitude is estimated as the mean squared difference of
// paired evaluations at shared inputs. SquaredDiff plugs that mean straight
// into the repetition formula; Corrected halves it, since the squared
// difference averages to twice the conditional variance. Both keep the same
// budget growth rate, only the multiplier changes.
enum class RhoMode {
    SquaredDiff,
    Corrected,
};

std::string rho_mode_label(RhoMode mode);
RhoMode parse_rho_mode(const std::string& text);

struct RhoEstimate {
    double mean_squared_diff = 0.0; // mean of (phi - phi')^2 over the pilot pairs
    RhoMode mode = RhoMode::SquaredDiff;
    std::int64_t r0 = 0;
    std::vector<std::array<double, 2>> pairs; // retained for reuse as base cells

    double value() const {
        return mode == RhoMode::SquaredDiff ? mean_squared_diff : 0.5 * mean_squared_diff;
    }
};

RhoEstimate estimate_rho(const std::vector<std::array<double, 2>>& pilot_pairs, RhoMode mode);

// Repetition count minimizing the exploration/repetition trade-off:
// (2 rho^2)^(1/3) * T^(1/3), rounded to nearest (ties up), clamped to [1, T].
std::int64_t optimal_repetitions(double rho, std::int64_t budget);

// Pre-rounding value of the same formula, for display.
double optimal_repetitions_real(double rho, std::int64_t budget);

// The surrogate objective kappa + rho^2 / kappa^2 (common factor T^(-2/3)
// dropped); minimized at kappa = (2 rho^2)^(1/3).
double trade_off_objective(double kappa, double rho);
double optimal_kappa(double rho);

// ---------------------------------------------------------------------------
// Allocation strategies
// ---------------------------------------------------------------------------

struct Strategy {
    enum class Kind { Fixed, Sqrt, Opt };

    Kind kind = Kind::Opt;
    std::int64_t fixed_m = 5;

    static Strategy fixed(std::int64_t m) { return Strategy{Kind::Fixed, m}; }
    static Strategy sqrt() { return Strategy{Kind::Sqrt, 0}; }
    static Strategy opt() { return Strategy{Kind::Opt, 0}; }

    // "fixed(5)", "sqrt", "opt"
    std::string label() const;
    static Strategy parse(const std::string& text);

    bool operator==(const Strategy&) const = default;
};

struct AllocationPlan {
    std::int64_t budget = 0; // per-branch budget T
    std::int64_t m = 1;      // repetitions
    std::int64_t n = 1;      // explorations
    Strategy strategy;
    std::optional<double> rho; // present for the opt strategy
};

// n = floor(T / m) with m from the strategy. Throws when T < m (n would be 0).
AllocationPlan make_plan(std::int64_t budget, const Strategy& strategy,
                         std::optional<double> rho = std::nullopt);

// ---------------------------------------------------------------------------
// Completion of base-branch evaluations around an existing pilot
// ---------------------------------------------------------------------------

// Half-open cell rectangle, 0-based: explorations [i_begin, i_end) times
// repetitions [k_begin, k_end).
struct CellRange {
    std::int64_t i_begin = 0;
    std::int64_t i_end = 0;
    std::int64_t k_begin = 0;
    std::int64_t k_end = 0;

    std::int64_t count() const {
        const std::int64_t rows = i_end > i_begin ? i_end - i_begin : 0;
        const std::int64_t cols = k_end > k_begin ? k_end - k_begin : 0;
        return rows * cols;
    }
};

struct CompletionPlan {
    std::vector<CellRange> new_cells;
    std::int64_t n_adjusted = 0;
    std::int64_t m_adjusted = 0;

    std::int64_t new_cell_count() const {
        std::int64_t total = 0;
        for (const auto& r : new_cells) total += r.count();
        return total;
    }
};

// Plans the base-branch cells still to evaluate given a pilot of r0
// explorations x 2 repetitions, following the published case split verbatim:
//   n >= r0, m >= 2: top up pilot rows to m repetitions, then full new rows;
//                    n and m unchanged.
//   n >= r0, m == 1: only rows r0+1 .. n - r0 - ceil(r0/(l+1)), which becomes
//                    the adjusted n.
//   n <  r0, m  >  2 + 2*ceil((1/(l+1))(r0/n - 1)): keep n, reduce m by
//                    2*ceil((1/(l+1))(r0/n - 1)).
//   n <  r0, otherwise: the pilot already consumed the budget.
// The arithmetic is not re-derived here; the run ledger is the safety net.
CompletionPlan completion_plan(std::int64_t n, std::int64_t m, std::int64_t r0, std::int64_t l);

} // namespace snmc
