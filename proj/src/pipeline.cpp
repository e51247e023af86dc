#include "snmc/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "snmc/parallel.hpp"

namespace snmc {

void RunSettings::validate() const {
    if (budget < 1) throw ValidationError("run settings: budget T must be >= 1");
    if (r0 < 1) throw ValidationError("run settings: r0 must be >= 1");
    if (budget < 2 * r0) {
        throw BudgetExceeded("run settings: budget T = " + std::to_string(budget) +
                             " cannot cover the pilot (2*r0 = " + std::to_string(2 * r0) + ")");
    }
    if (!(h > 0.0) || !(h < 1.0)) throw ValidationError("run settings: h must lie in (0, 1)");
    if (rho_override && *rho_override < 0.0) {
        throw ValidationError("run settings: rho override must be >= 0");
    }
}

namespace {

NoiseStream design_stream(const RunSettings& s, StreamRole role, std::int64_t i) {
    return NoiseStream::derive(s.seed, role, 0, static_cast<std::uint64_t>(i), 0,
                               static_cast<std::uint64_t>(s.replication));
}

NoiseStream cell_stream(const RunSettings& s, StreamRole role, std::uint32_t group,
                        std::int64_t i, std::int64_t k) {
    return NoiseStream::derive(s.seed, role, group, static_cast<std::uint64_t>(i),
                               static_cast<std::uint64_t>(k),
                               static_cast<std::uint64_t>(s.replication));
}

std::vector<double> base_design_row(const InputSpec& inputs, const RunSettings& s, std::int64_t i) {
    NoiseStream stream = design_stream(s, StreamRole::DesignBase, i);
    return inputs.sample(stream);
}

std::vector<double> frozen_design_row(const InputSpec& inputs, const RunSettings& s, std::int64_t i) {
    NoiseStream stream = design_stream(s, StreamRole::DesignFrozen, i);
    return inputs.sample(stream);
}

} // namespace

PilotData run_pilot(const StochasticModel& model, const QoITransform& qoi, std::int64_t r0,
                    std::uint64_t seed, std::int64_t replication, BudgetLedger& ledger) {
    if (r0 < 1) throw ValidationError("pilot: r0 must be >= 1");
    if (2 * r0 > ledger.capacity() - ledger.spent()) {
        throw BudgetExceeded("pilot: 2*r0 = " + std::to_string(2 * r0) +
                             " exceeds the remaining budget");
    }
    RunSettings key;
    key.seed = seed;
    key.replication = replication;
    PilotData pilot;
    pilot.pairs.reserve(static_cast<std::size_t>(r0));
    for (std::int64_t i = 0; i < r0; ++i) {
        const std::vector<double> x = base_design_row(model.inputs, key, i);
        std::array<double, 2> pair{};
        for (std::int64_t k = 0; k < 2; ++k) {
            NoiseStream stream = cell_stream(key, StreamRole::Base, 0, i, k);
            pair[static_cast<std::size_t>(k)] = evaluate_phi(model, qoi, x, stream, ledger);
        }
        pilot.pairs.push_back(pair);
    }
    return pilot;
}

EstimationResult run_estimation(const StochasticModel& model, const QoITransform& qoi,
                                const GroupSpec& groups, const RunSettings& settings) {
    settings.validate();
    const auto start = std::chrono::steady_clock::now();

    const std::int64_t p = model.inputs.dimension();
    if (groups.dimension() != p) {
        throw DimensionMismatch("group spec dimension " + std::to_string(groups.dimension()) +
                                " does not match model dimension " + std::to_string(p));
    }
    const std::int64_t l = groups.count();
    BudgetLedger ledger(settings.budget * (l + 1));

    // Pilot: base cells (i, 1..2) for i <= r0, reused below, never recomputed.
    const PilotData pilot =
        run_pilot(model, qoi, settings.r0, settings.seed, settings.replication, ledger);
    const RhoEstimate rho = estimate_rho(pilot.pairs, settings.rho_mode);
    const double rho_used = settings.rho_override.value_or(rho.value());

    const AllocationPlan plan = make_plan(settings.budget, settings.strategy,
                                          settings.strategy.kind == Strategy::Kind::Opt
                                              ? std::optional<double>(rho_used)
                                              : std::nullopt);
    const CompletionPlan completion = completion_plan(plan.n, plan.m, settings.r0, l);
    const std::int64_t n_used = completion.n_adjusted;
    const std::int64_t m_used = completion.m_adjusted;

    EvaluationTable table(p, n_used, m_used, l, settings.seed);
    for (std::int64_t i = 0; i < n_used; ++i) {
        const std::vector<double> x = base_design_row(model.inputs, settings, i);
        const std::vector<double> xt = frozen_design_row(model.inputs, settings, i);
        table.set_design(i, x.data(), xt.data());
    }

    // Seed the base branch with the pilot evaluations.
    const std::int64_t pilot_rows = std::min(settings.r0, n_used);
    const std::int64_t pilot_cols = std::min<std::int64_t>(2, m_used);
    for (std::int64_t i = 0; i < pilot_rows; ++i) {
        for (std::int64_t k = 0; k < pilot_cols; ++k) {
            table.fill(EvaluationTable::kBaseBranch, i, k,
                       pilot.pairs[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
        }
    }

    // Complete the base branch. Cells live in preallocated slots and every
    // cell's value depends only on its stream key, so any worker count
    // produces the same table.
    for (const CellRange& range : completion.new_cells) {
        const std::int64_t rows = range.i_end - range.i_begin;
        parallel_for(rows, settings.workers, [&](std::int64_t row) {
            const std::int64_t i = range.i_begin + row;
            const double* x = table.design_base(i);
            for (std::int64_t k = range.k_begin; k < range.k_end; ++k) {
                NoiseStream stream = cell_stream(settings, StreamRole::Base, 0, i, k);
                table.fill(EvaluationTable::kBaseBranch, i, k,
                           evaluate_phi(model, qoi, std::span<const double>(x, static_cast<std::size_t>(p)),
                                        stream, ledger));
            }
        });
    }

    // Frozen branches: group coordinates copied from the base design, the
    // rest taken from the companion design.
    for (std::int64_t j = 0; j < l; ++j) {
        const std::vector<int>& group = groups.group(static_cast<int>(j));
        parallel_for(n_used, settings.workers, [&](std::int64_t i) {
            std::vector<double> point(table.design_frozen(i), table.design_frozen(i) + p);
            const double* x = table.design_base(i);
            for (int c : group) point[static_cast<std::size_t>(c - 1)] = x[c - 1];
            for (std::int64_t k = 0; k < m_used; ++k) {
                NoiseStream stream =
                    cell_stream(settings, StreamRole::Freeze, static_cast<std::uint32_t>(j), i, k);
                table.fill(1 + j, i, k, evaluate_phi(model, qoi, point, stream, ledger));
            }
        });
    }

    // Index estimates; reductions run in a fixed order.
    const RepetitionBlock base(n_used, m_used,
                               table.branch_values(EvaluationTable::kBaseBranch, n_used, m_used));
    EstimationReport report;
    report.model = model.name;
    report.qoi = qoi.is_identity() ? "identity" : "custom";
    report.seed = settings.seed;
    report.replication = settings.replication;
    report.h = settings.h;
    report.rho = rho; // the pilot estimate; plan.rho records the value used
    report.rho_overridden = settings.rho_override.has_value();
    report.plan = plan;
    report.n_used = n_used;
    report.m_used = m_used;
    report.discarded_explorations = settings.budget - n_used;

    for (std::int64_t j = 0; j < l; ++j) {
        const RepetitionBlock frozen(n_used, m_used, table.branch_values(1 + j, n_used, m_used));
        const ThetaTriple theta = theta_hat(base, frozen);
        GroupResult res;
        res.group = groups.label(static_cast<int>(j));
        res.theta = theta;
        res.first_order.group = res.group;
        res.first_order.h = settings.h;
        res.first_order.n = n_used;
        res.first_order.m = m_used;
        try {
            res.first_order.raw = sobol_ratio(theta);
        } catch (const DegenerateDenominator&) {
            res.first_order.raw = std::nullopt;
        }
        res.first_order.regularized = sobol_ratio_shifted(theta, settings.h);
        report.groups.push_back(std::move(res));
    }
    for (std::int64_t j = 0; j < l; ++j) {
        const int comp = groups.find_complement(static_cast<int>(j));
        if (comp < 0) continue;
        auto& res = report.groups[static_cast<std::size_t>(j)];
        const SobolEstimate& other = report.groups[static_cast<std::size_t>(comp)].first_order;
        if (settings.totals_from_raw && !other.raw.has_value()) continue;
        res.total = total_from_complement(other, settings.totals_from_raw);
        res.total_source = other.group;
    }

    report.ledger = LedgerSummary{ledger.capacity(), ledger.spent()};
    report.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return EstimationResult{std::move(report), std::move(table)};
}

} // namespace snmc
