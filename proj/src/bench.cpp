#include "snmc/bench.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "snmc/parallel.hpp"
#include "snmc/rng.hpp"

namespace snmc {

void ExperimentConfig::validate() const {
    if (replications < 2) throw ValidationError("experiment: N must be >= 2");
    if (budget_grid.empty()) throw ValidationError("experiment: budget grid is empty");
    for (std::size_t i = 1; i < budget_grid.size(); ++i) {
        if (budget_grid[i] <= budget_grid[i - 1]) {
            throw ValidationError("experiment: budget grid must be strictly increasing");
        }
    }
    for (std::int64_t t : budget_grid) {
        if (t < 2 * r0) {
            throw ValidationError("experiment: every T must be >= 2*r0");
        }
    }
    if (strategies.empty()) throw ValidationError("experiment: no strategies selected");
    if (groups.empty()) throw ValidationError("experiment: no groups selected");
}

std::uint64_t record_seed(std::uint64_t master_seed, std::size_t budget_index,
                          std::size_t strategy_index, std::int64_t replication) {
    std::uint64_t h = detail::absorb(0x5eedULL, master_seed);
    h = detail::absorb(h, static_cast<std::uint64_t>(budget_index));
    h = detail::absorb(h, static_cast<std::uint64_t>(strategy_index));
    h = detail::absorb(h, static_cast<std::uint64_t>(replication));
    return h;
}

std::vector<ReplicationRecord> run_experiment(const ExperimentConfig& config) {
    config.validate();
    const StochasticModel model = make_builtin(config.model);
    const GroupSpec groups(config.groups, model.inputs.dimension());
    const QoITransform qoi = QoITransform::identity();

    struct Cell {
        std::size_t t_idx;
        std::size_t s_idx;
        std::int64_t rep;
    };
    std::vector<Cell> cells;
    for (std::size_t ti = 0; ti < config.budget_grid.size(); ++ti) {
        for (std::size_t si = 0; si < config.strategies.size(); ++si) {
            for (std::int64_t rep = 0; rep < config.replications; ++rep) {
                cells.push_back(Cell{ti, si, rep});
            }
        }
    }

    const auto l = static_cast<std::size_t>(groups.count());
    std::vector<ReplicationRecord> records(cells.size() * l);
    parallel_for(static_cast<std::int64_t>(cells.size()), config.replication_workers,
                 [&](std::int64_t c) {
                     const Cell& cell = cells[static_cast<std::size_t>(c)];
                     RunSettings settings;
                     settings.budget = config.budget_grid[cell.t_idx];
                     settings.r0 = config.r0;
                     settings.h = config.h;
                     settings.seed = record_seed(config.master_seed, cell.t_idx, cell.s_idx, cell.rep);
                     settings.replication = cell.rep;
                     settings.strategy = config.strategies[cell.s_idx];
                     settings.rho_mode = config.rho_mode;
                     settings.workers = config.fill_workers;
                     std::optional<EstimationResult> result;
                     try {
                         result.emplace(run_estimation(model, qoi, groups, settings));
                     } catch (const Error& e) {
                         throw Error("experiment cell (T=" + std::to_string(settings.budget) +
                                     ", strategy=" + settings.strategy.label() +
                                     ", replication=" + std::to_string(cell.rep) + "): " + e.what());
                     }
                     for (std::size_t g = 0; g < l; ++g) {
                         const GroupResult& gr = result->report.groups[g];
                         ReplicationRecord rec;
                         rec.budget = settings.budget;
                         rec.n = result->report.n_used;
                         rec.m = result->report.m_used;
                         rec.strategy = settings.strategy.label();
                         rec.group = gr.group;
                         rec.replication = cell.rep;
                         rec.raw = gr.first_order.raw;
                         rec.regularized = gr.first_order.regularized;
                         rec.h = settings.h;
                         rec.seed = settings.seed;
                         records[static_cast<std::size_t>(c) * l + g] = std::move(rec);
                     }
                 });
    return records;
}

double quantile_type7(std::vector<double> sorted_values, double prob) {
    if (sorted_values.empty()) throw ValidationError("quantile of an empty sample");
    std::sort(sorted_values.begin(), sorted_values.end());
    const double pos = prob * static_cast<double>(sorted_values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted_values.size() - 1);
    const double frac = pos - std::floor(pos);
    return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

std::vector<StrategySummary> summarize(const std::vector<ReplicationRecord>& records,
                                       const std::map<std::string, double>& truths,
                                       bool use_raw) {
    // Keyed by (T, strategy, group); insertion order follows first appearance.
    std::vector<StrategySummary> out;
    std::map<std::tuple<std::int64_t, std::string, std::string>, std::vector<double>> cells;
    for (const ReplicationRecord& rec : records) {
        double est;
        if (use_raw) {
            if (!rec.raw.has_value()) {
                throw ValidationError("summarize: record (T=" + std::to_string(rec.budget) +
                                      ", group=" + rec.group + ") has no raw estimate");
            }
            est = *rec.raw;
        } else {
            est = rec.regularized;
        }
        cells[{rec.budget, rec.strategy, rec.group}].push_back(est);
    }
    for (const auto& [key, values] : cells) {
        const auto& [budget, strategy, group] = key;
        const auto truth_it = truths.find(group);
        if (truth_it == truths.end()) {
            throw ValidationError("summarize: no analytic truth for group " + group);
        }
        const double truth = truth_it->second;
        const auto n = static_cast<double>(values.size());
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= n;
        double var = 0.0, mse = 0.0;
        for (double v : values) {
            var += (v - mean) * (v - mean);
            mse += (v - truth) * (v - truth);
        }
        var = values.size() > 1 ? var / (n - 1.0) : 0.0;
        mse /= n;
        StrategySummary s;
        s.budget = budget;
        s.strategy = strategy;
        s.group = group;
        s.replications = static_cast<std::int64_t>(values.size());
        s.bias = mean - truth;
        s.variance = var;
        s.mse = mse;
        s.q1 = quantile_type7(values, 0.25);
        s.median = quantile_type7(values, 0.50);
        s.q3 = quantile_type7(values, 0.75);
        out.push_back(std::move(s));
    }
    return out;
}

double rate_fit(const std::vector<std::pair<std::int64_t, double>>& mse_by_budget) {
    if (mse_by_budget.size() < 3) {
        throw ValidationError("rate fit needs at least 3 grid points");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [budget, mse] : mse_by_budget) {
        if (!(mse > 0.0)) throw ValidationError("rate fit needs positive MSE values");
        const double x = std::log(static_cast<double>(budget));
        const double y = std::log(mse);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const auto n = static_cast<double>(mse_by_budget.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace snmc
