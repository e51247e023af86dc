#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "snmc/allocation.hpp"
#include "snmc/groups.hpp"
#include "snmc/model.hpp"
#include "snmc/pipeline.hpp"

namespace snmc {

// Desk-scale replication study: every (T, strategy, replication) cell runs an
// independent full estimation, fresh pilot included.
struct ExperimentConfig {
    BuiltinModel model = LinearModelParams{1.0};
    std::vector<std::vector<int>> groups;
    std::vector<std::int64_t> budget_grid = {1000, 10000, 100000};
    std::vector<Strategy> strategies = {Strategy::fixed(5), Strategy::sqrt(), Strategy::opt()};
    std::int64_t replications = 30;
    std::int64_t r0 = 10;
    double h = 1e-2;
    std::uint64_t master_seed = 0;
    RhoMode rho_mode = RhoMode::SquaredDiff;
    int fill_workers = 1;        // workers inside each estimation
    int replication_workers = 0; // parallel estimation runs; <= 0 means hardware count

    void validate() const;
};

struct ReplicationRecord {
    std::int64_t budget = 0;
    std::int64_t n = 0;
    std::int64_t m = 0;
    std::string strategy;
    std::string group;
    std::int64_t replication = 0;
    std::optional<double> raw;
    double regularized = 0.0;
    double h = 0.0;
    std::uint64_t seed = 0;
};

// Seed of one experiment cell, derived from the master seed and the cell
// coordinates so replications are mutually independent.
std::uint64_t record_seed(std::uint64_t master_seed, std::size_t budget_index,
                          std::size_t strategy_index, std::int64_t replication);

std::vector<ReplicationRecord> run_experiment(const ExperimentConfig& config);

struct StrategySummary {
    std::int64_t budget = 0;
    std::string strategy;
    std::string group;
    std::int64_t replications = 0;
    double bias = 0.0;
    double variance = 0.0; // divisor N-1
    double mse = 0.0;      // mean squared deviation from the analytic truth
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

// Aggregates records per (T, strategy, group) against the analytic truths.
// use_raw selects which estimate column is summarized; a record with an
// undefined raw value cannot be summarized that way.
std::vector<StrategySummary> summarize(const std::vector<ReplicationRecord>& records,
                                       const std::map<std::string, double>& truths,
                                       bool use_raw = false);

// Least-squares slope of log(mse) against log(T); needs >= 3 positive points.
double rate_fit(const std::vector<std::pair<std::int64_t, double>>& mse_by_budget);

// Interpolating sample quantile (the common "type 7" definition).
double quantile_type7(std::vector<double> sorted_values, double prob);

} // namespace snmc
