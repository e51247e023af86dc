#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snmc/allocation.hpp"
#include "snmc/budget.hpp"
#include "snmc/estimators.hpp"
#include "snmc/groups.hpp"
#include "snmc/model.hpp"
#include "snmc/table.hpp"

namespace snmc {

struct RunSettings {
    std::int64_t budget = 10000; // per-branch budget T
    std::int64_t r0 = 10;
    double h = 1e-2;
    std::uint64_t seed = 0;
    std::int64_t replication = 0;
    Strategy strategy = Strategy::opt();
    RhoMode rho_mode = RhoMode::SquaredDiff;
    // When set, the pilot still runs (its evaluations are reused as base
    // cells) but the allocation uses this value instead of the pilot estimate.
    std::optional<double> rho_override;
    int workers = 1; // evaluation-fill workers; <= 0 means hardware count
    bool totals_from_raw = false;

    void validate() const;
};

struct GroupResult {
    std::string group;
    SobolEstimate first_order;
    ThetaTriple theta;
    // Total index, available when the complement of this group is itself in
    // the group list; total_source names that complement group.
    std::optional<double> total;
    std::optional<std::string> total_source;
};

struct LedgerSummary {
    std::int64_t capacity = 0;
    std::int64_t spent = 0;
};

struct EstimationReport {
    std::string model;
    std::string qoi;
    std::uint64_t seed = 0;
    std::int64_t replication = 0;
    double h = 0.0;
    RhoEstimate rho;
    bool rho_overridden = false;
    AllocationPlan plan;
    std::int64_t n_used = 0; // explorations after completion adjustment
    std::int64_t m_used = 0; // repetitions after completion adjustment
    std::int64_t discarded_explorations = 0; // budgeted draws never consumed
    std::vector<GroupResult> groups;
    LedgerSummary ledger;
    double wall_clock_s = 0.0; // informational; never serialized
};

struct EstimationResult {
    EstimationReport report;
    EvaluationTable table;
};

struct PilotData {
    std::vector<std::array<double, 2>> pairs;
};

// Evaluates the r0 x 2 pilot grid (base-branch cells (i, 1..2)) and charges
// 2*r0 units.
PilotData run_pilot(const StochasticModel& model, const QoITransform& qoi, std::int64_t r0,
                    std::uint64_t seed, std::int64_t replication, BudgetLedger& ledger);

// Full estimation: pilot, intrinsic-noise estimate, allocation, completion of
// the base branch, one frozen branch per group, then the index estimates. At
// most T*(l+1) evaluations, pilot included.
EstimationResult run_estimation(const StochasticModel& model, const QoITransform& qoi,
                                const GroupSpec& groups, const RunSettings& settings);

} // namespace snmc
