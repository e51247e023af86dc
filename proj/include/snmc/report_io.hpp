#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "snmc/bench.hpp"
#include "snmc/pipeline.hpp"

namespace snmc {

// Shortest round-trip decimal form of a double (CSV and protocol payloads).
std::string format_double(double v);

// One-line provenance comment written at the top of every output file so a
// row can be traced back to the exact configuration that produced it. No
// timestamps and no execution details: reruns yield identical bytes.
std::string provenance_line(const std::string& config_json);

// Header: T,n,m,strategy,group,replication,estimate_raw,estimate_reg,h,seed
// An undefined raw estimate becomes an empty field.
void write_records_csv(std::ostream& out, const std::vector<ReplicationRecord>& records,
                       const std::string& provenance);

// Header: T,strategy,group,bias,variance,mse,q1,median,q3
void write_summary_csv(std::ostream& out, const std::vector<StrategySummary>& summaries,
                       const std::string& provenance);

// Estimation report as deterministic JSON (wall clock excluded).
std::string report_to_json(const EstimationReport& report);

// The estimate subcommand's per-group CSV rows (records schema, replication
// taken from the report).
void write_report_csv(std::ostream& out, const EstimationReport& report,
                      const std::string& provenance);

// Boxplot panels, one per group: quartile boxes with min/max whiskers per
// (T, strategy), strategies color-coded, the analytic truth as a dashed line.
void write_boxplot_svg(std::ostream& out, const std::vector<ReplicationRecord>& records,
                       const std::map<std::string, double>& truths);

} // namespace snmc
