#include "snmc/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <json.hpp>

#include "snmc/version.hpp"

namespace snmc {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string provenance_line(const std::string& config_json) {
    return "# snmc " + std::string(kVersion) + " | config " + config_json;
}

void write_records_csv(std::ostream& out, const std::vector<ReplicationRecord>& records,
                       const std::string& provenance) {
    if (!provenance.empty()) out << provenance << "\n";
    out << "T,n,m,strategy,group,replication,estimate_raw,estimate_reg,h,seed\n";
    for (const ReplicationRecord& r : records) {
        out << r.budget << ',' << r.n << ',' << r.m << ',' << r.strategy << ',' << r.group << ','
            << r.replication << ',' << (r.raw ? format_double(*r.raw) : std::string()) << ','
            << format_double(r.regularized) << ',' << format_double(r.h) << ',' << r.seed << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<StrategySummary>& summaries,
                       const std::string& provenance) {
    if (!provenance.empty()) out << provenance << "\n";
    out << "T,strategy,group,bias,variance,mse,q1,median,q3\n";
    for (const StrategySummary& s : summaries) {
        out << s.budget << ',' << s.strategy << ',' << s.group << ',' << format_double(s.bias)
            << ',' << format_double(s.variance) << ',' << format_double(s.mse) << ','
            << format_double(s.q1) << ',' << format_double(s.median) << ',' << format_double(s.q3)
            << '\n';
    }
}

std::string report_to_json(const EstimationReport& report) {
    nlohmann::ordered_json j;
    j["tool"] = "snmc";
    j["version"] = kVersion;
    j["model"] = report.model;
    j["qoi"] = report.qoi;
    j["seed"] = report.seed;
    j["replication"] = report.replication;
    j["h"] = report.h;
    j["rho"] = {
        {"mean_squared_diff", report.rho.mean_squared_diff},
        {"mode", rho_mode_label(report.rho.mode)},
        {"value_used", report.plan.rho ? *report.plan.rho : report.rho.value()},
        {"r0", report.rho.r0},
        {"overridden", report.rho_overridden},
    };
    j["plan"] = {
        {"T", report.plan.budget},
        {"strategy", report.plan.strategy.label()},
        {"m", report.plan.m},
        {"n", report.plan.n},
    };
    j["n_used"] = report.n_used;
    j["m_used"] = report.m_used;
    j["discarded_explorations"] = report.discarded_explorations;
    j["budget"] = {
        {"capacity", report.ledger.capacity},
        {"spent", report.ledger.spent},
    };
    j["groups"] = nlohmann::ordered_json::array();
    for (const GroupResult& g : report.groups) {
        nlohmann::ordered_json item;
        item["group"] = g.group;
        if (g.first_order.raw) {
            item["first_order_raw"] = *g.first_order.raw;
        } else {
            item["first_order_raw"] = nullptr;
        }
        item["first_order_reg"] = g.first_order.regularized;
        item["theta"] = {g.theta.theta1, g.theta.theta2, g.theta.theta3};
        if (g.total) {
            item["total"] = *g.total;
            item["total_from"] = *g.total_source;
        } else {
            item["total"] = nullptr;
        }
        j["groups"].push_back(std::move(item));
    }
    return j.dump(2) + "\n";
}

void write_report_csv(std::ostream& out, const EstimationReport& report,
                      const std::string& provenance) {
    std::vector<ReplicationRecord> rows;
    for (const GroupResult& g : report.groups) {
        ReplicationRecord r;
        r.budget = report.plan.budget;
        r.n = report.n_used;
        r.m = report.m_used;
        r.strategy = report.plan.strategy.label();
        r.group = g.group;
        r.replication = report.replication;
        r.raw = g.first_order.raw;
        r.regularized = g.first_order.regularized;
        r.h = report.h;
        r.seed = report.seed;
        rows.push_back(std::move(r));
    }
    write_records_csv(out, rows, provenance);
}

// ---------------------------------------------------------------------------
// SVG boxplots
// ---------------------------------------------------------------------------

namespace {

struct Box {
    double lo, q1, med, q3, hi;
};

std::string color_for(const std::string& strategy) {
    if (strategy.rfind("fixed", 0) == 0) return "#d62728";
    if (strategy == "opt") return "#2ca02c";
    return "#1f77b4";
}

} // namespace

void write_boxplot_svg(std::ostream& out, const std::vector<ReplicationRecord>& records,
                       const std::map<std::string, double>& truths) {
    std::vector<std::string> groups;
    std::vector<std::int64_t> budgets;
    std::vector<std::string> strategies;
    for (const auto& r : records) {
        if (std::find(groups.begin(), groups.end(), r.group) == groups.end()) groups.push_back(r.group);
        if (std::find(budgets.begin(), budgets.end(), r.budget) == budgets.end()) budgets.push_back(r.budget);
        if (std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end()) {
            strategies.push_back(r.strategy);
        }
    }
    std::sort(budgets.begin(), budgets.end());

    const double panel_w = 560.0, panel_h = 220.0, margin = 48.0, gap = 30.0;
    const double width = panel_w + 2 * margin;
    const double height = margin + groups.size() * (panel_h + gap);

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<style>text{font-family:sans-serif;font-size:11px}</style>\n";

    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const std::string& group = groups[gi];
        const double top = margin / 2 + gi * (panel_h + gap);

        // Collect boxes and the y-range of this panel.
        std::map<std::pair<std::int64_t, std::string>, Box> boxes;
        double ymin = 0.0, ymax = 1.0;
        const auto truth_it = truths.find(group);
        if (truth_it != truths.end()) {
            ymin = std::min(ymin, truth_it->second);
            ymax = std::max(ymax, truth_it->second);
        }
        for (std::int64_t b : budgets) {
            for (const std::string& s : strategies) {
                std::vector<double> vals;
                for (const auto& r : records) {
                    if (r.group == group && r.budget == b && r.strategy == s) {
                        vals.push_back(r.regularized);
                    }
                }
                if (vals.empty()) continue;
                std::sort(vals.begin(), vals.end());
                Box box{vals.front(), quantile_type7(vals, 0.25), quantile_type7(vals, 0.5),
                        quantile_type7(vals, 0.75), vals.back()};
                ymin = std::min(ymin, box.lo);
                ymax = std::max(ymax, box.hi);
                boxes[{b, s}] = box;
            }
        }
        const double pad = 0.05 * (ymax - ymin + 1e-12);
        ymin -= pad;
        ymax += pad;
        const auto ypix = [&](double v) {
            return top + panel_h - (v - ymin) / (ymax - ymin) * panel_h;
        };

        out << "<g class=\"panel\" data-group=\"" << group << "\">\n";
        out << "<rect x=\"" << margin << "\" y=\"" << top << "\" width=\"" << panel_w
            << "\" height=\"" << panel_h << "\" fill=\"none\" stroke=\"#999\"/>\n";
        out << "<text x=\"" << margin << "\" y=\"" << top - 6 << "\">group " << group
            << "</text>\n";

        const double slot_w = panel_w / static_cast<double>(budgets.size());
        const double box_w = std::min(18.0, slot_w / (strategies.size() + 1.5));
        for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
            const double slot_x = margin + slot_w * (static_cast<double>(bi) + 0.5);
            out << "<text x=\"" << slot_x - 14 << "\" y=\"" << top + panel_h + 14 << "\">T=1e"
                << static_cast<int>(std::lround(std::log10(static_cast<double>(budgets[bi]))))
                << "</text>\n";
            for (std::size_t si = 0; si < strategies.size(); ++si) {
                const auto it = boxes.find({budgets[bi], strategies[si]});
                if (it == boxes.end()) continue;
                const Box& box = it->second;
                const double cx = slot_x + box_w * 1.2 * (static_cast<double>(si) -
                                                          (strategies.size() - 1) / 2.0);
                const std::string color = color_for(strategies[si]);
                out << "<line x1=\"" << cx << "\" y1=\"" << ypix(box.lo) << "\" x2=\"" << cx
                    << "\" y2=\"" << ypix(box.hi) << "\" stroke=\"" << color << "\"/>\n";
                out << "<rect x=\"" << cx - box_w / 2 << "\" y=\"" << ypix(box.q3) << "\" width=\""
                    << box_w << "\" height=\"" << std::max(0.5, ypix(box.q1) - ypix(box.q3))
                    << "\" fill=\"" << color << "\" fill-opacity=\"0.35\" stroke=\"" << color
                    << "\"/>\n";
                out << "<line x1=\"" << cx - box_w / 2 << "\" y1=\"" << ypix(box.med) << "\" x2=\""
                    << cx + box_w / 2 << "\" y2=\"" << ypix(box.med) << "\" stroke=\"" << color
                    << "\" stroke-width=\"2\"/>\n";
            }
        }
        if (truth_it != truths.end()) {
            out << "<line x1=\"" << margin << "\" y1=\"" << ypix(truth_it->second) << "\" x2=\""
                << margin + panel_w << "\" y2=\"" << ypix(truth_it->second)
                << "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\n";
        }
        out << "</g>\n";
    }

    // Legend
    double lx = margin;
    for (const std::string& s : strategies) {
        out << "<rect x=\"" << lx << "\" y=\"" << height - 16 << "\" width=\"10\" height=\"10\" fill=\""
            << color_for(s) << "\"/>\n";
        out << "<text x=\"" << lx + 14 << "\" y=\"" << height - 7 << "\">" << s << "</text>\n";
        lx += 90;
    }
    out << "</svg>\n";
}

} // namespace snmc
