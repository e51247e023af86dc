#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snmc/errors.hpp"

namespace snmc {

// All phi evaluations of one estimation run, indexed by branch (base plus one
// frozen branch per group), exploration row and repetition column, together
// with the input designs. Cells are written at most once; the fill mask
// records which cells hold a value.
//
// File format (little-endian):
//   magic  "SNMC1"
//   u32 p, u64 n, u64 m, u32 l, u64 seed, u32 branch_count (= l + 1)
//   design X:  n*p doubles, row-major
//   design X~: n*p doubles, row-major
//   per branch: n*m doubles (row-major), then ceil(n*m/8) mask bytes
//   u64 FNV-1a checksum of every preceding byte
class EvaluationTable {
public:
    EvaluationTable(std::int64_t p, std::int64_t n, std::int64_t m, std::int64_t l,
                    std::uint64_t seed);

    std::int64_t dimension() const { return p_; }
    std::int64_t explorations() const { return n_; }
    std::int64_t repetitions() const { return m_; }
    std::int64_t group_count() const { return l_; }
    std::int64_t branch_count() const { return l_ + 1; }
    std::uint64_t seed() const { return seed_; }

    // branch 0 is the base branch; branch 1 + j is the frozen branch of group j.
    static constexpr std::int64_t kBaseBranch = 0;

    void set_design(std::int64_t i, const double* x, const double* x_frozen);
    const double* design_base(std::int64_t i) const;
    const double* design_frozen(std::int64_t i) const;

    void fill(std::int64_t branch, std::int64_t i, std::int64_t k, double value);
    bool filled(std::int64_t branch, std::int64_t i, std::int64_t k) const;
    double value(std::int64_t branch, std::int64_t i, std::int64_t k) const;

    std::int64_t filled_count() const;

    // Values of one branch restricted to the leading rows x cols rectangle,
    // row-major; every requested cell must be filled.
    std::vector<double> branch_values(std::int64_t branch, std::int64_t rows,
                                      std::int64_t cols) const;

    bool operator==(const EvaluationTable& other) const;

private:
    void check_cell(std::int64_t branch, std::int64_t i, std::int64_t k) const;
    std::size_t cell_index(std::int64_t i, std::int64_t k) const {
        return static_cast<std::size_t>(i * m_ + k);
    }

    std::int64_t p_, n_, m_, l_;
    std::uint64_t seed_;
    std::vector<double> design_x_;      // n x p
    std::vector<double> design_xt_;     // n x p
    std::vector<std::vector<double>> values_;       // per branch, n x m
    std::vector<std::vector<std::uint8_t>> masks_;  // per branch, bit per cell

    friend void save_table(const EvaluationTable&, const std::string&);
    friend EvaluationTable load_table(const std::string&);
};

void save_table(const EvaluationTable& table, const std::string& path);
EvaluationTable load_table(const std::string& path);

// Guards a loaded table against a run with different shape expectations.
void require_table_shape(const EvaluationTable& table, std::int64_t p,
                         std::optional<std::int64_t> n = std::nullopt,
                         std::optional<std::int64_t> m = std::nullopt,
                         std::optional<std::int64_t> l = std::nullopt);

} // namespace snmc
