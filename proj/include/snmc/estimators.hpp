#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snmc/errors.hpp"

namespace snmc {

// The three pick-freeze moments feeding the index ratio: mean of squared base
// row-means, mean of base row-means, mean of base x frozen row-mean products.
struct ThetaTriple {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double theta3 = 0.0;
};

// Below this the empirical output variance is treated as zero and the raw
// ratio is reported undefined instead of a huge number.
inline constexpr double kDegenerateTol = 1e-30;

// n explorations x m repetitions of phi values with cached row means.
// Accumulation order is fixed (left to right within a row, ascending rows in
// the moment sums) so results do not depend on how the cells were filled.
class RepetitionBlock {
public:
    RepetitionBlock(std::int64_t n, std::int64_t m, std::vector<double> values);

    std::int64_t explorations() const { return n_; }
    std::int64_t repetitions() const { return m_; }
    double value(std::int64_t i, std::int64_t k) const {
        return values_[static_cast<std::size_t>(i * m_ + k)];
    }
    double row_mean(std::int64_t i) const { return row_means_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& row_means() const { return row_means_; }

private:
    std::int64_t n_;
    std::int64_t m_;
    std::vector<double> values_;
    std::vector<double> row_means_;
};

ThetaTriple theta_hat(const RepetitionBlock& base, const RepetitionBlock& frozen);

// (theta3 - theta2^2) / (theta1 - theta2^2). Throws DegenerateDenominator when
// the denominator is at or below kDegenerateTol.
double sobol_ratio(const ThetaTriple& t);

// Shifted ratio: the denominator gains h, which bounds it away from the
// degenerate region. h must lie in (0, 1).
double sobol_ratio_shifted(const ThetaTriple& t, double h);

// Partial derivatives of the ratio at t, same degeneracy rule.
std::array<double, 3> sobol_ratio_gradient(const ThetaTriple& t);

// Second derivatives, symmetric, entry (3,3) identically zero.
std::array<std::array<double, 3>, 3> sobol_ratio_hessian(const ThetaTriple& t);

// One estimated index: raw ratio (absent when degenerate) plus the shifted
// value, with the sample sizes that produced them.
struct SobolEstimate {
    std::string group;
    std::optional<double> raw;
    double regularized = 0.0;
    double h = 0.0;
    std::int64_t n = 0;
    std::int64_t m = 0;
};

// Total index of u from the first-order index of its complement: 1 - S_{~u}.
// use_raw selects which value of the complement estimate to subtract.
double total_from_complement(const SobolEstimate& s_complement, bool use_raw);

// Large-n limit of the index estimate when m is held fixed:
// s_true * [1 - evar / (evar + m * vare)], with evar the mean conditional
// variance of phi given the inputs and vare the variance of the conditional
// mean. Diagnostic for fixed-m bias floors.
double fixed_m_plateau(double s_true, double evar, double vare, std::int64_t m);

} // namespace snmc
