#include "snmc/estimators.hpp"

#include <cmath>

namespace snmc {

RepetitionBlock::RepetitionBlock(std::int64_t n, std::int64_t m, std::vector<double> values)
    : n_(n), m_(m), values_(std::move(values)) {
    if (n_ < 1 || m_ < 1) throw ValidationError("repetition block: n and m must be >= 1");
    if (values_.size() != static_cast<std::size_t>(n_ * m_)) {
        throw DimensionMismatch("repetition block: expected " + std::to_string(n_ * m_) +
                                " values, got " + std::to_string(values_.size()));
    }
    row_means_.resize(static_cast<std::size_t>(n_));
    for (std::int64_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (std::int64_t k = 0; k < m_; ++k) acc += value(i, k);
        row_means_[static_cast<std::size_t>(i)] = acc / static_cast<double>(m_);
    }
}

ThetaTriple theta_hat(const RepetitionBlock& base, const RepetitionBlock& frozen) {
    if (base.explorations() != frozen.explorations() || base.repetitions() != frozen.repetitions()) {
        throw DimensionMismatch("theta_hat: base and frozen blocks must have identical shape");
    }
    const std::int64_t n = base.explorations();
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double q = base.row_mean(i);
        const double qf = frozen.row_mean(i);
        s1 += q * q;
        s2 += q;
        s3 += q * qf;
    }
    const double dn = static_cast<double>(n);
    return ThetaTriple{s1 / dn, s2 / dn, s3 / dn};
}

namespace {

double denom_or_throw(const ThetaTriple& t) {
    const double d = t.theta1 - t.theta2 * t.theta2;
    if (d <= kDegenerateTol) {
        throw DegenerateDenominator("index ratio denominator " + std::to_string(d) +
                                    " is at or below tolerance; use the shifted ratio");
    }
    return d;
}

} // namespace

double sobol_ratio(const ThetaTriple& t) {
    const double d = denom_or_throw(t);
    return (t.theta3 - t.theta2 * t.theta2) / d;
}

double sobol_ratio_shifted(const ThetaTriple& t, double h) {
    if (!(h > 0.0) || !(h < 1.0)) throw ValidationError("shift h must lie in (0, 1)");
    const double d = t.theta1 + h - t.theta2 * t.theta2;
    if (d <= 0.0) {
        throw DegenerateDenominator("shifted ratio denominator is not positive");
    }
    return (t.theta3 - t.theta2 * t.theta2) / d;
}

std::array<double, 3> sobol_ratio_gradient(const ThetaTriple& t) {
    const double d = denom_or_throw(t);
    const double num = t.theta3 - t.theta2 * t.theta2;
    const double d2 = d * d;
    return {
        -num / d2,
        2.0 * t.theta2 * (t.theta3 - t.theta1) / d2,
        1.0 / d,
    };
}

std::array<std::array<double, 3>, 3> sobol_ratio_hessian(const ThetaTriple& t) {
    const double d = denom_or_throw(t);
    const double t2 = t.theta2;
    const double d2 = d * d;
    const double d3 = d2 * d;
    const double h11 = 2.0 * (t.theta3 - t2 * t2) / d3;
    const double h12 = 2.0 * t2 * (t.theta1 - 2.0 * t.theta3 + t2 * t2) / d3;
    const double h13 = -1.0 / d2;
    const double h22 = 2.0 * (t.theta3 - t.theta1) * (t.theta1 + 3.0 * t2 * t2) / d3;
    const double h23 = 2.0 * t2 / d2;
    return {{{h11, h12, h13}, {h12, h22, h23}, {h13, h23, 0.0}}};
}

double total_from_complement(const SobolEstimate& s_complement, bool use_raw) {
    if (use_raw) {
        if (!s_complement.raw.has_value()) {
            throw ValidationError("total index: raw requested but the complement's raw value is undefined");
        }
        return 1.0 - *s_complement.raw;
    }
    return 1.0 - s_complement.regularized;
}

double fixed_m_plateau(double s_true, double evar, double vare, std::int64_t m) {
    if (!(vare > 0.0)) throw ValidationError("plateau: vare must be > 0");
    if (evar < 0.0) throw ValidationError("plateau: evar must be >= 0");
    if (m < 1) throw ValidationError("plateau: m must be >= 1");
    return s_true * (1.0 - evar / (evar + static_cast<double>(m) * vare));
}

} // namespace snmc
