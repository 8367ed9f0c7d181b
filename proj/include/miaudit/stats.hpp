#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace miaudit {

namespace special {

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

double normal_cdf(double z);

/// Two-sided p-value of a Student t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

}  // namespace special

enum class TTestKind { pooled, welch };

/// Two-sample comparison: Student's t-test, Cohen's d with pooled standard
/// deviation, and a two-sided Mann-Whitney U test (normal approximation
/// with tie and continuity corrections). mw_u is the U statistic of the
/// high sample, so mw_u / (n_high * n_low) is the probability a high value
/// exceeds a low one (ties counted half).
struct GroupComparison {
    std::string metric_name;
    double mean_high = 0.0;
    double mean_low = 0.0;
    double diff = 0.0;  // mean_high - mean_low
    double t_stat = 0.0;
    double t_p_value = 1.0;
    double cohens_d = 0.0;
    double mw_u = 0.0;
    double mw_p_value = 1.0;
    long n_high = 0;
    long n_low = 0;
};

GroupComparison compare_groups(std::span<const double> values_high,
                               std::span<const double> values_low,
                               const std::string& metric_name = "",
                               TTestKind kind = TTestKind::pooled);

struct MannWhitneyResult {
    double u = 0.0;  // U of the first sample
    double p = 1.0;  // two-sided
};

MannWhitneyResult mann_whitney_u(std::span<const double> x,
                                 std::span<const double> y);

/// Exact two-sided Mann-Whitney p by exhaustive enumeration of group
/// assignments; validation mode for samples of at most 12 each.
double mann_whitney_exact_p(std::span<const double> x,
                            std::span<const double> y);

struct BootstrapCI {
    std::string statistic_name;
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    long resamples = 0;
    std::uint64_t seed = 0;
};

/// Percentile bootstrap CI (2.5/97.5) for the mean of per-item 0/1 flags.
/// Resample i draws from an independent substream of `seed`, so the result
/// is deterministic and independent of execution order.
BootstrapCI bootstrap_rate_ci(std::span<const std::uint8_t> flags,
                              const std::string& statistic_name,
                              long resamples, std::uint64_t seed);

enum class CurveKind { roc, precision_recall };

struct CurvePoint {
    double x = 0.0;
    double y = 0.0;
};

struct CurveResult {
    CurveKind kind = CurveKind::roc;
    std::vector<CurvePoint> points;
    double auc = 0.0;  // trapezoidal rule over the stated points
};

/// Threshold-free curve over all distinct score thresholds. Labels are 1
/// for the positive (low-quality) class; scores must already be oriented
/// so that higher means more likely positive.
CurveResult score_curve(std::span<const double> scores,
                        std::span<const int> labels, CurveKind kind);

/// Linear-interpolation percentile of an unsorted sample, q in [0, 1].
double percentile(std::vector<double> values, double q);

}  // namespace miaudit
