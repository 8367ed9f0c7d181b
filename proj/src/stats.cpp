#include "miaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "miaudit/common.hpp"
#include "miaudit/rng.hpp"

namespace miaudit {

namespace special {

namespace {

// Continued fraction for the incomplete beta function (Lentz's method).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14;
    constexpr double kFpMin = 1e-300;

    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                   a * std::log(x) + b * std::log(1.0 - x);
    double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double student_t_two_sided_p(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    double x = df / (df + t * t);
    return incomplete_beta(df / 2.0, 0.5, x);
}

}  // namespace special

namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) /
           static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
    double ss = 0.0;
    for (double value : v) ss += (value - mean) * (value - mean);
    return ss / static_cast<double>(v.size() - 1);
}

// Midranks of the pooled sample; first n1 entries are x's ranks. Also
// returns the tie-correction term sum(t^3 - t).
struct RankInfo {
    std::vector<double> ranks;
    double tie_term = 0.0;
};

RankInfo midranks(std::span<const double> x, std::span<const double> y) {
    std::size_t n = x.size() + y.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto value_at = [&](std::size_t i) {
        return i < x.size() ? x[i] : y[i - x.size()];
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return value_at(a) < value_at(b);
    });

    RankInfo info;
    info.ranks.assign(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && value_at(order[j + 1]) == value_at(order[i])) ++j;
        double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) info.ranks[order[k]] = rank;
        double t = static_cast<double>(j - i + 1);
        info.tie_term += t * t * t - t;
        i = j + 1;
    }
    return info;
}

double u_from_ranks(const std::vector<double>& ranks, std::size_t n1) {
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n1; ++i) rank_sum += ranks[i];
    return rank_sum - static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
}

}  // namespace

MannWhitneyResult mann_whitney_u(std::span<const double> x,
                                 std::span<const double> y) {
    if (x.empty() || y.empty())
        throw ValidationError("Mann-Whitney requires non-empty samples");
    RankInfo info = midranks(x, y);
    double n1 = static_cast<double>(x.size());
    double n2 = static_cast<double>(y.size());
    double n = n1 + n2;
    double u = u_from_ranks(info.ranks, x.size());

    double mu = n1 * n2 / 2.0;
    double var =
        n1 * n2 / 12.0 * ((n + 1.0) - info.tie_term / (n * (n - 1.0)));
    if (var <= 0.0) return {u, 1.0};
    double z = (std::fabs(u - mu) - 0.5) / std::sqrt(var);
    if (z < 0.0) z = 0.0;
    double p = std::erfc(z / std::sqrt(2.0));
    return {u, std::min(1.0, p)};
}

double mann_whitney_exact_p(std::span<const double> x,
                            std::span<const double> y) {
    if (x.size() > 12 || y.size() > 12)
        throw ConfigError("exact Mann-Whitney supports samples of at most 12");
    RankInfo info = midranks(x, y);
    std::size_t n = x.size() + y.size();
    std::size_t n1 = x.size();
    double mu = static_cast<double>(n1) * static_cast<double>(y.size()) / 2.0;
    double observed = std::fabs(u_from_ranks(info.ranks, n1) - mu);

    // Enumerate all assignments of n1 pooled values to the first group.
    std::vector<std::size_t> pick(n1);
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    long total = 0, extreme = 0;
    constexpr double kTieEps = 1e-12;
    while (true) {
        double rank_sum = 0.0;
        for (std::size_t idx : pick) rank_sum += info.ranks[idx];
        double u = rank_sum - static_cast<double>(n1) *
                                  (static_cast<double>(n1) + 1.0) / 2.0;
        ++total;
        if (std::fabs(u - mu) >= observed - kTieEps) ++extreme;

        // next combination
        std::size_t i = n1;
        while (i > 0 && pick[i - 1] == n - n1 + i - 1) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < n1; ++j) pick[j] = pick[j - 1] + 1;
    }
    return static_cast<double>(extreme) / static_cast<double>(total);
}

GroupComparison compare_groups(std::span<const double> values_high,
                               std::span<const double> values_low,
                               const std::string& metric_name, TTestKind kind) {
    if (values_high.size() < 2 || values_low.size() < 2)
        throw ValidationError("group comparison requires at least 2 values "
                              "per group (" + metric_name + ")");
    GroupComparison cmp;
    cmp.metric_name = metric_name;
    cmp.n_high = static_cast<long>(values_high.size());
    cmp.n_low = static_cast<long>(values_low.size());
    cmp.mean_high = mean_of(values_high);
    cmp.mean_low = mean_of(values_low);
    cmp.diff = cmp.mean_high - cmp.mean_low;

    double n1 = static_cast<double>(cmp.n_high);
    double n2 = static_cast<double>(cmp.n_low);
    double v1 = sample_variance(values_high, cmp.mean_high);
    double v2 = sample_variance(values_low, cmp.mean_low);
    double pooled_var = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0);
    if (pooled_var <= 0.0)
        throw ValidationError("degenerate variance: pooled SD is zero (" +
                              metric_name + ")");
    double pooled_sd = std::sqrt(pooled_var);
    cmp.cohens_d = cmp.diff / pooled_sd;

    if (kind == TTestKind::pooled) {
        double se = pooled_sd * std::sqrt(1.0 / n1 + 1.0 / n2);
        cmp.t_stat = cmp.diff / se;
        cmp.t_p_value = special::student_t_two_sided_p(cmp.t_stat, n1 + n2 - 2.0);
    } else {
        double se = std::sqrt(v1 / n1 + v2 / n2);
        cmp.t_stat = cmp.diff / se;
        double df = (v1 / n1 + v2 / n2) * (v1 / n1 + v2 / n2) /
                    ((v1 / n1) * (v1 / n1) / (n1 - 1.0) +
                     (v2 / n2) * (v2 / n2) / (n2 - 1.0));
        cmp.t_p_value = special::student_t_two_sided_p(cmp.t_stat, df);
    }

    MannWhitneyResult mw = mann_whitney_u(values_high, values_low);
    cmp.mw_u = mw.u;
    cmp.mw_p_value = mw.p;
    return cmp;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("percentile of empty sample");
    std::sort(values.begin(), values.end());
    double h = q * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

BootstrapCI bootstrap_rate_ci(std::span<const std::uint8_t> flags,
                              const std::string& statistic_name,
                              long resamples, std::uint64_t seed) {
    if (flags.empty())
        throw ValidationError("bootstrap over empty item set (" +
                              statistic_name + ")");
    if (resamples < 1) throw ConfigError("resamples must be >= 1");

    const std::uint64_t n = flags.size();
    long total = 0;
    for (std::uint8_t f : flags) total += f;

    std::vector<double> rates(static_cast<std::size_t>(resamples));
#pragma omp parallel for schedule(static)
    for (long i = 0; i < resamples; ++i) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
        long hits = 0;
        for (std::uint64_t k = 0; k < n; ++k) hits += flags[rng.bounded(n)];
        rates[static_cast<std::size_t>(i)] =
            static_cast<double>(hits) / static_cast<double>(n);
    }

    BootstrapCI ci;
    ci.statistic_name = statistic_name;
    ci.point = static_cast<double>(total) / static_cast<double>(n);
    ci.lo = percentile(rates, 0.025);
    ci.hi = percentile(std::move(rates), 0.975);
    ci.resamples = resamples;
    ci.seed = seed;
    return ci;
}

CurveResult score_curve(std::span<const double> scores,
                        std::span<const int> labels, CurveKind kind) {
    if (scores.size() != labels.size())
        throw ConfigError("score_curve: scores and labels differ in length");
    long n_pos = 0, n_neg = 0;
    for (int label : labels) (label ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0)
        throw ValidationError("score_curve requires both classes present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    CurveResult curve;
    curve.kind = kind;
    curve.points.push_back(kind == CurveKind::roc ? CurvePoint{0.0, 0.0}
                                                  : CurvePoint{0.0, 1.0});
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() &&
               scores[order[j + 1]] == scores[order[i]])
            ++j;
        for (std::size_t k = i; k <= j; ++k) (labels[order[k]] ? tp : fp) += 1;
        if (kind == CurveKind::roc) {
            curve.points.push_back({static_cast<double>(fp) / n_neg,
                                    static_cast<double>(tp) / n_pos});
        } else {
            curve.points.push_back({static_cast<double>(tp) / n_pos,
                                    static_cast<double>(tp) / (tp + fp)});
        }
        i = j + 1;
    }

    double auc = 0.0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const CurvePoint& a = curve.points[k - 1];
        const CurvePoint& b = curve.points[k];
        auc += (b.x - a.x) * (a.y + b.y) / 2.0;
    }
    curve.auc = auc;
    return curve;
}

}  // namespace miaudit
