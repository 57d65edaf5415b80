#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rteff/errors.hpp"
#include "rteff/mathutil.hpp"

// Weighted multiple linear regression of efficiency against two operating
// conditions, eta_hat = b1 C1 + b2 C2 + b3, with weights w_i = stderr_i^-2,
// plus the per-partition fade report built on top of it.

namespace rteff {

struct WlsObservation {
    double c1;
    double c2;
    double eta;
    double eta_stderr;
};

struct RegressionModel {
    math::Vec3 beta{};            // (b1, b2, b3-intercept)
    math::Mat3 beta_covariance{}; // sigma^2 (X'WX)^-1
    math::Vec3 beta_stderr{};
    math::Vec3 p_values{};
    double adjusted_r2 = 0.0;
    std::size_t n_trips = 0;
    std::array<std::string, 2> condition_names{"c1", "c2"};
    std::string partition_label;
};

// Trips with vanishing stderr would get unbounded weight; cap at (1e-6)^-2.
inline constexpr double kMinEtaStderr = 1e-6;

/// Solve (X'WX) beta = X'W y for X = [C1 C2 1] via Cholesky on the weighted
/// normal equations. Throws degenerate_design_error naming the offending
/// column when a regressor is constant or the design is collinear, and
/// insufficient_data_error below 4 observations.
inline RegressionModel fit_wls(std::span<const WlsObservation> obs,
                               std::array<std::string, 2> condition_names = {"c1", "c2"}) {
    const std::size_t n = obs.size();
    if (n < 4)
        throw insufficient_data_error("fit_wls: need at least 4 trips, got " +
                                      std::to_string(n));

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double se = obs[i].eta_stderr;
        if (se < 0.0) throw config_error("fit_wls: negative eta_stderr");
        const double eff = std::max(se, kMinEtaStderr);
        w[i] = 1.0 / (eff * eff);
    }

    double sw = 0.0, mc1 = 0.0, mc2 = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        mc1 += w[i] * obs[i].c1;
        mc2 += w[i] * obs[i].c2;
        my += w[i] * obs[i].eta;
    }
    mc1 /= sw;
    mc2 /= sw;
    my /= sw;

    // constant regressor check: weighted variance relative to magnitude
    double vc1 = 0.0, vc2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        vc1 += w[i] * (obs[i].c1 - mc1) * (obs[i].c1 - mc1);
        vc2 += w[i] * (obs[i].c2 - mc2) * (obs[i].c2 - mc2);
    }
    const double eps = 1e-24;
    if (vc1 / sw <= eps * std::max(1.0, mc1 * mc1))
        throw degenerate_design_error(condition_names[0]);
    if (vc2 / sw <= eps * std::max(1.0, mc2 * mc2))
        throw degenerate_design_error(condition_names[1]);

    math::Mat3 xtwx{};
    math::Vec3 xtwy{};
    for (std::size_t i = 0; i < n; ++i) {
        const std::array<double, 3> x{obs[i].c1, obs[i].c2, 1.0};
        for (std::size_t r = 0; r < 3; ++r) {
            for (std::size_t c = r; c < 3; ++c) xtwx[r][c] += w[i] * x[r] * x[c];
            xtwy[r] += w[i] * x[r] * obs[i].eta;
        }
    }
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < r; ++c) xtwx[r][c] = xtwx[c][r];

    math::Mat3 chol;
    std::size_t bad_pivot = 0;
    if (!math::cholesky3(xtwx, chol, bad_pivot)) {
        const std::string col = bad_pivot == 0   ? condition_names[0]
                                : bad_pivot == 1 ? condition_names[1]
                                                 : "intercept";
        throw degenerate_design_error(col);
    }

    RegressionModel model;
    model.beta = math::cholesky3_solve(chol, xtwy);
    model.n_trips = n;
    model.condition_names = std::move(condition_names);

    double ssr = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fit =
            model.beta[0] * obs[i].c1 + model.beta[1] * obs[i].c2 + model.beta[2];
        ssr += w[i] * (obs[i].eta - fit) * (obs[i].eta - fit);
        sst += w[i] * (obs[i].eta - my) * (obs[i].eta - my);
    }
    const double dof = static_cast<double>(n - 3);
    const double sigma2 = ssr / dof;
    const math::Mat3 inv = math::cholesky3_inverse(chol);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) model.beta_covariance[r][c] = sigma2 * inv[r][c];
    for (std::size_t k = 0; k < 3; ++k) {
        model.beta_stderr[k] = std::sqrt(std::max(0.0, model.beta_covariance[k][k]));
        if (model.beta_stderr[k] > 0.0) {
            model.p_values[k] =
                math::student_t_two_sided_p(model.beta[k] / model.beta_stderr[k], dof);
        } else {
            model.p_values[k] = model.beta[k] == 0.0 ? 1.0 : 0.0;
        }
    }
    model.adjusted_r2 =
        sst > 0.0 ? 1.0 - (ssr / dof) / (sst / static_cast<double>(n - 1)) : 1.0;
    return model;
}

struct Prediction {
    double eta_hat;
    double stderr; // standard error of the mean response
    bool extrapolation_warning; // eta_hat above 1, linear extrapolation artifact
};

inline Prediction predict(const RegressionModel& model, double c1, double c2) {
    const math::Vec3 x{c1, c2, 1.0};
    const double eta_hat = model.beta[0] * c1 + model.beta[1] * c2 + model.beta[2];
    double q = 0.0;
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) q += x[r] * model.beta_covariance[r][c] * x[c];
    return {eta_hat, std::sqrt(std::max(0.0, q)), eta_hat > 1.0};
}

struct FadePartition {
    std::string label; // must sort chronologically, e.g. "2019-10"
    std::vector<WlsObservation> trips;
};

struct FadePoint {
    std::string partition_label;
    double eta_hat;
    double ci95_half_width;
    std::size_t n_trips;
};

struct FadeReport {
    std::vector<FadePoint> points; // chronological
    std::vector<std::optional<double>> moving_average; // 3-point centered, aligned
    double reference_c1 = 0.0;
    double reference_c2 = 0.0;
    std::array<std::string, 2> condition_names{"c1", "c2"};
    double fade_pp = 0.0; // 100 (first eta_hat - last eta_hat); positive = degradation
    std::vector<std::pair<std::string, std::string>> skipped; // (label, reason)
};

/// Fit one model per partition and evaluate each at the reference
/// conditions; without an explicit reference, the trip-count-weighted mean
/// conditions over all partitions are used. Partitions that cannot be
/// fitted are skipped with a diagnostic.
inline FadeReport build_fade_report(std::vector<FadePartition> partitions,
                                    std::optional<std::pair<double, double>> reference,
                                    std::array<std::string, 2> condition_names = {"c1",
                                                                                  "c2"}) {
    std::sort(partitions.begin(), partitions.end(),
              [](const FadePartition& a, const FadePartition& b) { return a.label < b.label; });

    FadeReport report;
    report.condition_names = condition_names;
    if (reference) {
        report.reference_c1 = reference->first;
        report.reference_c2 = reference->second;
    } else {
        double sc1 = 0.0, sc2 = 0.0;
        std::size_t total = 0;
        for (const FadePartition& p : partitions)
            for (const WlsObservation& o : p.trips) {
                sc1 += o.c1;
                sc2 += o.c2;
                ++total;
            }
        if (total == 0) throw insufficient_data_error("fade: no trips in any partition");
        report.reference_c1 = sc1 / static_cast<double>(total);
        report.reference_c2 = sc2 / static_cast<double>(total);
    }

    for (const FadePartition& p : partitions) {
        try {
            RegressionModel model = fit_wls(p.trips, condition_names);
            const Prediction pred = predict(model, report.reference_c1, report.reference_c2);
            report.points.push_back(
                {p.label, pred.eta_hat, 1.96 * pred.stderr, model.n_trips});
        } catch (const error& e) {
            report.skipped.emplace_back(p.label, e.what());
        }
    }
    if (report.points.size() < 2)
        throw insufficient_data_error("fade: fewer than 2 fittable partitions");

    report.moving_average.assign(report.points.size(), std::nullopt);
    for (std::size_t i = 1; i + 1 < report.points.size(); ++i)
        report.moving_average[i] = (report.points[i - 1].eta_hat + report.points[i].eta_hat +
                                    report.points[i + 1].eta_hat) /
                                   3.0;
    report.fade_pp = 100.0 * (report.points.front().eta_hat - report.points.back().eta_hat);
    return report;
}

} // namespace rteff
