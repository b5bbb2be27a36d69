#pragma once

#include <string>
#include <utility>
#include <vector>

namespace churnlab {

// Mann-Whitney AUC with the tie convention
// P(s+ > s-) + 0.5 P(s+ = s-). Throws on single-class input.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Top-fraction lift: churn rate among the round-half-up(n * fraction)
// highest-scored customers, divided by the overall churn rate. Ties at the
// cutoff break by descending score then ascending input index.
double lift(const std::vector<double>& scores, const std::vector<int>& labels,
            double fraction = 0.10);

// lift(p/100) for p = 1..max_percentile.
std::vector<std::pair<int, double>> lift_curve(const std::vector<double>& scores,
                                               const std::vector<int>& labels,
                                               int max_percentile = 20);

// F0 = fraction of churners targeted (TPR), F1 = fraction of non-churners
// targeted (FPR).
struct RocPoint {
    double f0 = 0.0;
    double f1 = 0.0;
};

// Empirical ROC at every score threshold, including (0,0) and (1,1),
// ordered by increasing targeting.
std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<int>& labels);

// Upper-left convex hull of the empirical ROC; segment slopes strictly
// decreasing, endpoints (0,0) and (1,1).
std::vector<RocPoint> roc_convex_hull(const std::vector<double>& scores,
                                      const std::vector<int>& labels);

// Profit-model constants for the expected maximum profit measure. The
// offer-acceptance rate gamma follows Beta(alpha, beta).
struct EmpcParams {
    double clv = 200.0;  // customer lifetime value
    double d = 10.0;     // retention-offer cost
    double f = 1.0;      // contact cost
    double alpha = 6.0;
    double beta = 14.0;

    double delta() const { return d / clv; }
    double phi() const { return f / clv; }
    void validate() const;
};

// Expected maximum profit per customer: the Beta-weighted integral of the
// profit of the optimal operating point, evaluated in closed form by
// mapping each hull segment to its gamma interval.
double empc(const std::vector<double>& scores, const std::vector<int>& labels,
            const EmpcParams& params = {});

// Independent oracle: uniform gamma grid, maximizing over every empirical
// ROC point, trapezoidal integration against the Beta density.
double empc_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels,
                       const EmpcParams& params = {}, int grid_size = 20001);

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation, relative tolerance 1e-12.
double beta_cdf(double x, double a, double b);
double beta_pdf(double x, double a, double b);

struct MetricReport {
    double auc = 0.0;
    double lift10 = 0.0;
    double empc = 0.0;
    std::vector<std::pair<int, double>> lift_curve;
};

MetricReport evaluate_all(const std::vector<double>& scores, const std::vector<int>& labels,
                          const EmpcParams& params = {});

void save_lift_curve_csv(const std::vector<std::pair<int, double>>& curve,
                         const std::string& path);
std::vector<std::pair<int, double>> load_lift_curve_csv(const std::string& path);

}  // namespace churnlab
