#pragma once

#include <string>
#include <vector>

#include "churnlab/features.hpp"

namespace churnlab {

// L1-regularized binary logistic regression, intercept unpenalized.
// Objective: sum_i log(1 + exp(-y~_i (w.x_i + b))) + (1/C) * ||w||_1
// with y~ in {-1,+1}; larger C means weaker regularization.
struct LogisticModel {
    std::vector<double> weights;
    double intercept = 0.0;
    double C = 1.0;
    bool converged = false;
    int n_iter = 0;
    std::vector<std::string> column_names;

    void save_json(const std::string& path) const;
    static LogisticModel load_json(const std::string& path);
};

struct LogitOptions {
    int max_iter = 5000;
    double tol = 1e-7;  // max absolute parameter change per iteration
    // When set, receives the penalized objective after every iteration.
    std::vector<double>* objective_trace = nullptr;
};

// Proximal gradient (ISTA) with backtracking line search; zero
// initialization, fully deterministic.
LogisticModel fit_l1_logistic(const FeatureMatrix& X, const std::vector<int>& y,
                              double C, const LogitOptions& opts = {});

std::vector<double> predict_proba(const LogisticModel& model, const FeatureMatrix& X);

// Value of the penalized objective at the model's parameters.
double logistic_objective(const FeatureMatrix& X, const std::vector<int>& y,
                          const std::vector<double>& weights, double intercept, double C);

// Max violation of the L1 subgradient optimality conditions; near zero at
// the optimum.
double optimality_residual(const LogisticModel& model, const FeatureMatrix& X,
                           const std::vector<int>& y);

// Gradient of the unpenalized data term at (weights, intercept); last entry
// is the intercept component. Exposed for finite-difference checks.
std::vector<double> logistic_smooth_gradient(const FeatureMatrix& X,
                                             const std::vector<int>& y,
                                             const std::vector<double>& weights,
                                             double intercept);

}  // namespace churnlab
