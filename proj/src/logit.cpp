#include "churnlab/logit.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace churnlab {

namespace {

double log1pexp(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_inputs(const FeatureMatrix& X, const std::vector<int>& y, double C) {
    if (X.n_rows() != y.size())
        throw std::invalid_argument("logit: label count does not match row count");
    if (X.n_rows() == 0) throw std::invalid_argument("logit: empty design matrix");
    if (!(C > 0.0)) throw std::invalid_argument("logit: C must be positive");
    for (double v : X.values)
        if (!std::isfinite(v)) throw std::invalid_argument("logit: non-finite input");
    for (int label : y)
        if (label != 0 && label != 1)
            throw std::invalid_argument("logit: labels must be 0 or 1");
}

double smooth_loss(const FeatureMatrix& X, const std::vector<int>& y,
                   const std::vector<double>& w, double b) {
    double loss = 0.0;
    for (std::size_t i = 0; i < X.n_rows(); ++i) {
        double z = b;
        const auto row = X.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) z += w[j] * row[j];
        const double ys = y[i] == 1 ? 1.0 : -1.0;
        loss += log1pexp(-ys * z);
    }
    return loss;
}

}  // namespace

std::vector<double> logistic_smooth_gradient(const FeatureMatrix& X,
                                             const std::vector<int>& y,
                                             const std::vector<double>& w, double b) {
    const std::size_t p = X.n_cols();
    std::vector<double> grad(p + 1, 0.0);
    for (std::size_t i = 0; i < X.n_rows(); ++i) {
        double z = b;
        const auto row = X.row(i);
        for (std::size_t j = 0; j < p; ++j) z += w[j] * row[j];
        // d/dz log(1+exp(-y~ z)) = sigma(z) - y
        const double r = sigmoid(z) - static_cast<double>(y[i]);
        for (std::size_t j = 0; j < p; ++j) grad[j] += r * row[j];
        grad[p] += r;
    }
    return grad;
}

double logistic_objective(const FeatureMatrix& X, const std::vector<int>& y,
                          const std::vector<double>& w, double b, double C) {
    double penalty = 0.0;
    for (double v : w) penalty += std::fabs(v);
    return smooth_loss(X, y, w, b) + penalty / C;
}

LogisticModel fit_l1_logistic(const FeatureMatrix& X, const std::vector<int>& y,
                              double C, const LogitOptions& opts) {
    check_inputs(X, y, C);
    const std::size_t p = X.n_cols();
    const double lambda = 1.0 / C;

    std::vector<double> w(p, 0.0), w_new(p, 0.0);
    double b = 0.0;
    double g_cur = smooth_loss(X, y, w, b);
    double step = 1.0 / std::max<std::size_t>(1, X.n_rows());

    LogisticModel model;
    model.C = C;
    model.column_names = X.column_names;

    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        const auto grad = logistic_smooth_gradient(X, y, w, b);

        double b_new = 0.0, g_new = 0.0;
        while (true) {
            for (std::size_t j = 0; j < p; ++j) {
                const double u = w[j] - step * grad[j];
                const double thr = step * lambda;
                w_new[j] = u > thr ? u - thr : (u < -thr ? u + thr : 0.0);
            }
            b_new = b - step * grad[p];
            g_new = smooth_loss(X, y, w_new, b_new);
            // backtracking on the quadratic majorization of the smooth part
            double lin = 0.0, quad = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                const double d = w_new[j] - w[j];
                lin += grad[j] * d;
                quad += d * d;
            }
            const double db = b_new - b;
            lin += grad[p] * db;
            quad += db * db;
            if (g_new <= g_cur + lin + quad / (2.0 * step) + 1e-12) break;
            step *= 0.5;
            if (step < 1e-18) break;
        }

        double max_change = std::fabs(b_new - b);
        for (std::size_t j = 0; j < p; ++j)
            max_change = std::max(max_change, std::fabs(w_new[j] - w[j]));

        w.swap(w_new);
        b = b_new;
        g_cur = g_new;
        step *= 1.2;  // allow the step to grow back after backtracking

        if (opts.objective_trace) {
            double penalty = 0.0;
            for (double v : w) penalty += std::fabs(v);
            opts.objective_trace->push_back(g_cur + lambda * penalty);
        }

        if (max_change < opts.tol) {
            model.converged = true;
            ++iter;
            break;
        }
    }

    model.weights = std::move(w);
    model.intercept = b;
    model.n_iter = iter;
    return model;
}

std::vector<double> predict_proba(const LogisticModel& model, const FeatureMatrix& X) {
    if (X.n_cols() != model.weights.size())
        throw std::invalid_argument("predict_proba: column count mismatch");
    std::vector<double> out(X.n_rows());
    for (std::size_t i = 0; i < X.n_rows(); ++i) {
        double z = model.intercept;
        const auto row = X.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) z += model.weights[j] * row[j];
        out[i] = sigmoid(z);
    }
    return out;
}

double optimality_residual(const LogisticModel& model, const FeatureMatrix& X,
                           const std::vector<int>& y) {
    const double lambda = 1.0 / model.C;
    const auto grad =
        logistic_smooth_gradient(X, y, model.weights, model.intercept);
    double res = std::fabs(grad[model.weights.size()]);  // intercept: plain gradient
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        const double wj = model.weights[j];
        if (wj > 0.0)
            res = std::max(res, std::fabs(grad[j] + lambda));
        else if (wj < 0.0)
            res = std::max(res, std::fabs(grad[j] - lambda));
        else
            res = std::max(res, std::max(0.0, std::fabs(grad[j]) - lambda));
    }
    return res;
}

void LogisticModel::save_json(const std::string& path) const {
    nlohmann::json j;
    j["type"] = "l1_logistic";
    j["columns"] = column_names;
    j["weights"] = weights;
    j["intercept"] = intercept;
    j["C"] = C;
    j["converged"] = converged;
    j["n_iter"] = n_iter;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
}

LogisticModel LogisticModel::load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    nlohmann::json j;
    is >> j;
    LogisticModel m;
    m.column_names = j.at("columns").get<std::vector<std::string>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.C = j.at("C").get<double>();
    m.converged = j.at("converged").get<bool>();
    m.n_iter = j.at("n_iter").get<int>();
    return m;
}

}  // namespace churnlab
