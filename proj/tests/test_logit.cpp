#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "churnlab/logit.hpp"

using namespace churnlab;

namespace {

FeatureMatrix make_matrix(const std::vector<std::vector<double>>& rows) {
    FeatureMatrix m;
    for (std::size_t j = 0; j < rows.front().size(); ++j)
        m.column_names.push_back("x" + std::to_string(j));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.ids.push_back(static_cast<std::int64_t>(i));
        m.values.insert(m.values.end(), rows[i].begin(), rows[i].end());
    }
    return m;
}

// Random 2-feature fixture with a linear signal.
void random_fixture(std::mt19937_64& rng, std::size_t n, FeatureMatrix& X,
                    std::vector<int>& y) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    y.clear();
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = gauss(rng), x2 = gauss(rng);
        const double p = 1.0 / (1.0 + std::exp(-(1.2 * x1 - 0.7 * x2 + 0.3)));
        rows.push_back({x1, x2});
        y.push_back(unif(rng) < p ? 1 : 0);
    }
    X = make_matrix(rows);
}

// Nested-refinement grid minimizer of the penalized objective over
// (w1, w2, b); independent of the proximal-gradient path.
double grid_search_objective(const FeatureMatrix& X, const std::vector<int>& y, double C) {
    double c1 = 0, c2 = 0, cb = 0, half = 4.0;
    double best = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 14; ++round) {
        double b1 = c1, b2 = c2, bb = cb;
        const int steps = 10;
        for (int i = -steps; i <= steps; ++i)
            for (int j = -steps; j <= steps; ++j)
                for (int k = -steps; k <= steps; ++k) {
                    const double w1 = c1 + half * i / steps;
                    const double w2 = c2 + half * j / steps;
                    const double b = cb + half * k / steps;
                    const double obj = logistic_objective(X, y, {w1, w2}, b, C);
                    if (obj < best) {
                        best = obj;
                        b1 = w1;
                        b2 = w2;
                        bb = b;
                    }
                }
        c1 = b1;
        c2 = b2;
        cb = bb;
        half *= 0.35;
    }
    return best;
}

}  // namespace

TEST_CASE("extreme penalty shrinks to the base-rate intercept") {
    std::mt19937_64 rng(1);
    FeatureMatrix X;
    std::vector<int> y;
    random_fixture(rng, 60, X, y);
    const auto model = fit_l1_logistic(X, y, 1e-8, {.max_iter = 20000, .tol = 1e-10});
    for (double w : model.weights) CHECK(w == 0.0);
    double pos = 0;
    for (int v : y) pos += v;
    const double pi1 = pos / static_cast<double>(y.size());
    CHECK(model.intercept == doctest::Approx(std::log(pi1 / (1.0 - pi1))).epsilon(1e-6));
}

TEST_CASE("fitted objective matches the grid-search oracle") {
    std::mt19937_64 rng(7);
    FeatureMatrix X;
    std::vector<int> y;
    random_fixture(rng, 40, X, y);
    const auto model = fit_l1_logistic(X, y, 1.0, {.max_iter = 20000, .tol = 1e-9});
    const double fitted = logistic_objective(X, y, model.weights, model.intercept, 1.0);
    const double oracle = grid_search_objective(X, y, 1.0);
    CHECK(std::fabs(fitted - oracle) < 1e-4 * std::fabs(oracle));
    CHECK(optimality_residual(model, X, y) < 1e-6);
}

TEST_CASE("duplicating rows with doubled penalty leaves the fit unchanged") {
    std::mt19937_64 rng(3);
    FeatureMatrix X;
    std::vector<int> y;
    random_fixture(rng, 40, X, y);
    const double C = 0.5;
    const auto a = fit_l1_logistic(X, y, C, {.max_iter = 50000, .tol = 1e-11});

    std::vector<std::vector<double>> rows2;
    std::vector<int> y2;
    for (int rep = 0; rep < 2; ++rep)
        for (std::size_t i = 0; i < X.n_rows(); ++i) {
            rows2.push_back({X.at(i, 0), X.at(i, 1)});
            y2.push_back(y[i]);
        }
    // doubled data term with halved C (doubled 1/C) is twice the original
    // objective, so the minimizer is identical
    const auto b = fit_l1_logistic(make_matrix(rows2), y2, C / 2.0,
                                   {.max_iter = 50000, .tol = 1e-11});
    for (std::size_t j = 0; j < a.weights.size(); ++j)
        CHECK(a.weights[j] == doctest::Approx(b.weights[j]).epsilon(1e-4));
    CHECK(a.intercept == doctest::Approx(b.intercept).epsilon(1e-4));
}

TEST_CASE("predict_proba basics") {
    LogisticModel m;
    m.weights = {0.0, 0.0};
    m.C = 1.0;
    m.column_names = {"x0", "x1"};
    FeatureMatrix X = make_matrix({{1.0, -2.0}, {3.5, 0.0}});
    SUBCASE("symmetry at zero") {
        for (double p : predict_proba(m, X)) CHECK(p == 0.5);
    }
    SUBCASE("intercept log 3 gives 3/4") {
        m.intercept = std::log(3.0);
        for (double p : predict_proba(m, X)) CHECK(p == doctest::Approx(0.75).epsilon(1e-12));
    }
    SUBCASE("monotone in a positively weighted feature") {
        m.weights = {0.8, 0.1};
        const auto base = predict_proba(m, X);
        FeatureMatrix X2 = X;
        X2.at(0, 0) += 1.0;
        const auto shifted = predict_proba(m, X2);
        CHECK(shifted[0] > base[0]);
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(predict_proba(m, make_matrix({{1.0}})), std::invalid_argument);
    }
}

TEST_CASE("objective decreases monotonically") {
    std::mt19937_64 rng(11);
    FeatureMatrix X;
    std::vector<int> y;
    random_fixture(rng, 80, X, y);
    std::vector<double> trace;
    LogitOptions opts;
    opts.objective_trace = &trace;
    fit_l1_logistic(X, y, 0.1, opts);
    REQUIRE(trace.size() > 2);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-12);
}

TEST_CASE("label-orthogonal feature is soft-thresholded to exactly zero") {
    // third column is +-1 balanced within each class: its data-term
    // gradient vanishes by symmetry, so any finite penalty zeroes it
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int i = 0; i < 10; ++i) {
        const int label = i % 2;
        const double signal = label ? 1.0 : -1.0;
        rows.push_back({signal, (i / 2) % 2 ? 1.0 : -1.0});
        y.push_back(label);
    }
    const auto model = fit_l1_logistic(make_matrix(rows), y, 1.0);
    CHECK(model.weights[1] == 0.0);
    CHECK(model.weights[0] > 0.0);
}

TEST_CASE("analytic smooth gradient matches central finite differences") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        FeatureMatrix X;
        std::vector<int> y;
        random_fixture(rng, 25, X, y);
        std::normal_distribution<double> gauss(0.0, 0.5);
        std::vector<double> w{gauss(rng), gauss(rng)};
        double b = gauss(rng);
        const auto grad = logistic_smooth_gradient(X, y, w, b);
        constexpr double h = 1e-6;
        for (std::size_t j = 0; j <= w.size(); ++j) {
            auto eval = [&](double delta) {
                std::vector<double> wp = w;
                double bp = b;
                if (j < w.size())
                    wp[j] += delta;
                else
                    bp += delta;
                return logistic_objective(X, y, wp, bp, 1e18);  // penalty negligible
            };
            const double fd = (eval(h) - eval(-h)) / (2.0 * h);
            CHECK(grad[j] ==
                  doctest::Approx(fd).epsilon(1e-6).scale(std::max(1.0, std::fabs(fd))));
        }
    }
}

TEST_CASE("non-finite inputs and bad labels are rejected") {
    FeatureMatrix X = make_matrix({{1.0, 2.0}, {3.0, 4.0}});
    std::vector<int> y{0, 1};
    X.at(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit_l1_logistic(X, y, 1.0), std::invalid_argument);
    X.at(0, 1) = 2.0;
    CHECK_THROWS_AS(fit_l1_logistic(X, {0, 2}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(fit_l1_logistic(X, y, -1.0), std::invalid_argument);
}

TEST_CASE("model json round-trips") {
    LogisticModel m;
    m.weights = {0.25, -1.5};
    m.intercept = 0.75;
    m.C = 0.03;
    m.converged = true;
    m.n_iter = 120;
    m.column_names = {"a", "b"};
    const auto path =
        (std::filesystem::temp_directory_path() / "churnlab_logit.json").string();
    m.save_json(path);
    const auto q = LogisticModel::load_json(path);
    CHECK(q.weights == m.weights);
    CHECK(q.intercept == m.intercept);
    CHECK(q.C == m.C);
    CHECK(q.column_names == m.column_names);
    std::remove(path.c_str());
}
