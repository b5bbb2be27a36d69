#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "churnlab/metrics.hpp"

using namespace churnlab;

namespace {

// O(n^2) pairwise AUC oracle.
double auc_pairs(const std::vector<double>& s, const std::vector<int>& y) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[i] != 1 || y[j] != 0) continue;
            den += 1.0;
            if (s[i] > s[j])
                num += 1.0;
            else if (s[i] == s[j])
                num += 0.5;
        }
    return num / den;
}

void random_scores(std::mt19937_64& rng, std::size_t n, double prevalence,
                   std::vector<double>& s, std::vector<int>& y, bool with_ties = false) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    s.clear();
    y.clear();
    for (std::size_t i = 0; i < n; ++i) {
        double v = unif(rng);
        if (with_ties) v = std::round(v * 8.0) / 8.0;
        s.push_back(v);
        y.push_back(unif(rng) < prevalence ? 1 : 0);
    }
    bool has0 = false, has1 = false;
    for (int v : y) (v ? has1 : has0) = true;
    if (!has0) y[0] = 0;
    if (!has1) y[1] = 1;
}

}  // namespace

TEST_CASE("auc on worked examples") {
    CHECK(auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == doctest::Approx(0.75));
    CHECK(auc({0.2, 0.9}, {0, 1}) == 1.0);
    CHECK(auc({0.9, 0.2}, {0, 1}) == 0.0);
    CHECK(auc({0.5, 0.5, 0.5}, {0, 1, 0}) == 0.5);
    CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(auc({0.1}, {1, 0}), std::invalid_argument);
}

TEST_CASE("auc matches the pairwise oracle, with and without ties") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> s;
        std::vector<int> y;
        random_scores(rng, 120, 0.3, s, y, rep % 2 == 1);
        CHECK(auc(s, y) == doctest::Approx(auc_pairs(s, y)).epsilon(1e-12));
    }
}

TEST_CASE("auc is rank-invariant and flips under negation") {
    std::mt19937_64 rng(7);
    std::vector<double> s;
    std::vector<int> y;
    random_scores(rng, 80, 0.25, s, y);
    const double a = auc(s, y);
    std::vector<double> monotone, negated;
    for (double v : s) {
        monotone.push_back(std::exp(3.0 * v) + 10.0);
        negated.push_back(-v);
    }
    CHECK(auc(monotone, y) == doctest::Approx(a).epsilon(1e-12));
    CHECK(auc(negated, y) == doctest::Approx(1.0 - a).epsilon(1e-12));
}

TEST_CASE("top-decile lift closed forms") {
    // 1000 customers, 20 churners (2%)
    std::vector<double> s(1000);
    std::vector<int> y(1000, 0);
    for (int i = 0; i < 1000; ++i) s[i] = 1000 - i;
    for (int i = 0; i < 20; ++i) y[i] = 1;
    SUBCASE("perfect ranking saturates at 1/prevalence cap times coverage") {
        // top 100 contains all 20 churners: rate 0.2 vs base 0.02
        CHECK(lift(s, y) == doctest::Approx(10.0));
    }
    SUBCASE("anti-ranking yields zero") {
        std::vector<double> rev(s.rbegin(), s.rend());
        CHECK(lift(rev, y) == doctest::Approx(0.0));
    }
    SUBCASE("full-population fraction is exactly one") {
        CHECK(lift(s, y, 1.0) == doctest::Approx(1.0));
    }
    SUBCASE("round-half-up cutoff count") {
        // 15 customers at 10% rounds 1.5 up to 2
        std::vector<double> s15{15, 14, 13, 12, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
        std::vector<int> y15(15, 0);
        y15[0] = 1;
        y15[1] = 1;
        y15[2] = 1;
        // top 2 both churn: (2/2) / (3/15) = 5
        CHECK(lift(s15, y15, 0.10) == doctest::Approx(5.0));
    }
    SUBCASE("bad fractions and degenerate labels throw") {
        CHECK_THROWS_AS(lift(s, y, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(lift(s, y, 1.5), std::invalid_argument);
        CHECK_THROWS_AS(lift({1.0, 2.0}, {0, 0}, 0.5), std::invalid_argument);
    }
}

TEST_CASE("random scores give lift near one on average") {
    std::mt19937_64 rng(101);
    double total = 0.0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
        std::vector<double> s;
        std::vector<int> y;
        random_scores(rng, 500, 0.10, s, y);
        total += lift(s, y);
    }
    const double mean = total / reps;
    CHECK(mean > 0.85);
    CHECK(mean < 1.15);
}

TEST_CASE("lift curve saturates at the prevalence cap and flattens to one") {
    std::vector<double> s(1000);
    std::vector<int> y(1000, 0);
    for (int i = 0; i < 1000; ++i) s[i] = 1000 - i;
    for (int i = 0; i < 50; ++i) y[i] = 1;  // 5% prevalence, perfectly ranked
    const auto curve = lift_curve(s, y, 20);
    REQUIRE(curve.size() == 20);
    for (const auto& [p, v] : curve) {
        // all churners captured once p >= 5, so lift = 100/p; below that the
        // targeted set is pure churn, capped at 1/prevalence = 20
        const double expected = std::min(20.0, 100.0 / p);
        CHECK(v == doctest::Approx(expected));
    }
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].second <= curve[i - 1].second + 1e-12);
}

TEST_CASE("constant scores fall back to input order at every percentile") {
    std::vector<double> s(400, 0.5);
    std::vector<int> y(400, 0);
    for (int i = 0; i < 40; ++i) y[i * 10] = 1;  // one churner per block of ten
    for (const auto& [p, v] : lift_curve(s, y, 20)) {
        // ties break by ascending index, so the targeted set is the first
        // 4p rows and contains ceil(4p / 10) churners
        const int count = 4 * p;
        const double expected = ((count + 9) / 10) / (0.1 * count);
        CHECK(v == doctest::Approx(expected));
    }
}

TEST_CASE("roc convex hull dominates every empirical point") {
    std::mt19937_64 rng(55);
    for (int rep = 0; rep < 8; ++rep) {
        std::vector<double> s;
        std::vector<int> y;
        random_scores(rng, 90, 0.3, s, y, true);
        const auto pts = roc_points(s, y);
        const auto hull = roc_convex_hull(s, y);

        REQUIRE(hull.size() >= 2);
        CHECK(hull.front().f0 == 0.0);
        CHECK(hull.front().f1 == 0.0);
        CHECK(hull.back().f0 == 1.0);
        CHECK(hull.back().f1 == 1.0);
        for (std::size_t i = 2; i < hull.size(); ++i) {
            const double s1 = (hull[i - 1].f0 - hull[i - 2].f0) /
                              std::max(1e-300, hull[i - 1].f1 - hull[i - 2].f1);
            const double s2 = (hull[i].f0 - hull[i - 1].f0) /
                              std::max(1e-300, hull[i].f1 - hull[i - 1].f1);
            CHECK(s2 < s1);
        }
        // every empirical point lies on or below the hull
        for (const auto& p : pts) {
            for (std::size_t i = 1; i < hull.size(); ++i)
                if (p.f1 <= hull[i].f1 + 1e-12 && p.f1 >= hull[i - 1].f1 - 1e-12) {
                    const auto& a = hull[i - 1];
                    const auto& b = hull[i];
                    const double t =
                        b.f1 > a.f1 ? (p.f1 - a.f1) / (b.f1 - a.f1) : 0.0;
                    CHECK(p.f0 <= a.f0 + t * (b.f0 - a.f0) + 1e-12);
                    break;
                }
        }
    }
}

TEST_CASE("regularized incomplete beta sanity") {
    CHECK(beta_cdf(0.0, 6, 14) == 0.0);
    CHECK(beta_cdf(1.0, 6, 14) == 1.0);
    CHECK(beta_cdf(0.5, 2, 2) == doctest::Approx(0.5).epsilon(1e-12));
    // I_x(1,1) = x
    for (double x : {0.1, 0.37, 0.9}) CHECK(beta_cdf(x, 1, 1) == doctest::Approx(x).epsilon(1e-12));
    // I_x(2,1) = x^2
    CHECK(beta_cdf(0.3, 2, 1) == doctest::Approx(0.09).epsilon(1e-12));
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    CHECK(beta_cdf(0.23, 6, 14) ==
          doctest::Approx(1.0 - beta_cdf(0.77, 14, 6)).epsilon(1e-10));
    // density integrates to the cdf on a fine grid
    double acc = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double a = 0.4 * i / n, b = 0.4 * (i + 1) / n;
        acc += 0.5 * (beta_pdf(a, 6, 14) + beta_pdf(b, 6, 14)) * (b - a);
    }
    CHECK(acc == doctest::Approx(beta_cdf(0.4, 6, 14)).epsilon(1e-6));
}

TEST_CASE("closed-form empc matches the brute-force oracle") {
    std::mt19937_64 rng(77);
    const EmpcParams params;
    for (int rep = 0; rep < 12; ++rep) {
        std::vector<double> s;
        std::vector<int> y;
        random_scores(rng, 60 + rep * 15, 0.2, s, y, rep % 3 == 0);
        const double closed = empc(s, y, params);
        const double brute = empc_bruteforce(s, y, params);
        CHECK(std::fabs(closed - brute) < 1e-6 * params.clv);
        CHECK(closed >= 0.0);
    }
}

TEST_CASE("empc on a perfect ranking has a closed form") {
    // perfect classifier: hull is (0,0) -> (1,0) -> (1,1); targeting exactly
    // the churners is optimal whenever per-churner profit is positive
    std::vector<double> s{0.9, 0.8, 0.3, 0.2, 0.1};
    std::vector<int> y{1, 1, 0, 0, 0};
    const EmpcParams p;
    const double pi0 = 2.0 / 5.0;
    // per contacted churner the offer cost d is only paid on acceptance, so
    // the profit is clv gamma (1-delta) - f and EMPC is
    // E max(0, pi0 (clv gamma (1-delta) - f)) under gamma ~ Beta(6,14)
    const double gamma0 = p.f / (p.clv * (1.0 - p.delta()));
    const double mean = p.alpha / (p.alpha + p.beta);
    const double expected =
        pi0 * (p.clv * (1.0 - p.delta()) * mean *
                   (1.0 - beta_cdf(gamma0, p.alpha + 1, p.beta)) -
               p.f * (1.0 - beta_cdf(gamma0, p.alpha, p.beta)));
    CHECK(empc(s, y, p) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(empc_bruteforce(s, y, p) == doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("a tiny churner base with uninformative scores is worth nothing") {
    std::vector<double> s(500, 0.5);
    std::vector<int> y(500, 0);
    y[0] = 1;
    // contacting everyone costs more than the one churner can return
    CHECK(empc(s, y) == doctest::Approx(0.0));
    CHECK(empc_bruteforce(s, y) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("empc concentrates on the deterministic profit as the Beta sharpens") {
    std::mt19937_64 rng(13);
    std::vector<double> s;
    std::vector<int> y;
    random_scores(rng, 150, 0.3, s, y);
    const double gamma_fixed = 0.3;
    double prev_gap = 1e18;
    for (double scale : {1.0, 10.0, 100.0}) {
        EmpcParams p;
        p.alpha = 6.0 * scale;
        p.beta = 14.0 * scale;  // mean stays 0.3, variance shrinks
        // deterministic oracle at gamma = 0.3: best hull vertex profit
        double best = 0.0;
        double pi1 = 0.0, pi0 = 0.0;
        for (int v : y) (v ? pi0 : pi1) += 1.0;
        pi0 /= s.size();
        pi1 /= s.size();
        for (const auto& pt : roc_convex_hull(s, y)) {
            const double profit =
                p.clv * (gamma_fixed * (1.0 - p.delta()) - p.phi()) * pi0 * pt.f0 -
                p.clv * (p.delta() + p.phi()) * pi1 * pt.f1;
            best = std::max(best, profit);
        }
        const double gap = std::fabs(empc(s, y, p) - best);
        CHECK(gap < prev_gap + 1e-12);
        prev_gap = gap;
    }
    CHECK(prev_gap < 0.05);
}

TEST_CASE("empc scales linearly with monetary units") {
    std::mt19937_64 rng(3);
    std::vector<double> s;
    std::vector<int> y;
    random_scores(rng, 100, 0.25, s, y);
    EmpcParams p;
    EmpcParams p10 = p;
    p10.clv *= 10.0;
    p10.d *= 10.0;
    p10.f *= 10.0;
    CHECK(empc(s, y, p10) == doctest::Approx(10.0 * empc(s, y, p)).epsilon(1e-10));
}

TEST_CASE("empc parameter validation") {
    EmpcParams p;
    p.clv = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.alpha = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.d = 300.0;  // delta >= 1
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("lift curve csv round-trips") {
    std::vector<std::pair<int, double>> curve;
    for (int p = 1; p <= 20; ++p) curve.emplace_back(p, 10.0 / p + 0.125);
    const auto path =
        (std::filesystem::temp_directory_path() / "churnlab_curve.csv").string();
    save_lift_curve_csv(curve, path);
    CHECK(load_lift_curve_csv(path) == curve);
    std::remove(path.c_str());
}
