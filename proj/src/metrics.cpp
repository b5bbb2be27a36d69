#include "churnlab/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace churnlab {

namespace {

void check_scores(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("metrics: score/label length mismatch");
    if (scores.empty()) throw std::invalid_argument("metrics: empty input");
    for (double s : scores)
        if (!std::isfinite(s)) throw std::invalid_argument("metrics: non-finite score");
    bool has0 = false, has1 = false;
    for (int y : labels) {
        if (y == 1)
            has1 = true;
        else if (y == 0)
            has0 = true;
        else
            throw std::invalid_argument("metrics: labels must be 0 or 1");
    }
    if (!has0 || !has1)
        throw std::invalid_argument("metrics: both classes must be present");
}

// Indices ordered by descending score, ties by ascending input index.
std::vector<std::size_t> rank_order(const std::vector<double>& scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

}  // namespace

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_scores(scores, labels);
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0, n_neg = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based mean rank
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
        i = j;
    }
    for (int y : labels) (y == 1 ? n_pos : n_neg) += 1;
    return (rank_sum_pos - 0.5 * static_cast<double>(n_pos) *
                               static_cast<double>(n_pos + 1)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double lift(const std::vector<double>& scores, const std::vector<int>& labels,
            double fraction) {
    check_scores(scores, labels);
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("lift: fraction must lie in (0, 1]");
    const std::size_t n = scores.size();
    const auto count = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * fraction + 0.5));
    if (count == 0)
        throw std::invalid_argument("lift: fraction selects zero customers");
    const auto order = rank_order(scores);
    std::size_t top_churn = 0, total_churn = 0;
    for (std::size_t k = 0; k < count; ++k) top_churn += labels[order[k]];
    for (int y : labels) total_churn += y;
    const double top_rate = static_cast<double>(top_churn) / static_cast<double>(count);
    const double overall = static_cast<double>(total_churn) / static_cast<double>(n);
    return top_rate / overall;
}

std::vector<std::pair<int, double>> lift_curve(const std::vector<double>& scores,
                                               const std::vector<int>& labels,
                                               int max_percentile) {
    std::vector<std::pair<int, double>> curve;
    curve.reserve(max_percentile);
    for (int p = 1; p <= max_percentile; ++p)
        curve.emplace_back(p, lift(scores, labels, p / 100.0));
    return curve;
}

std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<int>& labels) {
    check_scores(scores, labels);
    const auto order = rank_order(scores);
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y == 1 ? n_pos : n_neg) += 1;

    std::vector<RocPoint> pts;
    pts.push_back({0.0, 0.0});
    std::size_t tp = 0, fp = 0, i = 0;
    const std::size_t n = scores.size();
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t k = i; k < j; ++k)
            (labels[order[k]] == 1 ? tp : fp) += 1;
        pts.push_back({static_cast<double>(tp) / static_cast<double>(n_pos),
                       static_cast<double>(fp) / static_cast<double>(n_neg)});
        i = j;
    }
    return pts;
}

std::vector<RocPoint> roc_convex_hull(const std::vector<double>& scores,
                                      const std::vector<int>& labels) {
    const auto pts = roc_points(scores, labels);
    // Upper hull over (x = f1, y = f0); points arrive in path order with
    // both coordinates non-decreasing.
    std::vector<RocPoint> hull;
    auto cross = [](const RocPoint& a, const RocPoint& b, const RocPoint& c) {
        return (b.f1 - a.f1) * (c.f0 - a.f0) - (b.f0 - a.f0) * (c.f1 - a.f1);
    };
    for (const auto& p : pts) {
        while (hull.size() >= 2 &&
               cross(hull[hull.size() - 2], hull[hull.size() - 1], p) >= 0.0)
            hull.pop_back();
        // drop duplicates
        if (!hull.empty() && hull.back().f0 == p.f0 && hull.back().f1 == p.f1) continue;
        hull.push_back(p);
    }
    return hull;
}

void EmpcParams::validate() const {
    if (!(clv > 0.0)) throw std::invalid_argument("EmpcParams: clv must be positive");
    if (d < 0.0 || f < 0.0) throw std::invalid_argument("EmpcParams: negative cost");
    if (!(d < clv)) throw std::invalid_argument("EmpcParams: d must be below clv");
    if (!(alpha > 0.0 && beta > 0.0))
        throw std::invalid_argument("EmpcParams: Beta shape parameters must be positive");
}

namespace {

// Continued fraction for the regularized incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kTol = 1e-14, kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kTol) return h;
    }
    throw std::runtime_error("beta_cdf: continued fraction did not converge");
}

}  // namespace

double beta_cdf(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("beta_cdf: bad shape");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double beta_pdf(double x, double a, double b) {
    if (x < 0.0 || x > 1.0) return 0.0;
    if (x == 0.0) return a > 1.0 ? 0.0 : (a == 1.0 ? b : HUGE_VAL);
    if (x == 1.0) return b > 1.0 ? 0.0 : (b == 1.0 ? a : HUGE_VAL);
    return std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x));
}

namespace {

double churner_prior(const std::vector<int>& labels) {
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += y;
    return static_cast<double>(n_pos) / static_cast<double>(labels.size());
}

// Profit per customer at one operating point for acceptance rate gamma.
double point_profit(const RocPoint& pt, double gamma, const EmpcParams& p, double pi0) {
    const double pi1 = 1.0 - pi0;
    return p.clv * (gamma * (1.0 - p.delta()) - p.phi()) * pi0 * pt.f0 -
           p.clv * (p.delta() + p.phi()) * pi1 * pt.f1;
}

}  // namespace

double empc(const std::vector<double>& scores, const std::vector<int>& labels,
            const EmpcParams& params) {
    params.validate();
    const auto hull = roc_convex_hull(scores, labels);
    const double pi0 = churner_prior(labels);
    const double pi1 = 1.0 - pi0;
    const double delta = params.delta(), phi = params.phi();
    const double mean_gamma = params.alpha / (params.alpha + params.beta);

    // gamma cutoff at which vertex k+1 overtakes vertex k
    auto cutoff = [&](std::size_t k) {
        const double df0 = hull[k + 1].f0 - hull[k].f0;
        const double df1 = hull[k + 1].f1 - hull[k].f1;
        if (df0 <= 0.0) return HUGE_VAL;
        return (phi + (delta + phi) * pi1 * df1 / (pi0 * df0)) / (1.0 - delta);
    };

    double total = 0.0;
    double lo = 0.0;
    for (std::size_t k = 0; k < hull.size() && lo < 1.0; ++k) {
        double hi = k + 1 < hull.size() ? cutoff(k) : HUGE_VAL;
        hi = std::min(1.0, std::max(hi, lo));
        if (hi > lo) {
            const double mass =
                beta_cdf(hi, params.alpha, params.beta) - beta_cdf(lo, params.alpha, params.beta);
            const double gamma_mass =
                mean_gamma * (beta_cdf(hi, params.alpha + 1.0, params.beta) -
                              beta_cdf(lo, params.alpha + 1.0, params.beta));
            total += params.clv * ((1.0 - delta) * pi0 * hull[k].f0 * gamma_mass -
                                   (phi * pi0 * hull[k].f0 +
                                    (delta + phi) * pi1 * hull[k].f1) *
                                       mass);
        }
        lo = hi;
    }
    return total;
}

double empc_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels,
                       const EmpcParams& params, int grid_size) {
    params.validate();
    if (grid_size < 2) throw std::invalid_argument("empc_bruteforce: grid too small");
    const auto pts = roc_points(scores, labels);
    const double pi0 = churner_prior(labels);

    const double h = 1.0 / static_cast<double>(grid_size - 1);
    double prev = 0.0, total = 0.0;
    for (int i = 0; i < grid_size; ++i) {
        const double gamma = static_cast<double>(i) * h;
        double best = 0.0;
        for (const auto& pt : pts)
            best = std::max(best, point_profit(pt, gamma, params, pi0));
        const double val = best * beta_pdf(gamma, params.alpha, params.beta);
        if (i > 0) total += 0.5 * (prev + val) * h;
        prev = val;
    }
    return total;
}

MetricReport evaluate_all(const std::vector<double>& scores, const std::vector<int>& labels,
                          const EmpcParams& params) {
    MetricReport r;
    r.auc = auc(scores, labels);
    r.lift10 = lift(scores, labels, 0.10);
    r.empc = empc(scores, labels, params);
    r.lift_curve = lift_curve(scores, labels, 20);
    return r;
}

void save_lift_curve_csv(const std::vector<std::pair<int, double>>& curve,
                         const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "percentile,lift\n";
    char buf[40];
    for (const auto& [p, v] : curve) {
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        os << p << ',' << std::string_view(buf, res.ptr - buf) << "\n";
    }
}

std::vector<std::pair<int, double>> load_lift_curve_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(is, line) || line != "percentile,lift")
        throw std::runtime_error("bad lift curve header in " + path);
    std::vector<std::pair<int, double>> curve;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("bad lift curve row in " + path);
        curve.emplace_back(std::stoi(line.substr(0, comma)),
                           std::stod(line.substr(comma + 1)));
    }
    return curve;
}

}  // namespace churnlab
