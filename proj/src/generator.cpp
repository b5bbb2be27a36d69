#include "churnlab/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "churnlab/rng.hpp"

namespace churnlab {

void GeneratorConfig::validate() const {
    if (n_customers <= 0) throw std::invalid_argument("n_customers must be positive");
    if (!(churn_rate > 0.0 && churn_rate < 1.0))
        throw std::invalid_argument("churn_rate must lie in (0,1)");
    if (n_static < 0) throw std::invalid_argument("n_static must be non-negative");
    if (n_signal_static < 0 || n_signal_static > n_static)
        throw std::invalid_argument("n_signal_static must lie in [0, n_static]");
    if (signal_strength < 0.0)
        throw std::invalid_argument("signal_strength must be non-negative");
    if (!(noise_scale > 0.0)) throw std::invalid_argument("noise_scale must be positive");
}

int expected_churners(const GeneratorConfig& config) {
    return static_cast<int>(std::floor(config.churn_rate * config.n_customers + 0.5));
}

namespace {

constexpr double kStaticNoise = 0.45;      // logistic latent noise scale
constexpr double kRecencyShift = 3.5;      // churner recency level drop per unit signal
constexpr double kDecayPerMonth = 0.15;    // churner tail decay per month per unit signal
constexpr double kSeasonalAmp = 0.08;
constexpr int kDecayMonths = 6;

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

Panel generate_synthetic(const GeneratorConfig& config) {
    config.validate();
    const int n = config.n_customers;
    const int n_churn = expected_churners(config);
    const double s = config.signal_strength;

    // Static features plus a latent churn score; churn labels are the
    // customers with the n_churn largest scores, so the leading signal
    // columns correlate with the label through the selection.
    std::vector<std::vector<double>> statics(n);
    std::vector<double> score(n);
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(config.seed, {1, static_cast<std::uint64_t>(i)}));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        auto& row = statics[i];
        row.resize(config.n_static);
        double sig = 0.0;
        for (int j = 0; j < config.n_static; ++j) {
            row[j] = clamp01(unif(rng));
            if (j < config.n_signal_static) sig += row[j];
        }
        // logistic noise via inverse CDF
        double u = unif(rng);
        u = std::min(1.0 - 1e-12, std::max(1e-12, u));
        score[i] = sig + kStaticNoise * std::log(u / (1.0 - u));
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    });
    std::vector<char> churned(n, 0);
    for (int r = 0; r < n_churn; ++r) churned[order[r]] = 1;

    Panel panel;
    panel.months = kMonths;
    panel.static_names.resize(config.n_static);
    for (int j = 0; j < config.n_static; ++j)
        panel.static_names[j] = "s" + std::to_string(j);
    panel.records.resize(n);

    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(config.seed, {2, static_cast<std::uint64_t>(i)}));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);

        double base[kChannels];
        base[static_cast<int>(RfmChannel::recency)] = 5.0 + 10.0 * unif(rng);
        base[static_cast<int>(RfmChannel::frequency)] = 1.0 + 4.0 * unif(rng);
        base[static_cast<int>(RfmChannel::monetary)] = 50.0 + 100.0 * unif(rng);
        const double phase = 2.0 * std::numbers::pi * unif(rng);

        if (churned[i]) {
            double& rec = base[static_cast<int>(RfmChannel::recency)];
            rec = std::max(0.5, rec - kRecencyShift * s);
        }

        CustomerRecord& r = panel.records[i];
        r.id = i;
        r.churned = churned[i] != 0;
        r.static_features = std::move(statics[i]);
        r.rfm.resize(static_cast<std::size_t>(kMonths) * kChannels);
        for (int t = 0; t < kMonths; ++t) {
            const double seasonal =
                1.0 + kSeasonalAmp * std::sin(2.0 * std::numbers::pi * t / 12.0 + phase);
            for (int c = 0; c < kChannels; ++c) {
                double v = base[c] * seasonal +
                           config.noise_scale * kSeasonalAmp * base[c] * gauss(rng);
                if (churned[i] && c != static_cast<int>(RfmChannel::recency) &&
                    t >= kMonths - kDecayMonths) {
                    const double factor =
                        1.0 - kDecayPerMonth * s * (t - (kMonths - kDecayMonths) + 1);
                    v *= std::max(0.0, factor);
                }
                r.rfm_at(t, c) = std::max(0.0, v);
            }
        }
    }
    return panel;
}

}  // namespace churnlab
