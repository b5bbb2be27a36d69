#include "churnlab/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "churnlab/rng.hpp"

namespace churnlab {

FoldAssignment stratified_kfold(const Panel& panel, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("fold count must be at least 2");
    std::vector<std::size_t> churners, others;
    for (std::size_t i = 0; i < panel.records.size(); ++i)
        (panel.records[i].churned ? churners : others).push_back(i);
    if (churners.size() < static_cast<std::size_t>(k))
        throw std::invalid_argument("need at least " + std::to_string(k) +
                                    " churners for " + std::to_string(k) +
                                    " stratified folds, have " +
                                    std::to_string(churners.size()));
    if (others.size() < static_cast<std::size_t>(k))
        throw std::invalid_argument("need at least " + std::to_string(k) +
                                    " non-churners, have " + std::to_string(others.size()));

    Rng rng(derive_seed(seed, {0x5f01}));
    std::shuffle(churners.begin(), churners.end(), rng);
    std::shuffle(others.begin(), others.end(), rng);

    FoldAssignment fa;
    fa.k = k;
    int f = 0;
    for (std::size_t i : churners) {
        fa.fold_of[panel.records[i].id] = f;
        f = (f + 1) % k;
    }
    f = 0;
    for (std::size_t i : others) {
        fa.fold_of[panel.records[i].id] = f;
        f = (f + 1) % k;
    }
    return fa;
}

Panel undersample(const Panel& panel, int ratio, std::uint64_t seed) {
    if (ratio < 1) throw std::invalid_argument("undersample ratio must be >= 1");
    std::vector<std::size_t> churners, others;
    for (std::size_t i = 0; i < panel.records.size(); ++i)
        (panel.records[i].churned ? churners : others).push_back(i);
    const std::size_t want =
        static_cast<std::size_t>(ratio) * churners.size();
    if (others.size() < want)
        throw std::invalid_argument("undersample needs " + std::to_string(want) +
                                    " non-churners, have " + std::to_string(others.size()));

    Rng rng(derive_seed(seed, {0x5f02}));
    std::shuffle(others.begin(), others.end(), rng);
    others.resize(want);

    std::vector<std::size_t> keep = churners;
    keep.insert(keep.end(), others.begin(), others.end());
    std::sort(keep.begin(), keep.end());  // preserve original record order
    return panel.subset(keep);
}

namespace {

// Population mean/std of one column; constant columns get std 1.
void mean_std(const std::vector<double>& values, double& mean, double& sd, bool& constant) {
    double sum = 0.0;
    for (double v : values) sum += v;
    mean = values.empty() ? 0.0 : sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    double var = values.empty() ? 0.0 : ss / static_cast<double>(values.size());
    sd = std::sqrt(var);
    constant = sd <= 1e-12;
    if (constant) sd = 1.0;
}

}  // namespace

Standardizer fit_standardizer(const Panel& panel) {
    Standardizer out;
    const std::size_t p = panel.n_static();
    out.static_means.resize(p);
    out.static_stds.resize(p);
    out.static_constant.resize(p);
    std::vector<double> col(panel.records.size());
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < panel.records.size(); ++i)
            col[i] = panel.records[i].static_features[j];
        bool flag = false;
        mean_std(col, out.static_means[j], out.static_stds[j], flag);
        out.static_constant[j] = flag;
    }
    out.rfm_means.resize(kChannels);
    out.rfm_stds.resize(kChannels);
    out.rfm_constant.resize(kChannels);
    std::vector<double> pooled;
    pooled.reserve(panel.records.size() * static_cast<std::size_t>(panel.months));
    for (int c = 0; c < kChannels; ++c) {
        pooled.clear();
        for (const auto& r : panel.records)
            for (int t = 0; t < panel.months; ++t) pooled.push_back(r.rfm_at(t, c));
        bool flag = false;
        mean_std(pooled, out.rfm_means[c], out.rfm_stds[c], flag);
        out.rfm_constant[c] = flag;
    }
    return out;
}

Panel apply_standardizer(const Standardizer& std_params, const Panel& panel) {
    if (std_params.static_means.size() != panel.n_static())
        throw std::invalid_argument("standardizer static dimension mismatch");
    Panel out = panel;
    for (auto& r : out.records) {
        for (std::size_t j = 0; j < r.static_features.size(); ++j)
            r.static_features[j] =
                (r.static_features[j] - std_params.static_means[j]) / std_params.static_stds[j];
        for (int t = 0; t < out.months; ++t)
            for (int c = 0; c < kChannels; ++c)
                r.rfm_at(t, c) = (r.rfm_at(t, c) - std_params.rfm_means[c]) /
                                 std_params.rfm_stds[c];
    }
    return out;
}

std::vector<double> standardized_sequence(const Standardizer& std_params,
                                          const CustomerRecord& record) {
    std::vector<double> seq(record.rfm.size());
    const int months = static_cast<int>(record.rfm.size()) / kChannels;
    for (int t = 0; t < months; ++t)
        for (int c = 0; c < kChannels; ++c)
            seq[static_cast<std::size_t>(t) * kChannels + c] =
                (record.rfm_at(t, c) - std_params.rfm_means[c]) / std_params.rfm_stds[c];
    return seq;
}

}  // namespace churnlab
