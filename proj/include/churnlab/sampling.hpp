#pragma once

#include <cstdint>

#include "churnlab/panel.hpp"

namespace churnlab {

// Stratified k-fold split: churners and non-churners are shuffled separately
// and dealt round-robin, so per-fold minority counts differ by at most one.
// Throws if either class has fewer than k members.
FoldAssignment stratified_kfold(const Panel& panel, int k, std::uint64_t seed);

// Keeps every churner and draws ratio * #churners non-churners without
// replacement. Training splits only; the pipeline never touches test folds.
Panel undersample(const Panel& panel, int ratio, std::uint64_t seed);

// Per-column standardization parameters for static features plus one
// mean/std pair per RFM channel pooled over customers and time steps.
// Constant columns keep std = 1 and are flagged.
struct Standardizer {
    std::vector<double> static_means, static_stds;
    std::vector<bool> static_constant;
    std::vector<double> rfm_means, rfm_stds;  // length kChannels
    std::vector<bool> rfm_constant;
};

Standardizer fit_standardizer(const Panel& panel);
Panel apply_standardizer(const Standardizer& std_params, const Panel& panel);

// Standardized RFM sequence for one record (row-major months x channels);
// the input a trained LSTM consumes.
std::vector<double> standardized_sequence(const Standardizer& std_params,
                                          const CustomerRecord& record);

}  // namespace churnlab
