#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "churnlab/panel.hpp"

namespace churnlab {

// Arithmetic mean of a series.
double agg_mean(std::span<const double> series);

// Mean of consecutive first differences. Telescopes to
// (last - first) / (T - 1), which is how it is computed.
double agg_mean_first_diff(std::span<const double> series);

// Which calendar quarter divides the six lagged values.
enum class NormQuarter {
    preceding,  // each month normalized by the mean of the preceding quarter
    final,      // all six months normalized by the mean of months 34-36
};

struct NormalizedLags {
    std::array<double, 6> values{};
    std::array<bool, 6> guarded{};  // true where the denominator hit epsilon
};

// Last six values of a 36-month series, each divided by the mean of the
// calendar quarter before its own (months grouped 1-3, 4-6, ..., 34-36).
// Denominators below epsilon are replaced by epsilon and flagged.
NormalizedLags normalized_lagged(std::span<const double> series,
                                 double epsilon = 1e-6,
                                 NormQuarter mode = NormQuarter::preceding);

// One experiment row: a combination of feature blocks.
struct FeatureSpec {
    bool use_static = false;
    bool use_agg_rfm = false;       // per-channel mean + mean first difference
    bool use_norm_lagged = false;   // six normalized lags per channel
    bool use_lstm_prob = false;     // stacked LSTM probability column
    // Drops the first-difference columns from use_agg_rfm when false.
    bool agg_include_diff = true;

    void validate() const;
    std::size_t n_columns(std::size_t n_static) const;
    // Short key such as "static+lstm+agg" used in file names and reports.
    std::string key() const;
};

// The nine experiment rows, in report order.
std::vector<FeatureSpec> all_model_specs();
std::string spec_display_name(const FeatureSpec& spec);

struct FeatureMatrix {
    std::vector<std::int64_t> ids;
    std::vector<std::string> column_names;
    std::vector<double> values;  // row-major

    std::size_t n_rows() const { return ids.size(); }
    std::size_t n_cols() const { return column_names.size(); }
    double at(std::size_t row, std::size_t col) const {
        return values[row * n_cols() + col];
    }
    double& at(std::size_t row, std::size_t col) { return values[row * n_cols() + col]; }
    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * n_cols(), n_cols()};
    }

    void save_csv(const std::string& path) const;
};

FeatureMatrix build_feature_matrix(
    const Panel& panel, const FeatureSpec& spec,
    const std::optional<std::map<std::int64_t, double>>& lstm_probs = std::nullopt,
    NormQuarter mode = NormQuarter::preceding);

// Per-column standardization of an assembled design matrix (the logistic
// model's inputs, stacked probability included). Constant columns keep
// std = 1 and are flagged.
struct ColumnStandardizer {
    std::vector<double> means, stds;
    std::vector<bool> constant;
};

ColumnStandardizer fit_column_standardizer(const FeatureMatrix& m);
FeatureMatrix apply_column_standardizer(const ColumnStandardizer& cs,
                                        const FeatureMatrix& m);

}  // namespace churnlab
