#include "churnlab/features.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace churnlab {

double agg_mean(std::span<const double> series) {
    if (series.empty()) throw std::invalid_argument("agg_mean: empty series");
    double sum = 0.0;
    for (double v : series) sum += v;
    return sum / static_cast<double>(series.size());
}

double agg_mean_first_diff(std::span<const double> series) {
    if (series.size() < 2)
        throw std::invalid_argument("agg_mean_first_diff: need at least 2 values");
    return (series.back() - series.front()) / static_cast<double>(series.size() - 1);
}

NormalizedLags normalized_lagged(std::span<const double> series, double epsilon,
                                 NormQuarter mode) {
    if (series.size() != kMonths)
        throw std::invalid_argument("normalized_lagged: series must have 36 months");
    if (!(epsilon > 0.0)) throw std::invalid_argument("normalized_lagged: epsilon <= 0");

    auto quarter_mean = [&](int first_month) {  // 0-based start of a 3-month block
        return (series[first_month] + series[first_month + 1] + series[first_month + 2]) / 3.0;
    };

    NormalizedLags out;
    for (int k = 0; k < 6; ++k) {
        const int t = kMonths - 6 + k;  // 0-based month index, 30..35
        double denom;
        if (mode == NormQuarter::final) {
            denom = quarter_mean(kMonths - 3);
        } else {
            const int own_quarter_start = (t / 3) * 3;
            denom = quarter_mean(own_quarter_start - 3);
        }
        const bool guard = denom < epsilon;
        out.guarded[k] = guard;
        out.values[k] = series[t] / (guard ? epsilon : denom);
    }
    return out;
}

void FeatureSpec::validate() const {
    if (!use_static && !use_agg_rfm && !use_norm_lagged && !use_lstm_prob)
        throw std::invalid_argument("FeatureSpec: at least one feature group required");
}

std::size_t FeatureSpec::n_columns(std::size_t n_static) const {
    std::size_t n = 0;
    if (use_static) n += n_static;
    if (use_agg_rfm) n += agg_include_diff ? 6 : 3;
    if (use_norm_lagged) n += 18;
    if (use_lstm_prob) n += 1;
    return n;
}

std::string FeatureSpec::key() const {
    std::string k;
    auto add = [&](const char* part) {
        if (!k.empty()) k += '+';
        k += part;
    };
    if (use_static) add("static");
    if (use_lstm_prob) add("lstm");
    if (use_agg_rfm) add("agg");
    if (use_norm_lagged) add("norm");
    return k;
}

std::vector<FeatureSpec> all_model_specs() {
    auto make = [](bool st, bool prob, bool agg, bool norm) {
        FeatureSpec s;
        s.use_static = st;
        s.use_lstm_prob = prob;
        s.use_agg_rfm = agg;
        s.use_norm_lagged = norm;
        return s;
    };
    return {
        make(true, false, false, false),   // Only static
        make(true, false, true, false),    // Static + agg. RFM
        make(true, false, false, true),    // Static + norm. lagged RFM
        make(true, false, true, true),     // Static + agg. RFM + norm. lagged RFM
        make(true, true, false, false),    // Static + LSTM prob.
        make(true, true, false, true),     // Static + LSTM prob. + norm. lagged RFM
        make(true, true, true, false),     // Static + LSTM prob. + agg. RFM
        make(true, true, true, true),      // Static + LSTM prob. + agg. + norm. lagged
        make(false, true, false, false),   // LSTM alone (sequence model, no logit)
    };
}

std::string spec_display_name(const FeatureSpec& spec) {
    if (!spec.use_static && spec.use_lstm_prob && !spec.use_agg_rfm && !spec.use_norm_lagged)
        return "LSTM Neural network";
    std::string name;
    auto add = [&](const std::string& part) {
        if (!name.empty()) name += " + ";
        name += part;
    };
    if (spec.use_static) add("Static");
    if (spec.use_lstm_prob) add("LSTM prob.");
    if (spec.use_agg_rfm) add("agg. RFM");
    if (spec.use_norm_lagged) add("norm. lagged RFM");
    if (name == "Static") name = "Only static";
    return name;
}

FeatureMatrix build_feature_matrix(
    const Panel& panel, const FeatureSpec& spec,
    const std::optional<std::map<std::int64_t, double>>& lstm_probs, NormQuarter mode) {
    spec.validate();
    if (spec.use_lstm_prob && !lstm_probs)
        throw std::invalid_argument("build_feature_matrix: spec needs LSTM probabilities");

    const char* ch_name[kChannels] = {"r", "f", "m"};
    FeatureMatrix m;
    if (spec.use_static)
        m.column_names.insert(m.column_names.end(), panel.static_names.begin(),
                              panel.static_names.end());
    if (spec.use_agg_rfm)
        for (int c = 0; c < kChannels; ++c) {
            m.column_names.push_back(std::string(ch_name[c]) + "_mean");
            if (spec.agg_include_diff)
                m.column_names.push_back(std::string(ch_name[c]) + "_dmean");
        }
    if (spec.use_norm_lagged)
        for (int c = 0; c < kChannels; ++c)
            for (int k = 0; k < 6; ++k)
                m.column_names.push_back(std::string(ch_name[c]) + "_norm" +
                                         std::to_string(kMonths - 5 + k));
    if (spec.use_lstm_prob) m.column_names.push_back("lstm_prob");

    m.ids.reserve(panel.records.size());
    m.values.reserve(panel.records.size() * m.column_names.size());
    for (const auto& r : panel.records) {
        m.ids.push_back(r.id);
        if (spec.use_static)
            m.values.insert(m.values.end(), r.static_features.begin(),
                            r.static_features.end());
        if (spec.use_agg_rfm)
            for (int c = 0; c < kChannels; ++c) {
                const auto series = r.channel_series(c);
                m.values.push_back(agg_mean(series));
                if (spec.agg_include_diff) m.values.push_back(agg_mean_first_diff(series));
            }
        if (spec.use_norm_lagged)
            for (int c = 0; c < kChannels; ++c) {
                const auto lags = normalized_lagged(r.channel_series(c), 1e-6, mode);
                m.values.insert(m.values.end(), lags.values.begin(), lags.values.end());
            }
        if (spec.use_lstm_prob) {
            auto it = lstm_probs->find(r.id);
            if (it == lstm_probs->end())
                throw std::invalid_argument("missing LSTM probability for id " +
                                            std::to_string(r.id));
            m.values.push_back(it->second);
        }
    }
    for (double v : m.values)
        if (!std::isfinite(v))
            throw std::runtime_error("build_feature_matrix: non-finite feature value");
    return m;
}

void FeatureMatrix::save_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "id";
    for (const auto& c : column_names) os << "," << c;
    os << "\n";
    char buf[40];
    for (std::size_t i = 0; i < n_rows(); ++i) {
        os << ids[i];
        for (std::size_t j = 0; j < n_cols(); ++j) {
            auto res = std::to_chars(buf, buf + sizeof buf, at(i, j));
            os << ',' << std::string_view(buf, res.ptr - buf);
        }
        os << "\n";
    }
}

ColumnStandardizer fit_column_standardizer(const FeatureMatrix& m) {
    ColumnStandardizer cs;
    const std::size_t p = m.n_cols(), n = m.n_rows();
    cs.means.assign(p, 0.0);
    cs.stds.assign(p, 1.0);
    cs.constant.assign(p, false);
    if (n == 0) return cs;
    for (std::size_t j = 0; j < p; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += m.at(i, j);
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = m.at(i, j) - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        cs.means[j] = mean;
        cs.constant[j] = sd <= 1e-12;
        cs.stds[j] = cs.constant[j] ? 1.0 : sd;
    }
    return cs;
}

FeatureMatrix apply_column_standardizer(const ColumnStandardizer& cs,
                                        const FeatureMatrix& m) {
    if (cs.means.size() != m.n_cols())
        throw std::invalid_argument("column standardizer dimension mismatch");
    FeatureMatrix out = m;
    for (std::size_t i = 0; i < m.n_rows(); ++i)
        for (std::size_t j = 0; j < m.n_cols(); ++j)
            out.at(i, j) = (m.at(i, j) - cs.means[j]) / cs.stds[j];
    return out;
}

}  // namespace churnlab
