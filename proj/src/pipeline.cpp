#include "churnlab/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>

#include "churnlab/generator.hpp"
#include "churnlab/logit.hpp"
#include "churnlab/rng.hpp"

namespace churnlab {

namespace {

// seed derivation stages; child = derive_seed(parent, {stage, indices...})
enum Stage : std::uint64_t {
    kStageOuterFolds = 10,
    kStageLstmTune = 11,
    kStageOuterOof = 12,
    kStageOuterTestProb = 13,
    kStageLstmFinal = 14,
    kStageLogitTune = 15,
    kStageOuterUndersample = 16,
    kStageInnerFolds = 20,
    kStageInnerOof = 21,
    kStageInnerTestProb = 22,
    kStageInnerUndersample = 23,
    kStageInnerLstmSeed = 24,
    kStageStackFolds = 30,
    kStageStackTrain = 31,
    kStageStackUndersample = 32,
    kStageTestTrain = 33,
    kStageTestUndersample = 34,
};

std::set<std::int64_t> panel_ids(const Panel& p) {
    std::set<std::int64_t> ids;
    for (const auto& r : p.records) ids.insert(r.id);
    return ids;
}

std::vector<int> panel_labels(const Panel& p) {
    std::vector<int> y;
    y.reserve(p.size());
    for (const auto& r : p.records) y.push_back(r.churned ? 1 : 0);
    return y;
}

std::vector<std::vector<double>> standardized_sequences(const Standardizer& rfm_std,
                                                        const Panel& p) {
    std::vector<std::vector<double>> seqs;
    seqs.reserve(p.size());
    for (const auto& r : p.records) seqs.push_back(standardized_sequence(rfm_std, r));
    return seqs;
}

std::string c_key(double c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "C=%g", c);
    return buf;
}

}  // namespace

void CvConfig::validate() const {
    if (outer_k < 2 || inner_k < 2 || stack_k < 2)
        throw std::invalid_argument("CvConfig: all fold counts must be at least 2");
    if (undersample_ratio < 1)
        throw std::invalid_argument("CvConfig: undersample_ratio must be at least 1");
}

Grids Grids::full() {
    Grids g;
    g.logit_c = {0.001, 0.01, 0.02, 0.03, 0.04, 0.05, 0.1, 1.0};
    g.lstm = lstm_full_grid();
    return g;
}

Grids Grids::smoke() {
    Grids g;
    g.logit_c = {0.01, 0.1, 1.0};
    g.lstm = lstm_smoke_grid();
    return g;
}

std::size_t AuditLog::register_model(std::string tag, std::set<std::int64_t> training_ids) {
    models_.push_back({std::move(tag), std::move(training_ids)});
    return models_.size() - 1;
}

void AuditLog::record_prediction(std::size_t model, std::int64_t id, std::string context) {
    predictions_.push_back({model, id, std::move(context)});
}

std::vector<std::string> AuditLog::violations() const {
    std::vector<std::string> out;
    for (const auto& p : predictions_) {
        const auto& m = models_.at(p.model);
        if (m.training_ids.count(p.id))
            out.push_back("id " + std::to_string(p.id) + " scored by model '" + m.tag +
                          "' that trained on it (" + p.context + ")");
    }
    return out;
}

void AuditLog::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t i = 0; i < models_.size(); ++i) {
        os << "model " << i << " tag=" << models_[i].tag << " training_ids=";
        bool first = true;
        for (auto id : models_[i].training_ids) {
            os << (first ? "" : ";") << id;
            first = false;
        }
        os << "\n";
    }
    for (const auto& p : predictions_)
        os << "prediction model=" << p.model << " id=" << p.id << " context=" << p.context
           << "\n";
    const auto bad = violations();
    os << "violations " << bad.size() << "\n";
    for (const auto& v : bad) os << "violation " << v << "\n";
}

std::map<std::int64_t, double> oof_lstm_probabilities(
    const Panel& train, const LstmHyper& hyper, int stack_k, int undersample_ratio,
    std::uint64_t seed, const Standardizer& rfm_std, AuditLog* audit) {
    const auto folds =
        stratified_kfold(train, stack_k, derive_seed(seed, {kStageStackFolds}));
    std::map<std::int64_t, double> probs;
    for (int f = 0; f < stack_k; ++f) {
        const Panel held = train.subset(folds.fold_indices(train, f));
        Panel fit_split = train.subset(folds.complement_indices(train, f));
        fit_split = undersample(
            fit_split, undersample_ratio,
            derive_seed(seed, {kStageStackUndersample, static_cast<std::uint64_t>(f)}));
        LstmHyper h = hyper;
        h.seed = derive_seed(seed, {kStageStackTrain, static_cast<std::uint64_t>(f)});
        const LstmModel model =
            train_lstm(standardized_sequences(rfm_std, fit_split), panel_labels(fit_split), h);
        std::size_t model_id = 0;
        if (audit)
            model_id = audit->register_model("stack-fold" + std::to_string(f) + "," + h.key(),
                                             panel_ids(fit_split));
        for (const auto& r : held.records) {
            const double p = lstm_forward(model, standardized_sequence(rfm_std, r));
            if (!probs.emplace(r.id, p).second)
                throw std::logic_error("duplicate stacked prediction for id " +
                                       std::to_string(r.id));
            if (audit) audit->record_prediction(model_id, r.id, "oof-stack");
        }
    }
    if (probs.size() != train.size())
        throw std::logic_error("stacked probabilities do not cover the training split");
    return probs;
}

std::map<std::int64_t, double> test_probabilities(
    const Panel& train, const Panel& test, const LstmHyper& hyper, int undersample_ratio,
    std::uint64_t seed, const Standardizer& rfm_std, AuditLog* audit) {
    Panel fit_split =
        undersample(train, undersample_ratio, derive_seed(seed, {kStageTestUndersample}));
    LstmHyper h = hyper;
    h.seed = derive_seed(seed, {kStageTestTrain});
    const LstmModel model =
        train_lstm(standardized_sequences(rfm_std, fit_split), panel_labels(fit_split), h);
    std::size_t model_id = 0;
    if (audit) model_id = audit->register_model("test-lstm," + h.key(), panel_ids(fit_split));
    std::map<std::int64_t, double> probs;
    for (const auto& r : test.records) {
        probs[r.id] = lstm_forward(model, standardized_sequence(rfm_std, r));
        if (audit) audit->record_prediction(model_id, r.id, "test");
    }
    return probs;
}

InnerTuneResult tune_inner_logit(const Panel& train, const FeatureSpec& spec,
                                 const std::vector<double>& c_grid, const CvConfig& cfg,
                                 std::uint64_t seed, const LstmHyper* frozen_lstm,
                                 NormQuarter mode, AuditLog* audit) {
    if (c_grid.empty()) throw std::invalid_argument("tune_inner_logit: empty grid");
    if (spec.use_lstm_prob && frozen_lstm == nullptr)
        throw std::invalid_argument("tune_inner_logit: spec needs a frozen LSTM hyper");

    const auto folds =
        stratified_kfold(train, cfg.inner_k, derive_seed(seed, {kStageInnerFolds}));
    std::vector<double> auc_sums(c_grid.size(), 0.0);

    for (int j = 0; j < cfg.inner_k; ++j) {
        const auto ju = static_cast<std::uint64_t>(j);
        const Panel ival = train.subset(folds.fold_indices(train, j));
        const Panel itrain = train.subset(folds.complement_indices(train, j));
        const Standardizer rfm_std = fit_standardizer(itrain);

        std::optional<std::map<std::int64_t, double>> train_probs, val_probs;
        if (spec.use_lstm_prob) {
            train_probs = oof_lstm_probabilities(
                itrain, *frozen_lstm, cfg.stack_k, cfg.undersample_ratio,
                derive_seed(seed, {kStageInnerOof, ju}), rfm_std, audit);
            val_probs = test_probabilities(itrain, ival, *frozen_lstm, cfg.undersample_ratio,
                                           derive_seed(seed, {kStageInnerTestProb, ju}),
                                           rfm_std, audit);
        }

        // column standardizer is fit on the full inner-training split,
        // before under-sampling
        const FeatureMatrix full_train = build_feature_matrix(itrain, spec, train_probs, mode);
        const ColumnStandardizer cs = fit_column_standardizer(full_train);
        const Panel itrain_us = undersample(
            itrain, cfg.undersample_ratio, derive_seed(seed, {kStageInnerUndersample, ju}));
        std::optional<std::map<std::int64_t, double>> us_probs = train_probs;
        const FeatureMatrix x_train = apply_column_standardizer(
            cs, build_feature_matrix(itrain_us, spec, us_probs, mode));
        const FeatureMatrix x_val =
            apply_column_standardizer(cs, build_feature_matrix(ival, spec, val_probs, mode));
        const auto y_train = panel_labels(itrain_us);
        const auto y_val = panel_labels(ival);

        for (std::size_t k = 0; k < c_grid.size(); ++k) {
            const LogisticModel model = fit_l1_logistic(x_train, y_train, c_grid[k]);
            auc_sums[k] += auc(predict_proba(model, x_val), y_val);
        }
    }

    InnerTuneResult out;
    out.mean_aucs.resize(c_grid.size());
    for (std::size_t k = 0; k < c_grid.size(); ++k)
        out.mean_aucs[k] = auc_sums[k] / cfg.inner_k;
    out.best_index = static_cast<std::size_t>(
        std::max_element(out.mean_aucs.begin(), out.mean_aucs.end()) -
        out.mean_aucs.begin());
    return out;
}

InnerTuneResult tune_inner_lstm(const Panel& train, const std::vector<LstmHyper>& grid,
                                const CvConfig& cfg, std::uint64_t seed, AuditLog* audit) {
    if (grid.empty()) throw std::invalid_argument("tune_inner_lstm: empty grid");
    const auto folds =
        stratified_kfold(train, cfg.inner_k, derive_seed(seed, {kStageInnerFolds}));
    std::vector<double> auc_sums(grid.size(), 0.0);

    for (int j = 0; j < cfg.inner_k; ++j) {
        const auto ju = static_cast<std::uint64_t>(j);
        const Panel ival = train.subset(folds.fold_indices(train, j));
        const Panel itrain = train.subset(folds.complement_indices(train, j));
        const Standardizer rfm_std = fit_standardizer(itrain);
        const Panel itrain_us = undersample(
            itrain, cfg.undersample_ratio, derive_seed(seed, {kStageInnerUndersample, ju}));
        const auto seqs = standardized_sequences(rfm_std, itrain_us);
        const auto y_train = panel_labels(itrain_us);
        const auto y_val = panel_labels(ival);

        for (std::size_t k = 0; k < grid.size(); ++k) {
            LstmHyper h = grid[k];
            h.seed = derive_seed(seed, {kStageInnerLstmSeed, ju, k});
            const LstmModel model = train_lstm(seqs, y_train, h);
            std::size_t model_id = 0;
            if (audit)
                model_id = audit->register_model(
                    "inner-lstm fold" + std::to_string(j) + "," + h.key(),
                    panel_ids(itrain_us));
            std::vector<double> scores;
            scores.reserve(ival.size());
            for (const auto& r : ival.records) {
                scores.push_back(lstm_forward(model, standardized_sequence(rfm_std, r)));
                if (audit) audit->record_prediction(model_id, r.id, "inner-val");
            }
            auc_sums[k] += auc(scores, y_val);
        }
    }

    InnerTuneResult out;
    out.mean_aucs.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) out.mean_aucs[k] = auc_sums[k] / cfg.inner_k;
    out.best_index = static_cast<std::size_t>(
        std::max_element(out.mean_aucs.begin(), out.mean_aucs.end()) -
        out.mean_aucs.begin());
    return out;
}

SelectedModel select_reported_model(const std::vector<std::string>& keys,
                                    const std::vector<double>& outer_aucs) {
    if (keys.empty() || keys.size() != outer_aucs.size())
        throw std::invalid_argument("select_reported_model: bad inputs");
    std::map<std::string, int> freq;
    for (const auto& k : keys) ++freq[k];
    int max_freq = 0;
    for (const auto& [k, f] : freq) max_freq = std::max(max_freq, f);

    SelectedModel out;
    if (max_freq > 1) {
        // most frequent set; ties between equally frequent sets break by
        // higher mean AUC
        double best_mean = -1.0;
        for (const auto& [k, f] : freq) {
            if (f != max_freq) continue;
            double sum = 0.0;
            int n = 0;
            for (std::size_t i = 0; i < keys.size(); ++i)
                if (keys[i] == k) {
                    sum += outer_aucs[i];
                    ++n;
                }
            const double mean = sum / n;
            if (mean > best_mean) {
                best_mean = mean;
                out.key = k;
            }
        }
        out.reason = "majority";
    } else {
        std::size_t best = 0;
        for (std::size_t i = 1; i < keys.size(); ++i)
            if (outer_aucs[i] > outer_aucs[best]) best = i;
        out.key = keys[best];
        out.reason = "best-auc";
    }
    return out;
}

ExperimentResult run_experiment(const Panel& panel, const std::vector<FeatureSpec>& specs,
                                const Grids& grids, const CvConfig& cfg,
                                const EmpcParams& empc_params, NormQuarter mode) {
    cfg.validate();
    empc_params.validate();
    panel.validate();
    if (specs.empty()) throw std::invalid_argument("run_experiment: no specs");
    const double prev = panel.churn_prevalence();
    if (!(prev > 0.0 && prev < 1.0))
        throw std::invalid_argument("run_experiment: panel needs both classes");

    const bool needs_lstm = std::any_of(specs.begin(), specs.end(), [](const FeatureSpec& s) {
        return s.use_lstm_prob;
    });

    ExperimentResult result;
    result.config = cfg;
    result.specs.resize(specs.size());
    for (std::size_t s = 0; s < specs.size(); ++s) {
        result.specs[s].spec = specs[s];
        result.specs[s].display_name = spec_display_name(specs[s]);
    }

    const auto outer = stratified_kfold(panel, cfg.outer_k,
                                        derive_seed(cfg.master_seed, {kStageOuterFolds}));

    for (int o = 0; o < cfg.outer_k; ++o) {
        const auto ou = static_cast<std::uint64_t>(o);
        const Panel test = panel.subset(outer.fold_indices(panel, o));
        const Panel train = panel.subset(outer.complement_indices(panel, o));
        const Standardizer rfm_std = fit_standardizer(train);

        // Stage 1: resolve the LSTM grid once per outer fold; the winner is
        // frozen for every spec that stacks its probabilities.
        LstmHyper chosen_lstm;
        if (needs_lstm) {
            const auto tuned = tune_inner_lstm(train, grids.lstm, cfg,
                                               derive_seed(cfg.master_seed, {kStageLstmTune, ou}),
                                               &result.audit);
            chosen_lstm = grids.lstm[tuned.best_index];
        }

        std::optional<std::map<std::int64_t, double>> oof_probs, test_probs;
        bool needs_stacked_cols =
            std::any_of(specs.begin(), specs.end(), [](const FeatureSpec& s) {
                return s.use_lstm_prob && s.use_static;
            });
        if (needs_stacked_cols) {
            oof_probs = oof_lstm_probabilities(
                train, chosen_lstm, cfg.stack_k, cfg.undersample_ratio,
                derive_seed(cfg.master_seed, {kStageOuterOof, ou}), rfm_std, &result.audit);
            test_probs = test_probabilities(
                train, test, chosen_lstm, cfg.undersample_ratio,
                derive_seed(cfg.master_seed, {kStageOuterTestProb, ou}), rfm_std,
                &result.audit);
        }

        const auto y_test = panel_labels(test);

        for (std::size_t s = 0; s < specs.size(); ++s) {
            const FeatureSpec& spec = specs[s];
            SpecResult& sr = result.specs[s];
            std::vector<double> scores;
            std::string hyper_key;

            if (!spec.use_static && spec.use_lstm_prob && !spec.use_agg_rfm &&
                !spec.use_norm_lagged) {
                // sequence model evaluated directly on the test fold
                const auto probs = test_probabilities(
                    train, test, chosen_lstm, cfg.undersample_ratio,
                    derive_seed(cfg.master_seed, {kStageLstmFinal, ou}), rfm_std,
                    &result.audit);
                scores.reserve(test.size());
                for (const auto& r : test.records) scores.push_back(probs.at(r.id));
                hyper_key = chosen_lstm.key();
            } else {
                const auto tuned = tune_inner_logit(
                    train, spec, grids.logit_c, cfg,
                    derive_seed(cfg.master_seed, {kStageLogitTune, ou, s}),
                    spec.use_lstm_prob ? &chosen_lstm : nullptr, mode, &result.audit);
                const double c = grids.logit_c[tuned.best_index];
                hyper_key = c_key(c);
                if (spec.use_lstm_prob) hyper_key += "|" + chosen_lstm.key();

                const FeatureMatrix full_train =
                    build_feature_matrix(train, spec, oof_probs, mode);
                const ColumnStandardizer cs = fit_column_standardizer(full_train);
                const Panel train_us = undersample(
                    train, cfg.undersample_ratio,
                    derive_seed(cfg.master_seed, {kStageOuterUndersample, ou, s}));
                const FeatureMatrix x_train = apply_column_standardizer(
                    cs, build_feature_matrix(train_us, spec, oof_probs, mode));
                const FeatureMatrix x_test = apply_column_standardizer(
                    cs, build_feature_matrix(test, spec, test_probs, mode));
                const LogisticModel model =
                    fit_l1_logistic(x_train, panel_labels(train_us), c);
                scores = predict_proba(model, x_test);
            }

            sr.fold_reports.push_back(evaluate_all(scores, y_test, empc_params));
            sr.fold_hyper_keys.push_back(hyper_key);
            sr.fold_aucs.push_back(sr.fold_reports.back().auc);
        }
    }

    for (auto& sr : result.specs) {
        const auto sel = select_reported_model(sr.fold_hyper_keys, sr.fold_aucs);
        sr.final_hyper_key = sel.key;
        sr.selection_reason = sel.reason;

        MetricReport mean;
        mean.lift_curve.assign(sr.fold_reports.front().lift_curve.size(), {0, 0.0});
        for (const auto& r : sr.fold_reports) {
            mean.auc += r.auc;
            mean.lift10 += r.lift10;
            mean.empc += r.empc;
            for (std::size_t p = 0; p < r.lift_curve.size(); ++p) {
                mean.lift_curve[p].first = r.lift_curve[p].first;
                mean.lift_curve[p].second += r.lift_curve[p].second;
            }
        }
        const double k = static_cast<double>(sr.fold_reports.size());
        mean.auc /= k;
        mean.lift10 /= k;
        mean.empc /= k;
        for (auto& [p, v] : mean.lift_curve) v /= k;
        sr.mean_report = mean;
    }
    return result;
}

}  // namespace churnlab
