#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "churnlab/features.hpp"
#include "churnlab/lstm.hpp"
#include "churnlab/metrics.hpp"
#include "churnlab/panel.hpp"
#include "churnlab/sampling.hpp"

namespace churnlab {

struct CvConfig {
    int outer_k = 3;
    int inner_k = 4;
    int stack_k = 4;  // folds for out-of-fold probability stacking
    int undersample_ratio = 2;
    std::uint64_t master_seed = 0;

    void validate() const;
};

struct Grids {
    std::vector<double> logit_c;
    std::vector<LstmHyper> lstm;

    // Table grids: C in {0.001,...,1}, LSTM hidden x epochs x batch.
    static Grids full();
    // Reduced grid for fast runs: C in {0.01, 0.1, 1}, H=5, bs=50,
    // epochs in {10, 25}.
    static Grids smoke();
};

// Records which ids every model was trained on and which ids it scored, so
// leakage (a model scoring an id it trained on) is checkable after a run.
class AuditLog {
  public:
    std::size_t register_model(std::string tag, std::set<std::int64_t> training_ids);
    void record_prediction(std::size_t model, std::int64_t id, std::string context);

    // One line per stacked/test probability whose producing model saw the
    // predicted id during training; empty means the run is leak-free.
    std::vector<std::string> violations() const;
    std::size_t n_models() const { return models_.size(); }
    std::size_t n_predictions() const { return predictions_.size(); }
    const std::set<std::int64_t>& training_ids(std::size_t model) const {
        return models_.at(model).training_ids;
    }
    void save(const std::string& path) const;

  private:
    struct ModelEntry {
        std::string tag;
        std::set<std::int64_t> training_ids;
    };
    struct Prediction {
        std::size_t model;
        std::int64_t id;
        std::string context;
    };
    std::vector<ModelEntry> models_;
    std::vector<Prediction> predictions_;
};

// Out-of-fold stacking: every training id is scored by an LSTM whose
// (under-sampled) training fold excludes it. Sequences are standardized
// with rfm_std, fit upstream on the training split before under-sampling.
std::map<std::int64_t, double> oof_lstm_probabilities(
    const Panel& train, const LstmHyper& hyper, int stack_k, int undersample_ratio,
    std::uint64_t seed, const Standardizer& rfm_std, AuditLog* audit = nullptr);

// One LSTM trained on the full (under-sampled) training split scores every
// test id.
std::map<std::int64_t, double> test_probabilities(
    const Panel& train, const Panel& test, const LstmHyper& hyper, int undersample_ratio,
    std::uint64_t seed, const Standardizer& rfm_std, AuditLog* audit = nullptr);

struct InnerTuneResult {
    std::size_t best_index = 0;
    std::vector<double> mean_aucs;  // one per grid point, inner-fold mean
};

// Inner-fold tuning of the logistic regularization constant for one feature
// spec. frozen_lstm supplies the stacked probabilities when the spec uses
// them (two-stage tuning: the LSTM grid is resolved first).
InnerTuneResult tune_inner_logit(const Panel& train, const FeatureSpec& spec,
                                 const std::vector<double>& c_grid, const CvConfig& cfg,
                                 std::uint64_t seed, const LstmHyper* frozen_lstm,
                                 NormQuarter mode = NormQuarter::preceding,
                                 AuditLog* audit = nullptr);

// Inner-fold tuning over the LSTM hyperparameter grid (AUC on the inner
// validation folds; ties break by grid order).
InnerTuneResult tune_inner_lstm(const Panel& train, const std::vector<LstmHyper>& grid,
                                const CvConfig& cfg, std::uint64_t seed,
                                AuditLog* audit = nullptr);

struct SelectedModel {
    std::string key;
    std::string reason;  // "majority" or "best-auc"
};

// Majority vote over the per-outer-fold hyperparameter choices; ties among
// equally frequent sets break by higher mean AUC, all-distinct falls back to
// the single highest AUC.
SelectedModel select_reported_model(const std::vector<std::string>& keys,
                                    const std::vector<double>& outer_aucs);

struct SpecResult {
    FeatureSpec spec;
    std::string display_name;
    std::vector<MetricReport> fold_reports;
    MetricReport mean_report;
    std::vector<std::string> fold_hyper_keys;
    std::vector<double> fold_aucs;
    std::string final_hyper_key;
    std::string selection_reason;
};

struct ExperimentResult {
    std::vector<SpecResult> specs;
    AuditLog audit;
    CvConfig config;
};

ExperimentResult run_experiment(const Panel& panel, const std::vector<FeatureSpec>& specs,
                                const Grids& grids, const CvConfig& cfg,
                                const EmpcParams& empc_params = {},
                                NormQuarter mode = NormQuarter::preceding);

// Result persistence: report.csv (one row per model), folds.csv, one lift-curve
// CSV per spec and outer fold, audit log, resolved_config.
void write_experiment_outputs(const ExperimentResult& result, const std::string& out_dir,
                              const std::map<std::string, std::string>& resolved_config);

// Self-contained SVG overlaying one lift curve per named series.
void write_lift_curve_svg(
    const std::string& path, const std::string& title,
    const std::vector<std::pair<std::string, std::vector<std::pair<int, double>>>>& series);

}  // namespace churnlab
