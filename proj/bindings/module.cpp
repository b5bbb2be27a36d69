#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "churnlab/features.hpp"
#include "churnlab/generator.hpp"
#include "churnlab/logit.hpp"
#include "churnlab/lstm.hpp"
#include "churnlab/metrics.hpp"
#include "churnlab/pipeline.hpp"
#include "churnlab/sampling.hpp"

namespace py = pybind11;
using namespace churnlab;

namespace {

FeatureMatrix matrix_from_rows(const std::vector<std::vector<double>>& rows,
                               std::vector<std::string> names) {
    FeatureMatrix m;
    if (!rows.empty() && names.empty())
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            names.push_back("x" + std::to_string(j));
    m.column_names = std::move(names);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.column_names.size())
            throw std::invalid_argument("ragged feature rows");
        m.ids.push_back(static_cast<std::int64_t>(i));
        m.values.insert(m.values.end(), rows[i].begin(), rows[i].end());
    }
    return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "churnlab core: RFM churn experiments (synthetic panels, L1 "
              "logistic regression, LSTM stacking, profit-based evaluation)";

    py::class_<Panel>(m, "Panel")
        .def_property_readonly("n_customers", &Panel::size)
        .def_property_readonly("n_churners", &Panel::n_churners)
        .def_property_readonly("churn_prevalence", &Panel::churn_prevalence)
        .def_property_readonly("months", [](const Panel& p) { return p.months; })
        .def_property_readonly("static_names",
                               [](const Panel& p) { return p.static_names; })
        .def("save_csv", [](const Panel& p, const std::string& path) { save_csv(p, path); })
        .def("labels",
             [](const Panel& p) {
                 std::vector<int> y;
                 for (const auto& r : p.records) y.push_back(r.churned ? 1 : 0);
                 return y;
             })
        .def("__len__", &Panel::size)
        .def("__eq__", [](const Panel& a, const Panel& b) { return a == b; });

    m.def(
        "generate_synthetic",
        [](int n, double churn_rate, int n_static, double signal_strength,
           double noise_scale, std::uint64_t seed) {
            GeneratorConfig cfg;
            cfg.n_customers = n;
            cfg.churn_rate = churn_rate;
            cfg.n_static = n_static;
            cfg.signal_strength = signal_strength;
            cfg.noise_scale = noise_scale;
            cfg.seed = seed;
            return generate_synthetic(cfg);
        },
        py::arg("n"), py::arg("churn_rate") = 0.00243, py::arg("n_static") = 10,
        py::arg("signal_strength") = 1.0, py::arg("noise_scale") = 1.0, py::arg("seed") = 0);
    m.def("load_csv", &load_csv, py::arg("path"));

    m.def("agg_mean",
          [](const std::vector<double>& x) { return agg_mean(x); });
    m.def("agg_mean_first_diff",
          [](const std::vector<double>& x) { return agg_mean_first_diff(x); });
    m.def(
        "normalized_lagged",
        [](const std::vector<double>& x, double epsilon) {
            const auto lags = normalized_lagged(x, epsilon);
            return std::vector<double>(lags.values.begin(), lags.values.end());
        },
        py::arg("series"), py::arg("epsilon") = 1e-6);

    py::class_<LogisticModel>(m, "LogisticModel")
        .def_readonly("weights", &LogisticModel::weights)
        .def_readonly("intercept", &LogisticModel::intercept)
        .def_readonly("C", &LogisticModel::C)
        .def_readonly("converged", &LogisticModel::converged)
        .def_readonly("n_iter", &LogisticModel::n_iter)
        .def("predict_proba",
             [](const LogisticModel& model, const std::vector<std::vector<double>>& rows) {
                 return predict_proba(model, matrix_from_rows(rows, model.column_names));
             });
    m.def(
        "fit_l1_logistic",
        [](const std::vector<std::vector<double>>& rows, const std::vector<int>& y,
           double C) { return fit_l1_logistic(matrix_from_rows(rows, {}), y, C); },
        py::arg("X"), py::arg("y"), py::arg("C") = 1.0);

    py::class_<LstmModel>(m, "LstmModel")
        .def_property_readonly("hidden", [](const LstmModel& m_) { return m_.hidden; })
        .def("predict",
             [](const LstmModel& model, const std::vector<double>& seq) {
                 return lstm_forward(model, seq);
             });
    m.def(
        "train_lstm",
        [](const std::vector<std::vector<double>>& sequences, const std::vector<int>& labels,
           int hidden_units, double learning_rate, int epochs, int batch_size,
           std::uint64_t seed) {
            LstmHyper hy;
            hy.hidden_units = hidden_units;
            hy.learning_rate = learning_rate;
            hy.epochs = epochs;
            hy.batch_size = batch_size;
            hy.seed = seed;
            return train_lstm(sequences, labels, hy);
        },
        py::arg("sequences"), py::arg("labels"), py::arg("hidden_units") = 5,
        py::arg("learning_rate") = 0.001, py::arg("epochs") = 10, py::arg("batch_size") = 50,
        py::arg("seed") = 0);

    m.def("auc", &auc, py::arg("scores"), py::arg("labels"));
    m.def("lift", &lift, py::arg("scores"), py::arg("labels"), py::arg("fraction") = 0.10);
    m.def(
        "empc",
        [](const std::vector<double>& scores, const std::vector<int>& labels, double clv,
           double d, double f, double alpha, double beta) {
            EmpcParams p;
            p.clv = clv;
            p.d = d;
            p.f = f;
            p.alpha = alpha;
            p.beta = beta;
            return empc(scores, labels, p);
        },
        py::arg("scores"), py::arg("labels"), py::arg("clv") = 200.0, py::arg("d") = 10.0,
        py::arg("f") = 1.0, py::arg("alpha") = 6.0, py::arg("beta") = 14.0);
    m.def(
        "empc_bruteforce",
        [](const std::vector<double>& scores, const std::vector<int>& labels, double clv,
           double d, double f, double alpha, double beta, int grid_size) {
            EmpcParams p;
            p.clv = clv;
            p.d = d;
            p.f = f;
            p.alpha = alpha;
            p.beta = beta;
            return empc_bruteforce(scores, labels, p, grid_size);
        },
        py::arg("scores"), py::arg("labels"), py::arg("clv") = 200.0, py::arg("d") = 10.0,
        py::arg("f") = 1.0, py::arg("alpha") = 6.0, py::arg("beta") = 14.0,
        py::arg("grid_size") = 20001);

    m.def(
        "run_experiment",
        [](const Panel& panel, const std::vector<std::string>& spec_keys,
           const std::string& grid, std::uint64_t seed, int outer_k, int inner_k,
           int stack_k, int undersample_ratio, const std::string& out_dir) {
            std::vector<FeatureSpec> specs;
            const auto all = all_model_specs();
            if (spec_keys.empty())
                specs = all;
            else
                for (const auto& key : spec_keys) {
                    auto it = std::find_if(all.begin(), all.end(), [&](const FeatureSpec& s) {
                        return s.key() == key;
                    });
                    if (it == all.end())
                        throw std::invalid_argument("unknown spec key: " + key);
                    specs.push_back(*it);
                }
            CvConfig cfg;
            cfg.outer_k = outer_k;
            cfg.inner_k = inner_k;
            cfg.stack_k = stack_k;
            cfg.undersample_ratio = undersample_ratio;
            cfg.master_seed = seed;
            const Grids grids = grid == "smoke" ? Grids::smoke() : Grids::full();
            const auto result = run_experiment(panel, specs, grids, cfg);
            if (!out_dir.empty()) write_experiment_outputs(result, out_dir, {});
            py::list rows;
            for (const auto& sr : result.specs) {
                py::dict row;
                row["model"] = sr.display_name;
                row["auc"] = sr.mean_report.auc;
                row["lift"] = sr.mean_report.lift10;
                row["empc"] = sr.mean_report.empc;
                row["hyperparameters"] = sr.final_hyper_key;
                row["selection"] = sr.selection_reason;
                rows.append(row);
            }
            py::dict out;
            out["rows"] = rows;
            out["audit_violations"] = result.audit.violations();
            return out;
        },
        py::arg("panel"), py::arg("specs") = std::vector<std::string>{},
        py::arg("grid") = "smoke", py::arg("seed") = 0, py::arg("outer_k") = 3,
        py::arg("inner_k") = 4, py::arg("stack_k") = 4, py::arg("undersample_ratio") = 2,
        py::arg("out_dir") = "");
}
