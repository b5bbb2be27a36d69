// churnlab command line: synthetic panel generation, the nested-CV
// experiment, report printing, and lift-curve plots.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "churnlab/generator.hpp"
#include "churnlab/pipeline.hpp"

namespace fs = std::filesystem;
using namespace churnlab;

namespace {

int cmd_generate(const GeneratorConfig& cfg, const std::string& out) {
    const Panel panel = generate_synthetic(cfg);
    save_csv(panel, out);
    std::printf("wrote %s: %zu customers, %zu churners (%.4f%%)\n", out.c_str(),
                panel.size(), panel.n_churners(), 100.0 * panel.churn_prevalence());
    return 0;
}

std::vector<FeatureSpec> resolve_specs(const std::vector<std::string>& wanted) {
    const auto all = all_model_specs();
    if (wanted.empty()) return all;
    std::vector<FeatureSpec> out;
    for (const auto& key : wanted) {
        bool found = false;
        for (const auto& s : all)
            if (s.key() == key) {
                out.push_back(s);
                found = true;
                break;
            }
        if (!found) {
            std::string known;
            for (const auto& s : all) known += " " + s.key();
            throw std::runtime_error("unknown spec '" + key + "'; known specs:" + known);
        }
    }
    return out;
}

struct RunFlags {
    std::string panel_path, out_dir;
    std::uint64_t seed = 0;
    std::string grid = "full";
    std::vector<std::string> specs;
    std::string norm_quarter = "preceding";
    CvConfig cv;
    EmpcParams empc;
};

int cmd_run(const RunFlags& flags) {
    const Panel panel = load_csv(flags.panel_path);
    CvConfig cfg = flags.cv;
    cfg.master_seed = flags.seed;
    const Grids grids = flags.grid == "smoke" ? Grids::smoke() : Grids::full();
    const auto specs = resolve_specs(flags.specs);
    const NormQuarter mode =
        flags.norm_quarter == "final" ? NormQuarter::final : NormQuarter::preceding;

    const ExperimentResult result =
        run_experiment(panel, specs, grids, cfg, flags.empc, mode);

    std::map<std::string, std::string> resolved = {
        {"panel", flags.panel_path},
        {"seed", std::to_string(flags.seed)},
        {"grid", flags.grid},
        {"norm_quarter", flags.norm_quarter},
        {"outer_k", std::to_string(cfg.outer_k)},
        {"inner_k", std::to_string(cfg.inner_k)},
        {"stack_k", std::to_string(cfg.stack_k)},
        {"undersample_ratio", std::to_string(cfg.undersample_ratio)},
        {"clv", std::to_string(flags.empc.clv)},
        {"offer_cost", std::to_string(flags.empc.d)},
        {"contact_cost", std::to_string(flags.empc.f)},
        {"alpha", std::to_string(flags.empc.alpha)},
        {"beta", std::to_string(flags.empc.beta)},
    };
    std::string spec_list;
    for (const auto& s : specs) spec_list += (spec_list.empty() ? "" : ",") + s.key();
    resolved["specs"] = spec_list;

    write_experiment_outputs(result, flags.out_dir, resolved);
    std::printf("wrote %s/report.csv (%zu models, %d outer folds)\n", flags.out_dir.c_str(),
                result.specs.size(), cfg.outer_k);

    const auto violations = result.audit.violations();
    if (!violations.empty()) {
        for (const auto& v : violations) std::fprintf(stderr, "leakage: %s\n", v.c_str());
        return 1;
    }
    std::printf("leakage audit: %zu predictions, 0 violations\n",
                result.audit.n_predictions());
    return 0;
}

int cmd_report(const std::string& results_dir) {
    std::ifstream is(fs::path(results_dir) / "report.csv");
    if (!is)
        throw std::runtime_error("no report.csv in " + results_dir + "; run `churnlab run` first");
    std::string line;
    std::getline(is, line);  // header
    std::printf("%-52s %10s %10s %10s\n", "model", "AUC", "lift", "EMPC");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        // model name is quoted and may contain commas
        const auto q2 = line.find('"', 1);
        const std::string name = line.substr(1, q2 - 1);
        std::string rest = line.substr(q2 + 2);
        double vals[3];
        std::sscanf(rest.c_str(), "%lf,%lf,%lf", &vals[0], &vals[1], &vals[2]);
        std::printf("%-52s %10.3f %10.3f %10.3f\n", name.c_str(), vals[0], vals[1], vals[2]);
    }
    return 0;
}

int cmd_plot(const std::string& results_dir, const std::string& out_dir,
             const std::vector<std::string>& wanted) {
    const fs::path curves = fs::path(results_dir) / "lift_curves";
    if (!fs::is_directory(curves))
        throw std::runtime_error("missing directory " + curves.string() +
                                 "; expected lift_curves/<spec>_fold<k>.csv from a run");
    auto specs = resolve_specs(wanted);
    fs::create_directories(out_dir);

    int n_written = 0;
    for (int fold = 0;; ++fold) {
        std::vector<std::pair<std::string, std::vector<std::pair<int, double>>>> series;
        std::vector<std::string> missing;
        for (const auto& s : specs) {
            std::string key = s.key();
            for (char& c : key)
                if (c == '+') c = '-';
            const fs::path file = curves / (key + "_fold" + std::to_string(fold) + ".csv");
            if (!fs::exists(file)) {
                missing.push_back(file.string());
                continue;
            }
            auto curve = load_lift_curve_csv(file.string());
            if (curve.empty()) throw std::runtime_error("empty lift curve: " + file.string());
            series.emplace_back(spec_display_name(s), std::move(curve));
        }
        if (series.empty()) {
            if (fold == 0)
                throw std::runtime_error("no lift curve files found; expected e.g. " +
                                         missing.front());
            break;
        }
        if (!missing.empty()) {
            std::string msg = "missing lift curve files:";
            for (const auto& m : missing) msg += " " + m;
            throw std::runtime_error(msg);
        }
        const std::string out =
            (fs::path(out_dir) / ("lift_fold" + std::to_string(fold) + ".svg")).string();
        write_lift_curve_svg(out, "Outer Fold " + std::to_string(fold + 1), series);
        std::printf("wrote %s\n", out.c_str());
        ++n_written;
    }
    return n_written > 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"churnlab: RFM churn modeling experiments on synthetic panels"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic panel CSV");
    GeneratorConfig gen_cfg;
    std::string gen_out;
    gen->add_option("--n", gen_cfg.n_customers, "number of customers");
    gen->add_option("--churn-rate", gen_cfg.churn_rate, "churn prevalence in (0,1)");
    gen->add_option("--n-static", gen_cfg.n_static, "static feature count");
    gen->add_option("--n-signal-static", gen_cfg.n_signal_static,
                    "static columns correlated with churn");
    gen->add_option("--signal", gen_cfg.signal_strength, "RFM churn signal strength (>= 0)");
    gen->add_option("--noise", gen_cfg.noise_scale, "RFM noise scale (> 0)");
    gen->add_option("--seed", gen_cfg.seed, "generator seed");
    gen->add_option("--out", gen_out, "output CSV path")->required();

    // run
    auto* run = app.add_subcommand("run", "run the nested-CV experiment");
    RunFlags rf;
    run->add_option("--panel", rf.panel_path, "panel CSV from `generate`")->required();
    run->add_option("--out", rf.out_dir, "output directory")->required();
    run->add_option("--seed", rf.seed, "master seed");
    run->add_option("--grid", rf.grid, "hyperparameter grid: full | smoke")
        ->check(CLI::IsMember({"full", "smoke"}));
    run->add_option("--specs", rf.specs, "model specs to run (default: all nine)")
        ->delimiter(',');
    run->add_option("--norm-quarter", rf.norm_quarter,
                    "lag normalization quarter: preceding | final")
        ->check(CLI::IsMember({"preceding", "final"}));
    run->add_option("--outer-k", rf.cv.outer_k, "outer folds");
    run->add_option("--inner-k", rf.cv.inner_k, "inner folds");
    run->add_option("--stack-k", rf.cv.stack_k, "stacking folds");
    run->add_option("--undersample-ratio", rf.cv.undersample_ratio,
                    "non-churners kept per churner in training splits");
    run->add_option("--clv", rf.empc.clv, "customer lifetime value");
    run->add_option("--offer-cost", rf.empc.d, "retention offer cost");
    run->add_option("--contact-cost", rf.empc.f, "contact cost");
    run->add_option("--alpha", rf.empc.alpha, "Beta(alpha,beta) acceptance-rate shape");
    run->add_option("--beta", rf.empc.beta, "Beta(alpha,beta) acceptance-rate shape");
    run->set_config("--config", "", "key=value config file (flags override it)");

    // report
    auto* rep = app.add_subcommand("report", "print a results table");
    std::string rep_dir;
    rep->add_option("--results", rep_dir, "results directory from `run`")->required();

    // plot
    auto* plot = app.add_subcommand("plot", "emit per-fold lift curve SVGs");
    std::string plot_results, plot_out;
    std::vector<std::string> plot_specs;
    plot->add_option("--results", plot_results, "results directory from `run`")->required();
    plot->add_option("--out", plot_out, "SVG output directory (default <results>/plots)");
    plot->add_option("--specs", plot_specs, "model specs to overlay (default: all)")
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_generate(gen_cfg, gen_out);
        if (run->parsed()) return cmd_run(rf);
        if (rep->parsed()) return cmd_report(rep_dir);
        if (plot->parsed())
            return cmd_plot(plot_results,
                            plot_out.empty() ? (fs::path(plot_results) / "plots").string()
                                             : plot_out,
                            plot_specs);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
