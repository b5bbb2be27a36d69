#include <cstdio>
#include <filesystem>
#include <fstream>

#include "churnlab/pipeline.hpp"

namespace churnlab {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// '+' in spec keys becomes '-' in file names
std::string file_key(const std::string& key) {
    std::string out = key;
    for (char& c : out)
        if (c == '+') c = '-';
    return out;
}

}  // namespace

void write_experiment_outputs(const ExperimentResult& result, const std::string& out_dir,
                              const std::map<std::string, std::string>& resolved_config) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    fs::create_directories(fs::path(out_dir) / "lift_curves");

    {
        std::ofstream os(fs::path(out_dir) / "report.csv");
        os << "model,auc,lift,empc,hyperparameters,selection\n";
        for (const auto& sr : result.specs)
            os << '"' << sr.display_name << "\"," << fmt(sr.mean_report.auc) << ','
               << fmt(sr.mean_report.lift10) << ',' << fmt(sr.mean_report.empc) << ",\""
               << sr.final_hyper_key << "\"," << sr.selection_reason << "\n";
    }
    {
        std::ofstream os(fs::path(out_dir) / "folds.csv");
        os << "model,fold,auc,lift,empc,hyperparameters\n";
        for (const auto& sr : result.specs)
            for (std::size_t f = 0; f < sr.fold_reports.size(); ++f) {
                const auto& r = sr.fold_reports[f];
                os << '"' << sr.display_name << "\"," << f << ',' << fmt(r.auc) << ','
                   << fmt(r.lift10) << ',' << fmt(r.empc) << ",\"" << sr.fold_hyper_keys[f]
                   << "\"\n";
            }
    }
    for (const auto& sr : result.specs)
        for (std::size_t f = 0; f < sr.fold_reports.size(); ++f)
            save_lift_curve_csv(sr.fold_reports[f].lift_curve,
                                (fs::path(out_dir) / "lift_curves" /
                                 (file_key(sr.spec.key()) + "_fold" + std::to_string(f) +
                                  ".csv"))
                                    .string());

    result.audit.save((fs::path(out_dir) / "audit.log").string());

    {
        std::ofstream os(fs::path(out_dir) / "resolved_config");
        for (const auto& [k, v] : resolved_config) os << k << "=" << v << "\n";
    }
}

void write_lift_curve_svg(
    const std::string& path, const std::string& title,
    const std::vector<std::pair<std::string, std::vector<std::pair<int, double>>>>& series) {
    if (series.empty()) throw std::invalid_argument("write_lift_curve_svg: no series");
    for (const auto& [name, curve] : series)
        if (curve.empty())
            throw std::invalid_argument("write_lift_curve_svg: empty curve for " + name);

    double max_lift = 1.0;
    int max_p = 1;
    for (const auto& [name, curve] : series)
        for (const auto& [p, v] : curve) {
            max_lift = std::max(max_lift, v);
            max_p = std::max(max_p, p);
        }
    max_lift *= 1.05;

    const double width = 640, height = 420;
    const double ml = 55, mr = 150, mt = 40, mb = 45;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto sx = [&](double p) { return ml + (p - 1.0) / std::max(1, max_p - 1) * pw; };
    auto sy = [&](double v) { return mt + (1.0 - v / max_lift) * ph; };

    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};

    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " "
       << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << title << "</text>\n";
    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
       << mt + ph << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
       << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = max_lift * tick / 4.0;
        os << "<text x=\"" << ml - 6 << "\" y=\"" << sy(v) + 4
           << "\" text-anchor=\"end\">" << static_cast<int>(v * 100) / 100.0
           << "</text>\n";
        os << "<line x1=\"" << ml << "\" y1=\"" << sy(v) << "\" x2=\"" << ml + pw
           << "\" y2=\"" << sy(v) << "\" stroke=\"#dddddd\"/>\n";
    }
    for (int p = 0; p <= max_p; p += 5) {
        const int q = std::max(1, p);
        os << "<text x=\"" << sx(q) << "\" y=\"" << mt + ph + 18
           << "\" text-anchor=\"middle\">" << q << "</text>\n";
    }
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 8
       << "\" text-anchor=\"middle\">percentile</text>\n";
    os << "<text transform=\"translate(14," << mt + ph / 2
       << ") rotate(-90)\" text-anchor=\"middle\">lift</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = palette[i % (sizeof palette / sizeof palette[0])];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
        for (const auto& [p, v] : series[i].second) os << sx(p) << ',' << sy(v) << ' ';
        os << "\"/>\n";
        const double ly = mt + 14 + 18.0 * static_cast<double>(i);
        os << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly << "\" x2=\""
           << ml + pw + 30 << "\" y2=\"" << ly << "\" stroke=\"" << color
           << "\" stroke-width=\"1.8\"/>\n";
        os << "<text x=\"" << ml + pw + 35 << "\" y=\"" << ly + 4 << "\">"
           << series[i].first << "</text>\n";
    }
    os << "</svg>\n";
    if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace churnlab
