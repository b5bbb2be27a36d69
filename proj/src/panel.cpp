#include "churnlab/panel.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace churnlab {

std::vector<double> CustomerRecord::channel_series(int channel) const {
    const int months = static_cast<int>(rfm.size()) / kChannels;
    std::vector<double> out(months);
    for (int t = 0; t < months; ++t) out[t] = rfm_at(t, channel);
    return out;
}

std::size_t Panel::n_churners() const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.churned ? 1 : 0;
    return n;
}

double Panel::churn_prevalence() const {
    if (records.empty()) return 0.0;
    return static_cast<double>(n_churners()) / static_cast<double>(records.size());
}

void Panel::validate() const {
    std::set<std::int64_t> seen;
    for (const auto& r : records) {
        if (r.id < 0)
            throw std::invalid_argument("negative customer id " + std::to_string(r.id));
        if (!seen.insert(r.id).second)
            throw std::invalid_argument("duplicate customer id " + std::to_string(r.id));
        if (r.static_features.size() != static_names.size())
            throw std::invalid_argument("static dimension mismatch for id " +
                                        std::to_string(r.id));
        for (double v : r.static_features)
            if (!std::isfinite(v) || v < 0.0 || v > 1.0)
                throw std::invalid_argument("static feature outside [0,1] for id " +
                                            std::to_string(r.id));
        if (static_cast<int>(r.rfm.size()) != months * kChannels)
            throw std::invalid_argument("RFM series of id " + std::to_string(r.id) +
                                        " does not have " + std::to_string(months) +
                                        " months");
        for (double v : r.rfm)
            if (!std::isfinite(v) || v < 0.0)
                throw std::invalid_argument("non-finite or negative RFM value for id " +
                                            std::to_string(r.id));
    }
}

Panel Panel::subset(const std::vector<std::size_t>& indices) const {
    Panel out;
    out.static_names = static_names;
    out.months = months;
    out.records.reserve(indices.size());
    for (std::size_t i : indices) out.records.push_back(records.at(i));
    return out;
}

std::vector<std::size_t> FoldAssignment::fold_indices(const Panel& panel, int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < panel.records.size(); ++i)
        if (fold_of.at(panel.records[i].id) == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldAssignment::complement_indices(const Panel& panel,
                                                            int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < panel.records.size(); ++i)
        if (fold_of.at(panel.records[i].id) != fold) out.push_back(i);
    return out;
}

namespace {

constexpr const char* kSchemaTag = "# churnlab-panel v1";

void append_double(std::string& line, double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    line.append(buf, res.ptr);
}

double parse_double(std::string_view tok, int lineno) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError("line " + std::to_string(lineno) + ": bad numeric value '" +
                         std::string(tok) + "'");
    if (!std::isfinite(v))
        throw ParseError("line " + std::to_string(lineno) + ": non-finite value");
    return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

void save_csv(const Panel& panel, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << kSchemaTag << "\n";
    std::string header = "id,churned";
    for (const auto& name : panel.static_names) header += "," + name;
    const char* ch_prefix[kChannels] = {"r", "f", "m"};
    for (int c = 0; c < kChannels; ++c)
        for (int t = 1; t <= panel.months; ++t)
            header += "," + std::string(ch_prefix[c]) + "_" + std::to_string(t);
    os << header << "\n";
    std::string line;
    for (const auto& r : panel.records) {
        line.clear();
        line += std::to_string(r.id);
        line += r.churned ? ",1" : ",0";
        for (double v : r.static_features) {
            line += ',';
            append_double(line, v);
        }
        for (int c = 0; c < kChannels; ++c)
            for (int t = 0; t < panel.months; ++t) {
                line += ',';
                append_double(line, r.rfm_at(t, c));
            }
        os << line << "\n";
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

Panel load_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    int lineno = 0;

    if (!std::getline(is, line)) throw ParseError("empty file: " + path);
    ++lineno;
    if (line.rfind(kSchemaTag, 0) != 0)
        throw ParseError("line 1: missing schema tag '" + std::string(kSchemaTag) + "'");

    if (!std::getline(is, line)) throw ParseError("missing header: " + path);
    ++lineno;
    auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "id" || header[1] != "churned")
        throw ParseError("line 2: header must start with id,churned");

    Panel panel;
    std::size_t col = 2;
    while (col < header.size() && header[col].size() >= 1 && header[col][0] == 's' &&
           header[col].find('_') == std::string_view::npos) {
        panel.static_names.emplace_back(header[col]);
        ++col;
    }
    const std::size_t p = panel.static_names.size();
    const std::size_t rfm_cols = header.size() - 2 - p;
    if (rfm_cols % kChannels != 0)
        throw ParseError("line 2: RFM column count " + std::to_string(rfm_cols) +
                         " is not a multiple of 3");
    panel.months = static_cast<int>(rfm_cols / kChannels);

    const std::size_t expected = header.size();
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto toks = split_csv(line);
        std::int64_t id = 0;
        {
            auto res = std::from_chars(toks[0].data(), toks[0].data() + toks[0].size(), id);
            if (res.ec != std::errc{})
                throw ParseError("line " + std::to_string(lineno) + ": bad id '" +
                                 std::string(toks[0]) + "'");
        }
        if (toks.size() != expected)
            throw ParseError("line " + std::to_string(lineno) + ": id " +
                             std::to_string(id) + " has " + std::to_string(toks.size()) +
                             " columns, expected " + std::to_string(expected));
        CustomerRecord rec;
        rec.id = id;
        std::string_view churn = toks[1];
        if (churn == "1")
            rec.churned = true;
        else if (churn == "0")
            rec.churned = false;
        else
            throw ParseError("line " + std::to_string(lineno) + ": churned must be 0 or 1");
        rec.static_features.reserve(p);
        for (std::size_t j = 0; j < p; ++j)
            rec.static_features.push_back(parse_double(toks[2 + j], lineno));
        rec.rfm.assign(static_cast<std::size_t>(panel.months) * kChannels, 0.0);
        for (int c = 0; c < kChannels; ++c)
            for (int t = 0; t < panel.months; ++t)
                rec.rfm_at(t, c) =
                    parse_double(toks[2 + p + static_cast<std::size_t>(c) * panel.months + t],
                                 lineno);
        panel.records.push_back(std::move(rec));
    }
    panel.validate();
    return panel;
}

}  // namespace churnlab
