#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace churnlab {

inline constexpr int kMonths = 36;
inline constexpr int kChannels = 3;  // recency, frequency, monetary value

enum class RfmChannel : int { recency = 0, frequency = 1, monetary = 2 };

// One customer: static features in [0,1], a 36x3 RFM series (oldest month
// first), and the churn label.
struct CustomerRecord {
    std::int64_t id = 0;
    std::vector<double> static_features;
    std::vector<double> rfm;  // row-major, months x channels
    bool churned = false;

    double rfm_at(int month, int channel) const {
        return rfm[static_cast<std::size_t>(month) * kChannels + channel];
    }
    double& rfm_at(int month, int channel) {
        return rfm[static_cast<std::size_t>(month) * kChannels + channel];
    }
    // One channel as a contiguous series, oldest first.
    std::vector<double> channel_series(int channel) const;

    bool operator==(const CustomerRecord&) const = default;
};

struct Panel {
    std::vector<CustomerRecord> records;
    std::vector<std::string> static_names;
    int months = kMonths;

    std::size_t size() const { return records.size(); }
    std::size_t n_static() const { return static_names.size(); }
    std::size_t n_churners() const;
    double churn_prevalence() const;

    // Throws std::invalid_argument on any violated invariant (duplicate ids,
    // wrong RFM length, static values outside [0,1], non-finite entries).
    void validate() const;

    // Subset by record index, preserving order.
    Panel subset(const std::vector<std::size_t>& indices) const;

    bool operator==(const Panel&) const = default;
};

// Stratified fold assignment: id -> fold in [0, k).
struct FoldAssignment {
    std::map<std::int64_t, int> fold_of;
    int k = 0;

    std::vector<std::size_t> fold_indices(const Panel& panel, int fold) const;
    std::vector<std::size_t> complement_indices(const Panel& panel, int fold) const;
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// CSV persistence. Schema: leading comment line `# churnlab-panel v1`, then
// header `id,churned,s0..s{p-1},r_1..r_36,f_1..f_36,m_1..m_36`. Values are
// written with shortest round-trip precision so load(save(p)) == p exactly.
void save_csv(const Panel& panel, const std::string& path);
Panel load_csv(const std::string& path);

}  // namespace churnlab
