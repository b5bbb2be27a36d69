#pragma once

#include <cstdint>

#include "churnlab/panel.hpp"

namespace churnlab {

// Synthetic panel generator. Non-churners follow stationary positive RFM
// processes (base level + seasonal ripple + noise). Churners share the same
// base but their frequency and monetary value decay linearly over the last
// six months and their recency level sits below the non-churner level; both
// effects scale with signal_strength, so signal_strength = 0 makes the two
// groups statistically indistinguishable on the RFM channels.
struct GeneratorConfig {
    int n_customers = 10000;
    double churn_rate = 0.00243;
    int n_static = 10;
    // Number of leading static columns correlated with the churn label.
    int n_signal_static = 2;
    double signal_strength = 1.0;
    double noise_scale = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Realized churner count: round-half-up of churn_rate * n_customers.
int expected_churners(const GeneratorConfig& config);

Panel generate_synthetic(const GeneratorConfig& config);

}  // namespace churnlab
