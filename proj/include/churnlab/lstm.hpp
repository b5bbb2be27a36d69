#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace churnlab {

struct LstmHyper {
    int hidden_units = 5;
    double learning_rate = 0.001;
    int epochs = 10;
    int batch_size = 50;
    std::uint64_t seed = 0;

    // Canonical key for majority voting and reports, e.g. "H=5,ep=10,bs=50".
    std::string key() const;
};

// Hyperparameter grid: hidden units x epochs x batch size (learning rate
// fixed at 0.001).
std::vector<LstmHyper> lstm_full_grid();
std::vector<LstmHyper> lstm_smoke_grid();

// Single-layer LSTM over 3-channel sequences with a sigmoid output head on
// the final hidden state. Gate order: input, forget, cell candidate, output.
struct LstmModel {
    int hidden = 0;
    std::array<std::vector<double>, 4> wx;    // each H x 3, row-major
    std::array<std::vector<double>, 4> wh;    // each H x H, row-major
    std::array<std::vector<double>, 4> bias;  // each H
    std::vector<double> why;                  // H
    double by = 0.0;
    LstmHyper hyper;

    std::size_t n_params() const;
    void save_json(const std::string& path) const;
    static LstmModel load_json(const std::string& path);
};

// Seeded initialization: uniform in [-1/sqrt(H), 1/sqrt(H)], forget-gate
// bias set to 1.
LstmModel init_lstm(int hidden_units, std::uint64_t seed);

// Churn probability for one sequence (row-major T x 3; T inferred).
double lstm_forward(const LstmModel& model, std::span<const double> sequence);

// Mean binary cross-entropy over a batch plus analytic gradients for every
// parameter, flattened in the same order as param_pointers().
struct LstmBatchResult {
    double loss = 0.0;
    std::vector<double> grads;
};
LstmBatchResult lstm_loss_and_grads(const LstmModel& model,
                                    const std::vector<std::vector<double>>& sequences,
                                    const std::vector<int>& labels);

// Mutable views of every parameter, fixed order; shared by Adam, the
// gradient check, and serialization.
std::vector<double*> param_pointers(LstmModel& model);

// Mini-batch Adam training (beta1=0.9, beta2=0.999, eps=1e-8), epoch-level
// shuffling from hyper.seed; fully deterministic. epoch_loss_trace, when
// given, receives the full-set training loss after every epoch.
LstmModel train_lstm(const std::vector<std::vector<double>>& sequences,
                     const std::vector<int>& labels, const LstmHyper& hyper,
                     std::vector<double>* epoch_loss_trace = nullptr);

// Max relative error between analytic BPTT gradients and central finite
// differences (step 1e-5) over every parameter.
double gradient_check(const LstmModel& model,
                      const std::vector<std::vector<double>>& sequences,
                      const std::vector<int>& labels);

}  // namespace churnlab
