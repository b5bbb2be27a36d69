#include "churnlab/lstm.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "churnlab/panel.hpp"
#include "churnlab/rng.hpp"

namespace churnlab {

namespace {

enum Gate { kInput = 0, kForget = 1, kCell = 2, kOutput = 3 };

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Per-timestep activations kept for backpropagation through time.
struct States {
    int T = 0, H = 0;
    std::vector<double> gates[4];  // T x H each (post-nonlinearity)
    std::vector<double> c, h;      // T x H
};

double forward_states(const LstmModel& m, std::span<const double> seq, States* st) {
    if (seq.size() % kChannels != 0)
        throw std::invalid_argument("lstm_forward: sequence length not a multiple of 3");
    const int T = static_cast<int>(seq.size()) / kChannels;
    if (T == 0) throw std::invalid_argument("lstm_forward: empty sequence");
    const int H = m.hidden;

    std::vector<double> h_prev(H, 0.0), c_prev(H, 0.0);
    std::vector<double> z(H);
    if (st) {
        st->T = T;
        st->H = H;
        for (auto& g : st->gates) g.assign(static_cast<std::size_t>(T) * H, 0.0);
        st->c.assign(static_cast<std::size_t>(T) * H, 0.0);
        st->h.assign(static_cast<std::size_t>(T) * H, 0.0);
    }

    std::vector<double> gate_val[4];
    for (auto& g : gate_val) g.resize(H);

    for (int t = 0; t < T; ++t) {
        const double* x = seq.data() + static_cast<std::size_t>(t) * kChannels;
        for (int k = 0; k < 4; ++k) {
            for (int u = 0; u < H; ++u) {
                double acc = m.bias[k][u];
                const double* wxr = m.wx[k].data() + static_cast<std::size_t>(u) * kChannels;
                for (int c = 0; c < kChannels; ++c) acc += wxr[c] * x[c];
                const double* whr = m.wh[k].data() + static_cast<std::size_t>(u) * H;
                for (int v = 0; v < H; ++v) acc += whr[v] * h_prev[v];
                z[u] = acc;
            }
            for (int u = 0; u < H; ++u)
                gate_val[k][u] = (k == kCell) ? std::tanh(z[u]) : sigmoid(z[u]);
        }
        for (int u = 0; u < H; ++u) {
            const double c_new = gate_val[kForget][u] * c_prev[u] +
                                 gate_val[kInput][u] * gate_val[kCell][u];
            const double h_new = gate_val[kOutput][u] * std::tanh(c_new);
            c_prev[u] = c_new;
            h_prev[u] = h_new;
            if (st) {
                for (int k = 0; k < 4; ++k)
                    st->gates[k][static_cast<std::size_t>(t) * H + u] = gate_val[k][u];
                st->c[static_cast<std::size_t>(t) * H + u] = c_new;
                st->h[static_cast<std::size_t>(t) * H + u] = h_new;
            }
        }
    }

    double z_out = m.by;
    for (int u = 0; u < H; ++u) z_out += m.why[u] * h_prev[u];
    return sigmoid(z_out);
}

// Gradient accumulator mirroring the model's parameter layout.
struct Grads {
    std::array<std::vector<double>, 4> wx, wh, bias;
    std::vector<double> why;
    double by = 0.0;

    explicit Grads(int H) {
        for (int k = 0; k < 4; ++k) {
            wx[k].assign(static_cast<std::size_t>(H) * kChannels, 0.0);
            wh[k].assign(static_cast<std::size_t>(H) * H, 0.0);
            bias[k].assign(H, 0.0);
        }
        why.assign(H, 0.0);
    }
};

// Backprop one sequence given dL/dz_out; adds into g.
void backward_one(const LstmModel& m, std::span<const double> seq, const States& st,
                  double dz_out, Grads& g) {
    const int T = st.T, H = st.H;
    g.by += dz_out;
    std::vector<double> dh(H), dc(H, 0.0), dh_next(H, 0.0);
    for (int u = 0; u < H; ++u) {
        g.why[u] += dz_out * st.h[static_cast<std::size_t>(T - 1) * H + u];
        dh[u] = dz_out * m.why[u];
    }

    std::vector<double> dz[4];
    for (auto& d : dz) d.resize(H);

    for (int t = T - 1; t >= 0; --t) {
        const std::size_t off = static_cast<std::size_t>(t) * H;
        const double* x = seq.data() + static_cast<std::size_t>(t) * kChannels;
        for (int u = 0; u < H; ++u) {
            const double iv = st.gates[kInput][off + u];
            const double fv = st.gates[kForget][off + u];
            const double gv = st.gates[kCell][off + u];
            const double ov = st.gates[kOutput][off + u];
            const double cv = st.c[off + u];
            const double tc = std::tanh(cv);
            const double c_prev = t > 0 ? st.c[off - H + u] : 0.0;

            const double dcu = dc[u] + dh[u] * ov * (1.0 - tc * tc);
            dz[kOutput][u] = dh[u] * tc * ov * (1.0 - ov);
            dz[kInput][u] = dcu * gv * iv * (1.0 - iv);
            dz[kCell][u] = dcu * iv * (1.0 - gv * gv);
            dz[kForget][u] = dcu * c_prev * fv * (1.0 - fv);
            dc[u] = dcu * fv;
        }
        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        for (int k = 0; k < 4; ++k) {
            for (int u = 0; u < H; ++u) {
                const double d = dz[k][u];
                if (d == 0.0) continue;
                double* wxr = g.wx[k].data() + static_cast<std::size_t>(u) * kChannels;
                for (int c = 0; c < kChannels; ++c) wxr[c] += d * x[c];
                g.bias[k][u] += d;
                if (t > 0) {
                    const std::size_t hoff = off - H;
                    double* whr = g.wh[k].data() + static_cast<std::size_t>(u) * H;
                    for (int v = 0; v < H; ++v) whr[v] += d * st.h[hoff + v];
                }
                const double* whr = m.wh[k].data() + static_cast<std::size_t>(u) * H;
                for (int v = 0; v < H; ++v) dh_next[v] += whr[v] * d;
            }
        }
        dh = dh_next;
    }
}

std::vector<double> flatten(const Grads& g, int H) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(4 * H * (kChannels + H + 1) + H + 1));
    for (int k = 0; k < 4; ++k) out.insert(out.end(), g.wx[k].begin(), g.wx[k].end());
    for (int k = 0; k < 4; ++k) out.insert(out.end(), g.wh[k].begin(), g.wh[k].end());
    for (int k = 0; k < 4; ++k) out.insert(out.end(), g.bias[k].begin(), g.bias[k].end());
    out.insert(out.end(), g.why.begin(), g.why.end());
    out.push_back(g.by);
    return out;
}

double bce(double p, int y) {
    const double q = std::min(1.0 - 1e-12, std::max(1e-12, p));
    return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

}  // namespace

std::string LstmHyper::key() const {
    return "H=" + std::to_string(hidden_units) + ",ep=" + std::to_string(epochs) +
           ",bs=" + std::to_string(batch_size);
}

std::vector<LstmHyper> lstm_full_grid() {
    std::vector<LstmHyper> grid;
    for (int h : {5, 10, 25, 30})
        for (int ep : {10, 25, 50, 75})
            for (int bs : {10, 25, 50, 100, 250}) {
                LstmHyper hy;
                hy.hidden_units = h;
                hy.epochs = ep;
                hy.batch_size = bs;
                grid.push_back(hy);
            }
    return grid;
}

std::vector<LstmHyper> lstm_smoke_grid() {
    std::vector<LstmHyper> grid;
    for (int ep : {10, 25}) {
        LstmHyper hy;
        hy.hidden_units = 5;
        hy.epochs = ep;
        hy.batch_size = 50;
        grid.push_back(hy);
    }
    return grid;
}

std::size_t LstmModel::n_params() const {
    return static_cast<std::size_t>(4 * hidden * (kChannels + hidden + 1) + hidden + 1);
}

std::vector<double*> param_pointers(LstmModel& m) {
    std::vector<double*> out;
    out.reserve(m.n_params());
    for (int k = 0; k < 4; ++k)
        for (auto& v : m.wx[k]) out.push_back(&v);
    for (int k = 0; k < 4; ++k)
        for (auto& v : m.wh[k]) out.push_back(&v);
    for (int k = 0; k < 4; ++k)
        for (auto& v : m.bias[k]) out.push_back(&v);
    for (auto& v : m.why) out.push_back(&v);
    out.push_back(&m.by);
    return out;
}

LstmModel init_lstm(int hidden_units, std::uint64_t seed) {
    if (hidden_units <= 0) throw std::invalid_argument("hidden_units must be positive");
    LstmModel m;
    m.hidden = hidden_units;
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_units));
    Rng rng(derive_seed(seed, {0x15f0}));
    std::uniform_real_distribution<double> unif(-bound, bound);
    for (int k = 0; k < 4; ++k) {
        m.wx[k].resize(static_cast<std::size_t>(hidden_units) * kChannels);
        m.wh[k].resize(static_cast<std::size_t>(hidden_units) * hidden_units);
        m.bias[k].resize(hidden_units);
    }
    m.why.resize(hidden_units);
    for (double* p : param_pointers(m)) *p = unif(rng);
    for (int u = 0; u < hidden_units; ++u) m.bias[kForget][u] = 1.0;
    return m;
}

double lstm_forward(const LstmModel& model, std::span<const double> sequence) {
    return forward_states(model, sequence, nullptr);
}

LstmBatchResult lstm_loss_and_grads(const LstmModel& model,
                                    const std::vector<std::vector<double>>& sequences,
                                    const std::vector<int>& labels) {
    if (sequences.empty() || sequences.size() != labels.size())
        throw std::invalid_argument("lstm_loss_and_grads: bad batch");
    const double inv_n = 1.0 / static_cast<double>(sequences.size());
    Grads g(model.hidden);
    States st;
    double loss = 0.0;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        const double p = forward_states(model, sequences[i], &st);
        loss += bce(p, labels[i]) * inv_n;
        const double dz_out = (p - static_cast<double>(labels[i])) * inv_n;
        backward_one(model, sequences[i], st, dz_out, g);
    }
    LstmBatchResult out;
    out.loss = loss;
    out.grads = flatten(g, model.hidden);
    return out;
}

LstmModel train_lstm(const std::vector<std::vector<double>>& sequences,
                     const std::vector<int>& labels, const LstmHyper& hyper,
                     std::vector<double>* epoch_loss_trace) {
    if (sequences.empty()) throw std::invalid_argument("train_lstm: empty training set");
    if (sequences.size() != labels.size())
        throw std::invalid_argument("train_lstm: label count mismatch");
    bool has0 = false, has1 = false;
    for (int y : labels) {
        if (y == 1)
            has1 = true;
        else if (y == 0)
            has0 = true;
        else
            throw std::invalid_argument("train_lstm: labels must be 0 or 1");
    }
    if (!has0 || !has1)
        throw std::invalid_argument("train_lstm: training set has a single class");
    if (hyper.hidden_units <= 0 || hyper.epochs <= 0 || hyper.batch_size <= 0 ||
        !(hyper.learning_rate > 0.0))
        throw std::invalid_argument("train_lstm: invalid hyperparameters");

    LstmModel model = init_lstm(hyper.hidden_units, hyper.seed);
    model.hyper = hyper;
    auto params = param_pointers(model);
    const std::size_t n_par = params.size();
    std::vector<double> adam_m(n_par, 0.0), adam_v(n_par, 0.0);
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;

    std::vector<std::size_t> order(sequences.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<double>> batch_seqs;
    std::vector<int> batch_labels;

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        Rng rng(derive_seed(hyper.seed, {0xe90c, static_cast<std::uint64_t>(epoch)}));
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(hyper.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(hyper.batch_size));
            batch_seqs.clear();
            batch_labels.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch_seqs.push_back(sequences[order[i]]);
                batch_labels.push_back(labels[order[i]]);
            }
            const auto res = lstm_loss_and_grads(model, batch_seqs, batch_labels);
            ++step;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t j = 0; j < n_par; ++j) {
                const double gj = res.grads[j];
                adam_m[j] = beta1 * adam_m[j] + (1.0 - beta1) * gj;
                adam_v[j] = beta2 * adam_v[j] + (1.0 - beta2) * gj * gj;
                *params[j] -= hyper.learning_rate * (adam_m[j] / bc1) /
                              (std::sqrt(adam_v[j] / bc2) + eps);
            }
        }
        if (epoch_loss_trace) {
            double loss = 0.0;
            for (std::size_t i = 0; i < sequences.size(); ++i)
                loss += bce(lstm_forward(model, sequences[i]), labels[i]);
            epoch_loss_trace->push_back(loss / static_cast<double>(sequences.size()));
        }
    }
    return model;
}

double gradient_check(const LstmModel& model,
                      const std::vector<std::vector<double>>& sequences,
                      const std::vector<int>& labels) {
    const auto analytic = lstm_loss_and_grads(model, sequences, labels);
    LstmModel work = model;
    auto params = param_pointers(work);
    auto loss_at = [&]() {
        double loss = 0.0;
        for (std::size_t i = 0; i < sequences.size(); ++i)
            loss += bce(lstm_forward(work, sequences[i]), labels[i]);
        return loss / static_cast<double>(sequences.size());
    };
    constexpr double h = 1e-5;
    double max_err = 0.0;
    for (std::size_t j = 0; j < params.size(); ++j) {
        const double orig = *params[j];
        *params[j] = orig + h;
        const double up = loss_at();
        *params[j] = orig - h;
        const double down = loss_at();
        *params[j] = orig;
        const double numeric = (up - down) / (2.0 * h);
        const double a = analytic.grads[j];
        const double diff = std::fabs(a - numeric);
        if (diff <= 1e-8) continue;  // degenerate agreement near zero
        max_err = std::max(max_err, diff / std::max(std::fabs(a), std::fabs(numeric)));
    }
    return max_err;
}

void LstmModel::save_json(const std::string& path) const {
    nlohmann::json j;
    j["type"] = "lstm";
    j["hidden"] = hidden;
    const char* names[4] = {"input", "forget", "cell", "output"};
    for (int k = 0; k < 4; ++k) {
        j["wx"][names[k]] = wx[k];
        j["wh"][names[k]] = wh[k];
        j["bias"][names[k]] = bias[k];
    }
    j["why"] = why;
    j["by"] = by;
    j["hyper"] = {{"hidden_units", hyper.hidden_units},
                  {"learning_rate", hyper.learning_rate},
                  {"epochs", hyper.epochs},
                  {"batch_size", hyper.batch_size},
                  {"seed", hyper.seed}};
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
}

LstmModel LstmModel::load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    nlohmann::json j;
    is >> j;
    LstmModel m;
    m.hidden = j.at("hidden").get<int>();
    const char* names[4] = {"input", "forget", "cell", "output"};
    for (int k = 0; k < 4; ++k) {
        m.wx[k] = j.at("wx").at(names[k]).get<std::vector<double>>();
        m.wh[k] = j.at("wh").at(names[k]).get<std::vector<double>>();
        m.bias[k] = j.at("bias").at(names[k]).get<std::vector<double>>();
    }
    m.why = j.at("why").get<std::vector<double>>();
    m.by = j.at("by").get<double>();
    const auto& h = j.at("hyper");
    m.hyper.hidden_units = h.at("hidden_units").get<int>();
    m.hyper.learning_rate = h.at("learning_rate").get<double>();
    m.hyper.epochs = h.at("epochs").get<int>();
    m.hyper.batch_size = h.at("batch_size").get<int>();
    m.hyper.seed = h.at("seed").get<std::uint64_t>();
    return m;
}

}  // namespace churnlab
