#pragma once

// Character-level LSTM encoder jointly trained with a handcrafted-feature
// layer and a softmax head. Parameters live in one flat vector so the Adam
// update and the finite-difference gradient check index them uniformly.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "specpred/error.hpp"
#include "specpred/metrics.hpp"

namespace specpred {

// 26 lowercase letters + 10 digits + space. Normalization lowercases and
// drops everything else; strict mode drops the space as well.
struct CharAlphabet {
  static constexpr int size = 37;
  static constexpr int space_index = 36;

  // -1 for characters outside the alphabet
  static int index_of(char c, bool strict = false) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) return std::tolower(u) - 'a';
    if (std::isdigit(u)) return 26 + (c - '0');
    if (c == ' ' && !strict) return space_index;
    return -1;
  }
};

// Index sequence; an input with no in-alphabet characters becomes a single
// all-zero step, encoded as {-1}.
inline std::vector<int> encode_chars(const std::string& text, bool strict = false,
                                     int max_chars = 2000) {
  std::vector<int> seq;
  for (char c : text) {
    if (static_cast<int>(seq.size()) >= max_chars) break;
    int idx = CharAlphabet::index_of(c, strict);
    if (idx >= 0) seq.push_back(idx);
  }
  if (seq.empty()) seq.push_back(-1);
  return seq;
}

struct NeuralConfig {
  int hidden = 100;       // LSTM state size
  int fc_out = 32;        // handcrafted-feature layer width
  double learning_rate = 1e-3;
  int batch_size = 32;
  int max_epochs = 30;
  int patience = 5;       // early stop on held-out QWK
  std::uint64_t seed = 0;
  int max_chars = 2000;
  bool strict_charset = false;

  void validate() const {
    if (hidden < 50 || hidden > 200)
      throw ConfigError("hidden size must be in [50, 200]");
    if (fc_out < 1 || batch_size < 1 || max_epochs < 1)
      throw ConfigError("invalid neural config");
  }
};

struct JointSample {
  std::vector<int> chars;
  std::vector<double> handcrafted;
  int label = 0;
};

class JointModel {
 public:
  static constexpr int n_labels = 3;

  JointModel() = default;

  JointModel(int n_handcrafted, const NeuralConfig& cfg, bool validate_range = true) {
    if (validate_range) cfg.validate();
    config_ = cfg;
    h_ = cfg.hidden;
    m_ = cfg.fc_out;
    nh_ = n_handcrafted;
    layout();
    params_.assign(n_params_, 0.0);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-0.08, 0.08);
    for (double& p : params_) p = u(rng);
    // biases start at zero; forget-gate bias at 1 helps gradient flow early
    std::fill(params_.begin() + static_cast<std::ptrdiff_t>(off_bg_),
              params_.begin() + static_cast<std::ptrdiff_t>(off_bg_ + 4 * static_cast<std::size_t>(h_)), 0.0);
    for (int u2 = 0; u2 < h_; ++u2) params_[off_bg_ + gate_f * static_cast<std::size_t>(h_) + static_cast<std::size_t>(u2)] = 1.0;
    std::fill(params_.begin() + static_cast<std::ptrdiff_t>(off_bfc_),
              params_.begin() + static_cast<std::ptrdiff_t>(off_bfc_ + static_cast<std::size_t>(m_)), 0.0);
    std::fill(params_.begin() + static_cast<std::ptrdiff_t>(off_bout_),
              params_.begin() + static_cast<std::ptrdiff_t>(off_bout_ + n_labels), 0.0);
  }

  const NeuralConfig& config() const { return config_; }
  int hidden_size() const { return h_; }
  int handcrafted_size() const { return nh_; }
  std::size_t parameter_count() const { return n_params_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  struct Forward {
    std::vector<double> probs;      // softmax over 3 labels
    std::vector<double> embedding;  // final hidden state
  };

  Forward forward(const std::vector<int>& chars,
                  const std::vector<double>& handcrafted) const {
    Trace trace;
    return run_forward(chars, handcrafted, trace);
  }

  // Cross-entropy for one sample; when grad is non-null the analytic
  // gradient is accumulated into it (same layout as params()).
  double loss_and_grad(const JointSample& s, std::vector<double>* grad) const {
    if (static_cast<int>(s.handcrafted.size()) != nh_)
      throw DataError("handcrafted vector does not match model schema");
    Trace trace;
    Forward f = run_forward(s.chars, s.handcrafted, trace);
    double loss = -std::log(std::max(f.probs[static_cast<std::size_t>(s.label)], 1e-300));
    if (grad) backward(s, trace, f, *grad);
    return loss;
  }

  nlohmann::json to_json() const {
    return {{"hidden", h_},
            {"fc_out", m_},
            {"n_handcrafted", nh_},
            {"seed", config_.seed},
            {"max_chars", config_.max_chars},
            {"strict_charset", config_.strict_charset},
            {"params", params_}};
  }

  static JointModel from_json(const nlohmann::json& j) {
    NeuralConfig cfg;
    cfg.hidden = j.at("hidden").get<int>();
    cfg.fc_out = j.at("fc_out").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.max_chars = j.at("max_chars").get<int>();
    cfg.strict_charset = j.at("strict_charset").get<bool>();
    JointModel m(j.at("n_handcrafted").get<int>(), cfg, /*validate_range=*/false);
    m.params_ = j.at("params").get<std::vector<double>>();
    if (m.params_.size() != m.n_params_) throw DataError("joint model: bad parameter count");
    return m;
  }

 private:
  enum Gate { gate_i = 0, gate_f = 1, gate_o = 2, gate_g = 3 };
  static constexpr int in_dim = CharAlphabet::size;

  struct Trace {
    // per timestep: gate activations and states; index 0 is the initial state
    std::vector<std::vector<double>> i, f, o, g, c, tanh_c, h;
    std::vector<double> fc_pre, fc_out;
    std::vector<double> concat;
  };

  void layout() {
    std::size_t H = static_cast<std::size_t>(h_), M = static_cast<std::size_t>(m_),
                NH = static_cast<std::size_t>(nh_);
    off_Wx_ = 0;
    off_Wh_ = off_Wx_ + 4 * H * in_dim;
    off_bg_ = off_Wh_ + 4 * H * H;
    off_Wfc_ = off_bg_ + 4 * H;
    off_bfc_ = off_Wfc_ + M * NH;
    off_Wout_ = off_bfc_ + M;
    off_bout_ = off_Wout_ + n_labels * (H + M);
    n_params_ = off_bout_ + n_labels;
  }

  const double* Wx(int gate, int unit) const {
    return params_.data() + off_Wx_ +
           (static_cast<std::size_t>(gate) * static_cast<std::size_t>(h_) +
            static_cast<std::size_t>(unit)) * in_dim;
  }
  const double* Wh(int gate, int unit) const {
    return params_.data() + off_Wh_ +
           (static_cast<std::size_t>(gate) * static_cast<std::size_t>(h_) +
            static_cast<std::size_t>(unit)) * static_cast<std::size_t>(h_);
  }
  double bg(int gate, int unit) const {
    return params_[off_bg_ + static_cast<std::size_t>(gate) * static_cast<std::size_t>(h_) +
                   static_cast<std::size_t>(unit)];
  }

  static double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

  Forward run_forward(const std::vector<int>& chars,
                      const std::vector<double>& handcrafted, Trace& t) const {
    if (static_cast<int>(handcrafted.size()) != nh_)
      throw DataError("handcrafted vector does not match model schema");
    const std::size_t T = chars.size();
    const std::size_t H = static_cast<std::size_t>(h_);
    t.i.assign(T, {});
    t.f.assign(T, {});
    t.o.assign(T, {});
    t.g.assign(T, {});
    t.c.assign(T + 1, std::vector<double>(H, 0.0));
    t.tanh_c.assign(T, {});
    t.h.assign(T + 1, std::vector<double>(H, 0.0));

    for (std::size_t step = 0; step < T; ++step) {
      const int x = chars[step];
      const std::vector<double>& hprev = t.h[step];
      std::array<std::vector<double>, 4> act;
      for (int gate = 0; gate < 4; ++gate) {
        act[static_cast<std::size_t>(gate)].resize(H);
        for (std::size_t u = 0; u < H; ++u) {
          double z = bg(gate, static_cast<int>(u));
          if (x >= 0) z += Wx(gate, static_cast<int>(u))[x];
          const double* wh = Wh(gate, static_cast<int>(u));
          for (std::size_t v = 0; v < H; ++v) z += wh[v] * hprev[v];
          act[static_cast<std::size_t>(gate)][u] = gate == gate_g ? std::tanh(z) : sigmoid(z);
        }
      }
      t.i[step] = std::move(act[gate_i]);
      t.f[step] = std::move(act[gate_f]);
      t.o[step] = std::move(act[gate_o]);
      t.g[step] = std::move(act[gate_g]);
      t.tanh_c[step].resize(H);
      for (std::size_t u = 0; u < H; ++u) {
        t.c[step + 1][u] = t.f[step][u] * t.c[step][u] + t.i[step][u] * t.g[step][u];
        t.tanh_c[step][u] = std::tanh(t.c[step + 1][u]);
        t.h[step + 1][u] = t.o[step][u] * t.tanh_c[step][u];
      }
    }

    const std::size_t M = static_cast<std::size_t>(m_);
    t.fc_pre.assign(M, 0.0);
    t.fc_out.assign(M, 0.0);
    for (std::size_t u = 0; u < M; ++u) {
      double z = params_[off_bfc_ + u];
      const double* w = params_.data() + off_Wfc_ + u * static_cast<std::size_t>(nh_);
      for (std::size_t j = 0; j < static_cast<std::size_t>(nh_); ++j)
        z += w[j] * handcrafted[j];
      t.fc_pre[u] = z;
      t.fc_out[u] = std::tanh(z);
    }

    t.concat.clear();
    t.concat.reserve(H + M);
    t.concat.insert(t.concat.end(), t.h[T].begin(), t.h[T].end());
    t.concat.insert(t.concat.end(), t.fc_out.begin(), t.fc_out.end());

    std::vector<double> z(n_labels, 0.0);
    for (int l = 0; l < n_labels; ++l) {
      double s = params_[off_bout_ + static_cast<std::size_t>(l)];
      const double* w = params_.data() + off_Wout_ + static_cast<std::size_t>(l) * (H + M);
      for (std::size_t j = 0; j < H + M; ++j) s += w[j] * t.concat[j];
      z[static_cast<std::size_t>(l)] = s;
    }
    double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0;
    for (double& v : z) {
      v = std::exp(v - zmax);
      sum += v;
    }
    for (double& v : z) v /= sum;

    Forward out;
    out.probs = std::move(z);
    out.embedding = t.h[T];
    return out;
  }

  void backward(const JointSample& s, const Trace& t, const Forward& f,
                std::vector<double>& grad) const {
    if (grad.size() != n_params_) grad.assign(n_params_, 0.0);
    const std::size_t T = s.chars.size();
    const std::size_t H = static_cast<std::size_t>(h_);
    const std::size_t M = static_cast<std::size_t>(m_);
    const std::size_t NH = static_cast<std::size_t>(nh_);

    std::vector<double> dz(n_labels);
    for (int l = 0; l < n_labels; ++l)
      dz[static_cast<std::size_t>(l)] =
          f.probs[static_cast<std::size_t>(l)] - (l == s.label ? 1.0 : 0.0);

    std::vector<double> dconcat(H + M, 0.0);
    for (int l = 0; l < n_labels; ++l) {
      grad[off_bout_ + static_cast<std::size_t>(l)] += dz[static_cast<std::size_t>(l)];
      double* gw = grad.data() + off_Wout_ + static_cast<std::size_t>(l) * (H + M);
      const double* w = params_.data() + off_Wout_ + static_cast<std::size_t>(l) * (H + M);
      for (std::size_t j = 0; j < H + M; ++j) {
        gw[j] += dz[static_cast<std::size_t>(l)] * t.concat[j];
        dconcat[j] += dz[static_cast<std::size_t>(l)] * w[j];
      }
    }

    // handcrafted-feature layer
    for (std::size_t u = 0; u < M; ++u) {
      double dpre = dconcat[H + u] * (1.0 - t.fc_out[u] * t.fc_out[u]);
      grad[off_bfc_ + u] += dpre;
      double* gw = grad.data() + off_Wfc_ + u * NH;
      for (std::size_t j = 0; j < NH; ++j) gw[j] += dpre * s.handcrafted[j];
    }

    // BPTT through the LSTM
    std::vector<double> dh(dconcat.begin(), dconcat.begin() + static_cast<std::ptrdiff_t>(H));
    std::vector<double> dc(H, 0.0);
    std::array<std::vector<double>, 4> dpre;
    for (auto& v : dpre) v.assign(H, 0.0);
    for (std::size_t step = T; step-- > 0;) {
      for (std::size_t u = 0; u < H; ++u) {
        double o = t.o[step][u], i = t.i[step][u], fg = t.f[step][u], g = t.g[step][u];
        double tc = t.tanh_c[step][u];
        double dcu = dc[u] + dh[u] * o * (1.0 - tc * tc);
        dpre[gate_o][u] = dh[u] * tc * o * (1.0 - o);
        dpre[gate_i][u] = dcu * g * i * (1.0 - i);
        dpre[gate_g][u] = dcu * i * (1.0 - g * g);
        dpre[gate_f][u] = dcu * t.c[step][u] * fg * (1.0 - fg);
        dc[u] = dcu * fg;
      }
      const int x = s.chars[step];
      std::vector<double> dh_prev(H, 0.0);
      for (int gate = 0; gate < 4; ++gate) {
        for (std::size_t u = 0; u < H; ++u) {
          double d = dpre[static_cast<std::size_t>(gate)][u];
          if (d == 0.0) continue;
          grad[off_bg_ + static_cast<std::size_t>(gate) * H + u] += d;
          if (x >= 0)
            grad[off_Wx_ + (static_cast<std::size_t>(gate) * H + u) * in_dim +
                 static_cast<std::size_t>(x)] += d;
          double* gwh = grad.data() + off_Wh_ + (static_cast<std::size_t>(gate) * H + u) * H;
          const double* wh = Wh(gate, static_cast<int>(u));
          const std::vector<double>& hprev = t.h[step];
          for (std::size_t v = 0; v < H; ++v) {
            gwh[v] += d * hprev[v];
            dh_prev[v] += d * wh[v];
          }
        }
      }
      dh.swap(dh_prev);
    }
  }

  NeuralConfig config_;
  int h_ = 0, m_ = 0, nh_ = 0;
  std::size_t off_Wx_ = 0, off_Wh_ = 0, off_bg_ = 0, off_Wfc_ = 0, off_bfc_ = 0,
              off_Wout_ = 0, off_bout_ = 0, n_params_ = 0;
  std::vector<double> params_;
};

// Max relative error between analytic and central finite-difference
// gradients over a random subset of parameters.
inline double gradient_check(JointModel& model, const JointSample& sample,
                             std::size_t n_checks = 200, double step = 1e-5,
                             std::uint64_t seed = 12345) {
  std::vector<double> grad(model.parameter_count(), 0.0);
  model.loss_and_grad(sample, &grad);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, model.parameter_count() - 1);
  double worst = 0.0;
  for (std::size_t k = 0; k < n_checks; ++k) {
    std::size_t idx = pick(rng);
    double saved = model.params()[idx];
    model.params()[idx] = saved + step;
    double lp = model.loss_and_grad(sample, nullptr);
    model.params()[idx] = saved - step;
    double lm = model.loss_and_grad(sample, nullptr);
    model.params()[idx] = saved;
    double numeric = (lp - lm) / (2.0 * step);
    // the 1e-6 floor keeps double-precision roundoff in the central
    // difference (loss deltas near 1e-15) from inflating the relative error
    // on parameters whose true gradient is vanishingly small
    double denom = std::max(1e-6, std::abs(numeric) + std::abs(grad[idx]));
    worst = std::max(worst, std::abs(numeric - grad[idx]) / denom);
  }
  return worst;
}

// Mini-batch Adam, early stop when held-out QWK fails to improve for
// `patience` epochs. Deterministic given the config seed.
inline JointModel train_joint(const std::vector<JointSample>& train_set,
                              const NeuralConfig& cfg,
                              std::vector<double>* epoch_losses = nullptr) {
  if (train_set.empty()) throw DataError("train_joint: empty training set");
  cfg.validate();
  const int nh = static_cast<int>(train_set.front().handcrafted.size());
  JointModel model(nh, cfg);

  // stratified ~10% validation split for early stopping
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < train_set.size(); ++i)
    by_label[train_set[i].label].push_back(i);
  std::vector<std::size_t> fit_idx, val_idx;
  for (auto& [label, idxs] : by_label) {
    std::shuffle(idxs.begin(), idxs.end(), rng);
    std::size_t n_val = std::max<std::size_t>(1, idxs.size() / 10);
    if (n_val >= idxs.size()) n_val = idxs.size() - 1;
    for (std::size_t i = 0; i < idxs.size(); ++i)
      (i < n_val ? val_idx : fit_idx).push_back(idxs[i]);
  }
  std::sort(fit_idx.begin(), fit_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  if (fit_idx.empty()) fit_idx = val_idx;

  auto validation_qwk = [&]() {
    ConfusionMatrix m(JointModel::n_labels);
    for (std::size_t i : val_idx) {
      auto f = model.forward(train_set[i].chars, train_set[i].handcrafted);
      int best = 0;
      for (int l = 1; l < JointModel::n_labels; ++l)
        if (f.probs[static_cast<std::size_t>(l)] > f.probs[static_cast<std::size_t>(best)])
          best = l;
      m.add(train_set[i].label, best);
    }
    try {
      return quadratic_weighted_kappa(m);
    } catch (const DataError&) {
      return -1.0;  // degenerate validation marginals
    }
  };

  const std::size_t P = model.parameter_count();
  std::vector<double> m1(P, 0.0), m2(P, 0.0), grad(P, 0.0);
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::uint64_t adam_t = 0;

  std::vector<double> best_params = model.params();
  double best_qwk = -2.0;
  int stale = 0;

  std::vector<std::size_t> order = fit_idx;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < end; ++i)
        epoch_loss += model.loss_and_grad(train_set[order[i]], &grad);
      double scale = 1.0 / static_cast<double>(end - start);
      ++adam_t;
      double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
      double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
      for (std::size_t p = 0; p < P; ++p) {
        double g = grad[p] * scale;
        m1[p] = beta1 * m1[p] + (1.0 - beta1) * g;
        m2[p] = beta2 * m2[p] + (1.0 - beta2) * g * g;
        model.params()[p] -=
            cfg.learning_rate * (m1[p] / bc1) / (std::sqrt(m2[p] / bc2) + eps);
      }
    }
    if (epoch_losses) epoch_losses->push_back(epoch_loss / static_cast<double>(order.size()));

    double qwk = validation_qwk();
    if (qwk > best_qwk + 1e-9) {
      best_qwk = qwk;
      best_params = model.params();
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  model.params() = best_params;
  return model;
}

}  // namespace specpred
