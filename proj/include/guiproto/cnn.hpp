#pragma once

// The component classifier: three conv/ReLU/pool stages, a ReLU hidden layer
// and a 15-way softmax, trained with momentum SGD and checkpoint-based early
// stopping.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "guiproto/core.hpp"
#include "guiproto/io.hpp"
#include "guiproto/modelfile.hpp"
#include "guiproto/random.hpp"
#include "guiproto/tensor.hpp"

namespace guiproto {

// ---------------------------------------------------------------------------
// Input preparation

// Aspect-preserving area-average resize onto a black size x size canvas.
inline Image letterbox(const Image& src, int size) {
  if (src.empty()) throw ValidationError("cannot letterbox an empty crop");
  if (size < 1) throw ConfigError("letterbox size must be positive");
  const double scale = static_cast<double>(size) / std::max(src.width(), src.height());
  const int w = std::clamp(static_cast<int>(std::lround(src.width() * scale)), 1, size);
  const int h = std::clamp(static_cast<int>(std::lround(src.height() * scale)), 1, size);

  // Separable box filter with fractional coverage: horizontal pass then vertical.
  auto weights = [](int in, int out) {
    std::vector<std::vector<std::pair<int, double>>> taps(static_cast<std::size_t>(out));
    const double step = static_cast<double>(in) / out;
    for (int o = 0; o < out; ++o) {
      const double a = o * step, b = (o + 1) * step;
      for (int i = static_cast<int>(std::floor(a)); i < std::min(in, static_cast<int>(std::ceil(b))); ++i) {
        const double cover = std::min<double>(b, i + 1) - std::max<double>(a, i);
        if (cover > 0) taps[static_cast<std::size_t>(o)].emplace_back(i, cover / step);
      }
    }
    return taps;
  };
  const auto tx = weights(src.width(), w), ty = weights(src.height(), h);
  std::vector<double> mid(static_cast<std::size_t>(w) * src.height() * 3, 0.0);
  const auto& px = src.data();
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < w; ++x)
      for (const auto& [i, wt] : tx[static_cast<std::size_t>(x)])
        for (int c = 0; c < 3; ++c)
          mid[(static_cast<std::size_t>(y) * w + x) * 3 + c] += wt * px[(static_cast<std::size_t>(y) * src.width() + i) * 3 + c];

  Image out(size, size);
  const int ox = (size - w) / 2, oy = (size - h) / 2;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc[3] = {0, 0, 0};
      for (const auto& [i, wt] : ty[static_cast<std::size_t>(y)])
        for (int c = 0; c < 3; ++c) acc[c] += wt * mid[(static_cast<std::size_t>(i) * w + x) * 3 + c];
      auto q = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); };
      out.set(ox + x, oy + y, {q(acc[0]), q(acc[1]), q(acc[2])});
    }
  return out;
}

// A preprocessed training example: letterboxed CHW bytes plus its label ordinal.
struct Sample {
  std::vector<std::uint8_t> chw;
  int label = 0;
};

inline Sample make_sample(const Image& crop, int label, int size) {
  const Image lb = letterbox(crop, size);
  Sample s{std::vector<std::uint8_t>(static_cast<std::size_t>(3) * size * size), label};
  const std::size_t plane = static_cast<std::size_t>(size) * size;
  for (std::size_t p = 0; p < plane; ++p)
    for (std::size_t c = 0; c < 3; ++c) s.chw[c * plane + p] = lb.data()[p * 3 + c];
  return s;
}

// ---------------------------------------------------------------------------
// Model

struct CnnArch {
  int input = 128;
  std::array<int, 3> channels{32, 64, 128};
  int hidden = 256;
  friend bool operator==(const CnnArch&, const CnnArch&) = default;
};

struct CnnModel {
  CnnArch arch;
  std::vector<ComponentClass> labels;  // output index -> class
  std::array<Tensor, 3> conv_w, conv_b;
  Tensor fc1_w, fc1_b, fc2_w, fc2_b;

  int flat_size() const {
    const int s = arch.input / 8;
    return arch.channels[2] * s * s;
  }
  int outputs() const { return static_cast<int>(labels.size()); }

  std::vector<std::pair<std::string, Tensor*>> params() {
    return {{"conv1.w", &conv_w[0]}, {"conv1.b", &conv_b[0]}, {"conv2.w", &conv_w[1]}, {"conv2.b", &conv_b[1]},
            {"conv3.w", &conv_w[2]}, {"conv3.b", &conv_b[2]}, {"fc1.w", &fc1_w},       {"fc1.b", &fc1_b},
            {"fc2.w", &fc2_w},       {"fc2.b", &fc2_b}};
  }
  std::vector<std::pair<std::string, const Tensor*>> params() const {
    auto ps = const_cast<CnnModel*>(this)->params();
    return {ps.begin(), ps.end()};
  }

  friend bool operator==(const CnnModel&, const CnnModel&) = default;
};

inline void validate_arch(const CnnArch& a) {
  if (a.input < 8 || a.input % 8) throw ConfigError("CNN input size must be a positive multiple of 8");
  for (int c : a.channels)
    if (c < 1) throw ConfigError("CNN channel widths must be positive");
  if (a.hidden < 1) throw ConfigError("CNN hidden width must be positive");
}

// He-style uniform init: U(-sqrt(6/fan_in), +sqrt(6/fan_in)); zero biases.
inline CnnModel init_cnn(const CnnArch& arch, std::uint64_t seed) {
  validate_arch(arch);
  CnnModel m;
  m.arch = arch;
  for (auto c : all_classes()) m.labels.push_back(c);
  Rng rng(seed);
  auto fill = [&](Tensor& t, int fan_in) {
    const double lim = std::sqrt(6.0 / fan_in);
    for (auto& v : t.values()) v = static_cast<float>(rng.uniform(-lim, lim));
  };
  int in_c = 3;
  for (std::size_t i = 0; i < 3; ++i) {
    m.conv_w[i] = Tensor({arch.channels[i], in_c, 3, 3});
    m.conv_b[i] = Tensor({arch.channels[i]});
    fill(m.conv_w[i], in_c * 9);
    in_c = arch.channels[i];
  }
  m.fc1_w = Tensor({arch.hidden, m.flat_size()});
  m.fc1_b = Tensor({arch.hidden});
  fill(m.fc1_w, m.flat_size());
  m.fc2_w = Tensor({static_cast<int>(kNumClasses), arch.hidden});
  m.fc2_b = Tensor({static_cast<int>(kNumClasses)});
  fill(m.fc2_w, arch.hidden);
  return m;
}

// Activations kept for the backward pass.
struct ForwardCache {
  std::array<Tensor, 3> in;      // conv inputs
  std::array<Tensor, 3> pre;     // conv outputs before ReLU
  std::array<PoolResult, 3> pool;
  Tensor flat, h_pre, h, logits;
};

inline Tensor batch_tensor(const std::vector<const Sample*>& batch, int size) {
  Tensor x({static_cast<int>(batch.size()), 3, size, size});
  const std::size_t per = static_cast<std::size_t>(3) * size * size;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    if (batch[n]->chw.size() != per) throw ShapeError("sample does not match the " + std::to_string(size) + "px input");
    for (std::size_t i = 0; i < per; ++i) x[n * per + i] = batch[n]->chw[i] / 255.0f;
  }
  return x;
}

inline Tensor forward(const CnnModel& m, const Tensor& x, ForwardCache* cache = nullptr) {
  Tensor a = x;
  for (std::size_t i = 0; i < 3; ++i) {
    Tensor z = conv2d(a, m.conv_w[i], m.conv_b[i], 1, 1);
    Tensor r = relu(z);
    PoolResult p = maxpool2x2(r);
    if (cache) {
      cache->in[i] = std::move(a);
      cache->pre[i] = std::move(z);
      cache->pool[i] = p;
    }
    a = std::move(p.y);
  }
  Tensor flat = a.reshaped({x.dim(0), m.flat_size()});
  Tensor h_pre = linear(flat, m.fc1_w, m.fc1_b);
  Tensor h = relu(h_pre);
  Tensor logits = linear(h, m.fc2_w, m.fc2_b);
  if (cache) {
    cache->flat = std::move(flat);
    cache->h_pre = std::move(h_pre);
    cache->h = std::move(h);
    cache->logits = logits;
  }
  return logits;
}

struct CnnGrads {
  std::array<Tensor, 3> conv_w, conv_b;
  Tensor fc1_w, fc1_b, fc2_w, fc2_b;
};

inline CnnGrads backward(const CnnModel& m, const ForwardCache& c, const Tensor& dlogits) {
  CnnGrads g;
  auto l2 = linear_backward(c.h, m.fc2_w, dlogits);
  g.fc2_w = std::move(l2.dw);
  g.fc2_b = std::move(l2.db);
  auto l1 = linear_backward(c.flat, m.fc1_w, relu_backward(c.h_pre, l2.dx));
  g.fc1_w = std::move(l1.dw);
  g.fc1_b = std::move(l1.db);
  const int s = m.arch.input / 8;
  Tensor d = l1.dx.reshaped({dlogits.dim(0), m.arch.channels[2], s, s});
  for (int i = 2; i >= 0; --i) {
    const auto k = static_cast<std::size_t>(i);
    Tensor dr = maxpool2x2_backward(c.pre[k].shape(), c.pool[k].argmax, d);
    auto cg = conv2d_backward(c.in[k], m.conv_w[k], relu_backward(c.pre[k], dr), 1, 1);
    g.conv_w[k] = std::move(cg.dw);
    g.conv_b[k] = std::move(cg.db);
    d = std::move(cg.dx);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  double learning_rate = 0.001;
  // (epoch, rate): the rate applies to every epoch after `epoch`.
  std::vector<std::pair<int, double>> schedule{{50, 1e-5}, {75, 1e-6}};
  double momentum = 0.9;
  int batch_size = 64;
  int validation_interval = 5;
  int patience = 2;
  int max_epochs = 100;
  std::uint64_t seed = 1;
  // Samples per forward/backward chunk inside a batch (memory only; results
  // are identical for any chunk size up to rounding order).
  int chunk = 16;

  void validate() const {
    if (!(learning_rate > 0) || !(momentum >= 0 && momentum < 1)) throw ConfigError("learning rate must be > 0 and momentum in [0,1)");
    for (const auto& [e, r] : schedule)
      if (e < 0 || !(r > 0)) throw ConfigError("learning-rate schedule entries need epoch >= 0 and rate > 0");
    if (batch_size < 1 || validation_interval < 1 || patience < 0 || max_epochs < 1 || chunk < 1)
      throw ConfigError("batch size, validation interval, max epochs and chunk must be >= 1; patience >= 0");
  }

  double rate_for_epoch(int epoch) const {
    double r = learning_rate;
    for (const auto& [e, rate] : schedule)
      if (epoch > e) r = rate;
    return r;
  }
};

struct Checkpoint {
  int epoch = 0;
  double accuracy = 0.0;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

struct TrainLog {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_rate;
  std::vector<Checkpoint> checkpoints;
  int best_checkpoint = -1;
  bool early_stopped = false;
  friend bool operator==(const TrainLog&, const TrainLog&) = default;
};

// Tracks checkpoint accuracies; signals a stop once accuracy has dropped on
// more than `patience` consecutive checkpoints. The best checkpoint is the
// highest accuracy, earliest on ties.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  bool update(double accuracy) {
    if (!history_.empty() && accuracy < history_.back()) ++decreases_;
    else decreases_ = 0;
    if (best_ < 0 || accuracy > history_[static_cast<std::size_t>(best_)]) best_ = static_cast<int>(history_.size());
    history_.push_back(accuracy);
    return decreases_ > patience_;
  }
  int best() const { return best_; }

 private:
  int patience_;
  int decreases_ = 0;
  int best_ = -1;
  std::vector<double> history_;
};

inline std::vector<int> predict_indices(const CnnModel& m, const std::vector<Sample>& data, int chunk = 32) {
  std::vector<int> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); i += static_cast<std::size_t>(chunk)) {
    std::vector<const Sample*> b;
    for (std::size_t j = i; j < std::min(data.size(), i + static_cast<std::size_t>(chunk)); ++j) b.push_back(&data[j]);
    const Tensor logits = forward(m, batch_tensor(b, m.arch.input));
    const int K = logits.dim(1);
    for (std::size_t n = 0; n < b.size(); ++n) {
      const float* z = logits.data() + n * static_cast<std::size_t>(K);
      out.push_back(static_cast<int>(std::max_element(z, z + K) - z));
    }
  }
  return out;
}

inline double accuracy(const CnnModel& m, const std::vector<Sample>& data) {
  if (data.empty()) return 0.0;
  const auto pred = predict_indices(m, data);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < data.size(); ++i) ok += pred[i] == data[i].label;
  return static_cast<double>(ok) / static_cast<double>(data.size());
}

struct TrainResult {
  CnnModel model;
  TrainLog log;
};

using TrainProgress = std::function<void(int epoch, double loss, std::optional<double> valid_accuracy)>;

inline TrainResult train(CnnModel model, const std::vector<Sample>& train_set, const std::vector<Sample>& valid_set,
                         const TrainConfig& cfg, const TrainProgress& progress = {}) {
  cfg.validate();
  if (train_set.empty()) throw ConfigError("training split is empty");
  if (valid_set.empty()) throw ConfigError("validation split is empty");
  for (const auto* set : {&train_set, &valid_set})
    for (const auto& s : *set)
      if (s.label < 0 || s.label >= model.outputs()) throw ValidationError("sample label outside the model's classes");

  Rng rng(cfg.seed);
  std::vector<Tensor> velocity;
  for (auto& [name, p] : model.params()) velocity.emplace_back(p->shape());

  TrainLog log;
  EarlyStopper stopper(cfg.patience);
  std::vector<CnnModel> snapshots;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  auto checkpoint = [&](int epoch) {
    const double acc = accuracy(model, valid_set);
    log.checkpoints.push_back({epoch, acc});
    snapshots.push_back(model);
    const bool stop = stopper.update(acc);
    log.best_checkpoint = stopper.best();
    return std::pair{acc, stop};
  };

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const double lr = cfg.rate_for_epoch(epoch);
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const auto B = static_cast<float>(end - start);
      std::vector<Tensor> grads;
      for (auto& [name, p] : model.params()) grads.emplace_back(p->shape());
      for (std::size_t c0 = start; c0 < end; c0 += static_cast<std::size_t>(cfg.chunk)) {
        const std::size_t c1 = std::min(end, c0 + static_cast<std::size_t>(cfg.chunk));
        std::vector<const Sample*> chunk;
        std::vector<int> labels;
        for (std::size_t i = c0; i < c1; ++i) {
          chunk.push_back(&train_set[order[i]]);
          labels.push_back(train_set[order[i]].label);
        }
        ForwardCache cache;
        const Tensor logits = forward(model, batch_tensor(chunk, model.arch.input), &cache);
        auto ce = softmax_cross_entropy(logits, labels);
        loss_sum += ce.loss * static_cast<double>(chunk.size());
        // Rescale the chunk-mean gradient to the batch mean.
        for (auto& v : ce.gradient.values()) v *= static_cast<float>(chunk.size()) / B;
        CnnGrads g = backward(model, cache, ce.gradient);
        const std::array<const Tensor*, 10> parts{&g.conv_w[0], &g.conv_b[0], &g.conv_w[1], &g.conv_b[1], &g.conv_w[2],
                                                  &g.conv_b[2], &g.fc1_w,     &g.fc1_b,     &g.fc2_w,     &g.fc2_b};
        for (std::size_t k = 0; k < parts.size(); ++k)
          for (std::size_t i = 0; i < grads[k].size(); ++i) grads[k][i] += (*parts[k])[i];
      }
      auto ps = model.params();
      for (std::size_t k = 0; k < ps.size(); ++k) {
        Tensor& w = *ps[k].second;
        Tensor& v = velocity[k];
        for (std::size_t i = 0; i < w.size(); ++i) {
          v[i] = static_cast<float>(cfg.momentum) * v[i] - static_cast<float>(lr) * grads[k][i];
          w[i] += v[i];
        }
      }
    }
    const double epoch_loss = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) throw Error("training diverged (non-finite loss) at epoch " + std::to_string(epoch));
    log.epoch_loss.push_back(epoch_loss);
    log.epoch_rate.push_back(lr);

    std::optional<double> acc;
    bool stop = false;
    if (epoch % cfg.validation_interval == 0 || epoch == cfg.max_epochs) {
      auto [a, s] = checkpoint(epoch);
      acc = a;
      stop = s;
    }
    if (progress) progress(epoch, epoch_loss, acc);
    if (stop) {
      log.early_stopped = true;
      break;
    }
  }
  return {std::move(snapshots.at(static_cast<std::size_t>(log.best_checkpoint))), std::move(log)};
}

// ---------------------------------------------------------------------------
// Inference

using Ranking = std::vector<std::pair<ComponentClass, double>>;

// Sorted by descending score; equal scores keep class-ordinal order.
inline Ranking rank_scores(const std::vector<ComponentClass>& labels, const std::vector<double>& scores) {
  Ranking r;
  for (std::size_t i = 0; i < labels.size(); ++i) r.emplace_back(labels[i], scores[i]);
  std::stable_sort(r.begin(), r.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : ordinal(a.first) < ordinal(b.first);
  });
  return r;
}

inline Ranking predict(const CnnModel& m, const Image& crop) {
  if (crop.empty()) throw ValidationError("cannot classify a zero-area crop");
  const Sample s = make_sample(crop, 0, m.arch.input);
  const Tensor p = softmax(forward(m, batch_tensor({&s}, m.arch.input)));
  std::vector<double> scores(p.values().begin(), p.values().end());
  return rank_scores(m.labels, scores);
}

// ---------------------------------------------------------------------------
// Persistence

inline std::vector<std::uint8_t> encode_cnn(const CnnModel& m) {
  ModelFile f;
  f.type = ModelType::Cnn;
  f.meta = {{"input", m.arch.input}, {"channels", m.arch.channels}, {"hidden", m.arch.hidden}};
  f.labels = m.labels;
  for (const auto& [name, t] : m.params()) f.blobs.push_back({name, *t});
  return encode_model(f);
}

inline CnnModel decode_cnn(const std::vector<std::uint8_t>& bytes) {
  const ModelFile f = decode_model(bytes, ModelType::Cnn);
  CnnModel m;
  try {
    m.arch.input = f.meta.at("input").get<int>();
    m.arch.channels = f.meta.at("channels").get<std::array<int, 3>>();
    m.arch.hidden = f.meta.at("hidden").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("CNN model metadata: ") + e.what());
  }
  validate_arch(m.arch);
  m.labels = f.labels;
  if (m.labels.size() != kNumClasses) throw ValidationError("CNN model must have 15 output classes");
  const CnnModel shape_ref = init_cnn(m.arch, 0);
  auto ps = m.params();
  auto refs = shape_ref.params();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Tensor& t = find_blob(f, ps[i].first);
    if (t.shape() != refs[i].second->shape())
      throw ValidationError("CNN layer " + ps[i].first + " has shape " + t.shape_string() + ", expected " +
                            refs[i].second->shape_string());
    *ps[i].second = t;
  }
  return m;
}

inline void save_cnn(const fs::path& path, const CnnModel& m) { write_binary_file(path, encode_cnn(m)); }
inline CnnModel load_cnn(const fs::path& path) { return decode_cnn(read_binary_file(path)); }

}  // namespace guiproto
