#pragma once

// Bag-of-visual-words baseline: normalised grey patches, a k-means codebook,
// and nearest-mean-histogram classification by cosine similarity.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "guiproto/cnn.hpp"
#include "guiproto/core.hpp"
#include "guiproto/modelfile.hpp"
#include "guiproto/random.hpp"

namespace guiproto {

struct BovwConfig {
  int k = 256;
  int image_size = 64;
  int patch = 8;
  int stride = 8;
  int max_iterations = 50;
  double tolerance = 1e-4;  // stop when no centroid moves further than this
  std::size_t max_descriptors = 100000;
  std::uint64_t seed = 7;

  int descriptor_dim() const { return patch * patch; }
  void validate() const {
    if (k < 2) throw ConfigError("BOVW codebook size k must be at least 2");
    if (patch < 1 || stride < 1 || image_size < patch) throw ConfigError("BOVW patch geometry is invalid");
    if (max_iterations < 1) throw ConfigError("BOVW needs at least one k-means iteration");
  }
};

struct BovwModel {
  BovwConfig config;
  RowMatrix codebook;                  // k x d
  std::vector<ComponentClass> labels;  // all 15, ordinal order
  RowMatrix class_hist;                // 15 x k, rows sum to 1 (or 0 for unseen classes)
  std::vector<double> objective;       // k-means objective per iteration
};

// Mean/variance-normalised grey patches on a regular grid of the letterboxed crop.
inline RowMatrix patch_descriptors(const Image& crop, const BovwConfig& cfg) {
  const Image lb = letterbox(crop, cfg.image_size);
  const int s = cfg.image_size, p = cfg.patch;
  std::vector<float> gray(static_cast<std::size_t>(s) * s);
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x) {
      const Rgb c = lb.at(x, y);
      gray[static_cast<std::size_t>(y) * s + x] = static_cast<float>((0.299 * c.r + 0.587 * c.g + 0.114 * c.b) / 255.0);
    }
  const int n = (s - p) / cfg.stride + 1;
  RowMatrix out(n * n, p * p);
  int row = 0;
  for (int gy = 0; gy < n; ++gy)
    for (int gx = 0; gx < n; ++gx, ++row) {
      double mean = 0.0;
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x) mean += gray[static_cast<std::size_t>(gy * cfg.stride + y) * s + gx * cfg.stride + x];
      mean /= p * p;
      double var = 0.0;
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x) {
          const double d = gray[static_cast<std::size_t>(gy * cfg.stride + y) * s + gx * cfg.stride + x] - mean;
          var += d * d;
        }
      const double inv = 1.0 / std::sqrt(var / (p * p) + 1e-4);
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x)
          out(row, y * p + x) = static_cast<float>(
              (gray[static_cast<std::size_t>(gy * cfg.stride + y) * s + gx * cfg.stride + x] - mean) * inv);
    }
  return out;
}

namespace detail {

// Index of the nearest centroid for every row of X.
inline std::vector<int> assign_nearest(const RowMatrix& X, const RowMatrix& C, double* objective = nullptr) {
  const Eigen::VectorXf cn = C.rowwise().squaredNorm();
  const Eigen::VectorXf xn = X.rowwise().squaredNorm();
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  double total = 0.0;
  constexpr Eigen::Index kBlock = 4096;
  for (Eigen::Index r0 = 0; r0 < X.rows(); r0 += kBlock) {
    const Eigen::Index nr = std::min(kBlock, X.rows() - r0);
    const RowMatrix dots = X.middleRows(r0, nr) * C.transpose();
    for (Eigen::Index i = 0; i < nr; ++i) {
      Eigen::Index best = 0;
      float bd = std::numeric_limits<float>::infinity();
      for (Eigen::Index j = 0; j < C.rows(); ++j) {
        const float d = cn(j) - 2.0f * dots(i, j);
        if (d < bd) bd = d, best = j;
      }
      out[static_cast<std::size_t>(r0 + i)] = static_cast<int>(best);
      total += std::max(0.0, static_cast<double>(bd + xn(r0 + i)));
    }
  }
  if (objective) *objective = total;
  return out;
}

inline std::vector<double> histogram(const RowMatrix& desc, const RowMatrix& codebook) {
  std::vector<double> h(static_cast<std::size_t>(codebook.rows()), 0.0);
  for (int a : assign_nearest(desc, codebook)) h[static_cast<std::size_t>(a)] += 1.0;
  for (auto& v : h) v /= static_cast<double>(desc.rows());
  return h;
}

}  // namespace detail

struct KMeansResult {
  RowMatrix centroids;
  std::vector<double> objective;  // sum of squared distances after each assignment
};

// Lloyd's algorithm seeded with k distinct descriptors. Empty clusters keep
// their previous centroid, so the objective never increases.
inline KMeansResult kmeans(const RowMatrix& X, int k, int max_iterations, double tolerance, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-means needs k >= 2");
  Rng rng(seed);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(X.rows()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Eigen::Index>(i);
  rng.shuffle(idx);
  std::vector<Eigen::Index> chosen;
  std::set<std::vector<float>> seen;
  for (auto i : idx) {
    std::vector<float> v(X.row(i).data(), X.row(i).data() + X.cols());
    if (seen.insert(std::move(v)).second) chosen.push_back(i);
    if (static_cast<int>(chosen.size()) == k) break;
  }
  if (static_cast<int>(chosen.size()) < k)
    throw ConfigError("only " + std::to_string(chosen.size()) + " distinct descriptors for k=" + std::to_string(k) +
                      "; use a smaller k");

  KMeansResult r;
  r.centroids.resize(k, X.cols());
  for (int j = 0; j < k; ++j) r.centroids.row(j) = X.row(chosen[static_cast<std::size_t>(j)]);
  for (int it = 0; it < max_iterations; ++it) {
    double obj = 0.0;
    const auto assign = detail::assign_nearest(X, r.centroids, &obj);
    r.objective.push_back(obj);
    RowMatrix sums = RowMatrix::Zero(k, X.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += X.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    double shift = 0.0;
    for (int j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] == 0) continue;
      const Eigen::RowVectorXf c = sums.row(j) / static_cast<float>(counts[static_cast<std::size_t>(j)]);
      shift = std::max(shift, static_cast<double>((c - r.centroids.row(j)).norm()));
      r.centroids.row(j) = c;
    }
    if (shift < tolerance) break;
  }
  return r;
}

struct BovwExample {
  const Image* crop;
  ComponentClass label;
};

inline BovwModel bovw_train(const std::vector<BovwExample>& data, const BovwConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw ConfigError("BOVW training needs at least one component");
  std::vector<RowMatrix> per;
  per.reserve(data.size());
  std::size_t total = 0;
  for (const auto& e : data) {
    per.push_back(patch_descriptors(*e.crop, cfg));
    total += static_cast<std::size_t>(per.back().rows());
  }
  // Uniform subsample of descriptors for the codebook.
  std::vector<std::pair<std::size_t, Eigen::Index>> refs;
  refs.reserve(total);
  for (std::size_t i = 0; i < per.size(); ++i)
    for (Eigen::Index r = 0; r < per[i].rows(); ++r) refs.emplace_back(i, r);
  Rng rng(cfg.seed);
  if (refs.size() > cfg.max_descriptors) {
    rng.shuffle(refs);
    refs.resize(cfg.max_descriptors);
  }
  if (refs.size() < static_cast<std::size_t>(cfg.k))
    throw ConfigError("only " + std::to_string(refs.size()) + " descriptors for k=" + std::to_string(cfg.k) + "; use a smaller k");
  RowMatrix X(static_cast<Eigen::Index>(refs.size()), cfg.descriptor_dim());
  for (std::size_t i = 0; i < refs.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = per[refs[i].first].row(refs[i].second);

  BovwModel m;
  m.config = cfg;
  auto km = kmeans(X, cfg.k, cfg.max_iterations, cfg.tolerance, rng.next());
  m.codebook = std::move(km.centroids);
  m.objective = std::move(km.objective);
  for (auto c : all_classes()) m.labels.push_back(c);
  m.class_hist = RowMatrix::Zero(static_cast<Eigen::Index>(kNumClasses), cfg.k);
  std::vector<int> counts(kNumClasses, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto h = detail::histogram(per[i], m.codebook);
    const auto row = static_cast<Eigen::Index>(ordinal(data[i].label));
    for (int j = 0; j < cfg.k; ++j) m.class_hist(row, j) += static_cast<float>(h[static_cast<std::size_t>(j)]);
    ++counts[ordinal(data[i].label)];
  }
  for (std::size_t c = 0; c < kNumClasses; ++c)
    if (counts[c]) m.class_hist.row(static_cast<Eigen::Index>(c)) /= m.class_hist.row(static_cast<Eigen::Index>(c)).sum();
  return m;
}

inline Ranking bovw_predict(const BovwModel& m, const Image& crop) {
  if (crop.empty()) throw ValidationError("cannot classify a zero-area crop");
  const auto h = detail::histogram(patch_descriptors(crop, m.config), m.codebook);
  double hn = 0.0;
  for (double v : h) hn += v * v;
  hn = std::sqrt(hn);
  std::vector<double> scores;
  for (Eigen::Index c = 0; c < m.class_hist.rows(); ++c) {
    double dot = 0.0, cn = 0.0;
    for (Eigen::Index j = 0; j < m.class_hist.cols(); ++j) {
      dot += h[static_cast<std::size_t>(j)] * m.class_hist(c, j);
      cn += static_cast<double>(m.class_hist(c, j)) * m.class_hist(c, j);
    }
    scores.push_back(cn > 0 && hn > 0 ? dot / (std::sqrt(cn) * hn) : 0.0);
  }
  return rank_scores(m.labels, scores);
}

inline std::vector<std::uint8_t> encode_bovw(const BovwModel& m) {
  ModelFile f;
  f.type = ModelType::Bovw;
  const auto& c = m.config;
  f.meta = {{"k", c.k},         {"image_size", c.image_size}, {"patch", c.patch}, {"stride", c.stride},
            {"max_iterations", c.max_iterations}, {"tolerance", c.tolerance}, {"max_descriptors", c.max_descriptors},
            {"seed", c.seed}};
  f.labels = m.labels;
  auto to_tensor = [](const RowMatrix& mat) {
    return Tensor({static_cast<int>(mat.rows()), static_cast<int>(mat.cols())},
                  std::vector<float>(mat.data(), mat.data() + mat.size()));
  };
  f.blobs.push_back({"codebook", to_tensor(m.codebook)});
  f.blobs.push_back({"class_hist", to_tensor(m.class_hist)});
  return encode_model(f);
}

inline BovwModel decode_bovw(const std::vector<std::uint8_t>& bytes) {
  const ModelFile f = decode_model(bytes, ModelType::Bovw);
  BovwModel m;
  try {
    auto& c = m.config;
    c.k = f.meta.at("k").get<int>();
    c.image_size = f.meta.at("image_size").get<int>();
    c.patch = f.meta.at("patch").get<int>();
    c.stride = f.meta.at("stride").get<int>();
    c.max_iterations = f.meta.at("max_iterations").get<int>();
    c.tolerance = f.meta.at("tolerance").get<double>();
    c.max_descriptors = f.meta.at("max_descriptors").get<std::size_t>();
    c.seed = f.meta.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("BOVW model metadata: ") + e.what());
  }
  m.config.validate();
  m.labels = f.labels;
  auto from_tensor = [](const Tensor& t, int rows, int cols, const char* what) {
    if (t.rank() != 2 || t.dim(0) != rows || t.dim(1) != cols)
      throw ValidationError(std::string("BOVW ") + what + " has shape " + t.shape_string());
    return RowMatrix(ConstMatMap(t.data(), rows, cols));
  };
  m.codebook = from_tensor(find_blob(f, "codebook"), m.config.k, m.config.descriptor_dim(), "codebook");
  m.class_hist = from_tensor(find_blob(f, "class_hist"), static_cast<int>(m.labels.size()), m.config.k, "class histograms");
  return m;
}

inline void save_bovw(const fs::path& path, const BovwModel& m) { write_binary_file(path, encode_bovw(m)); }
inline BovwModel load_bovw(const fs::path& path) { return decode_bovw(read_binary_file(path)); }

}  // namespace guiproto
