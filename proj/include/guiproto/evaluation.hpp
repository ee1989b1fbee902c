#pragma once

// Metrics: confusion matrix and per-class rates, weighted edit distance over
// pre-order label sequences, and pixel MAE/MSE.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "guiproto/codegen.hpp"
#include "guiproto/core.hpp"

namespace guiproto {

// ---------------------------------------------------------------------------
// Classification

struct ConfusionMatrix {
  // rows = true class, cols = predicted class
  std::array<std::array<long long, kNumClasses>, kNumClasses> counts{};

  void add(ComponentClass truth, ComponentClass predicted, long long n = 1) {
    counts[ordinal(truth)][ordinal(predicted)] += n;
  }
  long long row_sum(std::size_t r) const {
    long long s = 0;
    for (auto v : counts[r]) s += v;
    return s;
  }
  long long col_sum(std::size_t c) const {
    long long s = 0;
    for (const auto& row : counts) s += row[c];
    return s;
  }
  long long total() const {
    long long s = 0;
    for (std::size_t r = 0; r < kNumClasses; ++r) s += row_sum(r);
    return s;
  }
  long long diagonal() const {
    long long s = 0;
    for (std::size_t i = 0; i < kNumClasses; ++i) s += counts[i][i];
    return s;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct PrecisionReport {
  double overall = 0;
  std::array<std::optional<double>, kNumClasses> per_class;         // diagonal / row sum
  std::array<std::optional<double>, kNumClasses> per_class_column;  // diagonal / column sum
  std::array<long long, kNumClasses> support{};
};

inline PrecisionReport precision(const ConfusionMatrix& m) {
  const long long total = m.total();
  if (total == 0) throw ValidationError("confusion matrix is empty");
  PrecisionReport r;
  r.overall = static_cast<double>(m.diagonal()) / static_cast<double>(total);
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    r.support[i] = m.row_sum(i);
    if (r.support[i] > 0) r.per_class[i] = static_cast<double>(m.counts[i][i]) / static_cast<double>(r.support[i]);
    if (const auto c = m.col_sum(i); c > 0)
      r.per_class_column[i] = static_cast<double>(m.counts[i][i]) / static_cast<double>(c);
  }
  return r;
}

inline nlohmann::ordered_json classification_report_json(const ConfusionMatrix& m) {
  const auto p = precision(m);
  nlohmann::ordered_json j;
  j["overall_top1"] = p.overall;
  j["total"] = m.total();
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    nlohmann::ordered_json c;
    c["support"] = p.support[i];
    c["row_normalized"] = p.per_class[i] ? nlohmann::ordered_json(*p.per_class[i]) : nlohmann::ordered_json(nullptr);
    c["column_normalized"] = p.per_class_column[i] ? nlohmann::ordered_json(*p.per_class_column[i]) : nlohmann::ordered_json(nullptr);
    per[std::string(kClassNames[i])] = c;
  }
  j["per_class"] = per;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : m.counts) rows.push_back(row);
  j["labels"] = kClassNames;
  j["confusion"] = rows;
  return j;
}

inline std::string classification_report_text(const ConfusionMatrix& m) {
  const auto p = precision(m);
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << std::left << std::setw(17) << "class" << std::right << std::setw(9) << "support" << std::setw(10) << "row"
      << std::setw(10) << "column" << '\n';
  const auto cell = [&](const std::optional<double>& v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(3);
    if (v) s << *v;
    else s << "-";
    return s.str();
  };
  for (std::size_t i = 0; i < kNumClasses; ++i)
    out << std::left << std::setw(17) << kClassNames[i] << std::right << std::setw(9) << p.support[i] << std::setw(10)
        << cell(p.per_class[i]) << std::setw(10) << cell(p.per_class_column[i]) << '\n';
  out << "overall top-1 " << p.overall << " over " << m.total() << " components\n";
  out << "(row = share of a class's components predicted correctly; column = share of predictions that were right)\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Tree edit distance

inline std::vector<std::string> preorder_sequence(const GuiNode& tree) {
  std::vector<std::string> out;
  visit_preorder(tree, [&](const GuiNode& n, int) { out.push_back(n.type); });
  return out;
}

inline std::vector<std::string> preorder_sequence(const LayoutNode& tree) {
  std::vector<std::string> out;
  auto rec = [&](auto&& self, const LayoutNode& n) -> void {
    out.push_back(n.type);
    for (const auto& c : n.children) self(self, c);
  };
  rec(rec, tree);
  return out;
}

struct EditWeights {
  double w_ins = 1.0 / 3.0;
  double w_del = 1.0 / 3.0;
  double w_sub = 1.0 / 3.0;

  void validate() const {
    if (w_ins < 0 || w_del < 0 || w_sub < 0) throw ConfigError("edit weights must be non-negative");
    if (std::abs(w_ins + w_del + w_sub - 1.0) > 1e-9) throw ConfigError("edit weights must sum to 1");
  }
};

// Operation counts of an edit script.
struct EditCounts {
  int ins = 0, del = 0, sub = 0;
  double cost(const EditWeights& w) const;
};

namespace detail {

__extension__ typedef __int128 Int128;

// The weights as integers over one shared power of two. Script costs then
// compare exactly, and scripts of equal real cost round to the same double.
struct ScaledWeights {
  Int128 w[3] = {0, 0, 0};
  int exp = 0;
  bool exact = false;

  explicit ScaledWeights(const EditWeights& ew) {
    const double ws[3] = {ew.w_ins, ew.w_del, ew.w_sub};
    long long mant[3] = {0, 0, 0};
    int e[3] = {0, 0, 0};
    int lo = INT32_MAX, hi = INT32_MIN;
    for (int k = 0; k < 3; ++k) {
      if (ws[k] == 0) continue;
      int x = 0;
      const double f = std::frexp(ws[k], &x);
      mant[k] = static_cast<long long>(std::ldexp(f, 53));
      e[k] = x - 53;
      lo = std::min(lo, e[k]);
      hi = std::max(hi, e[k]);
    }
    if (lo == INT32_MAX) return;
    // 53-bit mantissas shifted by up to 40 bits times 31-bit counts stay below 2^126.
    if (hi - lo > 40) return;
    for (int k = 0; k < 3; ++k)
      if (mant[k]) w[k] = static_cast<Int128>(mant[k]) << (e[k] - lo);
    exp = lo;
    exact = true;
  }

  Int128 scaled(const EditCounts& c) const { return c.ins * w[0] + c.del * w[1] + c.sub * w[2]; }

  double value(const EditCounts& c, const EditWeights& ew) const {
    if (!exact) return c.ins * ew.w_ins + c.del * ew.w_del + c.sub * ew.w_sub;
    return std::ldexp(static_cast<double>(scaled(c)), exp);
  }

  bool less(const EditCounts& a, const EditCounts& b, const EditWeights& ew) const {
    return exact ? scaled(a) < scaled(b) : value(a, ew) < value(b, ew);
  }
};

}  // namespace detail

inline double EditCounts::cost(const EditWeights& w) const { return detail::ScaledWeights(w).value(*this, w); }

// Wagner-Fischer over the cost of turning `a` into `b`. Each cell keeps the
// op counts of its cheapest script rather than an accumulated float.
template <class T>
EditCounts edit_script_counts(const std::vector<T>& a, const std::vector<T>& b, const EditWeights& w) {
  w.validate();
  const detail::ScaledWeights sw(w);
  const std::size_t n = a.size(), m = b.size();
  std::vector<EditCounts> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = {static_cast<int>(j), 0, 0};
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = {0, static_cast<int>(i), 0};
    for (std::size_t j = 1; j <= m; ++j) {
      EditCounts best = prev[j - 1];
      if (!(a[i - 1] == b[j - 1])) ++best.sub;
      EditCounts del = prev[j];
      ++del.del;
      EditCounts ins = cur[j - 1];
      ++ins.ins;
      if (sw.less(del, best, w)) best = del;
      if (sw.less(ins, best, w)) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

template <class T>
double edit_distance(const std::vector<T>& a, const std::vector<T>& b, const EditWeights& w = {}) {
  return edit_script_counts(a, b, w).cost(w);
}

enum class EditOp { Ins, Del, Sub };

inline std::string_view to_string(EditOp op) {
  switch (op) {
    case EditOp::Ins: return "ins";
    case EditOp::Del: return "del";
    case EditOp::Sub: return "sub";
  }
  return "?";
}

inline EditOp parse_edit_op(std::string_view s) {
  if (s == "ins") return EditOp::Ins;
  if (s == "del") return EditOp::Del;
  if (s == "sub") return EditOp::Sub;
  throw ConfigError("unknown edit operation \"" + std::string(s) + "\" (expected ins, del or sub)");
}

inline EditWeights swept_weights(EditOp op, double p) {
  const double rest = (1.0 - p) / 2.0;
  switch (op) {
    case EditOp::Ins: return {p, rest, rest};
    case EditOp::Del: return {rest, p, rest};
    case EditOp::Sub: return {rest, rest, p};
  }
  return {};
}

template <class T>
std::vector<std::pair<double, double>> sweep_edit_weights(const std::vector<T>& a, const std::vector<T>& b, EditOp op,
                                                          const std::vector<double>& penalties) {
  std::vector<std::pair<double, double>> out;
  for (double p : penalties) {
    if (!(p > 0 && p < 1)) throw ConfigError("sweep penalty must lie in (0,1)");
    out.emplace_back(p, edit_distance(a, b, swept_weights(op, p)));
  }
  return out;
}

inline std::string sweep_csv(const std::vector<std::pair<double, double>>& rows) {
  std::string out = "penalty,distance\n";
  for (const auto& [p, d] : rows) out += format_number(p) + "," + format_number(d) + "\n";
  return out;
}

// Evenly spaced points strictly inside (0,1): 1/(n+1) ... n/(n+1).
inline std::vector<double> default_penalties(int n = 19) {
  std::vector<double> out;
  for (int i = 1; i <= n; ++i) out.push_back(static_cast<double>(i) / (n + 1));
  return out;
}

// ---------------------------------------------------------------------------
// Pixel similarity

namespace detail {

inline void require_same_size(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw ValidationError("image dimensions differ: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                          " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
}

}  // namespace detail

inline double pixel_mae(const Image& a, const Image& b) {
  detail::require_same_size(a, b);
  const auto& da = a.data();
  const auto& db = b.data();
  if (da.empty()) return 0.0;
  long long sum = 0;
  for (std::size_t i = 0; i < da.size(); ++i) sum += std::abs(int{da[i]} - int{db[i]});
  return static_cast<double>(sum) / 255.0 / static_cast<double>(da.size());
}

inline double pixel_mse(const Image& a, const Image& b) {
  detail::require_same_size(a, b);
  const auto& da = a.data();
  const auto& db = b.data();
  if (da.empty()) return 0.0;
  long long sum = 0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const long long d = int{da[i]} - int{db[i]};
    sum += d * d;
  }
  return static_cast<double>(sum) / (255.0 * 255.0) / static_cast<double>(da.size());
}

}  // namespace guiproto
