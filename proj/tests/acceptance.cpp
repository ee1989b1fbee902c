// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Pass criterion numbers to run a subset.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "guiproto/commands.hpp"
#include "guiproto/random.hpp"

using namespace guiproto;
using Json = nlohmann::ordered_json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  Json metrics;  // compared across repeats
};

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// 1, 2: classifier on a synthesized corpus

constexpr int kScreensPerClass = 125;

PipelineConfig classifier_config() {
  PipelineConfig c = profile_defaults("desk");
  c.arch = {128, {8, 16, 32}, 64};
  c.train.learning_rate = 0.01;
  c.train.max_epochs = 8;
  c.train.validation_interval = 1;
  c.train.patience = 2;
  return c;
}

struct ClassifierRun {
  Outcome cnn, bovw;
  std::shared_ptr<CnnModel> model;
  std::vector<ScreenRecord> screens;
};

ClassifierRun run_classifiers() {
  const Stopwatch clock;
  const PipelineConfig cfg = classifier_config();
  std::vector<ScreenSample> samples;
  for (auto cls : all_classes())
    for (int i = 0; i < kScreensPerClass; ++i) {
      const std::string id = "synth_" + std::string(to_string(cls)) + "_" + std::to_string(i);
      auto s = synthesize_screen(cls, synth_seed(cfg.seed, cls, static_cast<std::uint64_t>(i)), cfg.synth, id);
      samples.push_back({std::move(s.record), std::move(s.screenshot), Provenance::Synthetic});
    }
  auto filtered = filter_screens(std::move(samples), cfg.screen_filter);
  std::vector<LabeledComponent> comps;
  for (const auto& s : filtered.kept) {
    auto ex = extract_components(s.record, s.screenshot, s.origin, cfg.component_filter);
    for (auto& c : ex.components) comps.push_back(std::move(c));
  }
  auto rare = filter_rare_classes(std::move(comps), cfg.min_count);
  SegmentConfig sc = cfg.segment;
  sc.seed = cfg.seed;
  const auto seg = segment(std::move(rare.kept), sc);

  SplitData tr, va, te;
  for (std::size_t i = 0; i < seg.components.size(); ++i) {
    const auto& e = seg.manifest.entries[i];
    auto& d = e.split == Split::Train ? tr : e.split == Split::Valid ? va : te;
    d.crops.push_back(seg.components[i].crop);
    d.labels.push_back(e.label);
  }
  const auto train_counts = seg.manifest.class_counts(Split::Train);
  const auto test_counts = seg.manifest.class_counts(Split::Test);
  const std::size_t min_train = *std::min_element(train_counts.begin(), train_counts.end());
  const std::size_t min_test = *std::min_element(test_counts.begin(), test_counts.end());

  ClassifierRun run;
  for (const auto& s : filtered.kept) run.screens.push_back(s.record);

  const auto trained = train(init_cnn(cfg.arch, cfg.train.seed), to_samples(tr, cfg.arch.input), to_samples(va, cfg.arch.input),
                             cfg.train, [&](int epoch, double loss, std::optional<double> acc) {
                               std::cerr << "  epoch " << epoch << " loss " << fmt(loss) << " valid "
                                         << (acc ? fmt(*acc) : std::string("-")) << " at " << fmt(clock.seconds(), 0) << " s\n";
                             });
  run.model = std::make_shared<CnnModel>(trained.model);
  const auto model = run.model;
  const auto cnn_cm = evaluate_classifier([model](const Image& c) { return predict(*model, c); }, te);
  const double cnn_acc = precision(cnn_cm).overall;

  std::vector<BovwExample> ex;
  for (std::size_t i = 0; i < tr.crops.size(); ++i) ex.push_back({&tr.crops[i], tr.labels[i]});
  const auto bovw = bovw_train(ex, cfg.bovw);
  const auto bovw_cm = evaluate_classifier([&](const Image& c) { return bovw_predict(bovw, c); }, te);
  const double bovw_acc = precision(bovw_cm).overall;
  const double minutes = clock.seconds() / 60.0;

  run.cnn.metrics = {{"cnn_report", classification_report_json(cnn_cm)},
                     {"train_loss", trained.log.epoch_loss},
                     {"split", {tr.crops.size(), va.crops.size(), te.crops.size()}}};
  run.cnn.pass = cnn_acc >= 0.90 && min_train >= 500 && min_test >= 50 && kNumClasses == 15 && minutes <= 60.0;
  run.cnn.detail = "CNN top-1 " + fmt(cnn_acc) + " (need >= 0.90) on " + std::to_string(te.crops.size()) +
                   " test crops, min " + std::to_string(min_test) + "/class; min train " + std::to_string(min_train) +
                   "/class; " + fmt(minutes, 1) + " min";
  run.bovw.metrics = {{"bovw_report", classification_report_json(bovw_cm)}};
  run.bovw.pass = cnn_acc - bovw_acc >= 0.10 && minutes <= 60.0;
  run.bovw.detail = "CNN " + fmt(cnn_acc) + " vs BOVW " + fmt(bovw_acc) + ", gap " + fmt((cnn_acc - bovw_acc) * 100, 1) +
                    " pp (need >= 10)";
  return run;
}

// ---------------------------------------------------------------------------
// 3: gradient checks

Tensor random_tensor(Rng& rng, std::vector<int> shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

Tensor numeric_gradient(const std::function<double(const Tensor&)>& f, Tensor x, float eps = 1e-3f) {
  Tensor g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float keep = x[i];
    x[i] = keep + eps;
    const double up = f(x);
    x[i] = keep - eps;
    const double down = f(x);
    x[i] = keep;
    g[i] = static_cast<float>((up - down) / (2.0 * eps));
  }
  return g;
}

double relative_error(const Tensor& a, const Tensor& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (static_cast<double>(a[i]) - b[i]) * (static_cast<double>(a[i]) - b[i]);
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  return std::sqrt(diff) / std::max(1e-12, std::max(std::sqrt(na), std::sqrt(nb)));
}

Outcome check_gradients() {
  const Stopwatch clock;
  Rng rng(2024);
  std::map<std::string, double> worst;
  auto note = [&](const std::string& k, double e) { worst[k] = std::max(worst[k], e); };
  constexpr int kTrials = 20;
  for (int t = 0; t < kTrials; ++t) {
    const int n = rng.uniform_int(1, 2), c = rng.uniform_int(1, 3), k = rng.uniform_int(1, 4);
    const int h = rng.uniform_int(4, 7), w = rng.uniform_int(4, 7), stride = rng.uniform_int(1, 2), pad = rng.uniform_int(0, 1);
    const auto x = random_tensor(rng, {n, c, h, w});
    const auto wt = random_tensor(rng, {k, c, 3, 3}, -0.5, 0.5);
    const auto b = random_tensor(rng, {k});
    const auto y = conv2d(x, wt, b, stride, pad);
    const auto r = random_tensor(rng, y.shape());
    const auto g = conv2d_backward(x, wt, r, stride, pad);
    note("conv.dx", relative_error(g.dx, numeric_gradient([&](const Tensor& v) { return dot(conv2d(v, wt, b, stride, pad), r); }, x)));
    note("conv.dw", relative_error(g.dw, numeric_gradient([&](const Tensor& v) { return dot(conv2d(x, v, b, stride, pad), r); }, wt)));
    note("conv.db", relative_error(g.db, numeric_gradient([&](const Tensor& v) { return dot(conv2d(x, wt, v, stride, pad), r); }, b)));

    // ReLU away from its kink.
    auto xr = random_tensor(rng, {rng.uniform_int(1, 4), rng.uniform_int(2, 12)});
    for (auto& v : xr.values())
      if (std::abs(v) < 0.05f) v = v < 0 ? -0.5f : 0.5f;
    const auto rr = random_tensor(rng, xr.shape());
    note("relu", relative_error(relu_backward(xr, rr), numeric_gradient([&](const Tensor& v) { return dot(relu(v), rr); }, xr)));

    // Max-pool on distinct values spaced well beyond the perturbation.
    Tensor xp({rng.uniform_int(1, 2), rng.uniform_int(1, 3), 2 * rng.uniform_int(1, 3), 2 * rng.uniform_int(1, 3)});
    std::vector<float> vals(xp.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.05f * static_cast<float>(i) - 1.0f;
    rng.shuffle(vals);
    xp.values() = vals;
    const auto pooled = maxpool2x2(xp);
    const auto rp = random_tensor(rng, pooled.y.shape());
    note("maxpool", relative_error(maxpool2x2_backward(xp.shape(), pooled.argmax, rp),
                                   numeric_gradient([&](const Tensor& v) { return dot(maxpool2x2(v).y, rp); }, xp)));

    const int bn = rng.uniform_int(1, 4), in = rng.uniform_int(2, 10), out = rng.uniform_int(2, 8);
    const auto xl = random_tensor(rng, {bn, in}), wl = random_tensor(rng, {out, in}), bl = random_tensor(rng, {out});
    const auto rl = random_tensor(rng, {bn, out});
    const auto gl = linear_backward(xl, wl, rl);
    note("linear.dx", relative_error(gl.dx, numeric_gradient([&](const Tensor& v) { return dot(linear(v, wl, bl), rl); }, xl)));
    note("linear.dw", relative_error(gl.dw, numeric_gradient([&](const Tensor& v) { return dot(linear(xl, v, bl), rl); }, wl)));
    note("linear.db", relative_error(gl.db, numeric_gradient([&](const Tensor& v) { return dot(linear(xl, wl, v), rl); }, bl)));

    const int sn = rng.uniform_int(1, 4);
    const auto z = random_tensor(rng, {sn, 15}, -3, 3);
    std::vector<int> labels(static_cast<std::size_t>(sn));
    for (auto& l : labels) l = rng.uniform_int(0, 14);
    const auto ce = softmax_cross_entropy(z, labels);
    const auto num = numeric_gradient([&](const Tensor& v) { return softmax_cross_entropy(v, labels).loss; }, z);
    double abs_err = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) abs_err = std::max(abs_err, std::abs(static_cast<double>(ce.gradient[i]) - num[i]));
    note("softmax_ce", abs_err);
  }
  bool ok = clock.seconds() < 60.0;
  std::string detail;
  for (const auto& [k, e] : worst) {
    ok = ok && e < (k == "softmax_ce" ? 1e-4 : 1e-3);
    detail += k + " " + fmt(e * 1e4, 2) + "e-4, ";
  }
  return {ok, std::to_string(kTrials) + " trials per layer, worst: " + detail + fmt(clock.seconds(), 1) + " s", {}};
}

// ---------------------------------------------------------------------------
// 4: hierarchy round trip

Outcome check_hierarchy_round_trip() {
  const Stopwatch clock;
  std::vector<ScreenRecord> corpus;
  for (int i = 0; i < 45; ++i) {
    const auto cls = static_cast<ComponentClass>(i % 15);
    corpus.push_back(synthesize_screen(cls, synth_seed(4, cls, static_cast<std::uint64_t>(i))).record);
  }
  const auto idx = build_index(corpus);
  int exact = 0;
  double worst = 0;
  for (const auto& rec : corpus) {
    std::vector<InputNode> in;
    for (const auto& l : leaves(rec.root)) in.push_back({l.bounds, l.type, l.component, l.text});
    const auto h = construct_hierarchy(in, idx, 4, rec.width, rec.height);
    const double d = edit_distance(preorder_sequence(h.root), preorder_sequence(rec.root));
    worst = std::max(worst, d);
    exact += d == 0.0;
  }
  const bool ok = exact == static_cast<int>(corpus.size()) && clock.seconds() < 60.0;
  return {ok, std::to_string(exact) + "/" + std::to_string(corpus.size()) + " screens at distance 0 (worst " + fmt(worst) + "), " +
                  fmt(clock.seconds(), 1) + " s",
          {}};
}

// ---------------------------------------------------------------------------
// 5: edit distance vs brute force

using Seq = std::vector<char>;

// Every edit script of a[i..] -> b[j..], reduced to its (ins, del, sub)
// counts; only Pareto-minimal triples are kept, since with non-negative
// weights a dominated script can never be cheaper.
class ScriptSearch {
 public:
  using Triple = std::array<int, 3>;

  const std::vector<Triple>& run(const Seq& a, const Seq& b) {
    a_ = &a;
    b_ = &b;
    for (auto& row : done_) row.fill(false);
    return at(0, 0);
  }

 private:
  const std::vector<Triple>& at(std::size_t i, std::size_t j) {
    auto& out = memo_[i][j];
    if (done_[i][j]) return out;
    done_[i][j] = true;
    out.clear();
    const Seq &a = *a_, &b = *b_;
    if (i == a.size() && j == b.size()) {
      out.push_back({0, 0, 0});
      return out;
    }
    auto add = [&](Triple t) {
      for (const auto& u : out)
        if (u[0] <= t[0] && u[1] <= t[1] && u[2] <= t[2]) return;
      std::erase_if(out, [&](const Triple& u) { return t[0] <= u[0] && t[1] <= u[1] && t[2] <= u[2]; });
      out.push_back(t);
    };
    if (j < b.size())
      for (auto t : at(i, j + 1)) add({t[0] + 1, t[1], t[2]});
    if (i < a.size())
      for (auto t : at(i + 1, j)) add({t[0], t[1] + 1, t[2]});
    if (i < a.size() && j < b.size())
      for (auto t : at(i + 1, j + 1)) add({t[0], t[1], t[2] + (a[i] != b[j])});
    return out;
  }

  const Seq* a_ = nullptr;
  const Seq* b_ = nullptr;
  std::array<std::array<std::vector<Triple>, 7>, 7> memo_;
  std::array<std::array<bool, 7>, 7> done_{};
};

Outcome check_edit_distance() {
  const Stopwatch clock;
  std::vector<Seq> all{{}};
  for (std::size_t s = 0; s < all.size(); ++s) {
    if (all[s].size() == 6) continue;
    for (char c : {'A', 'B', 'C'}) {
      Seq n = all[s];
      n.push_back(c);
      all.push_back(n);
    }
  }
  const std::vector<EditWeights> weights{{}, swept_weights(EditOp::Ins, 0.5), swept_weights(EditOp::Del, 0.5),
                                         swept_weights(EditOp::Sub, 0.5)};
  long long pairs = 0, mismatches = 0;
  ScriptSearch search;
  for (const auto& a : all)
    for (const auto& b : all) {
      ++pairs;
      const auto& scripts = search.run(a, b);
      for (const auto& w : weights) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& t : scripts) best = std::min(best, EditCounts{t[0], t[1], t[2]}.cost(w));
        if (edit_distance(a, b, w) != best) ++mismatches;
      }
    }
  const bool ok = mismatches == 0 && clock.seconds() < 120.0;
  return {ok, std::to_string(pairs) + " pairs x 4 weight triples, " + std::to_string(mismatches) + " mismatches, " +
                  fmt(clock.seconds(), 1) + " s",
          {}};
}

// ---------------------------------------------------------------------------
// 6: detection

Outcome check_detection() {
  const Stopwatch clock;
  int truth = 0, recovered = 0, detected = 0, spurious = 0;
  Json per_screen = Json::array();
  for (int i = 0; i < 50; ++i) {
    const auto cls = static_cast<ComponentClass>(i % 15);
    const auto s = synthesize_screen(cls, synth_seed(6, cls, static_cast<std::uint64_t>(i)));
    const auto dets = detect_components(s.screenshot);
    const auto gts = leaves(s.record.root);
    std::vector<bool> used(dets.size(), false);
    int hit = 0;
    for (const auto& g : gts) {
      int best = -1;
      double best_iou = 0.7;
      for (std::size_t d = 0; d < dets.size(); ++d) {
        const double v = iou(g.bounds, dets[d].bounds);
        if (!used[d] && v >= best_iou) best = static_cast<int>(d), best_iou = v;
      }
      if (best >= 0) used[static_cast<std::size_t>(best)] = true, ++hit;
    }
    truth += static_cast<int>(gts.size());
    recovered += hit;
    detected += static_cast<int>(dets.size());
    spurious += static_cast<int>(std::count(used.begin(), used.end(), false));
    Json boxes = Json::array();
    for (const auto& d : dets) boxes.push_back({d.bounds.x, d.bounds.y, d.bounds.w, d.bounds.h});
    per_screen.push_back(boxes);
  }
  const double recall = static_cast<double>(recovered) / truth;
  const double spurious_rate = detected ? static_cast<double>(spurious) / detected : 0.0;
  const bool ok = recall >= 0.90 && spurious_rate <= 0.10 && clock.seconds() < 300.0;
  return {ok,
          std::to_string(recovered) + "/" + std::to_string(truth) + " recovered at IOU >= 0.7 (" + fmt(recall) + "), " +
              std::to_string(spurious) + "/" + std::to_string(detected) + " spurious (" + fmt(spurious_rate) + "), " +
              fmt(clock.seconds(), 1) + " s",
          {{"recall", recall}, {"spurious", spurious_rate}, {"boxes", per_screen}}};
}

// ---------------------------------------------------------------------------
// 7, 8: mockup path end to end, then codegen round trip of every bundle

struct EndToEnd {
  Outcome visual, codegen;
};

EndToEnd check_end_to_end(const ClassifierRun& cls_run, const fs::path& work) {
  const Stopwatch clock;
  const auto idx = build_index(cls_run.screens);
  const auto model = cls_run.model;
  const Classifier classify = [model](const Image& c) { return predict(*model, c); };
  PrototypeOptions opts;
  int mae_ok = 0, mse_ok = 0, bundles_ok = 0;
  constexpr int kScreens = 50;
  Json per_screen = Json::array();
  for (int i = 0; i < kScreens; ++i) {
    const auto cls = static_cast<ComponentClass>(i % 15);
    const auto s = synthesize_screen(cls, synth_seed(7, cls, static_cast<std::uint64_t>(i)));
    const auto doc = mockup_from_screen(s.record);
    const auto result = build_prototype(s.screenshot, &doc, classify, idx, opts);
    const auto bundle = make_bundle(result.ir, Json::object());
    const double mae = pixel_mae(bundle.preview, s.screenshot), mse = pixel_mse(bundle.preview, s.screenshot);
    mae_ok += mae <= 0.10;
    mse_ok += mse <= 0.02;
    per_screen.push_back({{"mae", mae}, {"mse", mse}});

    const fs::path dir = work / ("bundle_" + std::to_string(i));
    write_bundle(dir, bundle);
    const auto layout = parse_layout(read_text_file(dir / BundlePaths::layout));
    const auto styles = parse_style_names(read_text_file(dir / BundlePaths::styles));
    bundles_ok += preorder_dp(layout) == preorder_dp(result.ir.root) && unresolved_styles(layout, styles).empty();
  }
  EndToEnd out;
  const double secs = clock.seconds();
  out.visual.pass = mae_ok >= 0.8 * kScreens && mse_ok >= 0.8 * kScreens && secs < 600.0;
  out.visual.detail = "MAE <= 0.10 on " + std::to_string(mae_ok) + "/50, MSE <= 0.02 on " + std::to_string(mse_ok) + "/50, " +
                      fmt(secs, 1) + " s";
  out.visual.metrics = {{"screens", per_screen}};
  out.codegen.pass = bundles_ok == kScreens;
  out.codegen.detail = std::to_string(bundles_ok) + "/50 bundles reparse to the IR with every style resolved";
  return out;
}

// ---------------------------------------------------------------------------
// 10: hue perturbation

Outcome check_hue() {
  Rng rng(10);
  int sb_fail = 0, grey_fail = 0, identity_fail = 0;
  constexpr int kPixels = 1000;
  constexpr double kTol = 2.0 / 255.0 + 1e-12;
  for (int i = 0; i < kPixels; ++i) {
    const Rgb c{static_cast<std::uint8_t>(rng.uniform_int(0, 255)), static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                static_cast<std::uint8_t>(rng.uniform_int(0, 255))};
    const Rgb o = perturb_hue(Image(1, 1, c), rng.uniform(0.0, 360.0)).at(0, 0);
    const Hsb hc = rgb_to_hsb(c), ho = rgb_to_hsb(o);
    if (std::abs(hc.s - ho.s) > kTol || std::abs(hc.b - ho.b) > kTol) ++sb_fail;

    const auto v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    if (perturb_hue(Image(1, 1, Rgb{v, v, v}), rng.uniform(0.0, 360.0)).at(0, 0) != Rgb{v, v, v}) ++grey_fail;

    const Rgb same = perturb_hue(Image(1, 1, c), 0.0).at(0, 0);
    if (std::abs(same.r - c.r) > 2 || std::abs(same.g - c.g) > 2 || std::abs(same.b - c.b) > 2) ++identity_fail;
  }
  const bool ok = sb_fail == 0 && grey_fail == 0 && identity_fail == 0;
  return {ok,
          "1000 pixels each: saturation/brightness off by > 2/255 on " + std::to_string(sb_fail) + ", grey pixels moved " +
              std::to_string(grey_fail) + ", 0-degree rotation off by > 2/255 on " + std::to_string(identity_fail),
          {}};
}

void report(int n, const Outcome& o, bool& all_ok) {
  std::cout << "AC" << n << " " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  all_ok = all_ok && o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> want;
  for (int i = 1; i < argc; ++i) want.insert(std::atoi(argv[i]));
  const auto on = [&](int n) { return want.empty() || want.count(n) > 0; };
  bool all_ok = true;

  const fs::path work = fs::temp_directory_path() / ("guiproto_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(work);

  try {
    std::optional<ClassifierRun> cls_run;
    std::optional<Outcome> det;
    std::optional<EndToEnd> e2e;
    const bool need_classifier = on(1) || on(2) || on(7) || on(8) || on(9);
    if (need_classifier) {
      std::cerr << "training classifiers...\n";
      cls_run = run_classifiers();
      if (on(1)) report(1, cls_run->cnn, all_ok);
      if (on(2)) report(2, cls_run->bovw, all_ok);
    }
    if (on(3)) report(3, check_gradients(), all_ok);
    if (on(4)) report(4, check_hierarchy_round_trip(), all_ok);
    if (on(5)) report(5, check_edit_distance(), all_ok);
    if (on(6) || on(9)) {
      det = check_detection();
      if (on(6)) report(6, *det, all_ok);
    }
    if (on(7) || on(8) || on(9)) {
      e2e = check_end_to_end(*cls_run, work / "first");
      if (on(7)) report(7, e2e->visual, all_ok);
      if (on(8)) report(8, e2e->codegen, all_ok);
    }
    if (on(9)) {
      std::cerr << "repeating criteria 1, 6 and 7...\n";
      const auto again = run_classifiers();
      const auto det2 = check_detection();
      const auto e2e2 = check_end_to_end(again, work / "second");
      const auto hash = [](const Json& j) { return sha256_hex(j.dump()); };
      const Json first{cls_run->cnn.metrics, cls_run->bovw.metrics};
      const Json second{again.cnn.metrics, again.bovw.metrics};
      const bool h1 = hash(first) == hash(second);
      const bool h6 = hash(det->metrics) == hash(det2.metrics);
      const bool h7 = hash(e2e->visual.metrics) == hash(e2e2.visual.metrics);
      report(9,
             {h1 && h6 && h7,
              std::string("metric JSON hash-equal on repeat: classifier ") + (h1 ? "yes" : "no") + ", detection " +
                  (h6 ? "yes" : "no") + ", end-to-end " + (h7 ? "yes" : "no") + " (" + hash(first).substr(0, 12) + ")",
              {}},
             all_ok);
    }
    if (on(10)) report(10, check_hue(), all_ok);
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    all_ok = false;
  }
  std::error_code ec;
  fs::remove_all(work, ec);
  return all_ok ? 0 : 1;
}
