#pragma once

// Operator commands behind the CLI: configuration, profiles, and one function
// per subcommand. Errors surface as exceptions; the CLI maps them to exit codes.

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "guiproto/baseline.hpp"
#include "guiproto/cnn.hpp"
#include "guiproto/codegen.hpp"
#include "guiproto/corpus.hpp"
#include "guiproto/detection.hpp"
#include "guiproto/evaluation.hpp"
#include "guiproto/hierarchy.hpp"
#include "guiproto/io.hpp"
#include "guiproto/modelfile.hpp"
#include "guiproto/parsers.hpp"
#include "guiproto/pipeline.hpp"
#include "guiproto/render.hpp"

namespace guiproto {

inline constexpr std::string_view kToolVersion = "1.0.0";

struct PipelineConfig {
  std::string profile = "desk";
  fs::path corpus = "corpus";
  fs::path model = "model.gpmf";
  fs::path index = "index.json";
  std::uint64_t seed = 42;
  double density = 2.0;
  int max_levels = 4;
  int min_count = 25;
  SynthConfig synth;
  ScreenFilterConfig screen_filter{600, 960, true, 0.5};
  ComponentFilterConfig component_filter;
  SegmentConfig segment;
  DetectionConfig detection;
  CnnArch arch;
  TrainConfig train;
  BovwConfig bovw;
  EditWeights edit;
};

// "desk": small synthetic screens and thresholds that train on one machine.
// "paper": the published corpus constants.
inline PipelineConfig profile_defaults(std::string_view name) {
  PipelineConfig c;
  c.segment.synthetic_as_organic = true;
  if (name == "desk") return c;
  if (name == "paper") {
    c.profile = "paper";
    c.synth = {1200, 1920, 4};
    c.screen_filter = {1200, 1920, true, 0.5};
    c.min_count = 200;
    c.segment.augment_target = 5000;
    c.segment.synthetic_as_organic = false;
    c.bovw.k = 4250;
    return c;
  }
  throw ConfigError("unknown profile \"" + std::string(name) + "\" (expected desk or paper)");
}

namespace detail {

template <class T>
T parse_value(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  T out{};
  if constexpr (std::is_same_v<T, bool>) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("setting " + key + ": expected true or false, got \"" + v + "\"");
  } else {
    in >> out;
    if (in.fail() || !(in >> std::ws).eof()) throw ConfigError("setting " + key + ": cannot parse \"" + v + "\"");
  }
  return out;
}

template <class T>
std::string show(const T& v) {
  if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
  else if constexpr (std::is_floating_point_v<T>) return format_number(static_cast<double>(v));
  else if constexpr (std::is_same_v<T, fs::path>) return v.string();
  else return std::to_string(v);
}

struct Setting {
  std::string key;
  std::string help;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <class T>
Setting make_setting(std::string key, std::string help, T PipelineConfig::*member) {
  return {key, std::move(help),
          [member, key](PipelineConfig& c, const std::string& v) {
            if constexpr (std::is_same_v<T, fs::path>) c.*member = v;
            else c.*member = parse_value<T>(key, v);
          },
          [member](const PipelineConfig& c) { return show(c.*member); }};
}

template <class S, class T>
Setting nested(std::string key, std::string help, S PipelineConfig::*outer, T S::*inner) {
  return {key, std::move(help),
          [outer, inner, key](PipelineConfig& c, const std::string& v) { (c.*outer).*inner = parse_value<T>(key, v); },
          [outer, inner](const PipelineConfig& c) { return show((c.*outer).*inner); }};
}

template <class S>
Setting channel(std::string key, std::string help, std::size_t i) {
  return {key, std::move(help),
          [i, key](PipelineConfig& c, const std::string& v) { c.arch.channels[i] = parse_value<int>(key, v); },
          [i](const PipelineConfig& c) { return std::to_string(c.arch.channels[i]); }};
}

}  // namespace detail

inline const std::vector<detail::Setting>& settings() {
  using namespace detail;
  static const std::vector<Setting> table = {
      make_setting("corpus", "corpus directory", &PipelineConfig::corpus),
      make_setting("model", "classifier model file", &PipelineConfig::model),
      make_setting("index", "hierarchy index file", &PipelineConfig::index),
      make_setting("seed", "master seed", &PipelineConfig::seed),
      make_setting("density", "px per dp in generated layouts", &PipelineConfig::density),
      make_setting("max_levels", "container levels to build", &PipelineConfig::max_levels),
      make_setting("min_count", "drop classes with fewer components", &PipelineConfig::min_count),
      nested("synth.width", "synthetic screen width", &PipelineConfig::synth, &SynthConfig::width),
      nested("synth.height", "synthetic screen height", &PipelineConfig::synth, &SynthConfig::height),
      nested("synth.components", "components per synthetic screen", &PipelineConfig::synth, &SynthConfig::components),
      nested("filter.width", "expected portrait width", &PipelineConfig::screen_filter, &ScreenFilterConfig::portrait_width),
      nested("filter.height", "expected portrait height", &PipelineConfig::screen_filter, &ScreenFilterConfig::portrait_height),
      nested("filter.require_dims", "drop screens of other sizes", &PipelineConfig::screen_filter,
             &ScreenFilterConfig::require_portrait_dims),
      nested("filter.webview_max", "max WebView area fraction", &PipelineConfig::screen_filter,
             &ScreenFilterConfig::webview_max_fraction),
      nested("filter.max_solid_colors", "drop crops with at most this many colours", &PipelineConfig::component_filter,
             &ComponentFilterConfig::max_solid_colors),
      nested("split.train", "train fraction", &PipelineConfig::segment, &SegmentConfig::train),
      nested("split.valid", "validation fraction", &PipelineConfig::segment, &SegmentConfig::valid),
      nested("split.test", "test fraction", &PipelineConfig::segment, &SegmentConfig::test),
      nested("augment", "top up train classes to this size", &PipelineConfig::segment, &SegmentConfig::augment_target),
      nested("synthetic_as_organic", "split synthetic screens like organic ones", &PipelineConfig::segment,
             &SegmentConfig::synthetic_as_organic),
      nested("detect.sigma", "Gaussian sigma", &PipelineConfig::detection, &DetectionConfig::gaussian_sigma),
      nested("detect.low", "Canny low threshold", &PipelineConfig::detection, &DetectionConfig::canny_low),
      nested("detect.high", "Canny high threshold", &PipelineConfig::detection, &DetectionConfig::canny_high),
      nested("detect.dilation", "dilation radius", &PipelineConfig::detection, &DetectionConfig::dilation_radius),
      nested("detect.min_area", "minimum box area", &PipelineConfig::detection, &DetectionConfig::min_box_area),
      nested("detect.merge_gap", "text merge gap", &PipelineConfig::detection, &DetectionConfig::text_merge_gap),
      nested("cnn.input", "input side length", &PipelineConfig::arch, &CnnArch::input),
      channel<CnnArch>("cnn.conv1", "conv1 channels", 0),
      channel<CnnArch>("cnn.conv2", "conv2 channels", 1),
      channel<CnnArch>("cnn.conv3", "conv3 channels", 2),
      nested("cnn.hidden", "hidden units", &PipelineConfig::arch, &CnnArch::hidden),
      nested("train.lr", "initial learning rate", &PipelineConfig::train, &TrainConfig::learning_rate),
      nested("train.momentum", "momentum", &PipelineConfig::train, &TrainConfig::momentum),
      nested("train.batch", "batch size", &PipelineConfig::train, &TrainConfig::batch_size),
      nested("train.interval", "epochs between checkpoints", &PipelineConfig::train, &TrainConfig::validation_interval),
      nested("train.patience", "tolerated accuracy decreases", &PipelineConfig::train, &TrainConfig::patience),
      nested("train.max_epochs", "epoch limit", &PipelineConfig::train, &TrainConfig::max_epochs),
      nested("train.seed", "init and shuffle seed", &PipelineConfig::train, &TrainConfig::seed),
      nested("bovw.k", "codebook size", &PipelineConfig::bovw, &BovwConfig::k),
      nested("bovw.max_descriptors", "descriptors sampled for k-means", &PipelineConfig::bovw, &BovwConfig::max_descriptors),
      nested("bovw.seed", "k-means seed", &PipelineConfig::bovw, &BovwConfig::seed),
      nested("edit.ins", "insertion weight", &PipelineConfig::edit, &EditWeights::w_ins),
      nested("edit.del", "deletion weight", &PipelineConfig::edit, &EditWeights::w_del),
      nested("edit.sub", "substitution weight", &PipelineConfig::edit, &EditWeights::w_sub),
  };
  return table;
}

inline void apply_setting(PipelineConfig& c, const std::string& key, const std::string& value) {
  if (key == "profile") {
    c = profile_defaults(value);
    return;
  }
  for (const auto& s : settings())
    if (s.key == key) {
      s.set(c, value);
      return;
    }
  throw ConfigError("unknown setting \"" + key + "\"");
}

// Flat `key = value` lines; `#` starts a comment. A `profile` line resets
// everything before it, so it belongs at the top.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++n;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(n) + ": expected key = value");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

inline void validate_config(const PipelineConfig& c) {
  if (!(c.density > 0)) throw ConfigError("density must be positive");
  if (c.max_levels < 1) throw ConfigError("max_levels must be at least 1");
  if (c.min_count < 1) throw ConfigError("min_count must be at least 1");
  c.detection.validate();
  c.train.validate();
  validate_arch(c.arch);
  c.edit.validate();
}

inline nlohmann::ordered_json config_to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["profile"] = c.profile;
  for (const auto& s : settings()) j[s.key] = s.get(c);
  return j;
}

inline std::string config_to_text(const PipelineConfig& c) {
  std::string out = "profile = " + c.profile + "\n";
  for (const auto& s : settings()) out += s.key + " = " + s.get(c) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Corpus commands

inline std::size_t cmd_synth(const PipelineConfig& cfg, int per_class, const fs::path& out, std::ostream& log);
inline CorpusManifest cmd_clean(const PipelineConfig& cfg, const fs::path& corpus, std::ostream& log);

namespace detail {

inline void require_writable_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
  const fs::path probe = dir / ".write-probe";
  {
    std::ofstream f(probe);
    if (!f) throw IoError("directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

}  // namespace detail

// N screens per class, written as synthetic samples, then cleaned into a manifest.
inline std::size_t cmd_synth(const PipelineConfig& cfg, int per_class, const fs::path& out, std::ostream& log) {
  if (per_class < 1) throw ConfigError("--per-class must be at least 1");
  detail::require_writable_dir(out);
  std::size_t n = 0;
  for (auto cls : all_classes())
    for (int i = 0; i < per_class; ++i) {
      const auto seed = synth_seed(cfg.seed, cls, static_cast<std::uint64_t>(i));
      const std::string id = "synth_" + std::string(to_string(cls)) + "_" + std::to_string(i);
      auto s = synthesize_screen(cls, seed, cfg.synth, id);
      write_screen(out, {std::move(s.record), std::move(s.screenshot), Provenance::Synthetic});
      ++n;
    }
  log << "synthesized " << n << " screens into " << out.string() << "\n";
  PipelineConfig c = cfg;
  c.screen_filter.portrait_width = cfg.synth.width;
  c.screen_filter.portrait_height = cfg.synth.height;
  cmd_clean(c, out, log);
  return n;
}

// Copies `<name>.xml` + `<name>.png` pairs from `src` into the corpus as organic screens.
inline std::size_t cmd_ingest(const fs::path& src, const fs::path& corpus, std::ostream& log) {
  if (!fs::is_directory(src)) throw IoError("no such directory: " + src.string());
  detail::require_writable_dir(corpus);
  std::vector<fs::path> dumps;
  for (const auto& e : fs::directory_iterator(src))
    if (e.is_regular_file() && e.path().extension() == ".xml") dumps.push_back(e.path());
  std::sort(dumps.begin(), dumps.end());
  std::size_t n = 0;
  for (const auto& d : dumps) {
    auto png = d;
    png.replace_extension(".png");
    if (!fs::exists(png)) {
      log << "skipping " << d.filename().string() << ": no matching screenshot\n";
      continue;
    }
    DumpParseOptions opts;
    opts.id = d.stem().string();
    opts.lenient = true;
    auto parsed = parse_screen_dump_audited(read_text_file(d), opts);
    parsed.record.id = d.stem().string();
    // Write the original bytes so nothing is lost before cleaning.
    const fs::path dir = corpus / "screens" / parsed.record.id;
    write_text_file(dir / "screen.xml", read_text_file(d));
    fs::copy_file(png, dir / "screen.png", fs::copy_options::overwrite_existing);
    write_text_file(dir / "meta.json", "{\n  \"origin\": \"organic\"\n}\n");
    ++n;
  }
  log << "ingested " << n << " screens\n";
  return n;
}

// Filters screens and components, segments, writes crops and the manifest.
inline CorpusManifest cmd_clean(const PipelineConfig& cfg, const fs::path& corpus, std::ostream& log) {
  auto loaded = load_screens(corpus);
  std::vector<AuditEntry> audit = std::move(loaded.audit);
  auto filtered = filter_screens(std::move(loaded.samples), cfg.screen_filter);
  audit.insert(audit.end(), filtered.audit.begin(), filtered.audit.end());
  std::vector<LabeledComponent> comps;
  for (const auto& s : filtered.kept) {
    auto ex = extract_components(s.record, s.screenshot, s.origin, cfg.component_filter);
    audit.insert(audit.end(), ex.audit.begin(), ex.audit.end());
    for (auto& c : ex.components) comps.push_back(std::move(c));
  }
  auto rare = filter_rare_classes(std::move(comps), cfg.min_count);
  audit.insert(audit.end(), rare.audit.begin(), rare.audit.end());
  SegmentConfig sc = cfg.segment;
  sc.seed = cfg.seed;
  auto seg = segment(std::move(rare.kept), sc);
  seg.manifest.screen_count = filtered.kept.size();
  seg.manifest.audit = std::move(audit);

  std::error_code ec;
  fs::remove_all(corpus / "crops", ec);
  for (std::size_t i = 0; i < seg.components.size(); ++i)
    write_png(crop_path(corpus, seg.manifest.entries[i]), seg.components[i].crop);
  write_manifest(corpus, seg.manifest);
  log << "kept " << filtered.kept.size() << " screens, " << seg.manifest.entries.size() << " components (train "
      << seg.manifest.count(Split::Train) << ", valid " << seg.manifest.count(Split::Valid) << ", test "
      << seg.manifest.count(Split::Test) << "), " << seg.manifest.audit.size() << " audited removals\n";
  for (const auto& w : seg.manifest.warnings) log << "warning: " << w << "\n";
  return seg.manifest;
}

// ---------------------------------------------------------------------------
// Classifier commands

struct SplitData {
  std::vector<Image> crops;
  std::vector<ComponentClass> labels;
};

inline SplitData load_split(const fs::path& corpus, const CorpusManifest& m, Split split) {
  SplitData d;
  for (const auto& e : m.entries)
    if (e.split == split) {
      d.crops.push_back(read_png(crop_path(corpus, e)));
      d.labels.push_back(e.label);
    }
  return d;
}

inline std::vector<Sample> to_samples(const SplitData& d, int input) {
  std::vector<Sample> out;
  out.reserve(d.crops.size());
  for (std::size_t i = 0; i < d.crops.size(); ++i)
    out.push_back(make_sample(d.crops[i], static_cast<int>(ordinal(d.labels[i])), input));
  return out;
}

enum class ModelKind { Cnn, Bovw };

inline TrainLog cmd_train_cnn(const PipelineConfig& cfg, const fs::path& out, std::ostream& log) {
  const auto m = read_manifest(cfg.corpus);
  const auto tr = load_split(cfg.corpus, m, Split::Train);
  const auto va = load_split(cfg.corpus, m, Split::Valid);
  if (tr.crops.empty()) throw ConfigError("the training split is empty");
  if (va.crops.empty()) throw ConfigError("the validation split is empty");
  log << "training on " << tr.crops.size() << " crops, validating on " << va.crops.size() << "\n";
  auto result = train(init_cnn(cfg.arch, cfg.train.seed), to_samples(tr, cfg.arch.input), to_samples(va, cfg.arch.input),
                      cfg.train, [&](int epoch, double loss, std::optional<double> acc) {
                        log << "epoch " << epoch << " loss " << loss;
                        if (acc) log << " valid " << *acc;
                        log << "\n";
                      });
  save_cnn(out, result.model);
  return result.log;
}

inline void cmd_train_bovw(const PipelineConfig& cfg, const fs::path& out, std::ostream& log) {
  const auto m = read_manifest(cfg.corpus);
  const auto tr = load_split(cfg.corpus, m, Split::Train);
  if (tr.crops.empty()) throw ConfigError("the training split is empty");
  std::vector<BovwExample> ex;
  for (std::size_t i = 0; i < tr.crops.size(); ++i) ex.push_back({&tr.crops[i], tr.labels[i]});
  save_bovw(out, bovw_train(ex, cfg.bovw));
  log << "trained a " << cfg.bovw.k << "-word codebook on " << tr.crops.size() << " crops\n";
}

struct LoadedClassifier {
  ModelKind kind = ModelKind::Cnn;
  Classifier classify;
  std::string sha256;
};

inline LoadedClassifier load_classifier(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("model file not found: " + path.string() + " (run train first)");
  const auto bytes = read_binary_file(path);
  const auto file = decode_model(bytes);
  LoadedClassifier c;
  c.sha256 = sha256_hex(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  if (file.type == ModelType::Cnn) {
    auto m = std::make_shared<CnnModel>(decode_cnn(bytes));
    c.kind = ModelKind::Cnn;
    c.classify = [m](const Image& crop) { return predict(*m, crop); };
  } else {
    auto m = std::make_shared<BovwModel>(decode_bovw(bytes));
    c.kind = ModelKind::Bovw;
    c.classify = [m](const Image& crop) { return bovw_predict(*m, crop); };
  }
  return c;
}

inline ConfusionMatrix evaluate_classifier(const Classifier& classify, const SplitData& d) {
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < d.crops.size(); ++i) cm.add(d.labels[i], classify(d.crops[i]).front().first);
  return cm;
}

inline nlohmann::ordered_json cmd_eval_classifier(const PipelineConfig& cfg, const fs::path& model_path, Split split,
                                                  const std::optional<fs::path>& json_out, std::ostream& log) {
  const auto m = read_manifest(cfg.corpus);
  const auto c = load_classifier(model_path);
  const auto d = load_split(cfg.corpus, m, split);
  if (d.crops.empty())
    throw ConfigError("the " + std::string(to_string(split)) + " split is empty; nothing to evaluate");
  const auto cm = evaluate_classifier(c.classify, d);
  log << classification_report_text(cm);
  auto j = classification_report_json(cm);
  j["split"] = std::string(to_string(split));
  j["model_sha256"] = c.sha256;
  if (json_out) write_text_file(*json_out, j.dump(2) + "\n");
  return j;
}

// ---------------------------------------------------------------------------
// Hierarchy index

inline HierarchyIndex cmd_build_index(const PipelineConfig& cfg, const fs::path& out, std::ostream& log) {
  auto loaded = load_screens(cfg.corpus);
  auto filtered = filter_screens(std::move(loaded.samples), cfg.screen_filter);
  std::vector<ScreenRecord> recs;
  for (auto& s : filtered.kept) recs.push_back(std::move(s.record));
  auto idx = build_index(recs);
  save_index(out, idx);
  log << "indexed " << idx.screens.size() << " screens\n";
  return idx;
}

// ---------------------------------------------------------------------------
// Prototyping

inline std::string utc_timestamp() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

struct PrototypeArtifacts {
  LoadedClassifier classifier;
  HierarchyIndex index;
  std::string index_sha256;
};

inline PrototypeArtifacts load_artifacts(const PipelineConfig& cfg) {
  PrototypeArtifacts a;
  a.classifier = load_classifier(cfg.model);
  if (!fs::exists(cfg.index)) throw IoError("hierarchy index not found: " + cfg.index.string() + " (run build-index first)");
  a.index = load_index(cfg.index);
  a.index_sha256 = sha256_file(cfg.index);
  return a;
}

inline PrototypeOptions prototype_options(const PipelineConfig& cfg) {
  PrototypeOptions o;
  o.detection = cfg.detection;
  o.style.density = cfg.density;
  o.max_levels = cfg.max_levels;
  return o;
}

struct PrototypeRun {
  PrototypeResult result;
  PrototypeBundle bundle;
};

inline PrototypeRun run_prototype(const PipelineConfig& cfg, const PrototypeArtifacts& art, const fs::path& screenshot_path,
                                  const std::optional<fs::path>& mockup_path, const fs::path& out, std::ostream& log) {
  const auto screenshot_bytes = read_text_file(screenshot_path);
  const Image shot = decode_png(std::vector<std::uint8_t>(screenshot_bytes.begin(), screenshot_bytes.end()));
  std::optional<MockupDocument> doc;
  std::string mockup_hash;
  if (mockup_path) {
    const auto text = read_text_file(*mockup_path);
    doc = parse_mockup(text);
    mockup_hash = sha256_hex(text);
  }
  PrototypeRun run;
  run.result = build_prototype(shot, doc ? &*doc : nullptr, art.classifier.classify, art.index, prototype_options(cfg));

  nlohmann::ordered_json prov;
  prov["tool_version"] = kToolVersion;
  prov["created"] = utc_timestamp();
  prov["detection_path"] = doc ? "mockup" : "cv";
  prov["input"] = {{"screenshot_sha256", sha256_hex(screenshot_bytes)}};
  if (doc) prov["input"]["mockup_sha256"] = mockup_hash;
  prov["model"] = {{"sha256", art.classifier.sha256},
                   {"kind", art.classifier.kind == ModelKind::Cnn ? "cnn" : "bovw"},
                   {"format_version", kModelFileVersion}};
  prov["index"] = {{"sha256", art.index_sha256}, {"screens", art.index.screens.size()}};
  prov["config"] = config_to_json(cfg);
  nlohmann::ordered_json comps = nlohmann::ordered_json::array();
  for (const auto& c : run.result.components)
    comps.push_back({{"bounds", {c.bounds.x, c.bounds.y, c.bounds.w, c.bounds.h}},
                     {"class", std::string(to_string(c.label))},
                     {"score", c.score}});
  prov["components"] = comps;
  prov["fallback_root"] = run.result.hierarchy.fallback_root;

  const fs::path asset_dir = mockup_path ? mockup_path->parent_path() : fs::path{};
  run.bundle = make_bundle(run.result.ir, std::move(prov), asset_dir);
  write_bundle(out, run.bundle);

  log << std::left << std::setw(22) << "bounds" << std::setw(17) << "class" << "score\n";
  for (const auto& c : run.result.components) {
    std::ostringstream b;
    b << c.bounds.x << "," << c.bounds.y << " " << c.bounds.w << "x" << c.bounds.h;
    log << std::left << std::setw(22) << b.str() << std::setw(17) << to_string(c.label) << std::fixed
        << std::setprecision(3) << c.score << "\n";
  }
  log << "wrote bundle to " << out.string() << "\n";
  return run;
}

inline PrototypeRun cmd_prototype(const PipelineConfig& cfg, const fs::path& screenshot,
                                  const std::optional<fs::path>& mockup, const fs::path& out, std::ostream& log) {
  validate_config(cfg);
  const auto art = load_artifacts(cfg);
  return run_prototype(cfg, art, screenshot, mockup, out, log);
}

// ---------------------------------------------------------------------------
// Prototype evaluation

struct PrototypeMetrics {
  double edit_distance = 0;
  double mae = 0;
  double mse = 0;
  std::vector<std::pair<double, double>> sweep;
};

inline nlohmann::ordered_json cmd_eval_prototype(const PipelineConfig& cfg, const fs::path& bundle, const fs::path& truth,
                                                 EditOp op, const std::vector<double>& penalties,
                                                 const std::optional<fs::path>& json_out,
                                                 const std::optional<fs::path>& csv_out, std::ostream& log) {
  cfg.edit.validate();
  const auto layout = parse_layout(read_text_file(bundle / BundlePaths::layout));
  const auto rec = parse_screen_dump(read_text_file(truth / "screen.xml"));
  const auto a = preorder_sequence(layout);
  const auto b = preorder_sequence(rec.root);
  const Image preview = read_png(bundle / BundlePaths::preview);
  const Image shot = read_png(truth / "screen.png");
  nlohmann::ordered_json j;
  j["edit_distance"] = edit_distance(a, b, cfg.edit);
  j["weights"] = {cfg.edit.w_ins, cfg.edit.w_del, cfg.edit.w_sub};
  j["mae"] = pixel_mae(preview, shot);
  j["mse"] = pixel_mse(preview, shot);
  const auto sweep = sweep_edit_weights(a, b, op, penalties);
  j["sweep_op"] = std::string(to_string(op));
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& [p, d] : sweep) rows.push_back({p, d});
  j["sweep"] = rows;
  if (json_out) write_text_file(*json_out, j.dump(2) + "\n");
  if (csv_out) write_text_file(*csv_out, sweep_csv(sweep));
  log << "edit distance " << format_number(j["edit_distance"].get<double>()) << ", MAE "
      << format_number(j["mae"].get<double>()) << ", MSE " << format_number(j["mse"].get<double>()) << "\n";
  return j;
}

// Renders a screen dump (a corpus screen directory or a dump file) to PNG.
inline RenderReport cmd_render_preview(const fs::path& input, const fs::path& out, std::ostream& log) {
  const fs::path dump = fs::is_directory(input) ? input / "screen.xml" : input;
  const auto rec = parse_screen_dump(read_text_file(dump));
  RenderReport report;
  write_png(out, render(rec, &report));
  log << "rendered " << rec.width << "x" << rec.height << " to " << out.string();
  if (report.clipped_nodes) log << " (" << report.clipped_nodes << " nodes clipped)";
  log << "\n";
  return report;
}

}  // namespace guiproto
