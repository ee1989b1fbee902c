// guiproto: synthesize corpora, train classifiers, and turn screenshots or
// mockups into Android layout bundles.
//
// Exit codes: 0 success, 1 internal defect, 2 user or configuration error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "guiproto/commands.hpp"

namespace {

using namespace guiproto;

struct GlobalOptions {
  std::string config_file;
  std::string profile;
  std::vector<std::string> sets;
  std::string corpus, model, index;
  std::optional<std::uint64_t> seed;
};

PipelineConfig resolve(const GlobalOptions& g) {
  PipelineConfig cfg = profile_defaults(g.profile.empty() ? "desk" : g.profile);
  if (!g.config_file.empty()) {
    if (!fs::exists(g.config_file)) throw IoError("config file not found: " + g.config_file);
    for (const auto& [k, v] : parse_config_text(read_text_file(g.config_file))) {
      if (k == "profile" && !g.profile.empty()) continue;  // the flag wins
      apply_setting(cfg, k, v);
    }
  }
  for (const auto& s : g.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got \"" + s + "\"");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (!g.corpus.empty()) cfg.corpus = g.corpus;
  if (!g.model.empty()) cfg.model = g.model;
  if (!g.index.empty()) cfg.index = g.index;
  if (g.seed) cfg.seed = *g.seed;
  validate_config(cfg);
  return cfg;
}

std::vector<double> parse_penalties(const std::string& s) {
  if (s.empty()) return default_penalties();
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("--penalties: cannot parse \"" + tok + "\"");
    }
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"GUI prototyping from screenshots and mockups"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_file, "key = value config file");
  app.add_option("--profile", g.profile, "preset: desk or paper");
  app.add_option("--set", g.sets, "override a setting, key=value (repeatable)");
  app.add_option("--corpus", g.corpus, "corpus directory");
  app.add_option("--model", g.model, "model file");
  app.add_option("--index", g.index, "hierarchy index file");
  app.add_option("--seed", g.seed, "master seed");

  int per_class = 1;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "synthesize screens for every class and clean them into a corpus");
  synth->add_option("--per-class", per_class, "screens per class")->required();
  synth->add_option("--out", synth_out, "output corpus (default: the configured corpus)");

  std::string ingest_from;
  auto* ingest = app.add_subcommand("ingest", "copy <name>.xml/<name>.png screen pairs into the corpus");
  ingest->add_option("--from", ingest_from, "directory of dump/screenshot pairs")->required();

  auto* clean = app.add_subcommand("clean", "filter screens and components, split, write crops and manifest");

  bool baseline = false;
  std::string train_out;
  auto* train_cmd = app.add_subcommand("train", "train the CNN (or the BOVW baseline) on the corpus");
  train_cmd->add_flag("--baseline", baseline, "train the bag-of-visual-words baseline instead");
  train_cmd->add_option("--out", train_out, "model output (default: the configured model)");

  std::string eval_split = "test", eval_json;
  auto* eval_cls = app.add_subcommand("eval-classifier", "confusion matrix and per-class rates on a split");
  eval_cls->add_option("--split", eval_split, "train, valid or test");
  eval_cls->add_option("--json", eval_json, "write the report as JSON");

  std::string index_out;
  auto* build_idx = app.add_subcommand("build-index", "index corpus hierarchies for container matching");
  build_idx->add_option("--out", index_out, "index output (default: the configured index)");

  std::string shot, mockup, bundle_out;
  auto* proto = app.add_subcommand("prototype", "build a layout bundle from a screenshot");
  proto->add_option("screenshot", shot, "PNG screenshot")->required();
  proto->add_option("--mockup", mockup, "mockup JSON; skips CV detection");
  proto->add_option("--out", bundle_out, "bundle directory")->required();

  std::string bundle_dir, truth_dir, sweep_op = "sub", penalties, ep_json, ep_csv;
  auto* eval_proto = app.add_subcommand("eval-prototype", "compare a bundle with a ground-truth screen");
  eval_proto->add_option("--bundle", bundle_dir, "bundle directory")->required();
  eval_proto->add_option("--truth", truth_dir, "screen directory with screen.xml and screen.png")->required();
  eval_proto->add_option("--op", sweep_op, "operation to sweep: ins, del or sub");
  eval_proto->add_option("--penalties", penalties, "comma-separated sweep points in (0,1)");
  eval_proto->add_option("--json", ep_json, "metrics JSON (default: <bundle>/metrics.json)");
  eval_proto->add_option("--csv", ep_csv, "sweep CSV (default: <bundle>/sweep.csv)");

  std::string render_in, render_out;
  auto* render_cmd = app.add_subcommand("render-preview", "render a screen dump to PNG");
  render_cmd->add_option("input", render_in, "screen directory or dump XML")->required();
  render_cmd->add_option("--out", render_out, "PNG output")->required();

  auto* show = app.add_subcommand("show-config", "print the resolved configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const PipelineConfig cfg = resolve(g);
  auto& log = std::cout;
  if (*synth) {
    cmd_synth(cfg, per_class, synth_out.empty() ? cfg.corpus : fs::path(synth_out), log);
  } else if (*ingest) {
    cmd_ingest(ingest_from, cfg.corpus, log);
  } else if (*clean) {
    cmd_clean(cfg, cfg.corpus, log);
  } else if (*train_cmd) {
    const fs::path out = train_out.empty() ? cfg.model : fs::path(train_out);
    if (baseline) cmd_train_bovw(cfg, out, log);
    else cmd_train_cnn(cfg, out, log);
  } else if (*eval_cls) {
    cmd_eval_classifier(cfg, cfg.model, parse_split(eval_split),
                        eval_json.empty() ? std::nullopt : std::optional<fs::path>(eval_json), log);
  } else if (*build_idx) {
    cmd_build_index(cfg, index_out.empty() ? cfg.index : fs::path(index_out), log);
  } else if (*proto) {
    cmd_prototype(cfg, shot, mockup.empty() ? std::nullopt : std::optional<fs::path>(mockup), bundle_out, log);
  } else if (*eval_proto) {
    const fs::path b = bundle_dir;
    cmd_eval_prototype(cfg, b, truth_dir, parse_edit_op(sweep_op), parse_penalties(penalties),
                       ep_json.empty() ? b / "metrics.json" : fs::path(ep_json),
                       ep_csv.empty() ? b / "sweep.csv" : fs::path(ep_csv), log);
  } else if (*render_cmd) {
    cmd_render_preview(render_in, render_out, log);
  } else if (*show) {
    log << config_to_text(cfg);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const guiproto::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const guiproto::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const guiproto::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const guiproto::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const guiproto::NoMatch& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
