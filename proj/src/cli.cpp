// Copyright 2026 The EDST Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "edst/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "edst/adapters.hpp"
#include "edst/corpus.hpp"
#include "edst/error.hpp"
#include "edst/metrics.hpp"
#include "edst/templates.hpp"
#include "edst/train.hpp"

namespace edst {

namespace fs = std::filesystem;

Json belief_to_json(const BeliefState& belief) {
  Json values = Json::object();
  for (const auto& [slot, dists] : belief.value_dists) {
    Json js = Json::object();
    for (const auto& [value, p] : dists) js[value] = Json::array({p[0], p[1], p[2]});
    values[slot] = js;
  }
  Json slots = Json::object();
  for (const auto& [slot, c] : belief.slot_conds) slots[slot] = Json::array({c[0], c[1]});
  return Json{{"values", values}, {"slots", slots}};
}

Json assignment_to_json(const StateAssignment& a) {
  Json slots = Json::object();
  for (const auto& [slot, label] : a.slot_labels) slots[slot] = std::string(to_string(label));
  Json values = Json::object();
  for (const auto& [slot, vals] : a.value_labels) {
    Json jv = Json::object();
    for (const auto& [value, label] : vals) {
      if (label != ValueLabel::kNotMentioned) jv[value] = std::string(to_string(label));
    }
    if (!jv.empty()) values[slot] = jv;
  }
  Json req = Json::array();
  for (const auto& r : a.requested) req.push_back(r);
  return Json{{"slots", slots}, {"values", values}, {"requested", req}};
}

// ---------------------------------------------------------------------------
// TrackSession

TrackSession::TrackSession(const TrackerModel& model) : model_(model) { reset(); }

void TrackSession::reset() {
  belief_ = new_belief_state(model_.ontology());
  state_ = neutral_assignment(model_.ontology());
}

std::string TrackSession::process(const std::string& line) {
  std::string trimmed = line;
  while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' ')) trimmed.pop_back();
  if (trimmed == "reset") {
    reset();
    return Json{{"reset", true}, {"belief", belief_to_json(belief_)}}.dump();
  }
  try {
    const Turn turn = turn_from_json(Json::parse(trimmed), model_.ontology());
    const TurnInput input = to_turn_input(turn);
    const bool use_asr = input.asr && !input.asr->empty();
    const BeliefState prior =
        model_.mode().use_prev_belief ? belief_ : new_belief_state(model_.ontology());
    TurnResult r = use_asr ? track_turn_asr(model_, input, prior) : track_turn(model_, input, prior);
    const StateAssignment decoded = r.decode(model_.ontology());
    StateAssignment next = model_.mode().use_prev_belief
                               ? decoded
                               : accumulate_turn(state_, decoded, model_.ontology());
    Json requested = Json::object();
    for (const auto& [slot, p] : r.requested) requested[slot] = p;
    Json reply{{"belief", belief_to_json(r.belief)},
               {"state", assignment_to_json(next)},
               {"requested", requested}};
    belief_ = std::move(r.belief);
    state_ = std::move(next);
    return reply.dump();
  } catch (const Json::exception& e) {
    return Json{{"error", std::string("malformed turn: ") + e.what()}}.dump();
  } catch (const Error& e) {
    return Json{{"error", e.what()}}.dump();
  }
}

// ---------------------------------------------------------------------------
// Subcommands

namespace {

class NumericFailure : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string data;
  std::string ontology;
  std::string embeddings;
  std::string dict;
  std::string mode = "enriched3";
  bool turn_labels = false;
  bool use_prev_belief = false;
  bool ablate = false;
  std::uint64_t seed = 42;
  std::string out;
  bool asr = false;
  std::string model;
  std::string split = "test";
  std::string corpus;
  std::size_t epochs = 100;
  std::size_t patience = 5;
  std::size_t filters = 50;
  std::size_t dialogs = 200;
  std::size_t word_dim = 10;
  std::string format = "woz";
  std::string input;
  bool no_asr = false;
};

std::shared_ptr<const EmbeddingTable> load_table(const std::string& path) {
  return std::make_shared<const EmbeddingTable>(load_embeddings_file(path));
}

std::optional<SemanticDictionary> load_dict(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return SemanticDictionary::load(path);
}

TrackerMode mode_from(const Options& o) {
  TrackerMode mode;
  mode.labels = parse_label_scheme(o.mode);
  mode.use_prev_belief = !o.turn_labels;
  mode.ablate_value_specific = o.ablate;
  return mode;
}

std::string data_file(const Options& o, const std::string& name) {
  return (fs::path(o.data) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error("failed to write '" + path + "'");
}

void emit(const Options& o, const Json& report, std::ostream& out) {
  if (o.out.empty()) {
    out << report.dump() << '\n';
  } else {
    write_text(o.out, report.dump() + "\n");
  }
}

int cmd_train(const Options& o, std::ostream& out) {
  const Ontology ontology = Ontology::load(o.ontology);
  const auto table = load_table(o.embeddings);
  TrackerModel model(ontology, table, load_dict(o.dict), mode_from(o), o.filters);
  const auto train = load_corpus(data_file(o, "train.json"), ontology);
  std::vector<Dialog> valid;
  if (fs::exists(data_file(o, "valid.json"))) valid = load_corpus(data_file(o, "valid.json"), ontology);
  TrainConfig cfg;
  cfg.seed = o.seed;
  cfg.max_epochs = o.epochs;
  cfg.patience = o.patience;
  train_model(model, train, valid, cfg, [&](const EpochLog& e) {
    out << Json{{"head", e.head},
                {"epoch", e.epoch},
                {"train_loss", e.train_loss},
                {"valid_loss", e.valid_loss},
                {"improved", e.improved}}
               .dump()
        << '\n';
  });
  save_model_file(model, o.out);
  return kExitOk;
}

std::vector<Dialog> eval_corpus(const Options& o, const Ontology& ontology) {
  if (!o.corpus.empty()) return load_corpus(o.corpus, ontology);
  if (o.data.empty()) throw UsageError("needs --data or --corpus");
  return load_corpus(data_file(o, o.split + ".json"), ontology);
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto table = load_table(o.embeddings);
  const TrackerModel model = load_model_file(o.model, table);
  const auto dialogs = eval_corpus(o, model.ontology());
  emit(o, evaluate(model, dialogs, o.asr).to_json(), out);
  return kExitOk;
}

int cmd_track(const Options& o, std::istream& in, std::ostream& out) {
  const auto table = load_table(o.embeddings);
  const TrackerModel model = load_model_file(o.model, table);
  TrackSession session(model);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << session.process(line) << '\n' << std::flush;
  }
  return kExitOk;
}

int cmd_split(const Options& o, std::ostream& out) {
  const Ontology ontology = Ontology::load(o.ontology);
  const auto dialogs = load_corpus(data_file(o, "corpus.json"), ontology);
  const auto split = split_corpus(dialogs, {3, 1, 1}, o.seed);
  const fs::path dir = o.out.empty() ? fs::path(o.data) : fs::path(o.out);
  save_corpus(split.train, (dir / "train.json").string());
  save_corpus(split.valid, (dir / "valid.json").string());
  save_corpus(split.test, (dir / "test.json").string());
  out << Json{{"train", split.train.size()}, {"valid", split.valid.size()},
              {"test", split.test.size()}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_gen_synthetic(const Options& o, std::ostream& out) {
  SyntheticConfig cfg;
  cfg.dialogs = o.dialogs;
  const SyntheticData data = generate_synthetic(cfg, o.seed);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  data.ontology.save((dir / "ontology.json").string());
  write_text((dir / "dict.json").string(), data.dictionary.to_json().dump(1) + "\n");
  {
    std::ofstream f(dir / "embeddings.txt");
    if (!f) throw Error("cannot write embeddings");
    write_embeddings(f, data.embeddings);
  }
  save_corpus(data.dialogs, (dir / "corpus.json").string());
  if (data.dialogs.size() >= 5) {
    const auto split = split_corpus(data.dialogs, {3, 1, 1}, o.seed);
    save_corpus(split.train, (dir / "train.json").string());
    save_corpus(split.valid, (dir / "valid.json").string());
    save_corpus(split.test, (dir / "test.json").string());
  }
  out << Json{{"dialogs", data.dialogs.size()}, {"out", dir.string()}}.dump() << '\n';
  return kExitOk;
}

int cmd_baseline(const Options& o, std::ostream& out) {
  const Ontology ontology = Ontology::load(o.ontology);
  const auto dict = load_dict(o.dict);
  const SemanticDictionary* dp = dict ? &*dict : nullptr;
  auto source = load_corpus(data_file(o, "train.json"), ontology);
  if (fs::exists(data_file(o, "valid.json"))) {
    auto valid = load_corpus(data_file(o, "valid.json"), ontology);
    source.insert(source.end(), valid.begin(), valid.end());
  }
  const TemplateSet templates = extract_templates(source, ontology, dp);
  const auto test = eval_corpus(o, ontology);
  Json report = evaluate_templates(templates, ontology, dp, test).to_json();
  report["templates"] = templates.templates.size();
  emit(o, report, out);
  return kExitOk;
}

int cmd_gradcheck(const Options& o, std::ostream& out) {
  HeadConfig value;
  value.word_dim = o.word_dim;
  value.filters = o.filters;
  value.belief_dim = 3;
  value.classes = 3;
  HeadConfig slot = value;
  slot.classes = 2;
  HeadConfig request = value;
  request.belief_dim = 0;
  request.act_gates = false;
  request.classes = 2;
  double worst = 0.0;
  Json report = Json::object();
  for (const auto& [name, cfg] : {std::pair<std::string, HeadConfig>{"value", value},
                                  {"slot", slot},
                                  {"request", request}}) {
    const auto r = head_gradient_check(cfg, o.seed);
    Json groups = Json::object();
    for (const auto& g : r.groups) groups[g.name] = g.max_rel_error;
    report[name] = groups;
    worst = std::max(worst, r.max_rel_error());
  }
  report["max_rel_error"] = worst;
  report["pass"] = worst < 1e-4;
  out << report.dump() << '\n';
  if (!(worst < 1e-4)) throw NumericFailure("gradient check failed: max relative error " + std::to_string(worst));
  return kExitOk;
}

int cmd_convert(const Options& o, std::ostream& out) {
  if (o.format != "woz") throw UsageError("unknown source format '" + o.format + "'");
  const Ontology ontology = Ontology::load(o.ontology);
  std::ifstream f(o.input);
  if (!f) throw FormatError("cannot open '" + o.input + "'");
  Json source;
  try {
    source = Json::parse(f);
  } catch (const Json::exception& e) {
    throw FormatError(o.input + ": " + e.what());
  }
  ConversionReport report;
  WozOptions options;
  options.keep_asr = !o.no_asr;
  const auto dialogs = convert_woz(source, ontology, options, report);
  save_corpus(dialogs, o.out);
  out << Json{{"dialogs", report.dialogs},
              {"turns", report.turns},
              {"skipped_labels", report.skipped_labels},
              {"skipped_acts", report.skipped_acts}}
             .dump()
      << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Enriched dialog state tracker", "edst"};
  app.require_subcommand(1);
  Options o;

  auto add_mode = [&](CLI::App* cmd) {
    cmd->add_option("--mode", o.mode, "Value label scheme")
        ->check(CLI::IsMember({"enriched3", "mention2"}));
    auto* tl = cmd->add_flag("--turn-labels", o.turn_labels, "Train on turn-level labels");
    auto* pb = cmd->add_flag("--use-prev-belief", o.use_prev_belief,
                             "Feed the previous belief (default)");
    tl->excludes(pb);
    cmd->add_flag("--ablate-value-specific", o.ablate, "Drop the value-specific columns");
  };
  auto add_seed = [&](CLI::App* cmd) { cmd->add_option("--seed", o.seed, "Random seed"); };

  auto* train = app.add_subcommand("train", "Train a tracker");
  train->add_option("--data", o.data, "Directory with train.json and valid.json")->required();
  train->add_option("--ontology", o.ontology)->required();
  train->add_option("--embeddings", o.embeddings)->required();
  train->add_option("--dict", o.dict);
  train->add_option("--out", o.out, "Model file to write")->required();
  train->add_option("--epochs", o.epochs, "Maximum epochs")->check(CLI::PositiveNumber);
  train->add_option("--patience", o.patience)->check(CLI::PositiveNumber);
  train->add_option("--filters", o.filters, "CNN filters per window size")
      ->check(CLI::PositiveNumber);
  add_mode(train);
  add_seed(train);

  auto* eval = app.add_subcommand("eval", "Score a model on a corpus");
  eval->add_option("--model", o.model)->required();
  eval->add_option("--embeddings", o.embeddings)->required();
  eval->add_option("--data", o.data);
  eval->add_option("--split", o.split)->check(CLI::IsMember({"train", "valid", "test"}));
  eval->add_option("--corpus", o.corpus, "Corpus file instead of --data");
  eval->add_option("--out", o.out);
  eval->add_flag("--asr", o.asr, "Track over ASR N-best lists");

  auto* track = app.add_subcommand("track", "Track turns read from stdin");
  track->add_option("--model", o.model)->required();
  track->add_option("--embeddings", o.embeddings)->required();

  auto* split = app.add_subcommand("split", "Split DIR/corpus.json 3:1:1");
  split->add_option("--data", o.data)->required();
  split->add_option("--ontology", o.ontology)->required();
  split->add_option("--out", o.out, "Output directory (default: --data)");
  add_seed(split);

  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic task and corpus");
  gen->add_option("--out", o.out, "Output directory")->required();
  gen->add_option("--dialogs", o.dialogs)->check(CLI::PositiveNumber);
  add_seed(gen);

  auto* baseline = app.add_subcommand("baseline", "Score the template baseline");
  baseline->add_option("--data", o.data)->required();
  baseline->add_option("--ontology", o.ontology)->required();
  baseline->add_option("--dict", o.dict);
  baseline->add_option("--split", o.split)->check(CLI::IsMember({"train", "valid", "test"}));
  baseline->add_option("--corpus", o.corpus);
  baseline->add_option("--out", o.out);

  auto* grad = app.add_subcommand("gradcheck", "Check analytic gradients");
  grad->add_option("--word-dim", o.word_dim)->check(CLI::PositiveNumber);
  grad->add_option("--filters", o.filters)->check(CLI::PositiveNumber);
  add_seed(grad);

  auto* convert = app.add_subcommand("convert", "Import an external corpus");
  convert->add_option("--format", o.format)->check(CLI::IsMember({"woz"}));
  convert->add_option("--input", o.input)->required();
  convert->add_option("--ontology", o.ontology)->required();
  convert->add_option("--out", o.out)->required();
  convert->add_flag("--no-asr", o.no_asr, "Drop N-best lists");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "edst: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  // Gradient checks default to the reduced configuration.
  if (grad->parsed() && grad->count("--filters") == 0) o.filters = 4;

  try {
    if (train->parsed()) return cmd_train(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (track->parsed()) return cmd_track(o, in, out);
    if (split->parsed()) return cmd_split(o, out);
    if (gen->parsed()) return cmd_gen_synthetic(o, out);
    if (baseline->parsed()) return cmd_baseline(o, out);
    if (grad->parsed()) return cmd_gradcheck(o, out);
    if (convert->parsed()) return cmd_convert(o, out);
  } catch (const NumericFailure& e) {
    err << "edst: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const UsageError& e) {
    err << "edst: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "edst: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "edst: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace edst
