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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "edst/adapters.hpp"
#include "edst/cli.hpp"
#include "edst/corpus.hpp"
#include "edst/error.hpp"
#include "support.hpp"

using namespace edst;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "edst");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run_cli(int(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

// Fresh scratch directory per test case.
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("edst_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Writes a hand-wired turn-level model and its embeddings into `dir`.
void write_model(const fs::path& dir, TrackerMode mode) {
  const TrackerModel m = test::wired_model(mode);
  std::ofstream emb(dir / "emb.txt");
  write_embeddings(emb, m.embeddings());
  emb.close();
  save_model_file(m, (dir / "model.bin").string());
}

}  // namespace

TEST_CASE("gradcheck passes on a fresh build") {
  const Run r = run({"gradcheck", "--seed", "7"});
  CHECK(r.code == kExitOk);
  const Json report = Json::parse(r.out);
  CHECK(report["pass"] == true);
  CHECK(report["max_rel_error"].get<double>() < 1e-4);
  CHECK(report.contains("value"));
  CHECK(report["value"].contains("dot.w1"));
}

TEST_CASE("usage errors exit 1 with help") {
  const Run r = run({"gradcheck", "--no-such-flag"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"train", "--turn-labels", "--use-prev-belief", "--data", "x", "--ontology", "o",
             "--embeddings", "e", "--out", "m"})
            .code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("eval without gold labels exits 2") {
  const fs::path dir = scratch("nogold");
  write_model(dir, TrackerMode{LabelScheme::kEnriched3, false, false});
  std::ofstream(dir / "bare.json")
      << R"({"dialogs": [{"id": "a", "turns": [{"system_acts": [], "user": ["thriller"]}]}]})";
  const Run r = run({"eval", "--model", (dir / "model.bin").string(), "--embeddings",
                     (dir / "emb.txt").string(), "--corpus", (dir / "bare.json").string()});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("gold") != std::string::npos);
  CHECK(run({"eval", "--model", (dir / "missing.bin").string(), "--embeddings",
             (dir / "emb.txt").string(), "--corpus", (dir / "bare.json").string()})
            .code == kExitData);
  fs::remove_all(dir);
}

TEST_CASE("track session protocol") {
  const TrackerModel m = test::wired_model(TrackerMode{LabelScheme::kEnriched3, true, false});
  TrackSession s(m);
  const std::string line = R"({"system_acts": [], "user": ["i", "want", "comedy"]})";
  const std::string first = s.process(line);
  const Json reply = Json::parse(first);
  CHECK(reply["state"]["values"]["genre"]["comedy"] == "like");
  CHECK(s.process("reset").find("\"reset\":true") != std::string::npos);
  CHECK(s.belief() == new_belief_state(m.ontology()));
  CHECK(s.process(line) == first);
  s.reset();
  CHECK(s.process(line) == first);

  const BeliefState before = s.belief();
  CHECK(Json::parse(s.process("{not json")).contains("error"));
  CHECK(Json::parse(s.process(R"({"user": ["x"], "system_acts": [{"act": "request", "slot": "price"}]})"))
            .contains("error"));
  CHECK(s.belief() == before);

  s.reset();
  const std::string asr_line =
      R"({"user": ["ignored"], "asr": [{"tokens": ["i", "want", "comedy"], "score": 0.5}, {"tokens": ["a", "drama"], "score": 0.5}]})";
  const Json asr_reply = Json::parse(s.process(asr_line));
  TurnInput input{test::utt({"ignored"}), {},
                  std::vector<AsrHypothesis>{{test::utt({"i", "want", "comedy"}), 0.5},
                                             {test::utt({"a", "drama"}), 0.5}}};
  const TurnResult expected = track_turn_asr(m, input, new_belief_state(m.ontology()));
  CHECK(asr_reply["belief"] == belief_to_json(expected.belief));
  CHECK(s.belief() == expected.belief);
}

TEST_CASE("track subcommand streams replies") {
  const fs::path dir = scratch("track");
  write_model(dir, TrackerMode{LabelScheme::kEnriched3, false, false});
  const std::string input =
      "{\"user\": [\"comedy\"]}\n\n{\"user\": [\"any\", \"country\"]}\nreset\n";
  const Run r = run({"track", "--model", (dir / "model.bin").string(), "--embeddings",
                     (dir / "emb.txt").string()},
                    input);
  CHECK(r.code == kExitOk);
  std::istringstream lines(r.out);
  std::vector<Json> replies;
  for (std::string l; std::getline(lines, l);) replies.push_back(Json::parse(l));
  REQUIRE(replies.size() == 3);
  CHECK(replies[1]["state"]["values"]["genre"]["comedy"] == "like");
  CHECK(replies[1]["state"]["slots"]["country"] == "dont_care");
  CHECK(replies[2]["reset"] == true);
  fs::remove_all(dir);
}

TEST_CASE("WOZ conversion") {
  const Ontology o = Ontology::load(test::fixture("woz_ontology.json"));
  const Json source = Json::parse(test::read_file(test::fixture("woz_sample.json")));
  ConversionReport report;
  const auto dialogs = convert_woz(source, o, WozOptions{}, report);
  CHECK(report.dialogs == 1);
  CHECK(report.turns == 3);
  REQUIRE(dialogs[0].turns.size() == 3);
  const Turn& t0 = dialogs[0].turns[0];
  CHECK(t0.user.tokens.front() == "i");
  CHECK(t0.user.tokens.back() == ".");
  CHECK(t0.asr->size() == 2);
  CHECK(t0.gold_turn->value_label("price range", "cheap") == ValueLabel::kLike);
  const Turn& t1 = dialogs[0].turns[1];
  CHECK(t1.system_acts == SystemAct{DialogAct::request("food")});
  CHECK(t1.gold_turn->slot_label("food") == SlotLabel::kDontCare);
  CHECK(t1.requested_gold == NameSet{"phone"});
  CHECK(t1.gold_state->slot_label("food") == SlotLabel::kDontCare);
  const Turn& t2 = dialogs[0].turns[2];
  CHECK(t2.system_acts == SystemAct{DialogAct::confirm("area", "north", Polarity::kLike)});
  CHECK(t2.gold_state->value_label("area", "south") == ValueLabel::kLike);
  CHECK(simple_tokenize("No, the South please!") ==
        std::vector<std::string>{"no", ",", "the", "south", "please", "!"});

  ConversionReport r2;
  CHECK(!convert_woz(source, o, WozOptions{false}, r2)[0].turns[0].asr.has_value());
  CHECK_THROWS_AS(convert_woz(Json::object(), o, WozOptions{}, r2), FormatError);

  const fs::path dir = scratch("convert");
  const Run r = run({"convert", "--input", test::fixture("woz_sample.json"), "--ontology",
                     test::fixture("woz_ontology.json"), "--out", (dir / "c.json").string()});
  CHECK(r.code == kExitOk);
  CHECK(load_corpus((dir / "c.json").string(), o) == dialogs);
  fs::remove_all(dir);
}

TEST_CASE("end-to-end tool run on a tiny synthetic task") {
  const fs::path dir = scratch("e2e");
  const std::string d = dir.string();
  REQUIRE(run({"gen-synthetic", "--out", d, "--dialogs", "10", "--seed", "3"}).code == kExitOk);
  for (const char* f : {"ontology.json", "dict.json", "embeddings.txt", "corpus.json", "train.json",
                        "valid.json", "test.json"}) {
    CHECK(fs::exists(dir / f));
  }
  const Run split = run({"split", "--data", d, "--ontology", d + "/ontology.json", "--seed", "3"});
  CHECK(split.code == kExitOk);
  CHECK(Json::parse(split.out)["train"] == 6);

  const Run train = run({"train", "--data", d, "--ontology", d + "/ontology.json", "--embeddings",
                         d + "/embeddings.txt", "--dict", d + "/dict.json", "--turn-labels",
                         "--epochs", "1", "--filters", "2", "--out", d + "/model.bin"});
  REQUIRE(train.code == kExitOk);
  CHECK(Json::parse(train.out.substr(0, train.out.find('\n'))).contains("valid_loss"));

  const Run eval = run({"eval", "--model", d + "/model.bin", "--embeddings", d + "/embeddings.txt",
                        "--data", d, "--split", "test"});
  REQUIRE(eval.code == kExitOk);
  const Json m = Json::parse(eval.out);
  CHECK(m["joint_goal"].get<double>() >= 0.0);
  CHECK(!m["turn_goal"].is_null());

  const Run base = run({"baseline", "--data", d, "--ontology", d + "/ontology.json", "--dict",
                        d + "/dict.json", "--out", d + "/base.json"});
  CHECK(base.code == kExitOk);
  CHECK(Json::parse(test::read_file(d + "/base.json")).contains("templates"));

  const Run wrong = run({"eval", "--model", d + "/model.bin", "--embeddings",
                         test::fixture("embeddings.txt"), "--data", d});
  CHECK(wrong.code == kExitData);
  fs::remove_all(dir);
}
