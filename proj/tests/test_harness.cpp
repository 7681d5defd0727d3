#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "asrlab/corpus.hpp"
#include "asrlab/harness.hpp"
#include "asrlab/train.hpp"

using namespace asrlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("asrlab_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const json kTinyCorpus = {{"seed", 4321}, {"n_train", 12}, {"n_test", 6}};

// One small training run shared across the harness tests.
struct Trained {
  fs::path dir = fresh_dir("models");
  fs::path baseline, augmented;

  Trained() {
    const json cfg = {{"corpus", kTinyCorpus},
                      {"train", {{"hidden", 8}, {"clean_epochs", 2}}},
                      {"sigma_augment", {0.02}}};
    REQUIRE(harness::run("train", write_config(dir, cfg).string(), dir.string(), 7) == 0);
    baseline = dir / "model_baseline.json";
    augmented = dir / "model_aug_0.020.json";
    REQUIRE(fs::exists(baseline));
    REQUIRE(fs::exists(augmented));
  }
};

const Trained& trained() {
  static Trained t;
  return t;
}

json models_table() {
  return {{"baseline", trained().baseline.string()},
          {"augmented", trained().augmented.string()}};
}

}  // namespace

TEST_CASE("synth-data writes a loadable corpus and a manifest") {
  const auto out = fresh_dir("synth");
  const json cfg = {{"corpus", kTinyCorpus}};
  CHECK(harness::run("synth-data", write_config(out, cfg).string(), out.string(), {}) == 0);

  const auto train_back =
      load_corpus_split((out / "train").string(), (out / "train" / "train.tsv").string());
  const ToyCorpus reference = synth_corpus(4321, 12, 6);
  REQUIRE(train_back.size() == reference.train.size());
  for (std::size_t i = 0; i < train_back.size(); ++i) {
    CHECK(train_back[i].transcript == reference.train[i].transcript);
    // WAV quantization allows 1/32768 per sample
    REQUIRE(train_back[i].audio.size() == reference.train[i].audio.size());
    for (std::size_t s = 0; s < train_back[i].audio.size(); ++s)
      CHECK(std::abs(train_back[i].audio.samples[s] - reference.train[i].audio.samples[s]) <=
            1.0 / 32768);
  }

  const json manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["command"] == "synth-data");
  CHECK(manifest["corpus_seed"] == 4321);
  CHECK(manifest.contains("config_hash"));
}

TEST_CASE("missing config yields exit 1 and an error JSON") {
  const auto out = fresh_dir("err");
  CHECK(harness::run("eval-clean", (out / "nope.json").string(), out.string(), {}) == 1);
  const json err = json::parse(slurp(out / "error.json"));
  CHECK(err["error"]["command"] == "eval-clean");
  CHECK(err["error"]["message"].get<std::string>().find("nope.json") != std::string::npos);
}

TEST_CASE("unknown command and bad defense preset fail cleanly") {
  const auto out = fresh_dir("err2");
  const auto cfg = write_config(out, json{{"corpus", kTinyCorpus}});
  CHECK(harness::run("frobnicate", cfg.string(), out.string(), {}) == 1);

  const json bad = {{"corpus", kTinyCorpus},
                    {"models", models_table()},
                    {"defenses", {"no-such-preset"}}};
  CHECK(harness::run("eval-clean", write_config(out, bad).string(), out.string(), {}) == 1);
  CHECK(json::parse(slurp(out / "error.json"))["error"]["message"]
            .get<std::string>()
            .find("no-such-preset") != std::string::npos);
}

TEST_CASE("eval-clean: csv shape, sigma=0 equals clean eval, bitwise reproducibility") {
  const auto out = fresh_dir("eval");
  const json cfg = {{"seed", 3},
                    {"corpus", kTinyCorpus},
                    {"models", models_table()},
                    {"sigmas", {0.0, 0.02}},
                    {"defenses",
                     {"undefended",
                      json{{"name", "rover4"}, {"n_samples", 4}, {"vote", "rover"}}}}};
  const auto cfg_path = write_config(out, cfg);
  REQUIRE(harness::run("eval-clean", cfg_path.string(), out.string(), {}) == 0);
  const std::string csv = slurp(out / "eval_clean.csv");

  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "defense,sigma,wer_percent,wall_seconds");
  int rows = 0;
  bool saw_clean_row = false;
  const ToyCorpus corpus = synth_corpus(4321, 12, 6);
  const ModelParams baseline = ModelParams::load(trained().baseline.string());
  const double clean_pct = evaluate_wer(baseline, corpus.test) * 100.0;
  for (std::string line; std::getline(lines, line);) {
    ++rows;
    std::istringstream f(line);
    std::string defense, sigma, wer_s;
    std::getline(f, defense, ',');
    std::getline(f, sigma, ',');
    std::getline(f, wer_s, ',');
    const double w = std::stod(wer_s);
    CHECK(w >= 0.0);
    CHECK(w <= 100.0);
    if (defense == "undefended" && std::stod(sigma) == 0.0) {
      saw_clean_row = true;
      CHECK(w == doctest::Approx(clean_pct).epsilon(0.01));
    }
  }
  CHECK(rows == 4);  // 2 defenses x 2 sigmas
  CHECK(saw_clean_row);

  // bit-for-bit up to the wall-clock column, which is measurement not result
  const auto strip_timing = [](const std::string& text) {
    std::string kept;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
      kept += line.substr(0, line.rfind(',')) + "\n";
    return kept;
  };
  const auto out2 = fresh_dir("eval2");
  REQUIRE(harness::run("eval-clean", cfg_path.string(), out2.string(), {}) == 0);
  CHECK(strip_timing(slurp(out2 / "eval_clean.csv")) == strip_timing(csv));
}

TEST_CASE("seed override changes the manifest seed") {
  const auto out = fresh_dir("seed");
  const json cfg = {{"seed", 11}, {"corpus", kTinyCorpus}};
  REQUIRE(harness::run("synth-data", write_config(out, cfg).string(), out.string(), 99) == 0);
  CHECK(json::parse(slurp(out / "manifest.json"))["seed"] == 99);
}

TEST_CASE("rover-timing emits the requested N grid") {
  const auto out = fresh_dir("timing");
  const json cfg = {{"corpus", kTinyCorpus},
                    {"models", models_table()},
                    {"n_list", {1, 2, 4}},
                    {"n_utts", 3},
                    {"timing_reps", 2}};
  REQUIRE(harness::run("rover-timing", write_config(out, cfg).string(), out.string(), {}) == 0);
  std::istringstream lines(slurp(out / "rover_timing.csv"));
  std::string header;
  std::getline(lines, header);
  CHECK(header == "n_samples,mean_vote_seconds,wer_percent");
  std::vector<std::string> ns;
  for (std::string line; std::getline(lines, line);)
    ns.push_back(line.substr(0, line.find(',')));
  CHECK(ns == std::vector<std::string>{"1", "2", "4"});
}

TEST_CASE("attack-pgd writes csv plus gnuplot curves") {
  const auto out = fresh_dir("pgd");
  const json cfg = {{"corpus", kTinyCorpus},
                    {"models", models_table()},
                    {"snr_bounds", {30.0}},
                    {"defenses", {"undefended"}},
                    {"n_utts", 2},
                    {"steps", 3},
                    {"eot_samples", 1}};
  REQUIRE(harness::run("attack-pgd", write_config(out, cfg).string(), out.string(), {}) == 0);
  CHECK(fs::exists(out / "attack_pgd.csv"));
  const std::string dat = slurp(out / "pgd_undefended.dat");
  CHECK(dat.substr(0, 5) == "30.0 ");  // "bound wer" two-column format
}

#ifdef ASRLAB_CLI_PATH
TEST_CASE("cli binary: exit codes and error reporting") {
  const std::string cli = ASRLAB_CLI_PATH;
  REQUIRE(fs::exists(cli));
  CHECK(std::system((cli + " --help > /dev/null 2>&1").c_str()) == 0);
  // missing required --config/--out
  CHECK(std::system((cli + " eval-clean > /dev/null 2>&1").c_str()) != 0);

  const auto out = fresh_dir("cli");
  const auto cfg = write_config(out, json{{"corpus", kTinyCorpus}});
  const std::string ok_cmd =
      cli + " synth-data --config " + cfg.string() + " --out " + out.string() +
      " --seed 5 > /dev/null 2>&1";
  CHECK(std::system(ok_cmd.c_str()) == 0);
  CHECK(json::parse(slurp(out / "manifest.json"))["seed"] == 5);

  const std::string bad_cmd = cli + " eval-clean --config " + (out / "absent.json").string() +
                              " --out " + out.string() + " > /dev/null 2>&1";
  CHECK(std::system(bad_cmd.c_str()) != 0);
  CHECK(fs::exists(out / "error.json"));
}
#endif
