#include "asrlab/harness.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "asrlab/attacks.hpp"
#include "asrlab/certify.hpp"
#include "asrlab/corpus.hpp"
#include "asrlab/smoothing.hpp"
#include "asrlab/train.hpp"
#include "asrlab/voting.hpp"

namespace asrlab::harness {

namespace fs = std::filesystem;
using nlohmann::json;
using clock_type = std::chrono::steady_clock;

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file for hashing: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return content_hash(os.str());
}

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

double pct(double wer01) { return std::min(100.0, wer01 * 100.0); }

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

struct Context {
  json config;
  fs::path out;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> model_hashes;  // for the manifest
};

std::uint64_t utt_seed(std::uint64_t base, std::size_t idx) {
  return base ^ (0x9e3779b97f4a7c15ull * (idx + 1));
}

ToyCorpus corpus_from_config(const Context& ctx) {
  const json c = ctx.config.value("corpus", json::object());
  const std::uint64_t seed = c.value("seed", static_cast<std::uint64_t>(1234));
  return synth_corpus(seed, c.value("n_train", 200), c.value("n_test", 100));
}

std::uint64_t corpus_seed(const Context& ctx) {
  return ctx.config.value("corpus", json::object())
      .value("seed", static_cast<std::uint64_t>(1234));
}

// Models are named in the config ("baseline", "augmented", ...) and mapped
// to JSON files on disk.
std::map<std::string, ModelParams> load_models(Context& ctx) {
  if (!ctx.config.contains("models"))
    throw std::runtime_error("config is missing the \"models\" table");
  std::map<std::string, ModelParams> models;
  for (const auto& [name, path] : ctx.config.at("models").items()) {
    const std::string p = path.get<std::string>();
    if (!fs::exists(p)) throw std::runtime_error("model file not found: " + p);
    models.emplace(name, ModelParams::load(p));
    ctx.model_hashes[name] = file_hash(p);
  }
  return models;
}

struct DefenseSpec {
  std::string name;
  std::string model = "baseline";
  int n_samples = 16;
  VoteStrategy vote = VoteStrategy::kRover;
  bool enhance = false;
  bool straight_through_grad = true;
};

DefenseSpec parse_defense(const json& j) {
  if (j.is_string()) {
    const std::string preset = j.get<std::string>();
    DefenseSpec d;
    d.name = preset;
    if (preset == "undefended") {
      d.n_samples = 1;
      d.vote = VoteStrategy::kOneSentence;
    } else if (preset == "one-sentence") {
      d.n_samples = 1;
      d.vote = VoteStrategy::kOneSentence;
    } else if (preset == "rover16") {
      // baseline model, smoothing + ROVER only
    } else if (preset == "trained") {
      d.model = "augmented";
    } else if (preset == "off-the-shelf") {
      d.enhance = true;
    } else {
      throw std::runtime_error("unknown defense preset: " + preset);
    }
    return d;
  }
  DefenseSpec d;
  d.name = j.at("name").get<std::string>();
  d.model = j.value("model", d.model);
  d.n_samples = j.value("n_samples", d.n_samples);
  d.vote = vote_strategy_from_string(j.value("vote", std::string("rover")));
  d.enhance = j.value("enhance", d.enhance);
  return d;
}

std::vector<DefenseSpec> defenses_from_config(const Context& ctx, const json& fallback) {
  const json list = ctx.config.value("defenses", fallback);
  if (!list.is_array() || list.empty())
    throw std::runtime_error("\"defenses\" must be a non-empty array");
  std::vector<DefenseSpec> out;
  for (const auto& j : list) out.push_back(parse_defense(j));
  return out;
}

Defense make_defense(const DefenseSpec& spec,
                     const std::map<std::string, ModelParams>& models, double sigma,
                     std::uint64_t seed) {
  const auto it = models.find(spec.model);
  if (it == models.end())
    throw std::runtime_error("defense \"" + spec.name + "\" references missing model \"" +
                             spec.model + "\"");
  Defense d;
  d.params = &it->second;
  d.smooth.sigma = sigma;
  d.smooth.n_samples = spec.n_samples;
  d.smooth.vote = spec.vote;
  d.smooth.enhance = spec.enhance;
  d.smooth.seed = seed;
  d.straight_through = spec.straight_through_grad && spec.enhance;
  return d;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& l : lines) out << l << "\n";
}

std::vector<double> grid_doubles(const json& cfg, const std::string& key,
                                 std::vector<double> fallback) {
  if (!cfg.contains(key)) return fallback;
  auto v = cfg.at(key).get<std::vector<double>>();
  if (v.empty()) throw std::runtime_error("\"" + key + "\" must be non-empty");
  return v;
}

std::vector<Utterance> eval_slice(const ToyCorpus& corpus, const Context& ctx,
                                  int fallback_n) {
  const int n = std::min<int>(ctx.config.value("n_utts", fallback_n),
                              static_cast<int>(corpus.test.size()));
  return {corpus.test.begin(), corpus.test.begin() + n};
}

// ---------------------------------------------------------------------------

void cmd_synth_data(Context& ctx) {
  const ToyCorpus corpus = corpus_from_config(ctx);
  save_corpus_split(corpus.train, (ctx.out / "train").string(), "train.tsv");
  save_corpus_split(corpus.test, (ctx.out / "test").string(), "test.tsv");
}

void cmd_train(Context& ctx) {
  const ToyCorpus corpus = corpus_from_config(ctx);
  TrainConfig tc;
  const json t = ctx.config.value("train", json::object());
  tc.hidden = t.value("hidden", tc.hidden);
  tc.clean_epochs = t.value("clean_epochs", tc.clean_epochs);
  tc.learning_rate = t.value("learning_rate", tc.learning_rate);
  tc.lr_decay = t.value("lr_decay", tc.lr_decay);
  tc.momentum = t.value("momentum", tc.momentum);
  tc.grad_clip = t.value("grad_clip", tc.grad_clip);
  tc.augment_lr = t.value("augment_lr", tc.augment_lr);
  tc.augment_epochs = t.value("augment_epochs", tc.augment_epochs);

  const ModelParams baseline = train(corpus, 0.0, tc, ctx.seed);
  const fs::path base_path = ctx.out / "model_baseline.json";
  baseline.save(base_path.string());
  ctx.model_hashes["baseline"] = file_hash(base_path.string());

  for (double sigma : grid_doubles(ctx.config, "sigma_augment", {0.02})) {
    const ModelParams aug = train(corpus, sigma, tc, ctx.seed);
    const fs::path p = ctx.out / ("model_aug_" + fmt(sigma, 3) + ".json");
    aug.save(p.string());
    ctx.model_hashes["aug_" + fmt(sigma, 3)] = file_hash(p.string());
  }
}

void cmd_eval_clean(Context& ctx) {
  const ToyCorpus corpus = corpus_from_config(ctx);
  const auto models = load_models(ctx);
  const auto sigmas = grid_doubles(ctx.config, "sigmas", {0.0, 0.01, 0.02});
  const auto defenses = defenses_from_config(
      ctx, json::array({"undefended", "rover16", "trained", "off-the-shelf"}));
  const auto utts = eval_slice(corpus, ctx, 100);

  std::vector<std::string> rows = {"defense,sigma,wer_percent,wall_seconds"};
  for (const auto& spec : defenses)
    for (double sigma : sigmas) {
      const auto t0 = clock_type::now();
      double total = 0.0;
      for (std::size_t i = 0; i < utts.size(); ++i) {
        const Defense d = make_defense(spec, models, sigma, utt_seed(ctx.seed, i));
        total += wer(d.transcribe(utts[i].audio), utts[i].transcript);
      }
      rows.push_back(spec.name + "," + fmt(sigma, 3) + "," +
                     fmt(pct(total / utts.size()), 2) + "," + fmt(seconds_since(t0), 3));
    }
  write_lines(ctx.out / "eval_clean.csv", rows);
}

void cmd_attack_pgd(Context& ctx) {
  const ToyCorpus corpus = corpus_from_config(ctx);
  const auto models = load_models(ctx);
  const auto bounds = grid_doubles(ctx.config, "snr_bounds", {35, 30, 25, 20});
  const auto defenses = defenses_from_config(ctx, json::array({"undefended", "trained"}));
  const auto utts = eval_slice(corpus, ctx, 20);
  const double sigma = ctx.config.value("sigma", 0.02);

  PgdConfig pc;
  pc.steps = ctx.config.value("steps", pc.steps);
  pc.eot_samples = ctx.config.value("eot_samples", pc.eot_samples);
  pc.adaptive = ctx.config.value("adaptive", pc.adaptive);

  std::vector<std::string> rows =
      {"defense,snr_bound_db,wer_gt_percent,mean_achieved_snr_db,wall_seconds"};
  for (const auto& spec : defenses) {
    const double def_sigma = spec.name == "undefended" ? 0.0 : sigma;
    std::vector<std::string> curve;
    for (double bound : bounds) {
      pc.snr_bound_db = bound;
      const auto t0 = clock_type::now();
      double total_wer = 0.0, total_snr = 0.0;
      for (std::size_t i = 0; i < utts.size(); ++i) {
        const Defense d = make_defense(spec, models, def_sigma, utt_seed(ctx.seed, i));
        const auto r = pgd_attack(d, utts[i].audio, utts[i].transcript, pc,
                                  utt_seed(ctx.seed + 17, i));
        total_wer += r.wer_ground_truth;
        total_snr += r.achieved_snr_db;
      }
      const double mean_wer = pct(total_wer / utts.size());
      rows.push_back(spec.name + "," + fmt(bound, 1) + "," + fmt(mean_wer, 2) + "," +
                     fmt(total_snr / utts.size(), 2) + "," + fmt(seconds_since(t0), 3));
      curve.push_back(fmt(bound, 1) + " " + fmt(mean_wer, 2));
    }
    write_lines(ctx.out / ("pgd_" + spec.name + ".dat"), curve);
  }
  write_lines(ctx.out / "attack_pgd.csv", rows);
}

void cmd_attack_cw(Context& ctx) {
  const ToyCorpus corpus = corpus_from_config(ctx);
  const auto models = load_models(ctx);
  const auto defenses = defenses_from_config(ctx, json::array({"undefended", "trained"}));
  const auto utts = eval_slice(corpus, ctx, 10);
  const double sigma = ctx.config.value("sigma", 0.02);

  CwConfig cc;
  cc.max_steps = ctx.config.value("max_steps", cc.max_steps);
  cc.lambda_update_every = ctx.config.value("lambda_update_every", cc.lambda_update_every);
  cc.eot_samples = ctx.config.value("eot_samples", cc.eot_samples);
  cc.step_size = ctx.config.value("step_size", cc.step_size);
  cc.restarts = ctx.config.value("restarts", cc.restarts);

  // Deterministic same-length target: every word replaced by the word five
  // places along the ten-word inventory, so the target shares no words with
  // the ground truth.
  const auto& wl = ToyCorpus::word_list();
  auto target_for = [&](const Transcript& gt) {
    Transcript t;
    for (const auto& w : gt.words) {
      const auto it = std::find(wl.begin(), wl.end(), w);
      const std::size_t k = it == wl.end() ? 0 : (it - wl.begin());
      t.words.push_back(wl[(k + 5) % wl.size()]);
    }
    return t;
  };

  std::vector<std::string> rows =
      {"defense,success_rate_percent,wer_gt_percent,wer_target_percent,"
       "required_snr_db,wall_seconds"};
  for (const auto& spec : defenses) {
    const double def_sigma = spec.name == "undefended" ? 0.0 : sigma;
    const auto t0 = clock_type::now();
    double total_gt = 0.0, total_tgt = 0.0, snr_sum = 0.0;
    int successes = 0;
    for (std::size_t i = 0; i < utts.size(); ++i) {
      cc.target = target_for(utts[i].transcript);
      const Defense d = make_defense(spec, models, def_sigma, utt_seed(ctx.seed, i));
      const auto r = cw_attack(d, utts[i].audio, utts[i].transcript, cc,
                               utt_seed(ctx.seed + 29, i));
      total_gt += r.wer_ground_truth;
      total_tgt += r.wer_target;
      if (r.success) {
        ++successes;
        snr_sum += r.achieved_snr_db;
      }
    }
    const double req_snr = successes > 0 ? snr_sum / successes :
                           std::numeric_limits<double>::quiet_NaN();
    rows.push_back(spec.name + "," + fmt(100.0 * successes / utts.size(), 1) + "," +
                   fmt(pct(total_gt / utts.size()), 2) + "," +
                   fmt(pct(total_tgt / utts.size()), 2) + "," + fmt(req_snr, 2) + "," +
                   fmt(seconds_since(t0), 3));
  }
  write_lines(ctx.out / "attack_cw.csv", rows);
}

void cmd_ablation_adaptive(Context& ctx) {
  const ToyCorpus corpus = corpus_from_config(ctx);
  const auto models = load_models(ctx);
  const auto bounds = grid_doubles(ctx.config, "snr_bounds", {35, 30, 25});
  const auto defenses = defenses_from_config(ctx, json::array({"trained"}));
  const auto utts = eval_slice(corpus, ctx, 15);
  const double sigma = ctx.config.value("sigma", 0.02);

  PgdConfig pc;
  pc.steps = ctx.config.value("steps", pc.steps);
  pc.eot_samples = ctx.config.value("eot_samples", pc.eot_samples);

  std::vector<std::string> rows = {"defense,snr_bound_db,variant,wer_gt_percent"};
  for (const auto& spec : defenses)
    for (double bound : bounds) {
      pc.snr_bound_db = bound;
      for (bool adaptive : {false, true}) {
        pc.adaptive = adaptive;
        double total = 0.0;
        for (std::size_t i = 0; i < utts.size(); ++i) {
          const Defense d = make_defense(spec, models, sigma, utt_seed(ctx.seed, i));
          total += pgd_attack(d, utts[i].audio, utts[i].transcript, pc,
                              utt_seed(ctx.seed + 41, i))
                       .wer_ground_truth;
        }
        rows.push_back(spec.name + "," + fmt(bound, 1) + "," +
                       (adaptive ? "eot" : "vanilla") + "," +
                       fmt(pct(total / utts.size()), 2));
      }
    }
  write_lines(ctx.out / "ablation_adaptive.csv", rows);
}

void cmd_rover_timing(Context& ctx) {
  const ToyCorpus corpus = corpus_from_config(ctx);
  const auto models = load_models(ctx);
  const double sigma = ctx.config.value("sigma", 0.02);
  const auto& params = models.count("augmented") ? models.at("augmented")
                                                 : models.begin()->second;
  std::vector<int> ns = {2, 4, 8, 16, 32, 50};
  if (ctx.config.contains("n_list")) ns = ctx.config.at("n_list").get<std::vector<int>>();
  const auto utts = eval_slice(corpus, ctx, 30);
  const int reps = ctx.config.value("timing_reps", 5);

  // One 50-sample decode pass per utterance; each N votes over a prefix of
  // the same hypotheses, so timing isolates the ROVER merge itself.
  std::vector<std::vector<std::vector<WordHypothesis>>> hyp_sets;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    SmoothingConfig sc;
    sc.sigma = sigma;
    sc.n_samples = 50;
    sc.seed = utt_seed(ctx.seed, i);
    sc.vote = VoteStrategy::kOneSentence;  // vote result unused here
    const auto r = smoothed_transcribe(params, utts[i].audio, sc);
    std::vector<std::vector<WordHypothesis>> hyps;
    for (const auto& d : r.sample_decodes) hyps.push_back(d.word_hyps);
    hyp_sets.push_back(std::move(hyps));
  }

  std::vector<std::string> rows = {"n_samples,mean_vote_seconds,wer_percent"};
  for (int n : ns) {
    double total_time = 0.0, total_wer = 0.0;
    for (std::size_t i = 0; i < utts.size(); ++i) {
      const std::vector<std::vector<WordHypothesis>> prefix(
          hyp_sets[i].begin(), hyp_sets[i].begin() + std::min<std::size_t>(n, hyp_sets[i].size()));
      Transcript voted;
      const auto t0 = clock_type::now();
      for (int r = 0; r < reps; ++r) voted = rover(prefix);
      total_time += seconds_since(t0) / reps;
      total_wer += wer(voted, utts[i].transcript);
    }
    rows.push_back(std::to_string(n) + "," + fmt(total_time / utts.size(), 6) + "," +
                   fmt(pct(total_wer / utts.size()), 2));
  }
  write_lines(ctx.out / "rover_timing.csv", rows);
}

void cmd_certify(Context& ctx) {
  const ToyCorpus corpus = corpus_from_config(ctx);
  const auto models = load_models(ctx);
  const auto& params = models.count("augmented") ? models.at("augmented")
                                                 : models.begin()->second;
  CertConfig cc;
  cc.sigma = ctx.config.value("sigma", cc.sigma);
  cc.k = ctx.config.value("k", cc.k);
  cc.n0 = ctx.config.value("n0", cc.n0);
  cc.n = ctx.config.value("n", cc.n);
  cc.alpha = ctx.config.value("alpha", cc.alpha);
  const auto utts = eval_slice(corpus, ctx, 60);
  const int trials = ctx.config.value("validation_trials", 5);
  const double neg_scale = ctx.config.value("negative_control_scale", 3.0);

  std::vector<std::string> rows = {"utt,abstained,p_lower,radius"};
  int certified = 0, val_trials = 0, val_passed = 0;
  int neg_trials = 0, neg_passed = 0, neg_failed_utts = 0;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    cc.seed = utt_seed(ctx.seed, i);
    const auto cert = certify(params, utts[i].audio, cc);
    rows.push_back(utts[i].id + "," + (cert.abstained ? "1" : "0") + "," +
                   fmt(cert.p_lower, 5) + "," + fmt(cert.radius_R, 6));
    if (cert.abstained) continue;
    ++certified;
    const auto rep = validate_certificate(params, utts[i].audio, cert, cc, trials);
    val_trials += rep.trials;
    val_passed += rep.passed;
    const auto neg = validate_certificate(params, utts[i].audio, cert, cc, trials, neg_scale);
    neg_trials += neg.trials;
    neg_passed += neg.passed;
    if (neg.passed < neg.trials) ++neg_failed_utts;
  }
  write_lines(ctx.out / "certify.csv", rows);

  json report;
  report["certified_utterances"] = certified;
  report["validation"] = {{"trials", val_trials},
                          {"passed", val_passed},
                          {"pass_fraction", val_trials ? double(val_passed) / val_trials : 0.0}};
  report["negative_control"] = {{"radius_scale", neg_scale},
                                {"trials", neg_trials},
                                {"passed", neg_passed},
                                {"utterances_with_failures", neg_failed_utts}};
  std::ofstream(ctx.out / "validation.json") << report.dump(2) << "\n";
}

void write_manifest(const Context& ctx, const std::string& command) {
  json m;
  m["command"] = command;
  m["config_hash"] = content_hash(ctx.config.dump());
  m["seed"] = ctx.seed;
  m["corpus_seed"] = corpus_seed(ctx);
  m["model_hashes"] = ctx.model_hashes;
  m["version"] = "0.1.0";
  std::ofstream(ctx.out / "manifest.json") << m.dump(2) << "\n";
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "synth-data", "train",            "eval-clean",   "attack-pgd",
      "attack-cw",  "ablation-adaptive", "rover-timing", "certify"};
  return names;
}

int run(const std::string& command, const std::string& config_path,
        const std::string& out_dir, std::optional<std::uint64_t> seed_override) {
  Context ctx;
  ctx.out = out_dir;
  try {
    fs::create_directories(ctx.out);
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config: " + config_path);
    ctx.config = json::parse(in);
    ctx.seed = seed_override.value_or(ctx.config.value("seed", static_cast<std::uint64_t>(0)));

    if (command == "synth-data") cmd_synth_data(ctx);
    else if (command == "train") cmd_train(ctx);
    else if (command == "eval-clean") cmd_eval_clean(ctx);
    else if (command == "attack-pgd") cmd_attack_pgd(ctx);
    else if (command == "attack-cw") cmd_attack_cw(ctx);
    else if (command == "ablation-adaptive") cmd_ablation_adaptive(ctx);
    else if (command == "rover-timing") cmd_rover_timing(ctx);
    else if (command == "certify") cmd_certify(ctx);
    else throw std::runtime_error("unknown command: " + command);

    write_manifest(ctx, command);
    return 0;
  } catch (const std::exception& e) {
    json err;
    err["error"] = {{"command", command}, {"message", e.what()}};
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    std::ofstream(ctx.out / "error.json") << err.dump(2) << "\n";
    fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  }
}

}  // namespace asrlab::harness
