#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "asrlab/corpus.hpp"
#include "asrlab/ctc.hpp"
#include "asrlab/recognizer.hpp"
#include "asrlab/train.hpp"

using namespace asrlab;

namespace {

Waveform random_wave(int n, std::uint64_t seed, double amp = 0.1) {
  RngStream rng(seed, 0);
  Waveform x;
  for (int i = 0; i < n; ++i) x.samples.push_back(amp * rng.gaussian());
  return x;
}

LogitsSequence logits_from_classes(const std::vector<int>& classes, int C) {
  LogitsSequence l;
  l.values = Eigen::MatrixXd::Zero(classes.size(), C);
  for (std::size_t t = 0; t < classes.size(); ++t) l.values(t, classes[t]) = 10.0;
  l.frame_times.resize(classes.size());
  for (std::size_t t = 0; t < classes.size(); ++t) l.frame_times[t] = t * 100.0 / 16000.0;
  return l;
}

}  // namespace

TEST_CASE("featurize of silence is log(kappa) everywhere") {
  FeatureConfig cfg;
  Waveform x;
  x.samples.assign(1000, 0.0);
  const auto f = featurize(x, cfg);
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    for (Eigen::Index j = 0; j < f.cols(); ++j)
      CHECK(f(i, j) == doctest::Approx(std::log(cfg.kappa)).epsilon(1e-12));
}

TEST_CASE("featurize homogeneity: scaling x by 2 scales pre-log power by 4") {
  FeatureConfig cfg;
  cfg.kappa = 0.0;  // exact homogeneity without the floor
  Waveform x = random_wave(800, 21);
  Waveform x2 = x;
  for (double& s : x2.samples) s *= 2.0;
  const auto f1 = featurize(x, cfg);
  const auto f2 = featurize(x2, cfg);
  for (Eigen::Index i = 0; i < f1.rows(); ++i)
    for (Eigen::Index j = 0; j < f1.cols(); ++j)
      CHECK(f2(i, j) == doctest::Approx(f1(i, j) + std::log(4.0)).epsilon(1e-9));
}

TEST_CASE("featurize rejects too-short input") {
  Waveform x;
  x.samples.assign(50, 0.0);
  CHECK_THROWS_AS(featurize(x, FeatureConfig{}), std::domain_error);
}

TEST_CASE("featurize jacobian check via random projections") {
  FeatureConfig cfg;
  const Waveform x = random_wave(400, 33);
  const auto f0 = featurize(x, cfg);

  // random cotangent; backward pass gives d(sum(df .* feat))/dx
  RngStream rng(7, 1);
  Eigen::MatrixXd df(f0.rows(), f0.cols());
  for (Eigen::Index i = 0; i < df.rows(); ++i)
    for (Eigen::Index j = 0; j < df.cols(); ++j) df(i, j) = rng.gaussian();
  const auto grad = featurize_backward(x, cfg, df);

  const double h = 1e-5;
  for (int probe = 0; probe < 20; ++probe) {
    const int idx = static_cast<int>(rng.uniform() * x.size()) % static_cast<int>(x.size());
    Waveform xp = x, xm = x;
    xp.samples[idx] += h;
    xm.samples[idx] -= h;
    const double fp = (featurize(xp, cfg).array() * df.array()).sum();
    const double fm = (featurize(xm, cfg).array() * df.array()).sum();
    const double fd = (fp - fm) / (2.0 * h);
    CHECK(grad[idx] == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("forward: zero final layer leaves only the bias") {
  ModelParams p = ModelParams::init(8, 17);
  p.w3.setZero();
  p.b3.setConstant(0.25);
  const auto logits = forward(p, random_wave(600, 5));
  for (Eigen::Index t = 0; t < logits.values.rows(); ++t)
    for (Eigen::Index c = 0; c < logits.values.cols(); ++c)
      CHECK(logits.values(t, c) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("forward is bitwise deterministic") {
  const ModelParams p = ModelParams::init(8, 17);
  const Waveform x = random_wave(600, 5);
  const auto a = forward(p, x);
  const auto b = forward(p, x);
  CHECK(a.values == b.values);
}

TEST_CASE("end-to-end input gradient matches finite differences") {
  const ModelParams p = ModelParams::init(8, 3);
  const Waveform x = random_wave(600, 9, 0.2);
  const Transcript target = Transcript::parse("ba");

  const auto logits = forward(p, x);
  const auto ctc = ctc_loss(logits, target, p.vocab, /*want_grad=*/true);
  REQUIRE(ctc.feasible);
  const auto grad = backward_to_input(p, x, ctc.grad);

  RngStream rng(123, 0);
  const double h = 1e-5;
  for (int probe = 0; probe < 20; ++probe) {
    const int idx = static_cast<int>(rng.uniform() * x.size()) % static_cast<int>(x.size());
    Waveform xp = x, xm = x;
    xp.samples[idx] += h;
    xm.samples[idx] -= h;
    const double lp = ctc_loss(forward(p, xp), target, p.vocab).loss;
    const double lm = ctc_loss(forward(p, xm), target, p.vocab).loss;
    const double fd = (lp - lm) / (2.0 * h);
    CHECK(grad[idx] == doctest::Approx(fd).epsilon(1e-4).scale(1e-6));
  }
}

TEST_CASE("parameter gradient matches finite differences") {
  ModelParams p = ModelParams::init(6, 31);
  const Waveform x = random_wave(600, 13, 0.2);
  const Transcript target = Transcript::parse("de");
  const auto ctc = ctc_loss(forward(p, x), target, p.vocab, true);
  REQUIRE(ctc.feasible);
  ParamGrads g = ParamGrads::zeros_like(p);
  backward_to_params(p, x, ctc.grad, g);

  RngStream rng(5, 5);
  const double h = 1e-6;
  for (int probe = 0; probe < 10; ++probe) {
    const int i = static_cast<int>(rng.uniform() * p.w1.rows()) % p.w1.rows();
    const int j = static_cast<int>(rng.uniform() * p.w1.cols()) % p.w1.cols();
    ModelParams pp = p, pm = p;
    pp.w1(i, j) += h;
    pm.w1(i, j) -= h;
    const double fd = (ctc_loss(forward(pp, x), target, p.vocab).loss -
                       ctc_loss(forward(pm, x), target, p.vocab).loss) /
                      (2.0 * h);
    CHECK(g.w1(i, j) == doctest::Approx(fd).epsilon(1e-4).scale(1e-6));
  }
}

TEST_CASE("gradient of a constant-output model is zero") {
  ModelParams p = ModelParams::init(8, 17);
  p.w1.setZero();  // features never reach the logits
  const Waveform x = random_wave(600, 5);
  const auto ctc = ctc_loss(forward(p, x), Transcript::parse("ba"), p.vocab, true);
  REQUIRE(ctc.feasible);
  const auto grad = backward_to_input(p, x, ctc.grad);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("greedy decode collapse rules") {
  const Vocabulary v = Vocabulary::toy();
  const int a = v.char_to_class('a'), b = v.char_to_class('b');

  auto d1 = greedy_decode(logits_from_classes({a, a, 0, b}, v.num_classes()), v);
  CHECK(d1.transcript.str() == "ab");

  auto d2 = greedy_decode(logits_from_classes({a, 0, a}, v.num_classes()), v);
  CHECK(d2.transcript.str() == "aa");
  CHECK(d2.char_alignment == std::vector<int>{0, 2});
}

TEST_CASE("greedy decode multi-char run with alignments") {
  const Vocabulary v = Vocabulary::toy();
  const int b = v.char_to_class('b'), e = v.char_to_class('e');
  const int g = v.char_to_class('g'), o = v.char_to_class('o');
  // frames: b b e - g g - g o collapse to b e g g o
  auto d = greedy_decode(logits_from_classes({b, b, e, 0, g, g, 0, g, o}, v.num_classes()), v);
  CHECK(d.transcript.str() == "beggo");
  CHECK(d.char_alignment == std::vector<int>{0, 2, 4, 7, 8});
}

TEST_CASE("greedy decode argmax invariance under per-row constant shifts") {
  const Vocabulary v = Vocabulary::toy();
  RngStream rng(71, 0);
  LogitsSequence l;
  l.values = Eigen::MatrixXd::Zero(20, v.num_classes());
  for (Eigen::Index t = 0; t < 20; ++t)
    for (Eigen::Index c = 0; c < v.num_classes(); ++c) l.values(t, c) = rng.gaussian();
  l.frame_times.assign(20, 0.0);
  const auto base = greedy_decode(l, v);
  LogitsSequence shifted = l;
  for (Eigen::Index t = 0; t < 20; ++t) shifted.values.row(t).array() += (t % 5) * 3.1;
  CHECK(greedy_decode(shifted, v).transcript == base.transcript);
}

TEST_CASE("decoded word spans are ordered and inside the utterance") {
  ToyCorpus corpus = synth_corpus(404, 4, 4);
  const ModelParams p = ModelParams::init(8, 2);
  for (const auto& u : corpus.test) {
    const auto d = greedy_decode(forward(p, u.audio), p.vocab);
    double prev_end = 0.0;
    const double dur = static_cast<double>(u.audio.size()) / 16000.0;
    for (const auto& h : d.word_hyps) {
      CHECK(h.start >= prev_end - 1e-9);
      CHECK(h.duration > 0.0);
      CHECK(h.start + h.duration <= dur + 0.0126);  // one hop of slack
      prev_end = h.start + h.duration;
    }
  }
}

TEST_CASE("synth_corpus determinism and sizes") {
  const ToyCorpus a = synth_corpus(99, 10, 100);
  const ToyCorpus b = synth_corpus(99, 10, 100);
  REQUIRE(a.train.size() == 10);
  REQUIRE(a.test.size() == 100);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].transcript == b.train[i].transcript);
    CHECK(a.train[i].audio.samples == b.train[i].audio.samples);
  }
  // durations: w words = w*0.2s + (w-1)*0.05s + 0.1s lead/tail padding
  for (const auto& u : a.test) {
    const auto w = u.transcript.words.size();
    const std::size_t expected = w * 3200 + (w - 1) * 800 + 2 * 800;
    CHECK(u.audio.size() == expected);
  }
}

TEST_CASE("train/test sentences are disjoint") {
  const ToyCorpus c = synth_corpus(7, 150, 60);
  std::set<std::string> train_sentences;
  for (const auto& u : c.train) train_sentences.insert(u.transcript.str());
  int collisions = 0;
  for (const auto& u : c.test) collisions += train_sentences.count(u.transcript.str());
  CHECK(collisions == 0);
}

TEST_CASE("model save/load round trip") {
  const auto path = std::filesystem::temp_directory_path() / "asrlab_model.json";
  const ModelParams p = ModelParams::init(8, 55);
  p.save(path.string());
  const ModelParams q = ModelParams::load(path.string());
  CHECK(p.w1 == q.w1);
  CHECK(p.b3 == q.b3);
  CHECK(p.vocab.characters == q.vocab.characters);
  std::filesystem::remove(path);
}
