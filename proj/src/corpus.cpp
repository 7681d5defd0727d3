#include "asrlab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "asrlab/wav.hpp"

namespace asrlab {

namespace {

constexpr int kRate = 16000;
constexpr int kToneSamples = 1600;     // 0.1 s per tone, two tones per word
constexpr int kSilenceSamples = 800;   // 0.05 s
constexpr int kRampSamples = 80;       // 5 ms cosine ramps

double char_freq(char c) {
  switch (c) {
    case 'b': return 500.0;
    case 'd': return 900.0;
    case 'g': return 1300.0;
    case 'a': return 1800.0;
    case 'e': return 2300.0;
    case 'i': return 2800.0;
    case 'o': return 3300.0;
  }
  throw std::domain_error(std::string("char_freq: no tone for '") + c + "'");
}

void append_tone(std::vector<double>& out, double freq, double amp, double phase) {
  for (int i = 0; i < kToneSamples; ++i) {
    double env = 1.0;
    if (i < kRampSamples)
      env = 0.5 - 0.5 * std::cos(M_PI * i / kRampSamples);
    else if (i >= kToneSamples - kRampSamples)
      env = 0.5 - 0.5 * std::cos(M_PI * (kToneSamples - 1 - i) / kRampSamples);
    out.push_back(amp * env * std::sin(2.0 * M_PI * freq * i / kRate + phase));
  }
}

}  // namespace

const std::vector<std::string>& ToyCorpus::word_list() {
  static const std::vector<std::string> words = {
      "ba", "be", "bi", "bo", "da", "de", "di", "ga", "ge", "gi"};
  return words;
}

Waveform synth_sentence(const Transcript& t, double amplitude, RngStream& rng) {
  Waveform x;
  x.samples.reserve(t.words.size() * 2 * kToneSamples +
                    (t.words.size() + 1) * kSilenceSamples + kSilenceSamples);
  x.samples.insert(x.samples.end(), kSilenceSamples, 0.0);
  for (std::size_t w = 0; w < t.words.size(); ++w) {
    if (w) x.samples.insert(x.samples.end(), kSilenceSamples, 0.0);
    for (char c : t.words[w])
      append_tone(x.samples, char_freq(c), amplitude, 2.0 * M_PI * rng.uniform());
  }
  x.samples.insert(x.samples.end(), kSilenceSamples, 0.0);
  return x;
}

ToyCorpus synth_corpus(std::uint64_t seed, int n_train, int n_test) {
  if (n_train <= 0 || n_test <= 0)
    throw std::domain_error("synth_corpus: split sizes must be positive");
  const auto& words = ToyCorpus::word_list();
  ToyCorpus corpus;

  auto sample_sentence = [&](RngStream& rng) {
    const int len = 1 + static_cast<int>(rng.uniform() * 6.0);
    Transcript t;
    for (int i = 0; i < len; ++i)
      t.words.push_back(words[static_cast<int>(rng.uniform() * words.size()) % words.size()]);
    return t;
  };

  std::set<std::string> train_sentences;
  RngStream rng(seed, 1);
  for (int i = 0; i < n_train; ++i) {
    Utterance u;
    u.id = "train-" + std::to_string(i);
    u.transcript = sample_sentence(rng);
    train_sentences.insert(u.transcript.str());
    const double amp = 0.15 + 0.15 * rng.uniform();
    u.audio = synth_sentence(u.transcript, amp, rng);
    corpus.train.push_back(std::move(u));
  }
  RngStream trng(seed, 2);
  for (int i = 0; i < n_test; ++i) {
    Utterance u;
    u.id = "test-" + std::to_string(i);
    // keep test sentences out of the training set
    for (int tries = 0; tries < 1000; ++tries) {
      u.transcript = sample_sentence(trng);
      if (!train_sentences.count(u.transcript.str())) break;
    }
    const double amp = 0.15 + 0.15 * trng.uniform();
    u.audio = synth_sentence(u.transcript, amp, trng);
    corpus.test.push_back(std::move(u));
  }
  return corpus;
}

void save_corpus_split(const std::vector<Utterance>& utts, const std::string& dir,
                       const std::string& manifest_name) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir + "/" + manifest_name);
  if (!manifest) throw std::runtime_error("save_corpus_split: cannot open manifest");
  for (const auto& u : utts) {
    write_wav(dir + "/" + u.id + ".wav", u.audio);
    manifest << u.id << '\t' << u.transcript.str() << '\n';
  }
}

std::vector<Utterance> load_corpus_split(const std::string& dir,
                                         const std::string& manifest_path) {
  std::ifstream manifest(manifest_path);
  if (!manifest) throw std::runtime_error("load_corpus_split: cannot open " + manifest_path);
  std::vector<Utterance> utts;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("load_corpus_split: malformed manifest line: " + line);
    Utterance u;
    u.id = line.substr(0, tab);
    u.transcript = Transcript::parse(line.substr(tab + 1));
    u.audio = read_wav(dir + "/" + u.id + ".wav");
    utts.push_back(std::move(u));
  }
  return utts;
}

}  // namespace asrlab
