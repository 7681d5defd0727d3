#pragma once

#include <string>
#include <vector>

#include "asrlab/signal.hpp"
#include "asrlab/transcript.hpp"

namespace asrlab {

struct Utterance {
  std::string id;
  Waveform audio;
  Transcript transcript;
};

// Synthetic ten-word corpus. Each word is a 0.2 s two-tone signature
// (consonant tone then vowel tone); words are separated by 0.05 s of
// silence, sentences run 1-6 words with utterance-level loudness drawn
// per sentence. Train and test word sequences are disjoint as sentences.
struct ToyCorpus {
  std::vector<Utterance> train;
  std::vector<Utterance> test;

  static const std::vector<std::string>& word_list();
};

ToyCorpus synth_corpus(std::uint64_t seed, int n_train, int n_test);

// Renders one sentence at a given loudness; exposed for targeted tests.
Waveform synth_sentence(const Transcript& t, double amplitude, RngStream& rng);

// WAV files plus an `utt-id TAB transcript` manifest.
void save_corpus_split(const std::vector<Utterance>& utts, const std::string& dir,
                       const std::string& manifest_name);
std::vector<Utterance> load_corpus_split(const std::string& dir,
                                         const std::string& manifest_path);

}  // namespace asrlab
