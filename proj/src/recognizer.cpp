#include "asrlab/recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace asrlab {

using json = nlohmann::json;

int Vocabulary::char_to_class(char c) const {
  for (std::size_t i = 0; i < characters.size(); ++i)
    if (characters[i] == c) return static_cast<int>(i) + 1;
  throw std::domain_error(std::string("Vocabulary: unknown character '") + c + "'");
}

char Vocabulary::class_to_char(int cls) const {
  if (cls <= 0 || cls > static_cast<int>(characters.size()))
    throw std::domain_error("Vocabulary: class out of range");
  return characters[cls - 1];
}

Vocabulary Vocabulary::toy() {
  Vocabulary v;
  v.characters = {' ', 'a', 'b', 'd', 'e', 'g', 'i', 'o'};
  return v;
}

ModelParams ModelParams::init(int hidden, std::uint64_t seed,
                              const FeatureConfig& feat, const Vocabulary& vocab) {
  ModelParams p;
  p.feat = feat;
  p.vocab = vocab;
  const int bins = feat.frame_length / 2 + 1;
  const int input = bins * (2 * feat.context + 1);
  const int classes = vocab.num_classes();
  RngStream rng(seed, 0);
  auto xavier = [&](Eigen::MatrixXd& m, int rows, int cols) {
    const double bound = std::sqrt(6.0 / (rows + cols));
    m.resize(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = (2.0 * rng.uniform() - 1.0) * bound;
  };
  xavier(p.w1, hidden, input);
  xavier(p.w2, hidden, hidden);
  xavier(p.w3, classes, hidden);
  p.b1 = Eigen::VectorXd::Zero(hidden);
  p.b2 = Eigen::VectorXd::Zero(hidden);
  p.b3 = Eigen::VectorXd::Zero(classes);
  return p;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.size();
  const auto cols = rows ? j[0].size() : 0;
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  return m;
}

}  // namespace

void ModelParams::save(const std::string& path) const {
  json j;
  j["format"] = "asrlab-model";
  j["version"] = 1;
  j["feat"] = {{"frame_length", feat.frame_length},
               {"hop_length", feat.hop_length},
               {"context", feat.context},
               {"kappa", feat.kappa}};
  j["characters"] = std::string(vocab.characters.begin(), vocab.characters.end());
  j["feat_shift"] = feat_shift;
  j["feat_scale"] = feat_scale;
  j["shapes"] = {{"hidden", hidden_dim()}, {"input", input_dim()},
                 {"classes", static_cast<int>(w3.rows())}};
  j["w1"] = matrix_to_json(w1);
  j["b1"] = matrix_to_json(b1);
  j["w2"] = matrix_to_json(w2);
  j["b2"] = matrix_to_json(b2);
  j["w3"] = matrix_to_json(w3);
  j["b3"] = matrix_to_json(b3);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("ModelParams::save: cannot open " + path);
  f << j.dump();
}

ModelParams ModelParams::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("ModelParams::load: cannot open " + path);
  json j = json::parse(f);
  if (j.value("format", "") != "asrlab-model")
    throw std::runtime_error("ModelParams::load: not a model file");
  ModelParams p;
  p.feat.frame_length = j["feat"]["frame_length"].get<int>();
  p.feat.hop_length = j["feat"]["hop_length"].get<int>();
  p.feat.context = j["feat"]["context"].get<int>();
  p.feat.kappa = j["feat"]["kappa"].get<double>();
  const std::string chars = j["characters"].get<std::string>();
  p.vocab.characters.assign(chars.begin(), chars.end());
  p.feat_shift = j["feat_shift"].get<double>();
  p.feat_scale = j["feat_scale"].get<double>();
  p.w1 = matrix_from_json(j["w1"]);
  p.b1 = matrix_from_json(j["b1"]);
  p.w2 = matrix_from_json(j["w2"]);
  p.b2 = matrix_from_json(j["b2"]);
  p.w3 = matrix_from_json(j["w3"]);
  p.b3 = matrix_from_json(j["b3"]);
  if (p.w1.rows() != j["shapes"]["hidden"].get<int>() ||
      p.w1.cols() != j["shapes"]["input"].get<int>())
    throw std::runtime_error("ModelParams::load: shape header mismatch");
  return p;
}

namespace {

struct ForwardCache {
  Eigen::MatrixXd feat_n;  // normalized stacked features
  Eigen::MatrixXd h1, h2;  // post-tanh activations
};

Eigen::MatrixXd run_forward(const ModelParams& p, const Waveform& x, ForwardCache* cache) {
  Eigen::MatrixXd feat = featurize(x, p.feat);
  feat = ((feat.array() + p.feat_shift) * p.feat_scale).matrix();
  Eigen::MatrixXd h1 = ((feat * p.w1.transpose()).rowwise() + p.b1.transpose()).array().tanh();
  Eigen::MatrixXd h2 = ((h1 * p.w2.transpose()).rowwise() + p.b2.transpose()).array().tanh();
  Eigen::MatrixXd logits = (h2 * p.w3.transpose()).rowwise() + p.b3.transpose();
  if (cache) {
    cache->feat_n = std::move(feat);
    cache->h1 = std::move(h1);
    cache->h2 = std::move(h2);
  }
  return logits;
}

}  // namespace

LogitsSequence forward(const ModelParams& params, const Waveform& x) {
  LogitsSequence out;
  out.values = run_forward(params, x, nullptr);
  out.frame_times.resize(out.values.rows());
  const double hop_sec = static_cast<double>(params.feat.hop_length) / 16000.0;
  for (std::size_t t = 0; t < out.frame_times.size(); ++t) out.frame_times[t] = t * hop_sec;
  return out;
}

std::vector<double> backward_to_input(const ModelParams& p, const Waveform& x,
                                      const Eigen::MatrixXd& dlogits) {
  ForwardCache c;
  run_forward(p, x, &c);
  const Eigen::MatrixXd dh2 =
      ((dlogits * p.w3).array() * (1.0 - c.h2.array().square())).matrix();
  const Eigen::MatrixXd dh1 =
      ((dh2 * p.w2).array() * (1.0 - c.h1.array().square())).matrix();
  const Eigen::MatrixXd dfeat = (dh1 * p.w1) * p.feat_scale;
  return featurize_backward(x, p.feat, dfeat);
}

ParamGrads ParamGrads::zeros_like(const ModelParams& p) {
  ParamGrads g;
  g.w1 = Eigen::MatrixXd::Zero(p.w1.rows(), p.w1.cols());
  g.w2 = Eigen::MatrixXd::Zero(p.w2.rows(), p.w2.cols());
  g.w3 = Eigen::MatrixXd::Zero(p.w3.rows(), p.w3.cols());
  g.b1 = Eigen::VectorXd::Zero(p.b1.size());
  g.b2 = Eigen::VectorXd::Zero(p.b2.size());
  g.b3 = Eigen::VectorXd::Zero(p.b3.size());
  return g;
}

void ParamGrads::axpy(double a, const ParamGrads& g) {
  w1 += a * g.w1; w2 += a * g.w2; w3 += a * g.w3;
  b1 += a * g.b1; b2 += a * g.b2; b3 += a * g.b3;
}

void ParamGrads::scale(double a) {
  w1 *= a; w2 *= a; w3 *= a;
  b1 *= a; b2 *= a; b3 *= a;
}

double ParamGrads::sq_norm() const {
  return w1.squaredNorm() + w2.squaredNorm() + w3.squaredNorm() +
         b1.squaredNorm() + b2.squaredNorm() + b3.squaredNorm();
}

void backward_to_params(const ModelParams& p, const Waveform& x,
                        const Eigen::MatrixXd& dlogits, ParamGrads& grads) {
  ForwardCache c;
  run_forward(p, x, &c);
  const Eigen::MatrixXd dh2 =
      ((dlogits * p.w3).array() * (1.0 - c.h2.array().square())).matrix();
  const Eigen::MatrixXd dh1 =
      ((dh2 * p.w2).array() * (1.0 - c.h1.array().square())).matrix();
  grads.w3 += dlogits.transpose() * c.h2;
  grads.b3 += dlogits.colwise().sum().transpose();
  grads.w2 += dh2.transpose() * c.h1;
  grads.b2 += dh2.colwise().sum().transpose();
  grads.w1 += dh1.transpose() * c.feat_n;
  grads.b1 += dh1.colwise().sum().transpose();
}

DecodeResult greedy_decode(const LogitsSequence& logits, const Vocabulary& vocab,
                           double hop_seconds) {
  const int T = static_cast<int>(logits.values.rows());
  DecodeResult res;
  std::string chars;
  std::vector<int> frames;       // first frame of each collapsed run
  std::vector<double> frame_conf;  // max softmax prob per frame
  int prev = -1;
  std::vector<double> conf(T);
  for (int t = 0; t < T; ++t) {
    int arg = 0;
    logits.values.row(t).maxCoeff(&arg);
    const double m = logits.values.row(t).maxCoeff();
    conf[t] = 1.0 / (logits.values.row(t).array() - m).exp().sum();
    if (arg != prev) {
      if (arg != vocab.blank_index) {
        chars.push_back(vocab.class_to_char(arg));
        frames.push_back(t);
      }
      prev = arg;
    }
  }
  res.char_alignment = frames;

  // Split at space characters into word hypotheses.
  std::size_t i = 0;
  while (i < chars.size()) {
    if (chars[i] == ' ') { ++i; continue; }
    std::size_t j = i;
    while (j < chars.size() && chars[j] != ' ') ++j;
    WordHypothesis h;
    h.word = chars.substr(i, j - i);
    const int f0 = frames[i], f1 = frames[j - 1];
    h.start = f0 * hop_seconds;
    h.duration = (f1 - f0 + 1) * hop_seconds;
    double acc = 0.0;
    int cnt = 0;
    for (int t = f0; t <= f1; ++t, ++cnt) acc += conf[t];
    h.confidence = cnt ? std::clamp(acc / cnt, 0.0, 1.0) : 0.0;
    res.word_hyps.push_back(h);
    res.transcript.words.push_back(h.word);
    i = j;
  }
  return res;
}

}  // namespace asrlab
