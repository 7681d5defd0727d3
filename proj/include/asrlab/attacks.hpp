#pragma once

#include <cstdint>
#include <optional>

#include "asrlab/smoothing.hpp"

namespace asrlab {

// The attacked pipeline: base recognizer plus the smoothing configuration
// the defender actually runs. straight_through() wraps a defense so that
// gradient computations pass through enhancement in the forward direction
// but treat its derivative as identity; without the wrapper the attacker's
// gradient ignores enhancement entirely.
struct Defense {
  const ModelParams* params = nullptr;
  SmoothingConfig smooth;
  bool straight_through = false;

  Transcript transcribe(const Waveform& x) const {
    return smoothed_transcribe(*params, x, smooth).transcript;
  }
};

Defense straight_through(Defense defense);

// One stochastic CTC loss/gradient draw: noise (and enhancement, when the
// defense uses it) applied as in the deployed pipeline.
struct LossGrad {
  double loss = 0.0;
  bool feasible = true;
  std::vector<double> grad;
};

LossGrad stochastic_loss_grad(const Defense& defense, const Waveform& x,
                              const Transcript& target, RngStream& noise_rng);

// Expectation-over-Transformation estimate: the mean of n independent
// stochastic gradients, each over fresh noise.
LossGrad eot_gradient(const Defense& defense, const Waveform& x,
                      const Transcript& target, int n, std::uint64_t seed);

struct PgdConfig {
  double snr_bound_db = 25.0;
  int steps = 50;
  double step_size = 0.0;  // <= 0 selects eps/10
  int eot_samples = 16;
  bool adaptive = true;    // false: single stochastic gradient per step
};

struct CwConfig {
  Transcript target;
  double lambda_init = 0.05;
  int lambda_update_every = 50;
  double lambda_factor = 2.0;
  int max_steps = 1000;
  double step_size = 5e-3;  // Adam step
  double step_decay = 0.85;  // applied after each successful window
  int restarts = 1;          // extra runs start from a jittered delta
  double init_snr_db = 30.0;  // jitter level relative to the signal
  int eot_samples = 16;
  bool adaptive = true;
  double success_wer = 0.1;  // WER-to-target at or below this counts as a hit
};

struct AttackResult {
  Perturbation delta;
  double achieved_snr_db = 0.0;
  bool success = false;
  double wer_ground_truth = 0.0;
  double wer_target = 0.0;  // CW only
  int steps_used = 0;
};

// SNR-bounded untargeted PGD: sign steps of size eps/10, projected onto
// both the L-inf ball of radius eps and the L2 ball of the same radius so
// the achieved SNR never undercuts the bound.
AttackResult pgd_attack(const Defense& defense, const Waveform& x, const Transcript& y,
                        const PgdConfig& cfg, std::uint64_t rng_seed);

// Unbounded targeted CW: minimize CTC(x+delta, target) + lambda*||delta||2,
// testing the full defended pipeline every lambda_update_every steps and
// keeping the smallest successful perturbation. lambda is raised after a
// successful window and lowered after a failed one.
AttackResult cw_attack(const Defense& defense, const Waveform& x,
                       const Transcript& y_ground_truth, const CwConfig& cfg,
                       std::uint64_t rng_seed);

}  // namespace asrlab
