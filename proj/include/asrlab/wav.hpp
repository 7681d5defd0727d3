#pragma once

#include <stdexcept>
#include <string>

#include "asrlab/signal.hpp"

namespace asrlab {

// Raised on malformed or unsupported WAV input; message names the
// offending header field.
struct WavFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// RIFF / PCM16 / mono / 16 kHz only. write_wav clips to [-1, 1] and
// quantizes; read(write(x)) matches x within one quantization step.
Waveform read_wav(const std::string& path);
void write_wav(const std::string& path, const Waveform& x);

}  // namespace asrlab
