#pragma once

// Internal FFTW wrappers. Plans are created with FFTW_ESTIMATE so plan
// selection (and thus floating-point results) is reproducible run to run.

#include <fftw3.h>

#include <complex>
#include <map>
#include <vector>

namespace asrlab::detail {

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    fwd_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_1d(n, out_, in_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int bins() const { return n_ / 2 + 1; }

  // time -> spectrum (unnormalized DFT)
  void forward(const double* x, std::complex<double>* spec) {
    for (int i = 0; i < n_; ++i) in_[i] = x[i];
    fftw_execute(fwd_);
    for (int k = 0; k < bins(); ++k) spec[k] = {out_[k][0], out_[k][1]};
  }

  // spectrum -> time, scaled by 1/n so forward+inverse is identity
  void inverse(const std::complex<double>* spec, double* x) {
    for (int k = 0; k < bins(); ++k) {
      out_[k][0] = spec[k].real();
      out_[k][1] = spec[k].imag();
    }
    fftw_execute(bwd_);
    const double inv = 1.0 / n_;
    for (int i = 0; i < n_; ++i) x[i] = in_[i] * inv;
  }

  // Adjoint of forward() for gradient propagation: given d(loss)/d(spec)
  // (per stored bin, Wirtinger d/dRe + i d/dIm) produce d(loss)/d(time).
  // The unnormalized c2r sums conjugate-symmetric pairs, i.e. it counts
  // interior bins twice, so those are halved first.
  void adjoint(const std::complex<double>* dspec, double* dx) {
    for (int k = 0; k < bins(); ++k) {
      const double w = (k == 0 || k == n_ / 2) ? 1.0 : 0.5;
      out_[k][0] = w * dspec[k].real();
      out_[k][1] = w * dspec[k].imag();
    }
    fftw_execute(bwd_);
    for (int i = 0; i < n_; ++i) dx[i] = in_[i];
  }

 private:
  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan fwd_, bwd_;
};

// Shared per-size transform objects (single-threaded process).
RealFft& fft_for(int n);

}  // namespace asrlab::detail
