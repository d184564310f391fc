#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace torus_lab::detail {

using Complex = std::complex<double>;

// Cached 2D complex FFTW plans for one grid size. Planning goes through a
// global mutex (the FFTW planner is not reentrant); execution through the
// new-array interface is thread-safe.
class Fft2d {
 public:
  static const Fft2d& for_size(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<Fft2d>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot.reset(new Fft2d(n));
    return *slot;
  }

  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  ~Fft2d() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  // Unnormalized forward transform of real samples (row-major, a*n + b).
  std::vector<Complex> forward(std::span<const double> values) const {
    std::vector<Complex> buf(values.begin(), values.end());
    fftw_execute_dft(forward_, as_fftw(buf), as_fftw(buf));
    return buf;
  }

  // Inverse transform including the 1/n^2 factor; returns the real part.
  std::vector<double> backward(std::vector<Complex> spectrum) const {
    fftw_execute_dft(backward_, as_fftw(spectrum), as_fftw(spectrum));
    const double scale = 1.0 / (static_cast<double>(n_) * n_);
    std::vector<double> out(spectrum.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = spectrum[i].real() * scale;
    return out;
  }

  int size() const { return n_; }

 private:
  explicit Fft2d(int n) : n_(n) {
    std::vector<Complex> scratch(static_cast<std::size_t>(n) * n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_2d(n, n, as_fftw(scratch), as_fftw(scratch), FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft_2d(n, n, as_fftw(scratch), as_fftw(scratch), FFTW_BACKWARD, flags);
  }

  static fftw_complex* as_fftw(std::vector<Complex>& v) {
    return reinterpret_cast<fftw_complex*>(v.data());
  }

  int n_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace torus_lab::detail
