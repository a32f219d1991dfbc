#include "rons/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <string>

#include "rons/errors.hpp"

namespace rons {
namespace {

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(const Complex* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p));
}

}  // namespace

struct Fft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

Fft::Fft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n == 0) throw ValidationError("FFT length must be positive");
  ComplexVector a(static_cast<Eigen::Index>(n));
  ComplexVector b(static_cast<Eigen::Index>(n));
  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  plans_->forward = fftw_plan_dft_1d(len, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
  plans_->inverse = fftw_plan_dft_1d(len, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
  if (!plans_->forward || !plans_->inverse) {
    throw ValidationError("could not plan an FFT of length " + std::to_string(n));
  }
}

Fft::~Fft() = default;
Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

void Fft::forward(const ComplexVector& in, ComplexVector& out) const {
  if (static_cast<std::size_t>(in.size()) != n_) throw DimensionError("FFT input has wrong length");
  out.resize(in.size());
  fftw_execute_dft(plans_->forward, as_fftw(in.data()), as_fftw(out.data()));
}

void Fft::inverse(const ComplexVector& in, ComplexVector& out) const {
  if (static_cast<std::size_t>(in.size()) != n_) throw DimensionError("FFT input has wrong length");
  out.resize(in.size());
  fftw_execute_dft(plans_->inverse, as_fftw(in.data()), as_fftw(out.data()));
}

}  // namespace rons
