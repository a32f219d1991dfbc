#pragma once

#include <cstddef>
#include <memory>

#include "rons/types.hpp"

namespace rons {

/// Unnormalized complex DFT of fixed length backed by FFTW. Plans are built
/// once; transforms on distinct buffers may run concurrently.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;

  std::size_t size() const { return n_; }

  /// out_k = sum_j in_j exp(-2 pi i j k / n).
  void forward(const ComplexVector& in, ComplexVector& out) const;
  /// out_j = sum_k in_k exp(+2 pi i j k / n), no 1/n factor.
  void inverse(const ComplexVector& in, ComplexVector& out) const;

 private:
  struct Plans;
  std::size_t n_ = 0;
  std::unique_ptr<Plans> plans_;
};

}  // namespace rons
