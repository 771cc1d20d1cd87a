#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "mnflow/field.hpp"

namespace mnflow {

using Cplx = std::complex<double>;

// Half-complex spectrum of a real n^3 field: n*n*(n/2+1) modes,
// slot ((ix*n)+iy)*(n/2+1)+iz, normalized so entries are Fourier
// amplitudes (forward transform divides by n^3).
using Spec = std::vector<Cplx>;

// FFTW-backed transforms for one (n, L) box.  Plans use FFTW_ESTIMATE so
// planning is deterministic across runs; execution copies through internal
// fftw-aligned scratch under a mutex, which keeps the wrapper thread-safe
// and alignment-correct at negligible cost next to the transform itself.
//
// Derivative multipliers zero the Nyquist plane (first and second order
// alike) so that discrete identities such as div(grad f) = laplace(f) hold
// exactly for every representable field.
class SpectralTransform {
 public:
  explicit SpectralTransform(const DomainSpec& box);
  ~SpectralTransform();
  SpectralTransform(const SpectralTransform&) = delete;
  SpectralTransform& operator=(const SpectralTransform&) = delete;

  int n() const { return n_; }
  double L() const { return L_; }
  std::size_t nmodes() const { return nmodes_; }

  void forward(const Scalar& in, Spec& out) const;
  void backward(const Spec& in, Scalar& out) const;
  Spec forward(const Scalar& in) const;
  Scalar backward(const Spec& in) const;

  // Angular wavenumber of one mode along an axis, Nyquist mapped to zero.
  double xi(int axis, std::size_t mode) const {
    return axis == 0 ? xi1_[mode] : axis == 1 ? xi2_[mode] : xi3_[mode];
  }
  double xi_norm2(std::size_t mode) const { return xin2_[mode]; }
  const std::vector<double>& xi_axis(int axis) const {
    return axis == 0 ? xi1_ : axis == 1 ? xi2_ : xi3_;
  }
  // True when any axis of the mode sits on the Nyquist plane.
  bool nyquist(std::size_t mode) const { return nyq_[mode] != 0; }

 private:
  struct Impl;
  Impl* impl_;
  int n_;
  double L_;
  std::size_t nmodes_;
  std::vector<double> xi1_, xi2_, xi3_, xin2_;
  std::vector<unsigned char> nyq_;
};

// Shared per-(n, L) transform cache; returned reference stays valid for the
// life of the process.
const SpectralTransform& transform_for(const DomainSpec& box);

}  // namespace mnflow
