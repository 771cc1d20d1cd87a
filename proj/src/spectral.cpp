#include "mnflow/spectral.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace mnflow {

namespace {
std::mutex plan_mutex;  // FFTW planning is not thread-safe
}

struct SpectralTransform::Impl {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  double* rbuf = nullptr;
  fftw_complex* cbuf = nullptr;
  std::mutex exec_mutex;

  ~Impl() {
    std::lock_guard<std::mutex> lk(plan_mutex);
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (rbuf) fftw_free(rbuf);
    if (cbuf) fftw_free(cbuf);
  }
};

SpectralTransform::SpectralTransform(const DomainSpec& box) {
  if (box.kind != DomainKind::PeriodicBox)
    throw std::invalid_argument("spectral transform: periodic box only");
  box.validate();
  n_ = box.n;
  L_ = box.L;
  const std::size_t npts = box.points();
  const std::size_t nh = static_cast<std::size_t>(n_) * n_ * (n_ / 2 + 1);
  nmodes_ = nh;

  impl_ = new Impl;
  {
    std::lock_guard<std::mutex> lk(plan_mutex);
    impl_->rbuf = fftw_alloc_real(npts);
    impl_->cbuf = fftw_alloc_complex(nh);
    impl_->fwd = fftw_plan_dft_r2c_3d(n_, n_, n_, impl_->rbuf, impl_->cbuf,
                                      FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft_c2r_3d(n_, n_, n_, impl_->cbuf, impl_->rbuf,
                                      FFTW_ESTIMATE);
  }
  if (!impl_->fwd || !impl_->bwd)
    throw std::runtime_error("spectral transform: fftw plan creation failed");

  const double base = 2.0 * M_PI / L_;
  xi1_.resize(nh);
  xi2_.resize(nh);
  xi3_.resize(nh);
  xin2_.resize(nh);
  nyq_.resize(nh);
  const int nz = n_ / 2 + 1;
  auto freq = [&](int i) {
    int f = (i <= n_ / 2) ? i : i - n_;
    return f == n_ / 2 ? 0.0 : base * f;  // Nyquist multiplier zeroed
  };
  for (int ix = 0; ix < n_; ++ix)
    for (int iy = 0; iy < n_; ++iy)
      for (int iz = 0; iz < nz; ++iz) {
        std::size_t m = (static_cast<std::size_t>(ix) * n_ + iy) * nz + iz;
        xi1_[m] = freq(ix);
        xi2_[m] = freq(iy);
        xi3_[m] = freq(iz);
        xin2_[m] = xi1_[m] * xi1_[m] + xi2_[m] * xi2_[m] + xi3_[m] * xi3_[m];
        nyq_[m] = (ix == n_ / 2 || iy == n_ / 2 || iz == n_ / 2) ? 1 : 0;
      }
}

SpectralTransform::~SpectralTransform() { delete impl_; }

void SpectralTransform::forward(const Scalar& in, Spec& out) const {
  const std::size_t npts = static_cast<std::size_t>(n_) * n_ * n_;
  if (in.size() != npts)
    throw std::invalid_argument("spectral forward: size mismatch");
  out.resize(nmodes_);
  std::lock_guard<std::mutex> lk(impl_->exec_mutex);
  std::memcpy(impl_->rbuf, in.data(), npts * sizeof(double));
  fftw_execute(impl_->fwd);
  const double norm = 1.0 / static_cast<double>(npts);
  for (std::size_t m = 0; m < nmodes_; ++m)
    out[m] = Cplx(impl_->cbuf[m][0] * norm, impl_->cbuf[m][1] * norm);
}

void SpectralTransform::backward(const Spec& in, Scalar& out) const {
  if (in.size() != nmodes_)
    throw std::invalid_argument("spectral backward: size mismatch");
  const std::size_t npts = static_cast<std::size_t>(n_) * n_ * n_;
  out.resize(npts);
  std::lock_guard<std::mutex> lk(impl_->exec_mutex);
  for (std::size_t m = 0; m < nmodes_; ++m) {
    impl_->cbuf[m][0] = in[m].real();
    impl_->cbuf[m][1] = in[m].imag();
  }
  fftw_execute(impl_->bwd);
  std::memcpy(out.data(), impl_->rbuf, npts * sizeof(double));
}

Spec SpectralTransform::forward(const Scalar& in) const {
  Spec out;
  forward(in, out);
  return out;
}

Scalar SpectralTransform::backward(const Spec& in) const {
  Scalar out;
  backward(in, out);
  return out;
}

const SpectralTransform& transform_for(const DomainSpec& box) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, double>, std::unique_ptr<SpectralTransform>>
      cache;
  std::lock_guard<std::mutex> lk(cache_mutex);
  auto key = std::make_pair(box.n, box.L);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<SpectralTransform>(box)).first;
  return *it->second;
}

}  // namespace mnflow
