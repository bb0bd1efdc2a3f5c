#include "pulseradar/fft.hpp"

#include <algorithm>
#include <mutex>

#include <fftw3.h>

namespace pulseradar {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};

using FftwBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

FftwBuffer make_buffer(std::size_t n) {
  return FftwBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

} // namespace

struct FftPlan::Impl {
  fftw_plan plan = nullptr;

  ~Impl() {
    if (plan != nullptr) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

FftPlan::FftPlan(std::size_t size, Direction direction) : size_(size), impl_(std::make_unique<Impl>()) {
  if (size == 0) {
    throw Error("fft: size must be positive");
  }
  auto in = make_buffer(size);
  auto out = make_buffer(size);
  const int sign = direction == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
  std::lock_guard lock(planner_mutex());
  impl_->plan = fftw_plan_dft_1d(static_cast<int>(size), in.get(), out.get(), sign, FFTW_ESTIMATE);
  if (impl_->plan == nullptr) {
    throw Error("fft: planner failed");
  }
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::execute(std::span<const ComplexF> in, std::span<ComplexF> out) const {
  if (in.size() != size_ || out.size() != size_) {
    throw Error("fft: buffer length does not match plan size");
  }
  // Copy through aligned scratch so the plan's alignment assumptions hold.
  auto a = make_buffer(size_);
  auto b = make_buffer(size_);
  std::copy(in.begin(), in.end(), reinterpret_cast<ComplexF*>(a.get()));
  fftw_execute_dft(impl_->plan, a.get(), b.get());
  std::copy_n(reinterpret_cast<const ComplexF*>(b.get()), size_, out.begin());
}

std::vector<ComplexF> FftPlan::operator()(std::span<const ComplexF> in) const {
  std::vector<ComplexF> out(size_);
  execute(in, out);
  return out;
}

} // namespace pulseradar
