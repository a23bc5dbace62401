#pragma once

#include <complex>
#include <cstddef>
#include <memory>

namespace bf {

enum class FftDirection { Forward, Backward };

// Thin RAII wrapper over an FFTW plan.  Forward uses exp(-2 pi i k n / N);
// neither direction normalizes.  Plans are created under a global lock
// (FFTW's planner is not thread-safe) with FFTW_ESTIMATE | FFTW_UNALIGNED, so
// execute() is const, thread-safe and deterministic for any buffer.
//
// The batch layout follows fftw_plan_many_dft: transform j reads element i at
// in[j * idist + i * istride] and writes out[j * odist + i * ostride].
template <typename T>
class FftPlan {
  public:
    struct Layout {
        std::size_t howmany = 1;
        std::size_t istride = 1, idist = 0;
        std::size_t ostride = 1, odist = 0;
    };

    FftPlan(std::size_t n, FftDirection dir);
    FftPlan(std::size_t n, FftDirection dir, const Layout& layout);
    ~FftPlan();
    FftPlan(FftPlan&&) noexcept;
    FftPlan& operator=(FftPlan&&) noexcept;
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    std::size_t size() const { return n_; }

    // Out-of-place only: in and out must not alias.
    void execute(const std::complex<T>* in, std::complex<T>* out) const;

  private:
    struct Impl;
    std::size_t n_ = 0;
    std::unique_ptr<Impl> impl_;
};

extern template class FftPlan<float>;
extern template class FftPlan<double>;

} // namespace bf
