#include "bf/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "bf/errors.hpp"

namespace bf {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

template <typename T> struct Fftw;

template <> struct Fftw<float> {
    using plan = fftwf_plan;
    using cpx = fftwf_complex;
    static plan make(int n, int howmany, cpx* in, int istride, int idist, cpx* out,
                     int ostride, int odist, int sign) {
        return fftwf_plan_many_dft(1, &n, howmany, in, nullptr, istride, idist, out, nullptr,
                                   ostride, odist, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    static void run(plan p, cpx* in, cpx* out) { fftwf_execute_dft(p, in, out); }
    static void destroy(plan p) { fftwf_destroy_plan(p); }
};

template <> struct Fftw<double> {
    using plan = fftw_plan;
    using cpx = fftw_complex;
    static plan make(int n, int howmany, cpx* in, int istride, int idist, cpx* out,
                     int ostride, int odist, int sign) {
        return fftw_plan_many_dft(1, &n, howmany, in, nullptr, istride, idist, out, nullptr,
                                  ostride, odist, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    static void run(plan p, cpx* in, cpx* out) { fftw_execute_dft(p, in, out); }
    static void destroy(plan p) { fftw_destroy_plan(p); }
};

} // namespace

template <typename T>
struct FftPlan<T>::Impl {
    typename Fftw<T>::plan plan = nullptr;

    Impl() = default;
    Impl(const Impl&) = delete;
    Impl& operator=(const Impl&) = delete;
    ~Impl() {
        if (plan) {
            std::lock_guard lock(planner_mutex());
            Fftw<T>::destroy(plan);
        }
    }
};

template <typename T>
FftPlan<T>::FftPlan(std::size_t n, FftDirection dir) : FftPlan(n, dir, Layout{1, 1, n, 1, n}) {}

template <typename T>
FftPlan<T>::FftPlan(std::size_t n, FftDirection dir, const Layout& layout)
    : n_(n), impl_(std::make_unique<Impl>()) {
    if (n == 0 || layout.howmany == 0)
        throw ShapeError("FFT size and batch count must be positive");
    const std::size_t in_extent = (layout.howmany - 1) * layout.idist + (n - 1) * layout.istride + 1;
    const std::size_t out_extent = (layout.howmany - 1) * layout.odist + (n - 1) * layout.ostride + 1;
    // FFTW_ESTIMATE does not touch the planning buffers, but they must exist.
    std::vector<std::complex<T>> in(in_extent), out(out_extent);
    using W = Fftw<T>;
    std::lock_guard lock(planner_mutex());
    impl_->plan = W::make(static_cast<int>(n), static_cast<int>(layout.howmany),
                          reinterpret_cast<typename W::cpx*>(in.data()),
                          static_cast<int>(layout.istride), static_cast<int>(layout.idist),
                          reinterpret_cast<typename W::cpx*>(out.data()),
                          static_cast<int>(layout.ostride), static_cast<int>(layout.odist),
                          dir == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD);
    if (!impl_->plan)
        throw Error("FFTW failed to create a plan of size " + std::to_string(n));
}

template <typename T> FftPlan<T>::~FftPlan() = default;

template <typename T> FftPlan<T>::FftPlan(FftPlan&&) noexcept = default;
template <typename T> FftPlan<T>& FftPlan<T>::operator=(FftPlan&&) noexcept = default;

template <typename T>
void FftPlan<T>::execute(const std::complex<T>* in, std::complex<T>* out) const {
    using W = Fftw<T>;
    // fftw's execute takes a non-const input pointer but never writes it for
    // out-of-place plans.
    W::run(impl_->plan, reinterpret_cast<typename W::cpx*>(const_cast<std::complex<T>*>(in)),
           reinterpret_cast<typename W::cpx*>(out));
}

template class FftPlan<float>;
template class FftPlan<double>;

} // namespace bf
