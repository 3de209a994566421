#pragma once

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

#include <omp.h>

namespace groktopo {

/// Flushes float denormals to zero (FTZ and DAZ) on the calling thread and
/// every OpenMP worker for the guard's lifetime. Denormal arithmetic is
/// several times slower on x86; results stay deterministic.
class FlushDenormals {
public:
    FlushDenormals() {
#if defined(__SSE__)
        saved_ = _mm_getcsr();
        apply(saved_ | kFtzDaz);
#endif
    }
    ~FlushDenormals() {
#if defined(__SSE__)
        apply(saved_);
#endif
    }
    FlushDenormals(const FlushDenormals&) = delete;
    FlushDenormals& operator=(const FlushDenormals&) = delete;

private:
#if defined(__SSE__)
    static constexpr unsigned kFtzDaz = 0x8040;

    static void apply(unsigned csr) {
        _mm_setcsr(csr);
#pragma omp parallel
        _mm_setcsr(csr);
    }

    unsigned saved_ = 0;
#endif
};

}  // namespace groktopo
