#include "hsnl/parallel.hpp"

#include <cstdlib>
#include <limits>
#include <string>

#include <omp.h>

namespace hsnl {

void set_threads(int n) {
    if (n > 0) omp_set_num_threads(n);
}

int threads() { return omp_get_max_threads(); }

void apply_thread_env() {
    if (const char* env = std::getenv("HSNL_THREADS")) {
        try {
            set_threads(std::stoi(env));
        } catch (const std::exception&) {
        }
    }
}

void parallel_for(std::ptrdiff_t n, const std::function<void(std::ptrdiff_t)>& body) {
    std::exception_ptr first;
    std::ptrdiff_t first_index = std::numeric_limits<std::ptrdiff_t>::max();
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
#pragma omp critical(hsnl_parallel_for_error)
            {
                if (i < first_index) {
                    first_index = i;
                    first = std::current_exception();
                }
            }
        }
    }
    if (first) std::rethrow_exception(first);
}

}  // namespace hsnl
