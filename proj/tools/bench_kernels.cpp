// Times the OpenMP kernels against their serial reference implementations.
// Usage: edckit-bench [texts] [pairs] [dim]

#include "edckit/kernels.hpp"
#include "edckit/rng.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

using namespace edckit;

namespace {

double time_ms(const std::function<void()>& fn, int reps = 3) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        if (ms < best) best = ms;
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-22s serial %9.2f ms   omp %9.2f ms   speedup %.2fx\n", name, serial_ms,
                parallel_ms, parallel_ms > 0 ? serial_ms / parallel_ms : 0.0);
}

} // namespace

int main(int argc, char** argv) {
    std::size_t n_texts = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20000;
    std::size_t n_pairs = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 500000;
    std::size_t dim = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 256;

    std::printf("threads=%d texts=%zu pairs=%zu dim=%zu\n", omp_get_max_threads(), n_texts,
                n_pairs, dim);

    std::mt19937_64 rng = make_rng(7);
    std::vector<std::string> texts(n_texts);
    for (std::size_t i = 0; i < n_texts; ++i) {
        std::string t;
        for (int w = 0; w < 40; ++w)
            t += "w" + std::to_string(uniform_below(rng, 5000)) + " ";
        texts[i] = t;
    }

    EmbeddingMatrix m;
    report("hash_embed_many",
           time_ms([&] { m = kernels::serial::hash_embed_many(texts, dim); }),
           time_ms([&] { m = kernels::hash_embed_many(texts, dim); }));

    std::vector<IndexPair> pairs(n_pairs);
    for (std::size_t i = 0; i < n_pairs; ++i) {
        std::size_t a = uniform_below(rng, n_texts);
        std::size_t b = uniform_below(rng, n_texts - 1);
        if (b >= a) ++b;
        pairs[i] = {a < b ? a : b, a < b ? b : a};
    }

    std::vector<double> xs;
    report("pair_distances",
           time_ms([&] { xs = kernels::serial::pair_distances(m, pairs, Metric::cosine); }),
           time_ms([&] { xs = kernels::pair_distances(m, pairs, Metric::cosine); }));

    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = xs[i] + uniform_double(rng) * 0.1;

    double r = 0;
    report("pearson", time_ms([&] { r = kernels::serial::pearson(xs, ys); }),
           time_ms([&] { r = kernels::pearson(xs, ys); }));
    std::printf("  (r = %.6f)\n", r);

    std::vector<std::uint64_t> counts;
    report("histogram_counts",
           time_ms([&] { counts = kernels::serial::histogram_counts(xs, 50, 0.0, 2.0); }),
           time_ms([&] { counts = kernels::histogram_counts(xs, 50, 0.0, 2.0); }));

    return 0;
}
