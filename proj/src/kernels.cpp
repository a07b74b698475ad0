#include "edckit/kernels.hpp"

#include "edckit/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

namespace edckit {

void validate_embedding(const EmbeddingVector& v) {
    if (v.empty()) throw Error("embedding vector is empty");
    for (double x : v)
        if (!std::isfinite(x)) throw Error("embedding vector has a non-finite component");
}

void EmbeddingMatrix::append(std::span<const double> v) {
    if (dim == 0) dim = v.size();
    if (v.size() != dim)
        throw Error("embedding dimension mismatch: expected " + std::to_string(dim) +
                    ", got " + std::to_string(v.size()));
    data.insert(data.end(), v.begin(), v.end());
}

std::string to_string(Metric m) {
    return m == Metric::cosine ? "cosine" : "euclidean";
}

Metric metric_from_string(const std::string& s) {
    if (s == "cosine") return Metric::cosine;
    if (s == "euclidean") return Metric::euclidean;
    throw Error("unknown metric: \"" + s + "\"");
}

namespace kernels {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

bool is_token_char(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           c >= 0x80;
}

void check_dims(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw Error("distance: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                    std::to_string(v.size()) + ")");
    if (u.empty()) throw Error("distance: empty vectors");
}

// Fixed block size so parallel reductions sum in the same order as serial
// block-by-block accumulation, independent of thread count.
constexpr std::size_t kBlock = 4096;

} // namespace

double cosine_distance(std::span<const double> u, std::span<const double> v) {
    check_dims(u, v);
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 && nv == 0.0) throw Error("cosine distance undefined: both vectors are zero");
    if (nu == 0.0 || nv == 0.0) throw Error("cosine distance undefined: zero vector operand");
    double d = 1.0 - dot / std::sqrt(nu * nv);
    if (d < 0.0) return 0.0;
    if (d > 2.0) return 2.0;
    return d;
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
    check_dims(u, v);
    double acc = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double t = u[i] - v[i];
        acc += t * t;
    }
    return std::sqrt(acc);
}

double metric_distance(Metric m, std::span<const double> u, std::span<const double> v) {
    return m == Metric::cosine ? cosine_distance(u, v) : euclidean_distance(u, v);
}

EmbeddingVector hash_embed(std::string_view text, std::size_t dim) {
    if (dim < 2) throw Error("hash_embed: dim must be >= 2");
    EmbeddingVector vec(dim, 0.0);
    std::size_t i = 0, n = text.size();
    bool any = false;
    std::string token;
    while (i < n) {
        while (i < n && !is_token_char(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < n && is_token_char(static_cast<unsigned char>(text[i]))) ++i;
        if (i == start) continue;
        token.assign(text.substr(start, i - start));
        for (char& c : token)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        std::size_t bucket = 1 + static_cast<std::size_t>(fnv1a64(token) % (dim - 1));
        vec[bucket] += 1.0;
        any = true;
    }
    if (!any) {
        vec[0] = 1.0;
        return vec;
    }
    double norm = 0;
    for (double x : vec) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : vec) x /= norm;
    return vec;
}

EmbeddingMatrix hash_embed_many(std::span<const std::string> texts, std::size_t dim) {
    if (dim < 2) throw Error("hash_embed: dim must be >= 2");
    EmbeddingMatrix m;
    m.dim = dim;
    m.data.assign(texts.size() * dim, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(texts.size()); ++i) {
        EmbeddingVector v = hash_embed(texts[static_cast<std::size_t>(i)], dim);
        std::copy(v.begin(), v.end(), m.data.begin() + static_cast<std::size_t>(i) * dim);
    }
    return m;
}

std::vector<double> pair_distances(const EmbeddingMatrix& m,
                                   std::span<const IndexPair> pairs, Metric metric) {
    std::vector<double> out(pairs.size());
    std::atomic<bool> failed{false};
    std::string first_error;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pairs.size()); ++i) {
        if (failed.load(std::memory_order_relaxed)) continue;
        const IndexPair& p = pairs[static_cast<std::size_t>(i)];
        try {
            out[static_cast<std::size_t>(i)] = metric_distance(metric, m.row(p.a), m.row(p.b));
        } catch (const std::exception& e) {
            bool expected = false;
            if (failed.compare_exchange_strong(expected, true)) {
#pragma omp critical(edckit_pair_distances_err)
                first_error = e.what();
            }
        }
    }
    if (failed.load()) throw Error("pair distance failed: " + first_error);
    return out;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw Error("pearson: length mismatch (" + std::to_string(xs.size()) + " vs " +
                    std::to_string(ys.size()) + ")");
    const std::size_t n = xs.size();
    if (n < 3) throw Error("pearson: need at least 3 points, got " + std::to_string(n));

    const std::size_t nb = (n + kBlock - 1) / kBlock;
    std::vector<double> bx(nb, 0.0), by(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
        std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        std::size_t hi = std::min(lo + kBlock, n);
        double sx = 0, sy = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            sx += xs[i];
            sy += ys[i];
        }
        bx[static_cast<std::size_t>(b)] = sx;
        by[static_cast<std::size_t>(b)] = sy;
    }
    double sumx = 0, sumy = 0;
    for (std::size_t b = 0; b < nb; ++b) {
        sumx += bx[b];
        sumy += by[b];
    }
    const double mx = sumx / static_cast<double>(n);
    const double my = sumy / static_cast<double>(n);

    std::vector<double> bxx(nb, 0.0), byy(nb, 0.0), bxy(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
        std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        std::size_t hi = std::min(lo + kBlock, n);
        double sxx = 0, syy = 0, sxy = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            double dx = xs[i] - mx;
            double dy = ys[i] - my;
            sxx += dx * dx;
            syy += dy * dy;
            sxy += dx * dy;
        }
        bxx[static_cast<std::size_t>(b)] = sxx;
        byy[static_cast<std::size_t>(b)] = syy;
        bxy[static_cast<std::size_t>(b)] = sxy;
    }
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t b = 0; b < nb; ++b) {
        sxx += bxx[b];
        syy += byy[b];
        sxy += bxy[b];
    }

    if (sxx == 0.0 || syy == 0.0) throw Error("pearson: zero variance");
    // Cauchy-Schwarz equality cases give exact +/-1; the float formula can
    // land 1 ulp off, so resolve them before dividing.
    if (sxy == sxx && sxx == syy) return 1.0;
    if (sxy == -sxx && sxx == syy) return -1.0;
    double r = sxy / std::sqrt(sxx * syy);
    if (r > 1.0) return 1.0;
    if (r < -1.0) return -1.0;
    return r;
}

std::vector<std::uint64_t> histogram_counts(std::span<const double> values, std::size_t bins,
                                            double lo, double hi) {
    if (bins < 2) throw Error("histogram: need at least 2 bins");
    std::vector<std::uint64_t> counts(bins, 0);
    const double width = hi - lo;
#pragma omp parallel
    {
        std::vector<std::uint64_t> local(bins, 0);
#pragma omp for schedule(static) nowait
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(values.size()); ++i) {
            double v = values[static_cast<std::size_t>(i)];
            std::size_t b = 0;
            if (width > 0) {
                double f = (v - lo) / width * static_cast<double>(bins);
                if (f < 0) f = 0;
                b = static_cast<std::size_t>(f);
                if (b >= bins) b = bins - 1;
            }
            ++local[b];
        }
#pragma omp critical(edckit_histogram_merge)
        for (std::size_t b = 0; b < bins; ++b) counts[b] += local[b];
    }
    return counts;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    auto ranks = [](std::span<const double> v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
            double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    std::vector<double> rx = ranks(xs), ry = ranks(ys);
    return pearson(rx, ry);
}

namespace serial {

EmbeddingMatrix hash_embed_many(std::span<const std::string> texts, std::size_t dim) {
    EmbeddingMatrix m;
    m.dim = dim;
    m.data.reserve(texts.size() * dim);
    for (const std::string& t : texts) {
        EmbeddingVector v = hash_embed(t, dim);
        m.data.insert(m.data.end(), v.begin(), v.end());
    }
    return m;
}

std::vector<double> pair_distances(const EmbeddingMatrix& m,
                                   std::span<const IndexPair> pairs, Metric metric) {
    std::vector<double> out(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
        out[i] = metric_distance(metric, m.row(pairs[i].a), m.row(pairs[i].b));
    return out;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error("pearson: length mismatch");
    const std::size_t n = xs.size();
    if (n < 3) throw Error("pearson: need at least 3 points");
    double sumx = 0, sumy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sumx += xs[i];
        sumy += ys[i];
    }
    double mx = sumx / static_cast<double>(n), my = sumy / static_cast<double>(n);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error("pearson: zero variance");
    if (sxy == sxx && sxx == syy) return 1.0;
    if (sxy == -sxx && sxx == syy) return -1.0;
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

std::vector<std::uint64_t> histogram_counts(std::span<const double> values, std::size_t bins,
                                            double lo, double hi) {
    if (bins < 2) throw Error("histogram: need at least 2 bins");
    std::vector<std::uint64_t> counts(bins, 0);
    const double width = hi - lo;
    for (double v : values) {
        std::size_t b = 0;
        if (width > 0) {
            double f = (v - lo) / width * static_cast<double>(bins);
            if (f < 0) f = 0;
            b = static_cast<std::size_t>(f);
            if (b >= bins) b = bins - 1;
        }
        ++counts[b];
    }
    return counts;
}

} // namespace serial
} // namespace kernels
} // namespace edckit
