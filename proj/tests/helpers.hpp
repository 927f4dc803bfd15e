#pragma once
// Small builders and independent reference implementations shared by tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "modisco/dataset.hpp"
#include "modisco/matrix.hpp"
#include "modisco/seqlets.hpp"
#include "modisco/sparse.hpp"

namespace testutil {

using modisco::Matrix;

inline Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    return m;
}

inline Matrix column(const std::vector<double>& v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -1, double hi = 1) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (auto& v : m.values()) v = u(rng);
    return m;
}

// One-hot matrix for an ACGT string.
inline Matrix onehot(const std::string& seq) {
    Matrix m(seq.size(), 4);
    for (std::size_t i = 0; i < seq.size(); ++i) m(i, std::string("ACGT").find(seq[i])) = 1.0;
    return m;
}

// Random dataset with contributions on the present base only.
inline modisco::Dataset random_dataset(std::mt19937_64& rng, std::size_t n_seq, std::size_t len,
                                       std::vector<std::string> tasks = {"t0"}) {
    modisco::Dataset ds;
    ds.tasks = std::move(tasks);
    std::uniform_int_distribution<int> base(0, 3);
    std::normal_distribution<float> nd(0.0f, 1.0f);
    for (std::size_t s = 0; s < n_seq; ++s) {
        modisco::SequenceRecord rec;
        rec.length = len;
        rec.onehot.assign(len * 4, 0.0f);
        std::vector<int> b(len);
        for (std::size_t i = 0; i < len; ++i) {
            b[i] = base(rng);
            rec.onehot[i * 4 + b[i]] = 1.0f;
        }
        for (std::size_t t = 0; t < ds.tasks.size(); ++t) {
            modisco::TaskTracks tt;
            tt.hyp.resize(len * 4);
            tt.contrib.assign(len * 4, 0.0f);
            for (auto& v : tt.hyp) v = nd(rng);
            for (std::size_t i = 0; i < len; ++i) tt.contrib[i * 4 + b[i]] = tt.hyp[i * 4 + b[i]];
            rec.tasks.push_back(std::move(tt));
        }
        ds.sequences.push_back(std::move(rec));
    }
    return ds;
}

inline modisco::SparseRows dense_graph(const std::vector<std::vector<double>>& w) {
    modisco::SparseRows g(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j)
            if (w[i][j] != 0.0) g.rows[i].emplace_back(j, w[i][j]);
    return g;
}

// Modularity straight from the definition over a dense matrix.
inline double modularity_direct(const std::vector<std::vector<double>>& w, const std::vector<std::size_t>& labels) {
    const std::size_t n = w.size();
    std::vector<double> k(n, 0.0);
    double m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            k[i] += w[i][j];
            m2 += w[i][j];
        }
    if (m2 == 0.0) return 0.0;
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (labels[i] == labels[j]) q += w[i][j] - k[i] * k[j] / m2;
    return q / m2;
}

// Best modularity over all set partitions, enumerated recursively.
inline void enumerate_partitions(std::vector<std::size_t>& labels, std::size_t i, std::size_t used,
                                 const std::vector<std::vector<double>>& w, double& best) {
    if (i == labels.size()) {
        best = std::max(best, modularity_direct(w, labels));
        return;
    }
    for (std::size_t c = 0; c <= used; ++c) {
        labels[i] = c;
        enumerate_partitions(labels, i + 1, std::max(used, c + 1), w, best);
    }
}

inline double brute_force_best_modularity(const std::vector<std::vector<double>>& w) {
    std::vector<std::size_t> labels(w.size(), 0);
    double best = -std::numeric_limits<double>::infinity();
    enumerate_partitions(labels, 0, 0, w, best);
    return best;
}

// Naive PAV: repeatedly merge the first adjacent violating
// pair of blocks until none remain. Equal x are pooled first.
inline std::vector<double> pav_oracle(const std::vector<double>& x, const std::vector<double>& y,
                                      const std::vector<double>& w) {
    struct Block {
        double sum_wy, sum_w;
        std::vector<std::size_t> idx;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!blocks.empty() && x[blocks.back().idx.back()] == x[i]) {
            blocks.back().sum_wy += w[i] * y[i];
            blocks.back().sum_w += w[i];
            blocks.back().idx.push_back(i);
        } else {
            blocks.push_back({w[i] * y[i], w[i], {i}});
        }
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t b = 0; b + 1 < blocks.size(); ++b) {
            if (blocks[b].sum_wy / blocks[b].sum_w > blocks[b + 1].sum_wy / blocks[b + 1].sum_w) {
                blocks[b].sum_wy += blocks[b + 1].sum_wy;
                blocks[b].sum_w += blocks[b + 1].sum_w;
                blocks[b].idx.insert(blocks[b].idx.end(), blocks[b + 1].idx.begin(), blocks[b + 1].idx.end());
                blocks.erase(blocks.begin() + static_cast<std::ptrdiff_t>(b) + 1);
                changed = true;
                break;
            }
        }
    }
    std::vector<double> out(y.size());
    for (const auto& b : blocks)
        for (std::size_t i : b.idx) out[i] = b.sum_wy / b.sum_w;
    return out;
}

// Perplexity of exp(-beta d) over finite entries, computed without shifting.
inline double perplexity_oracle(const std::vector<double>& d, double beta) {
    std::vector<double> p;
    double z = 0.0;
    for (double x : d)
        if (std::isfinite(x)) {
            p.push_back(std::exp(-beta * x));
            z += p.back();
        }
    double h = 0.0;
    for (double v : p)
        if (v > 0) h -= (v / z) * std::log2(v / z);
    return std::pow(2.0, h);
}

// Plain bisection on log(beta) for the perplexity target.
inline double beta_bisection_oracle(const std::vector<double>& d, double target) {
    double lo = 1e-8, hi = 1e4;
    for (int it = 0; it < 300; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (perplexity_oracle(d, mid) > target) lo = mid;
        else hi = mid;
    }
    return std::sqrt(lo * hi);
}

// Continuous Jaccard directly from the definition.
inline double cj_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    double inter = 0.0, uni = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double mn = std::min(std::fabs(a[i]), std::fabs(b[i]));
        const double mx = std::max(std::fabs(a[i]), std::fabs(b[i]));
        const double s = (a[i] > 0) - (a[i] < 0);
        const double t = (b[i] > 0) - (b[i] < 0);
        inter += mn * s * t;
        uni += mx;
    }
    return uni == 0.0 ? 0.0 : inter / uni;
}

inline double pearson_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace testutil
