#include "modisco/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "modisco/common.hpp"

namespace modisco {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBetaCap = 1e300;

struct Entropy {
    double bits;
    double dh_dbeta;  // derivative of the entropy in bits
};

// Entropy of the calibrated row, distances already shifted so the minimum is 0.
Entropy entropy_at(std::span<const double> d, double beta) {
    double z = 0.0, mean = 0.0, second = 0.0;
    for (double x : d) {
        if (std::isinf(x)) continue;
        const double w = std::exp(-beta * x);
        z += w;
        mean += w * x;
        second += w * x * x;
    }
    mean /= z;
    second /= z;
    const double var = std::max(0.0, second - mean * mean);
    const double nats = beta * mean + std::log(z);
    return {nats / std::log(2.0), -beta * var / std::log(2.0)};
}

}  // namespace

double affinity_to_distance(double x) {
    if (!(x > 0.0)) return kInf;
    x = std::min(x, 1.0);
    return std::log(1.0 / (0.5 * x) - 1.0);
}

double perplexity_at(std::span<const double> dists, double beta) {
    double dmin = kInf;
    for (double x : dists) dmin = std::min(dmin, x);
    if (std::isinf(dmin)) throw std::invalid_argument("perplexity_at: no finite distance");
    std::vector<double> d(dists.begin(), dists.end());
    for (double& x : d) x -= dmin;
    return std::exp2(entropy_at(d, beta).bits);
}

BetaResult beta_for_perplexity(std::span<const double> dists, double target_perplexity) {
    if (!(target_perplexity >= 1.0)) throw std::invalid_argument("target perplexity must be >= 1");
    double dmin = kInf;
    std::size_t finite = 0;
    for (double x : dists) {
        if (std::isinf(x)) continue;
        ++finite;
        dmin = std::min(dmin, x);
    }
    if (finite == 0) throw std::invalid_argument("beta_for_perplexity: no finite distance");
    std::vector<double> d(dists.begin(), dists.end());
    std::size_t at_min = 0;
    for (double& x : d) {
        x -= dmin;
        if (x == 0.0) ++at_min;
    }
    const double target_bits = std::log2(target_perplexity);
    const double tol = 1e-4;

    BetaResult res;
    if (target_perplexity > static_cast<double>(finite) + 1e-12) {
        // Perplexity never exceeds the finite support size; beta = 0 reaches the maximum.
        res.beta = 0.0;
        res.perplexity = static_cast<double>(finite);
        res.boundary = true;
        return res;
    }
    if (target_perplexity < static_cast<double>(at_min) - 1e-12) {
        res.beta = kBetaCap;
        res.perplexity = static_cast<double>(at_min);
        res.boundary = true;
        return res;
    }

    // Safeguarded Newton iteration on the bracket [lo, hi]; entropy decreases in beta.
    double lo = 0.0, hi = kInf, beta = 1.0;
    Entropy h = entropy_at(d, beta);
    for (int it = 0; it < 200 && std::fabs(h.bits - target_bits) > tol; ++it) {
        if (h.bits > target_bits) lo = beta;
        else hi = beta;
        double next = h.dh_dbeta < 0.0 ? beta - (h.bits - target_bits) / h.dh_dbeta : -1.0;
        if (!(next > lo && next < hi)) next = std::isinf(hi) ? std::max(2.0 * beta, 1.0) : 0.5 * (lo + hi);
        if (next > kBetaCap) {
            next = kBetaCap;
        }
        beta = next;
        h = entropy_at(d, beta);
    }
    res.beta = beta;
    res.perplexity = std::exp2(h.bits);
    res.boundary = std::fabs(h.bits - target_bits) > tol;
    return res;
}

ConditionalProbs conditional_probs(const SparseRows& dist, double perplexity, std::size_t workers) {
    const std::size_t n = dist.size();
    ConditionalProbs out;
    out.probs = SparseRows(n);
    out.betas.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        bool any = false;
        for (const auto& [j, d] : dist.rows[i])
            if (j != i && std::isfinite(d)) any = true;
        if (!any) throw std::invalid_argument("conditional_probs: node " + std::to_string(i) + " is isolated");
    }
    parallel_for(n, workers, [&](std::size_t i) {
        std::vector<std::size_t> cols;
        std::vector<double> d;
        for (const auto& [j, v] : dist.rows[i]) {
            if (j == i) continue;
            cols.push_back(j);
            d.push_back(v);
        }
        const BetaResult br = beta_for_perplexity(d, perplexity);
        out.betas[i] = br;
        double dmin = kInf;
        for (double v : d) dmin = std::min(dmin, v);
        std::vector<double> w(d.size(), 0.0);
        double z = 0.0;
        for (std::size_t k = 0; k < d.size(); ++k) {
            if (std::isinf(d[k])) continue;
            w[k] = std::exp(-br.beta * (d[k] - dmin));
            z += w[k];
        }
        auto& row = out.probs.rows[i];
        for (std::size_t k = 0; k < d.size(); ++k)
            if (w[k] > 0.0) row.emplace_back(cols[k], w[k] / z);
    });
    return out;
}

SparseRows symmetrize(const SparseRows& cond) {
    const std::size_t n = cond.size();
    std::map<std::pair<std::size_t, std::size_t>, double> acc;
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [j, p] : cond.rows[i]) {
            if (j == i) continue;
            acc[{std::min(i, j), std::max(i, j)}] += p;
        }
    SparseRows out(n);
    const double denom = 2.0 * static_cast<double>(n);
    for (const auto& [key, v] : acc) {
        out.rows[key.first].emplace_back(key.second, v / denom);
        out.rows[key.second].emplace_back(key.first, v / denom);
    }
    for (auto& r : out.rows) std::sort(r.begin(), r.end());
    return out;
}

SparseRows affinities_to_distances(const SparseRows& affinity) {
    SparseRows out = affinity;
    for (auto& r : out.rows)
        for (auto& e : r) e.second = affinity_to_distance(e.second);
    return out;
}

}  // namespace modisco
