#include "modisco/coarse_affinity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "modisco/common.hpp"

namespace modisco {

namespace {

using RowMajorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr std::size_t kBlockRows = 256;

std::size_t ipow4(std::size_t e) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < e; ++i) r *= 4;
    return r;
}

std::size_t present_base(const Matrix& onehot, std::size_t row) {
    for (std::size_t b = 0; b < kAlphabetSize; ++b)
        if (onehot(row, b) > 0.5) return b;
    return kAlphabetSize;  // no base (never for validated input)
}

}  // namespace

Matrix summed_hyp_track(const Seqlet& s, const ActivityPattern& pattern) {
    if (pattern.size() != s.hyp.size()) throw std::invalid_argument("summed_hyp_track: pattern length mismatch");
    Matrix out(s.length(), kAlphabetSize);
    bool any = false;
    for (std::size_t t = 0; t < pattern.size(); ++t) {
        if (pattern[t] == 0) continue;
        any = true;
        Matrix h = s.hyp[t];
        h *= static_cast<double>(pattern[t]);
        out += h;
    }
    if (!any) throw std::invalid_argument("summed_hyp_track: all-zero activity pattern");
    return out;
}

GappedKmerSpace::GappedKmerSpace(const GappedKmerSpec& spec) : spec_(spec) {
    const std::size_t k = spec.kmer_len;
    const std::size_t g = spec.max_gapped_positions;
    if (k == 0 || g + spec.max_mismatches >= k) throw ConfigError("gapped k-mer: need gaps + mismatches < kmer_len");
    if (g > 0 && g + 2 > k) throw ConfigError("gapped k-mer: too many gaps for the k-mer length");

    // Choose g gap positions among the interior 1..k-2.
    std::vector<std::size_t> interior;
    for (std::size_t p = 1; p + 1 < k; ++p) interior.push_back(p);
    std::vector<char> mask(interior.size(), 0);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(g), 1);
    // prev_permutation over a descending-sorted mask visits combinations in lexicographic order.
    do {
        std::vector<char> gap(k, 0);
        for (std::size_t i = 0; i < interior.size(); ++i)
            if (mask[i]) gap[interior[i]] = 1;
        std::vector<std::size_t> kept;
        for (std::size_t p = 0; p < k; ++p)
            if (!gap[p]) kept.push_back(p);
        gap_patterns_.push_back(std::move(kept));
    } while (std::prev_permutation(mask.begin(), mask.end()));
    kmers_per_pattern_ = ipow4(k - g);

    rc_perm_.resize(dimension());
    for (std::size_t i = 0; i < dimension(); ++i) {
        std::string n = name(i);
        std::reverse(n.begin(), n.end());
        for (char& c : n) {
            switch (c) {
                case 'A': c = 'T'; break;
                case 'C': c = 'G'; break;
                case 'G': c = 'C'; break;
                case 'T': c = 'A'; break;
                default: break;
            }
        }
        rc_perm_[i] = id(n);
    }
}

std::size_t GappedKmerSpace::id(std::string_view kmer) const {
    if (kmer.size() != spec_.kmer_len) throw std::invalid_argument("gapped k-mer of wrong length");
    std::vector<std::size_t> kept;
    for (std::size_t p = 0; p < kmer.size(); ++p)
        if (kmer[p] != '.') kept.push_back(p);
    auto it = std::find(gap_patterns_.begin(), gap_patterns_.end(), kept);
    if (it == gap_patterns_.end()) throw std::invalid_argument("not a valid gap pattern: " + std::string(kmer));
    std::size_t code = 0, place = 1;
    for (std::size_t p : kept) {
        const auto pos = std::string_view("ACGT").find(kmer[p]);
        if (pos == std::string_view::npos) throw std::invalid_argument("bad base in k-mer");
        code += pos * place;
        place *= 4;
    }
    return static_cast<std::size_t>(it - gap_patterns_.begin()) * kmers_per_pattern_ + code;
}

std::string GappedKmerSpace::name(std::size_t id) const {
    const auto& kept = gap_patterns_.at(id / kmers_per_pattern_);
    std::size_t code = id % kmers_per_pattern_;
    std::string out(spec_.kmer_len, '.');
    for (std::size_t p : kept) {
        out[p] = "ACGT"[code % 4];
        code /= 4;
    }
    return out;
}

std::vector<double> GappedKmerSpace::embed(const Matrix& onehot, const Matrix& track) const {
    std::vector<double> out(dimension(), 0.0);
    const std::size_t k = spec_.kmer_len;
    const std::size_t L = onehot.rows();
    if (L < k) return out;
    std::vector<std::size_t> bases(L);
    for (std::size_t r = 0; r < L; ++r) bases[r] = present_base(onehot, r);

    const std::size_t m = k - spec_.max_gapped_positions;
    std::vector<std::size_t> seq_base(m);
    std::vector<double> score(m);
    std::vector<std::size_t> place(m);
    for (std::size_t j = 0; j < m; ++j) place[j] = ipow4(j);

    for (std::size_t start = 0; start + k <= L; ++start) {
        for (std::size_t pi = 0; pi < gap_patterns_.size(); ++pi) {
            const auto& kept = gap_patterns_[pi];
            bool ok = true;
            for (std::size_t j = 0; j < m; ++j) {
                const std::size_t row = start + kept[j];
                seq_base[j] = bases[row];
                if (seq_base[j] >= kAlphabetSize) {
                    ok = false;
                    break;
                }
                score[j] = track(row, seq_base[j]);
            }
            if (!ok) continue;
            const std::size_t offset = pi * kmers_per_pattern_;
            // Depth-first over positions: keep the sequence base, or spend a mismatch.
            auto rec = [&](auto&& self, std::size_t j, std::size_t code, double total, std::size_t budget) -> void {
                if (j == m) {
                    out[offset + code] += total;
                    return;
                }
                self(self, j + 1, code + seq_base[j] * place[j], total + score[j], budget);
                if (budget == 0) return;
                for (std::size_t b = 0; b < kAlphabetSize; ++b)
                    if (b != seq_base[j]) self(self, j + 1, code + b * place[j], total, budget - 1);
            };
            rec(rec, 0, 0, 0.0, spec_.max_mismatches);
        }
    }
    return out;
}

double cosine_affinity(std::span<const double> e1, std::span<const double> e2) {
    if (e1.size() != e2.size()) throw std::invalid_argument("cosine_affinity: length mismatch");
    double dot = 0.0, n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < e1.size(); ++i) {
        dot += e1[i] * e2[i];
        n1 += e1[i] * e1[i];
        n2 += e2[i] * e2[i];
    }
    if (n1 == 0.0 || n2 == 0.0) return 0.0;
    return dot / (std::sqrt(n1) * std::sqrt(n2));
}

CoarseResult coarse_affmat_and_neighbors(const std::vector<Seqlet>& seqlets, const GappedKmerSpec& spec,
                                         const ActivityPattern& pattern, std::size_t k, bool revcomp,
                                         bool want_full_matrix, std::size_t workers) {
    const std::size_t n = seqlets.size();
    CoarseResult res;
    res.neighbors.resize(n);
    res.neighbor_affinity.resize(n);
    if (n == 0) return res;

    const GappedKmerSpace space(spec);
    const std::size_t dim = space.dimension();
    RowMajorF emb(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    parallel_for(n, workers, [&](std::size_t i) {
        const auto e = space.embed(seqlets[i].onehot, summed_hyp_track(seqlets[i], pattern));
        double norm = 0.0;
        for (double v : e) norm += v * v;
        norm = std::sqrt(norm);
        for (std::size_t d = 0; d < dim; ++d)
            emb(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
                norm > 0.0 ? static_cast<float>(e[d] / norm) : 0.0f;
    });
    RowMajorF emb_rc;
    if (revcomp) {
        emb_rc.resize(emb.rows(), emb.cols());
        for (std::size_t d = 0; d < dim; ++d)
            emb_rc.col(static_cast<Eigen::Index>(space.reverse_complement_id(d))) =
                emb.col(static_cast<Eigen::Index>(d));
    }
    if (want_full_matrix) res.affinity = Matrix(n, n);

    const std::size_t kk = std::min(k, n - 1);
    const std::size_t n_blocks = (n + kBlockRows - 1) / kBlockRows;
    parallel_for(n_blocks, workers, [&](std::size_t blk) {
        const auto b0 = static_cast<Eigen::Index>(blk * kBlockRows);
        const auto bn = static_cast<Eigen::Index>(std::min(kBlockRows, n - blk * kBlockRows));
        RowMajorF sims = emb.middleRows(b0, bn) * emb.transpose();
        if (revcomp) sims = sims.cwiseMax(RowMajorF(emb_rc.middleRows(b0, bn) * emb.transpose()));
        std::vector<std::size_t> idx;
        for (Eigen::Index r = 0; r < bn; ++r) {
            const auto i = static_cast<std::size_t>(b0 + r);
            if (want_full_matrix)
                for (std::size_t j = 0; j < n; ++j) res.affinity(i, j) = sims(r, static_cast<Eigen::Index>(j));
            idx.clear();
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) idx.push_back(j);
            auto cmp = [&](std::size_t a, std::size_t b) {
                const float va = sims(r, static_cast<Eigen::Index>(a));
                const float vb = sims(r, static_cast<Eigen::Index>(b));
                return va > vb || (va == vb && a < b);
            };
            std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(kk), idx.end(), cmp);
            idx.resize(kk);
            res.neighbors[i] = idx;
            for (std::size_t j : idx) res.neighbor_affinity[i].push_back(sims(r, static_cast<Eigen::Index>(j)));
        }
    });
    if (want_full_matrix) {
        // Exact symmetry: the upper triangle is authoritative.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) res.affinity(i, j) = res.affinity(j, i);
    }
    return res;
}

}  // namespace modisco
