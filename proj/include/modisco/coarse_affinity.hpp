#pragma once
// Gapped k-mer embeddings of seqlets and the cosine coarse affinity used to
// pick nearest neighbours for the fine pass.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modisco/matrix.hpp"
#include "modisco/metacluster.hpp"
#include "modisco/seqlets.hpp"

namespace modisco {

// A gapped k-mer has kmer_len positions of which exactly max_gapped_positions
// are gaps; the first and last positions are never gaps. Up to
// max_mismatches non-gap positions may disagree with the sequence.
struct GappedKmerSpec {
    std::size_t kmer_len = 8;
    std::size_t max_gapped_positions = 3;
    std::size_t max_mismatches = 2;
};

// Sum over relevant tasks of sign(pattern_t) * hyp_t. Throws on an all-zero pattern.
Matrix summed_hyp_track(const Seqlet& s, const ActivityPattern& pattern);

class GappedKmerSpace {
public:
    explicit GappedKmerSpace(const GappedKmerSpec& spec);

    const GappedKmerSpec& spec() const { return spec_; }
    std::size_t dimension() const { return gap_patterns_.size() * kmers_per_pattern_; }

    // Id of a k-mer written over ACGT with '.' at gap positions, e.g. "AC..GT.A".
    std::size_t id(std::string_view kmer) const;
    std::string name(std::size_t id) const;
    // Id of the reverse-complemented gapped k-mer.
    std::size_t reverse_complement_id(std::size_t id) const { return rc_perm_[id]; }

    // Dense embedding: every window and every gapped k-mer within the
    // mismatch budget of the sequence there adds the summed track at its
    // matching non-gap positions. Mismatched positions add nothing.
    std::vector<double> embed(const Matrix& onehot, const Matrix& track) const;

private:
    GappedKmerSpec spec_;
    std::vector<std::vector<std::size_t>> gap_patterns_;  // non-gap positions per pattern
    std::size_t kmers_per_pattern_ = 0;
    std::vector<std::size_t> rc_perm_;
};

// dot / (|e1| |e2|); 0 when either is all zeros.
double cosine_affinity(std::span<const double> e1, std::span<const double> e2);

struct CoarseResult {
    Matrix affinity;  // N x N; only filled when requested
    std::vector<std::vector<std::size_t>> neighbors;
    std::vector<std::vector<double>> neighbor_affinity;  // parallel to neighbors
};

// affinity(i, j) = max of the cosine against j and against j's reverse
// complement (when revcomp). Neighbours are the k largest per row excluding
// self, ties to the lower index, listed in descending affinity.
CoarseResult coarse_affmat_and_neighbors(const std::vector<Seqlet>& seqlets, const GappedKmerSpec& spec,
                                         const ActivityPattern& pattern, std::size_t k, bool revcomp,
                                         bool want_full_matrix, std::size_t workers = 1);

}  // namespace modisco
