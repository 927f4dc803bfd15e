#pragma once
// Final results: per metacluster the activity pattern and its motifs, each
// with member coordinates and averaged tracks.
//
// Directory layout written by save_results:
//   results.json                      metaclusters, motifs, member coordinates
//   metaclusters.tsv                  pattern and seqlet count per metacluster
//   metacluster_<i>_motif_<j>.tsv     averaged tracks, one row per position

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "modisco/aggregation.hpp"
#include "modisco/matrix.hpp"
#include "modisco/metacluster.hpp"

namespace modisco {

struct SeqletPlacement {
    SeqletCoord coord;
    long offset = 0;
    bool operator==(const SeqletPlacement&) const = default;
};

struct MotifResult {
    std::string name;
    std::size_t length = 0;
    std::vector<SeqletPlacement> seqlets;
    Matrix sequence;              // mean one-hot
    std::vector<Matrix> contrib;  // per relevant task
    std::vector<Matrix> hyp;      // per relevant task
    bool operator==(const MotifResult&) const = default;
};

struct MetaclusterResult {
    ActivityPattern pattern;
    std::size_t num_seqlets = 0;
    std::vector<MotifResult> motifs;
    bool operator==(const MetaclusterResult&) const = default;
};

struct ResultsBundle {
    std::vector<std::string> tasks;
    std::vector<MetaclusterResult> metaclusters;
    bool operator==(const ResultsBundle&) const = default;
};

MotifResult to_motif_result(const Motif& motif, const std::vector<std::size_t>& relevant_tasks, std::string name);

// Relevant task names of a metacluster, in dataset order.
std::vector<std::string> relevant_task_names(const ResultsBundle& bundle, const MetaclusterResult& mc);

// Throws DataError when the directory cannot be written.
void save_results(const ResultsBundle& results, const std::filesystem::path& dir);
ResultsBundle load_results(const std::filesystem::path& dir);

// Rows of one motif TSV: pos, seq A..T, then per relevant task contrib A..T and hyp A..T.
std::string motif_tsv(const MotifResult& motif, const std::vector<std::string>& relevant_task_names);

}  // namespace modisco
