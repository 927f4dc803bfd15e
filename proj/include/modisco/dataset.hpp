#pragma once
// Input dataset: one-hot sequences with per-task actual and hypothetical
// contribution tracks, plus optional per-task null score tracks.
//
// On disk a dataset is a directory holding manifest.json and raw
// little-endian float32 arrays (row-major, concatenated across sequences):
//   onehot.bin, contrib_<task>.bin, hyp_<task>.bin       (sum(L) x 4 each)
//   null_manifest.json + null_<task>.bin                  (optional, 1-D)

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "modisco/matrix.hpp"

namespace modisco {

struct TaskTracks {
    std::vector<float> contrib;  // L x 4
    std::vector<float> hyp;      // L x 4
    bool operator==(const TaskTracks&) const = default;
};

struct SequenceRecord {
    std::size_t length = 0;
    std::vector<float> onehot;      // L x 4, entries in {0,1}
    std::vector<TaskTracks> tasks;  // parallel to Dataset::tasks
    bool operator==(const SequenceRecord&) const = default;
};

struct Dataset {
    std::vector<std::string> tasks;
    std::vector<SequenceRecord> sequences;
    // task name -> list of 1-D per-position null score tracks
    std::map<std::string, std::vector<std::vector<float>>> nulls;

    std::size_t task_index(std::string_view name) const;
    bool operator==(const Dataset&) const = default;
};

// Throws DataError naming the first violated invariant (and sequence index).
void validate(const Dataset& dataset);

Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

// Rows [begin, end) of a flat L x 4 float track as a double matrix.
Matrix track_slice(const std::vector<float>& track, std::size_t begin, std::size_t end);

// Per-position sum over the four bases.
std::vector<double> per_position_sums(const std::vector<float>& track);

// Task names become file names, so they are restricted to [A-Za-z0-9_.-].
bool is_valid_task_name(std::string_view name);

}  // namespace modisco
