#include "modisco/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "modisco/common.hpp"

namespace modisco {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

static_assert(sizeof(float) == 4);

std::uint32_t to_little(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

void write_floats(const fs::path& path, const std::vector<const std::vector<float>*>& chunks) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto* chunk : chunks) {
        for (float f : *chunk) {
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            bits = to_little(bits);
            out.write(reinterpret_cast<const char*>(&bits), 4);
        }
    }
    if (!out) throw DataError("write failed: " + path.string());
}

std::vector<float> read_floats(const fs::path& path, std::size_t expected_count) {
    if (!fs::exists(path)) throw DataError("missing file: " + path.filename().string());
    const auto bytes = fs::file_size(path);
    if (bytes != expected_count * 4) {
        std::ostringstream msg;
        msg << "length mismatch: " << path.filename().string() << " has " << bytes
            << " bytes, manifest implies " << expected_count * 4;
        throw DataError(msg.str());
    }
    std::vector<float> out(expected_count);
    std::ifstream in(path, std::ios::binary);
    for (std::size_t i = 0; i < expected_count; ++i) {
        std::uint32_t bits;
        in.read(reinterpret_cast<char*>(&bits), 4);
        bits = to_little(bits);
        std::memcpy(&out[i], &bits, 4);
    }
    if (!in) throw DataError("read failed: " + path.string());
    return out;
}

ordered_json read_json(const fs::path& path) {
    if (!fs::exists(path)) throw DataError("missing file: " + path.filename().string());
    std::ifstream in(path);
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed " + path.filename().string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

// Splits a flat concatenated array into per-sequence chunks.
std::vector<std::vector<float>> split(const std::vector<float>& flat, const std::vector<std::size_t>& lengths,
                                      std::size_t width) {
    std::vector<std::vector<float>> out;
    out.reserve(lengths.size());
    std::size_t pos = 0;
    for (std::size_t len : lengths) {
        out.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                         flat.begin() + static_cast<std::ptrdiff_t>(pos + len * width));
        pos += len * width;
    }
    return out;
}

}  // namespace

std::size_t Dataset::task_index(std::string_view name) const {
    auto it = std::find(tasks.begin(), tasks.end(), name);
    if (it == tasks.end()) throw DataError("unknown task: " + std::string(name));
    return static_cast<std::size_t>(it - tasks.begin());
}

bool is_valid_task_name(std::string_view name) {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
               c == '-' || c == '.';
    });
}

void validate(const Dataset& dataset) {
    if (dataset.tasks.empty()) throw DataError("dataset declares no tasks");
    for (const auto& t : dataset.tasks)
        if (!is_valid_task_name(t)) throw DataError("invalid task name: '" + t + "'");
    {
        auto sorted = dataset.tasks;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw DataError("duplicate task name");
    }
    for (std::size_t s = 0; s < dataset.sequences.size(); ++s) {
        const auto& rec = dataset.sequences[s];
        const std::string where = "sequence " + std::to_string(s);
        const std::size_t n = rec.length * kAlphabetSize;
        if (rec.length == 0) throw DataError(where + ": zero length");
        if (rec.onehot.size() != n) throw DataError(where + ": one-hot length mismatch");
        if (rec.tasks.size() != dataset.tasks.size()) throw DataError(where + ": task count mismatch");
        for (std::size_t i = 0; i < rec.length; ++i) {
            int ones = 0;
            for (std::size_t b = 0; b < kAlphabetSize; ++b) {
                const float v = rec.onehot[i * kAlphabetSize + b];
                if (v == 1.0f) {
                    ++ones;
                } else if (v != 0.0f) {
                    ones = -1;
                    break;
                }
            }
            if (ones != 1)
                throw DataError(where + ": one-hot row " + std::to_string(i) + " does not sum to 1");
        }
        for (std::size_t t = 0; t < rec.tasks.size(); ++t) {
            const auto& tt = rec.tasks[t];
            if (tt.contrib.size() != n || tt.hyp.size() != n)
                throw DataError(where + ": length mismatch in task " + dataset.tasks[t]);
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(tt.contrib[i]) || !std::isfinite(tt.hyp[i]))
                    throw DataError(where + ": non-finite score in task " + dataset.tasks[t]);
                if (rec.onehot[i] == 0.0f && tt.contrib[i] != 0.0f)
                    throw DataError(where + ": contribution off the present base at row " +
                                    std::to_string(i / kAlphabetSize) + " in task " + dataset.tasks[t]);
            }
        }
    }
    for (const auto& [task, tracks] : dataset.nulls) {
        if (std::find(dataset.tasks.begin(), dataset.tasks.end(), task) == dataset.tasks.end())
            throw DataError("null tracks for unknown task: " + task);
        for (const auto& tr : tracks) {
            if (tr.empty()) throw DataError("empty null track for task " + task);
            for (float v : tr)
                if (!std::isfinite(v)) throw DataError("non-finite null score for task " + task);
        }
    }
}

Dataset load_dataset(const fs::path& dir) {
    const auto manifest = read_json(dir / "manifest.json");
    Dataset ds;
    std::vector<std::size_t> lengths;
    try {
        ds.tasks = manifest.at("tasks").get<std::vector<std::string>>();
        lengths = manifest.at("sequence_lengths").get<std::vector<std::size_t>>();
        const auto num = manifest.at("num_sequences").get<std::size_t>();
        if (num != lengths.size()) throw DataError("manifest: num_sequences does not match sequence_lengths");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("manifest.json: ") + e.what());
    }
    for (const auto& t : ds.tasks)
        if (!is_valid_task_name(t)) throw DataError("invalid task name: '" + t + "'");

    const std::size_t total = std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
    auto onehot = split(read_floats(dir / "onehot.bin", total * kAlphabetSize), lengths, kAlphabetSize);
    std::vector<std::vector<std::vector<float>>> contrib, hyp;
    for (const auto& t : ds.tasks) {
        contrib.push_back(split(read_floats(dir / ("contrib_" + t + ".bin"), total * kAlphabetSize), lengths,
                                kAlphabetSize));
        hyp.push_back(
            split(read_floats(dir / ("hyp_" + t + ".bin"), total * kAlphabetSize), lengths, kAlphabetSize));
    }
    ds.sequences.resize(lengths.size());
    for (std::size_t s = 0; s < lengths.size(); ++s) {
        auto& rec = ds.sequences[s];
        rec.length = lengths[s];
        rec.onehot = std::move(onehot[s]);
        rec.tasks.resize(ds.tasks.size());
        for (std::size_t t = 0; t < ds.tasks.size(); ++t) {
            rec.tasks[t].contrib = std::move(contrib[t][s]);
            rec.tasks[t].hyp = std::move(hyp[t][s]);
        }
    }

    if (fs::exists(dir / "null_manifest.json")) {
        const auto nm = read_json(dir / "null_manifest.json");
        try {
            for (const auto& [task, entry] : nm.at("tasks").items()) {
                auto track_lengths = entry.at("track_lengths").get<std::vector<std::size_t>>();
                const std::size_t n = std::accumulate(track_lengths.begin(), track_lengths.end(), std::size_t{0});
                ds.nulls[task] = split(read_floats(dir / ("null_" + task + ".bin"), n), track_lengths, 1);
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("null_manifest.json: ") + e.what());
        }
    }
    validate(ds);
    return ds;
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
    validate(dataset);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());

    ordered_json manifest;
    manifest["tasks"] = dataset.tasks;
    manifest["num_sequences"] = dataset.sequences.size();
    std::vector<std::size_t> lengths;
    for (const auto& rec : dataset.sequences) lengths.push_back(rec.length);
    manifest["sequence_lengths"] = lengths;
    write_json(dir / "manifest.json", manifest);

    std::vector<const std::vector<float>*> chunks;
    for (const auto& rec : dataset.sequences) chunks.push_back(&rec.onehot);
    write_floats(dir / "onehot.bin", chunks);
    for (std::size_t t = 0; t < dataset.tasks.size(); ++t) {
        chunks.clear();
        for (const auto& rec : dataset.sequences) chunks.push_back(&rec.tasks[t].contrib);
        write_floats(dir / ("contrib_" + dataset.tasks[t] + ".bin"), chunks);
        chunks.clear();
        for (const auto& rec : dataset.sequences) chunks.push_back(&rec.tasks[t].hyp);
        write_floats(dir / ("hyp_" + dataset.tasks[t] + ".bin"), chunks);
    }

    if (!dataset.nulls.empty()) {
        ordered_json nm;
        nm["tasks"] = ordered_json::object();
        for (const auto& [task, tracks] : dataset.nulls) {
            std::vector<std::size_t> track_lengths;
            chunks.clear();
            for (const auto& tr : tracks) {
                track_lengths.push_back(tr.size());
                chunks.push_back(&tr);
            }
            nm["tasks"][task]["track_lengths"] = track_lengths;
            write_floats(dir / ("null_" + task + ".bin"), chunks);
        }
        write_json(dir / "null_manifest.json", nm);
    }
}

Matrix track_slice(const std::vector<float>& track, std::size_t begin, std::size_t end) {
    if (begin > end || end * kAlphabetSize > track.size()) throw std::out_of_range("track_slice: bad range");
    Matrix out(end - begin, kAlphabetSize);
    for (std::size_t r = begin; r < end; ++r)
        for (std::size_t b = 0; b < kAlphabetSize; ++b) out(r - begin, b) = track[r * kAlphabetSize + b];
    return out;
}

std::vector<double> per_position_sums(const std::vector<float>& track) {
    std::vector<double> out(track.size() / kAlphabetSize, 0.0);
    for (std::size_t r = 0; r < out.size(); ++r)
        for (std::size_t b = 0; b < kAlphabetSize; ++b) out[r] += track[r * kAlphabetSize + b];
    return out;
}

}  // namespace modisco
