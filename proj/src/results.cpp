#include "modisco/results.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "modisco/common.hpp"

namespace modisco {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string tsv_name(std::size_t mc, std::size_t motif) {
    return "metacluster_" + std::to_string(mc) + "_motif_" + std::to_string(motif) + ".tsv";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing file: " + path.filename().string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string pattern_string(const ActivityPattern& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(p[i]);
    }
    return s;
}

}  // namespace

MotifResult to_motif_result(const Motif& motif, const std::vector<std::size_t>& relevant_tasks, std::string name) {
    MotifResult r;
    r.name = std::move(name);
    r.length = motif.length;
    for (const auto& m : motif.members) r.seqlets.push_back({m.seqlet.coord, m.offset});
    r.sequence = motif.onehot;
    for (std::size_t t : relevant_tasks) {
        r.contrib.push_back(motif.contrib.at(t));
        r.hyp.push_back(motif.hyp.at(t));
    }
    return r;
}

std::vector<std::string> relevant_task_names(const ResultsBundle& bundle, const MetaclusterResult& mc) {
    std::vector<std::string> out;
    for (std::size_t t = 0; t < mc.pattern.size(); ++t)
        if (mc.pattern[t] != 0) out.push_back(bundle.tasks.at(t));
    return out;
}

std::string motif_tsv(const MotifResult& motif, const std::vector<std::string>& names) {
    std::string out = "pos\tseq_A\tseq_C\tseq_G\tseq_T";
    for (const auto& t : names) {
        for (const char* b : {"A", "C", "G", "T"}) out += "\t" + t + "_contrib_" + b;
        for (const char* b : {"A", "C", "G", "T"}) out += "\t" + t + "_hyp_" + b;
    }
    out += '\n';
    for (std::size_t r = 0; r < motif.length; ++r) {
        out += std::to_string(r);
        for (double v : motif.sequence.row(r)) out += "\t" + fmt(v);
        for (std::size_t k = 0; k < names.size(); ++k) {
            for (double v : motif.contrib[k].row(r)) out += "\t" + fmt(v);
            for (double v : motif.hyp[k].row(r)) out += "\t" + fmt(v);
        }
        out += '\n';
    }
    return out;
}

void save_results(const ResultsBundle& results, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());

    ordered_json j;
    j["tasks"] = results.tasks;
    j["metaclusters"] = ordered_json::array();
    std::string summary = "metacluster\tpattern\tnum_seqlets\tnum_motifs\n";
    for (std::size_t i = 0; i < results.metaclusters.size(); ++i) {
        const auto& mc = results.metaclusters[i];
        const auto names = relevant_task_names(results, mc);
        ordered_json mj;
        mj["pattern"] = mc.pattern;
        mj["relevant_tasks"] = names;
        mj["num_seqlets"] = mc.num_seqlets;
        mj["motifs"] = ordered_json::array();
        for (std::size_t k = 0; k < mc.motifs.size(); ++k) {
            const auto& m = mc.motifs[k];
            ordered_json pj;
            pj["name"] = m.name;
            pj["length"] = m.length;
            pj["tsv"] = tsv_name(i, k);
            pj["num_seqlets"] = m.seqlets.size();
            pj["seqlets"] = ordered_json::array();
            for (const auto& s : m.seqlets)
                pj["seqlets"].push_back({{"sequence_index", s.coord.sequence_index},
                                         {"start", s.coord.start},
                                         {"end", s.coord.end},
                                         {"revcomp", s.coord.revcomp},
                                         {"offset", s.offset}});
            mj["motifs"].push_back(pj);
            write_text(dir / tsv_name(i, k), motif_tsv(m, names));
        }
        j["metaclusters"].push_back(mj);
        summary += std::to_string(i) + "\t" + pattern_string(mc.pattern) + "\t" + std::to_string(mc.num_seqlets) +
                   "\t" + std::to_string(mc.motifs.size()) + "\n";
    }
    write_text(dir / "results.json", j.dump(2) + "\n");
    write_text(dir / "metaclusters.tsv", summary);
}

ResultsBundle load_results(const fs::path& dir) {
    ResultsBundle out;
    ordered_json j;
    try {
        j = ordered_json::parse(read_text(dir / "results.json"));
        out.tasks = j.at("tasks").get<std::vector<std::string>>();
        for (const auto& mj : j.at("metaclusters")) {
            MetaclusterResult mc;
            mc.pattern = mj.at("pattern").get<ActivityPattern>();
            mc.num_seqlets = mj.at("num_seqlets").get<std::size_t>();
            const std::size_t n_rel = mj.at("relevant_tasks").size();
            for (const auto& pj : mj.at("motifs")) {
                MotifResult m;
                m.name = pj.at("name").get<std::string>();
                m.length = pj.at("length").get<std::size_t>();
                for (const auto& sj : pj.at("seqlets")) {
                    SeqletPlacement sp;
                    sp.coord.sequence_index = sj.at("sequence_index").get<std::size_t>();
                    sp.coord.start = sj.at("start").get<long>();
                    sp.coord.end = sj.at("end").get<long>();
                    sp.coord.revcomp = sj.at("revcomp").get<bool>();
                    sp.offset = sj.at("offset").get<long>();
                    m.seqlets.push_back(sp);
                }
                m.sequence = Matrix(m.length, kAlphabetSize);
                m.contrib.assign(n_rel, Matrix(m.length, kAlphabetSize));
                m.hyp.assign(n_rel, Matrix(m.length, kAlphabetSize));
                std::istringstream tsv(read_text(dir / pj.at("tsv").get<std::string>()));
                std::string line;
                std::getline(tsv, line);  // header
                for (std::size_t r = 0; r < m.length; ++r) {
                    if (!std::getline(tsv, line)) throw DataError("truncated motif table for " + m.name);
                    std::istringstream row(line);
                    std::string cell;
                    std::getline(row, cell, '\t');
                    auto next = [&]() {
                        if (!std::getline(row, cell, '\t')) throw DataError("short row in motif table " + m.name);
                        return std::strtod(cell.c_str(), nullptr);
                    };
                    for (std::size_t b = 0; b < kAlphabetSize; ++b) m.sequence(r, b) = next();
                    for (std::size_t k = 0; k < n_rel; ++k) {
                        for (std::size_t b = 0; b < kAlphabetSize; ++b) m.contrib[k](r, b) = next();
                        for (std::size_t b = 0; b < kAlphabetSize; ++b) m.hyp[k](r, b) = next();
                    }
                }
                mc.motifs.push_back(std::move(m));
            }
            out.metaclusters.push_back(std::move(mc));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("results.json: ") + e.what());
    }
    return out;
}

}  // namespace modisco
