#include "modisco/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "modisco/coarse_affinity.hpp"
#include "modisco/common.hpp"
#include "modisco/community.hpp"
#include "modisco/density.hpp"
#include "modisco/fine_affinity.hpp"
#include "modisco/postprocess.hpp"

namespace modisco {

namespace {

// Runs fn, tagging unexpected failures with the stage name.
template <class F>
auto stage(const std::string& name, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const DataError&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

void log_to(RunLog* log, std::string stage_name, std::string scope,
            std::vector<std::pair<std::string, double>> values) {
    if (log) log->add(std::move(stage_name), std::move(scope), std::move(values));
}

std::vector<double> task_windows(const Dataset& ds, std::size_t task, std::size_t w) {
    std::vector<double> out;
    for (const auto& rec : ds.sequences) {
        if (rec.length < w) continue;
        const auto pp = per_position_sums(rec.tasks[task].contrib);
        const auto sums = window_sums(std::span<const double>(pp), w);
        out.insert(out.end(), sums.begin(), sums.end());
    }
    return out;
}

std::vector<double> null_windows(const Dataset& ds, const std::string& task, std::size_t w) {
    std::vector<double> out;
    auto it = ds.nulls.find(task);
    if (it == ds.nulls.end()) return out;
    for (const auto& tr : it->second) {
        if (tr.size() < w) continue;
        const std::vector<double> pp(tr.begin(), tr.end());
        const auto sums = window_sums(std::span<const double>(pp), w);
        out.insert(out.end(), sums.begin(), sums.end());
    }
    return out;
}

double fine_value(const SparseRows& fine, std::size_t i, std::size_t j) {
    const auto& row = fine.rows[i];
    auto it = std::lower_bound(row.begin(), row.end(), j, [](const auto& e, std::size_t c) { return e.first < c; });
    return it != row.end() && it->first == j ? it->second : 0.0;
}

}  // namespace

void RunLog::add(std::string stage_name, std::string scope, std::vector<std::pair<std::string, double>> values) {
    entries.push_back({std::move(stage_name), std::move(scope), std::move(values)});
}

std::optional<double> RunLog::find(const std::string& stage_name, const std::string& key,
                                   const std::string& scope) const {
    for (const auto& e : entries) {
        if (e.stage != stage_name || (!scope.empty() && e.scope != scope)) continue;
        for (const auto& [k, v] : e.values)
            if (k == key) return v;
    }
    return std::nullopt;
}

std::string RunLog::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        nlohmann::ordered_json ej;
        ej["stage"] = e.stage;
        if (!e.scope.empty()) ej["scope"] = e.scope;
        for (const auto& [k, v] : e.values) {
            if (std::isfinite(v)) ej[k] = v;
            else ej[k] = v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
        }
        j.push_back(ej);
    }
    return j.dump(2) + "\n";
}

SeqletPhaseResult find_seqlets(const Dataset& ds, const PipelineConfig& cfg, RunLog* log) {
    return stage("seqlets", [&] {
        SeqletPhaseResult res;
        const std::size_t w = cfg.sliding_window_size;
        const bool sep = cfg.separate_pos_neg_thresholds;
        std::vector<std::vector<Seqlet>> per_task;
        std::vector<WindowPercentile> pct;
        for (std::size_t t = 0; t < ds.tasks.size(); ++t) {
            const auto windows = task_windows(ds, t, w);
            if (windows.empty()) throw DataError("no sequence is long enough for sliding_window_size");
            std::vector<double> null;
            const bool have_null = ds.nulls.count(ds.tasks[t]) > 0;
            std::string null_kind;
            if (cfg.null_model == "empirical" || (cfg.null_model == "auto" && have_null)) {
                if (!have_null) throw DataError("null_model=empirical but no null tracks for task " + ds.tasks[t]);
                auto scores = null_windows(ds, ds.tasks[t], w);
                if (scores.empty()) throw DataError("null tracks for task " + ds.tasks[t] + " are shorter than the window");
                const std::size_t n = scores.size();
                null = sample_null(EmpiricalNull{std::move(scores)}, n, derive_seed(cfg.master_seed, "null/" + ds.tasks[t]));
                null_kind = "empirical";
            } else {
                LaplaceNull lap;
                try {
                    lap = fit_laplace_null(windows);
                } catch (const std::invalid_argument&) {
                    // Degenerate scores (e.g. all zero): no window can be significant.
                    log_to(log, "thresholds", ds.tasks[t],
                           {{"num_windows", static_cast<double>(windows.size())}, {"degenerate_null", 1.0},
                            {"num_seqlets", 0.0}});
                    ThresholdPair none;
                    none.pos_threshold = std::numeric_limits<double>::infinity();
                    none.neg_threshold = -none.pos_threshold;
                    none.pos_unreachable = none.neg_unreachable = true;
                    pct.emplace_back(windows, sep);
                    set_cdf_cutoffs(none, pct.back());
                    res.thresholds.push_back(none);
                    per_task.emplace_back();
                    continue;
                }
                null = sample_null(lap, windows.size(), derive_seed(cfg.master_seed, "null/" + ds.tasks[t]));
                null_kind = "laplace";
                log_to(log, "laplace_null", ds.tasks[t],
                       {{"mode", lap.mode}, {"lambda_pos", lap.lambda_pos}, {"lambda_neg", lap.lambda_neg}});
            }
            ThresholdPair thr = fdr_thresholds(windows, null, cfg.target_fdr);
            const double fdr_frac = passing_fraction(windows, thr);
            thr = adjust_thresholds_by_frac(windows, thr, cfg.min_passing_windows_frac, cfg.max_passing_windows_frac,
                                            sep);
            pct.emplace_back(windows, sep);
            set_cdf_cutoffs(thr, pct.back());
            auto seqlets = extract_seqlets_one_task(ds, t, thr, w, cfg.flank_size);
            for (auto& s : seqlets) s.transformed_score = pct.back()(s.score);
            log_to(log, "thresholds", ds.tasks[t],
                   {{"num_windows", static_cast<double>(windows.size())},
                    {"empirical_null", null_kind == "empirical" ? 1.0 : 0.0},
                    {"fdr_passing_frac", fdr_frac},
                    {"pos_threshold", thr.pos_threshold},
                    {"neg_threshold", thr.neg_threshold},
                    {"passing_frac", passing_fraction(windows, thr)},
                    {"pos_cdf_cutoff", thr.pos_cdf_cutoff},
                    {"neg_cdf_cutoff", thr.neg_cdf_cutoff},
                    {"num_seqlets", static_cast<double>(seqlets.size())}});
            res.thresholds.push_back(thr);
            per_task.push_back(std::move(seqlets));
        }
        res.seqlets = union_seqlets(per_task, cfg.overlap_portion);
        res.strong_threshold = 1.0;
        for (const auto& t : res.thresholds)
            res.strong_threshold = std::min({res.strong_threshold, t.pos_cdf_cutoff, t.neg_cdf_cutoff});
        res.transformed.resize(res.seqlets.size());
        for (std::size_t i = 0; i < res.seqlets.size(); ++i) {
            res.transformed[i].resize(ds.tasks.size());
            for (std::size_t t = 0; t < ds.tasks.size(); ++t)
                res.transformed[i][t] = pct[t](central_contribution(res.seqlets[i], t, w));
        }
        log_to(log, "union", "",
               {{"num_seqlets", static_cast<double>(res.seqlets.size())}, {"strong_threshold", res.strong_threshold}});
        return res;
    });
}

std::vector<Motif> cluster_and_aggregate(const std::vector<Seqlet>& seqlets, const ClusterContext& ctx,
                                         std::uint64_t seed, const std::vector<std::size_t>* init_labels) {
    const PipelineConfig& cfg = *ctx.cfg;
    const std::size_t n = seqlets.size();
    if (n == 0) return {};

    std::vector<std::size_t> nodes;  // seqlet index of every graph node
    std::vector<std::size_t> labels;
    if (n == 1) {
        nodes = {0};
        labels = {0};
    } else {
        const GappedKmerSpec spec{cfg.kmer_len, cfg.max_gapped_positions, cfg.max_mismatches};
        const auto coarse = stage("coarse_affinity", [&] {
            return coarse_affmat_and_neighbors(seqlets, spec, ctx.pattern, cfg.nearest_neighbors_to_compute,
                                               cfg.revcomp, false, ctx.workers);
        });
        std::vector<Matrix> feats(n);
        for (std::size_t i = 0; i < n; ++i) feats[i] = build_feature_matrix(seqlets[i], ctx.relevant_tasks);
        const auto fine = stage("fine_affinity", [&] {
            return fine_affmat(feats, coarse.neighbors, cfg.min_overlap_while_sliding, cfg.revcomp, ctx.workers);
        });

        std::vector<std::vector<double>> fine_rows(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j : coarse.neighbors[i]) fine_rows[i].push_back(fine_value(fine, i, j));
        const auto retained = noise_filter(coarse.neighbor_affinity, fine_rows, cfg.affmat_correlation_threshold);

        std::vector<std::size_t> pos(n, kNoLabel);
        for (std::size_t k = 0; k < retained.size(); ++k) pos[retained[k]] = k;
        // Nodes without any positive affinity inside the retained set are isolated.
        for (std::size_t i : retained) {
            bool any = false;
            for (const auto& [j, a] : fine.rows[i])
                if (pos[j] != kNoLabel && j != i && a > 0.0) any = true;
            if (any) nodes.push_back(i);
        }
        std::fill(pos.begin(), pos.end(), kNoLabel);
        for (std::size_t k = 0; k < nodes.size(); ++k) pos[nodes[k]] = k;
        log_to(ctx.log, "noise_filter", ctx.scope,
               {{"num_seqlets", static_cast<double>(n)},
                {"retained", static_cast<double>(retained.size())},
                {"isolated", static_cast<double>(retained.size() - nodes.size())}});
        if (nodes.empty()) return {};

        if (nodes.size() == 1) {
            labels = {0};
        } else {
            SparseRows dist(nodes.size());
            for (std::size_t k = 0; k < nodes.size(); ++k)
                for (const auto& [j, a] : fine.rows[nodes[k]])
                    if (pos[j] != kNoLabel && j != nodes[k]) dist.rows[k].emplace_back(pos[j], affinity_to_distance(a));
            const auto joint = stage("density", [&] {
                const auto cond = conditional_probs(dist, cfg.perplexity, ctx.workers);
                std::size_t boundary = 0;
                for (const auto& b : cond.betas) boundary += b.boundary ? 1 : 0;
                log_to(ctx.log, "density", ctx.scope,
                       {{"nodes", static_cast<double>(nodes.size())}, {"boundary_rows", static_cast<double>(boundary)}});
                return symmetrize(cond.probs);
            });
            const auto clusters = stage("clustering", [&] {
                if (cfg.use_louvain)
                    return louvain_consensus_cluster(joint, cfg.louvain_membership_average_n_runs, cfg.louvain_patience,
                                                     seed);
                LeidenOptions lo;
                lo.theta = cfg.leiden_theta;
                if (init_labels) {
                    std::vector<std::size_t> init(nodes.size());
                    std::size_t fresh = 0;
                    for (std::size_t l : *init_labels)
                        if (l != kNoLabel) fresh = std::max(fresh, l + 1);
                    for (std::size_t k = 0; k < nodes.size(); ++k) {
                        const std::size_t l = (*init_labels)[nodes[k]];
                        init[k] = l != kNoLabel ? l : fresh++;
                    }
                    lo.init = init;
                }
                return leiden_multi_seed(joint, cfg.leiden_n_seeds, seed, lo, ctx.workers);
            });
            labels = clusters.labels;
            log_to(ctx.log, "clustering", ctx.scope,
                   {{"modularity", clusters.modularity},
                    {"clusters", static_cast<double>(*std::max_element(labels.begin(), labels.end()) + 1)}});
        }
    }

    const std::size_t n_clusters = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<Seqlet>> groups(n_clusters);
    for (std::size_t k = 0; k < nodes.size(); ++k) groups[labels[k]].push_back(seqlets[nodes[k]]);

    std::vector<Motif> motifs;
    std::size_t dropped_short = 0, flagged = 0;
    stage("aggregation", [&] {
        for (const auto& g : groups) {
            Motif m = aggregate_cluster(g, ctx.relevant_tasks, cfg.min_overlap_while_sliding, cfg.revcomp,
                                        cfg.sliding_window_size);
            m = trim_to_support(m, cfg.frac_support_to_trim_to, cfg.min_num_to_trim_to);
            m = expand_to_fill(m, *ctx.dataset);
            if (m.members.empty() || m.length < cfg.trim_to_window_size) {
                ++dropped_short;
                continue;
            }
            m = center_and_standardize(m, *ctx.dataset, ctx.relevant_tasks, cfg.trim_to_window_size,
                                       cfg.initial_flank_to_add);
            if (m.members.empty()) {
                ++dropped_short;
                continue;
            }
            flagged += m.flagged ? 1 : 0;
            motifs.push_back(std::move(m));
        }
        return 0;
    });
    const std::size_t before_sign = motifs.size();
    motifs = sign_consistency_filter(std::move(motifs), ctx.pattern);
    std::stable_sort(motifs.begin(), motifs.end(),
                     [](const Motif& a, const Motif& b) { return a.members.size() > b.members.size(); });
    log_to(ctx.log, "aggregation", ctx.scope,
           {{"clusters", static_cast<double>(n_clusters)},
            {"dropped_empty", static_cast<double>(dropped_short)},
            {"trim_flagged", static_cast<double>(flagged)},
            {"sign_dropped", static_cast<double>(before_sign - motifs.size())},
            {"motifs", static_cast<double>(motifs.size())}});
    return motifs;
}

std::vector<Motif> postprocess_motifs(std::vector<Motif> motifs, const ClusterContext& ctx, std::uint64_t seed) {
    const PipelineConfig& cfg = *ctx.cfg;
    std::vector<Motif> split;
    stage("spurious_merge", [&] {
        SpuriousMergeOptions so;
        so.min_size = cfg.min_size_for_spurious_merge_detection;
        so.corr_threshold = cfg.threshold_for_spurious_merge_detection;
        so.perplexity = cfg.perplexity;
        so.patience = cfg.dicluster_patience;
        so.min_overlap = cfg.spurious_merge_min_overlap;
        so.revcomp = cfg.revcomp;
        for (std::size_t i = 0; i < motifs.size(); ++i) {
            auto parts = detect_spurious_merge(motifs[i], ctx.relevant_tasks, so, run_seed(seed, i));
            split.insert(split.end(), std::make_move_iterator(parts.begin()), std::make_move_iterator(parts.end()));
        }
        return 0;
    });
    log_to(ctx.log, "spurious_merge", ctx.scope,
           {{"motifs_in", static_cast<double>(motifs.size())}, {"motifs_out", static_cast<double>(split.size())}});

    MotifMergeContext mctx;
    mctx.dataset = ctx.dataset;
    mctx.relevant_tasks = ctx.relevant_tasks;
    mctx.min_overlap = cfg.min_overlap_while_sliding;
    mctx.revcomp = cfg.revcomp;
    mctx.window = cfg.trim_to_window_size;
    mctx.flank = cfg.initial_flank_to_add;
    auto merged = stage("merge", [&] { return iterative_merge_motifs(std::move(split), cfg.merge_criteria, mctx); });
    log_to(ctx.log, "merge", ctx.scope, {{"motifs_out", static_cast<double>(merged.size())}});

    auto reassigned = stage("reassign", [&] {
        return reassign_small_clusters(merged, cfg.final_min_cluster_size, cfg.min_similarity_for_seqlet_assignment,
                                       mctx);
    });
    log_to(ctx.log, "reassign", ctx.scope,
           {{"motifs_out", static_cast<double>(reassigned.motifs.size())},
            {"reassigned", static_cast<double>(reassigned.reassigned)},
            {"dropped", static_cast<double>(reassigned.dropped)},
            {"flagged", reassigned.flagged ? 1.0 : 0.0}});

    auto out = stage("final_flank", [&] {
        return final_flank_expand(reassigned.motifs, cfg.final_flank_to_add, *ctx.dataset);
    });
    std::stable_sort(out.begin(), out.end(),
                     [](const Motif& a, const Motif& b) { return a.members.size() > b.members.size(); });
    log_to(ctx.log, "final_flank", ctx.scope, {{"motifs_out", static_cast<double>(out.size())}});
    return out;
}

PipelineOutput run_pipeline(const Dataset& dataset, const PipelineConfig& cfg, const PipelineHooks& hooks) {
    validate_config(cfg);
    validate(dataset);
    PipelineOutput out;
    out.results.tasks = dataset.tasks;
    const std::size_t workers = resolve_workers(cfg.workers);

    const auto phase1 = find_seqlets(dataset, cfg, &out.log);
    if (phase1.seqlets.empty()) return out;

    const auto metaclusters = stage("metaclustering", [&] {
        MetaclusterOptions mo;
        mo.strong_threshold = phase1.strong_threshold;
        mo.weak_threshold = cfg.weak_threshold;
        mo.min_size = cfg.min_metacluster_size;
        mo.min_size_frac = cfg.min_metacluster_size_frac;
        mo.max_per_metacluster = cfg.max_seqlets_per_metacluster;
        mo.max_tasks = cfg.max_tasks;
        return metacluster_assign(phase1.transformed, mo);
    });

    std::size_t mc_index = 0;
    for (const auto& mc : metaclusters) {
        const auto relevant = mc.relevant_tasks();
        if (relevant.empty()) {
            log_to(&out.log, "metaclustering", "all-zero pattern",
                   {{"dropped_seqlets", static_cast<double>(mc.members.size())}});
            continue;
        }
        const std::string scope = "metacluster " + std::to_string(mc_index);
        std::vector<Seqlet> seqlets;
        for (std::size_t i : mc.members) seqlets.push_back(phase1.seqlets[i]);
        std::vector<double> pattern_values(mc.pattern.begin(), mc.pattern.end());
        std::vector<std::pair<std::string, double>> mc_values{{"num_seqlets", static_cast<double>(seqlets.size())}};
        for (std::size_t t = 0; t < mc.pattern.size(); ++t)
            mc_values.emplace_back("pattern_" + dataset.tasks[t], mc.pattern[t]);
        log_to(&out.log, "metaclustering", scope, std::move(mc_values));

        ClusterContext ctx;
        ctx.dataset = &dataset;
        ctx.cfg = &cfg;
        ctx.pattern = mc.pattern;
        ctx.relevant_tasks = relevant;
        ctx.workers = workers;
        ctx.scope = scope;
        ctx.log = &out.log;

        std::vector<std::size_t> init;
        if (hooks.init_labels) {
            init.assign(seqlets.size(), kNoLabel);
            for (std::size_t k = 0; k < mc.members.size(); ++k) {
                auto it = hooks.init_labels->find(mc.members[k]);
                if (it != hooks.init_labels->end()) init[k] = it->second;
            }
        }
        const std::string base = "metacluster/" + std::to_string(mc_index);
        auto motifs = cluster_and_aggregate(seqlets, ctx, derive_seed(cfg.master_seed, base + "/round/0"),
                                            hooks.init_labels ? &init : nullptr);
        std::size_t round = 0;
        motifs = stage("recluster", [&] {
            return recluster_rounds(std::move(motifs), cfg.extra_cluster_rounds, [&](const std::vector<Seqlet>& pooled) {
                ++round;
                return cluster_and_aggregate(pooled, ctx, derive_seed(cfg.master_seed, base + "/round/" + std::to_string(round)));
            });
        });
        motifs = postprocess_motifs(std::move(motifs), ctx, derive_seed(cfg.master_seed, base + "/postprocess"));

        MetaclusterResult mr;
        mr.pattern = mc.pattern;
        mr.num_seqlets = seqlets.size();
        for (std::size_t k = 0; k < motifs.size(); ++k)
            mr.motifs.push_back(to_motif_result(motifs[k], relevant,
                                                "metacluster_" + std::to_string(mc_index) + "/motif_" + std::to_string(k)));
        out.results.metaclusters.push_back(std::move(mr));
        out.motifs.push_back(std::move(motifs));
        ++mc_index;
    }
    return out;
}

std::map<std::size_t, std::size_t> load_init_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read init labels " + path.string());
    std::map<std::size_t, std::size_t> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        long long idx = -1, label = -1;
        if (!(row >> idx >> label)) {
            if (lineno == 1) continue;  // header
            throw DataError("init labels line " + std::to_string(lineno) + ": expected two integers");
        }
        if (idx < 0 || label < 0) throw DataError("init labels line " + std::to_string(lineno) + ": negative value");
        out[static_cast<std::size_t>(idx)] = static_cast<std::size_t>(label);
    }
    return out;
}

}  // namespace modisco
