#include "modisco/seqlets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace modisco {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SideThreshold {
    double magnitude = kInf;
    bool unreachable = true;
};

// Threshold on one side, all values given as positive magnitudes.
SideThreshold side_threshold(std::vector<double> orig, std::vector<double> null, double target_fdr) {
    SideThreshold out;
    if (orig.empty()) return out;
    const double null_weight = null.empty() ? 0.0 : static_cast<double>(orig.size()) / null.size();

    struct Point {
        double x;
        double label;
        double w;
    };
    std::vector<Point> pts;
    pts.reserve(orig.size() + null.size());
    for (double v : orig) pts.push_back({v, 1.0, 1.0});
    for (double v : null) pts.push_back({v, 0.0, null_weight});
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a.x < b.x || (a.x == b.x && a.label < b.label);
    });
    std::vector<double> x(pts.size()), y(pts.size()), w(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        x[i] = pts[i].x;
        y[i] = pts[i].label;
        w[i] = pts[i].w;
    }
    const auto fit = isotonic_regression(x, y, w);
    // The fit is nondecreasing in x, so the first qualifying original point
    // is the smallest-magnitude threshold.
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].label == 1.0 && 1.0 - fit[i] <= target_fdr) {
            out.magnitude = pts[i].x;
            out.unreachable = false;
            break;
        }
    }
    return out;
}

// Magnitude threshold so that exactly k of the (descending) magnitudes pass.
double magnitude_for_count(std::vector<double> magnitudes, std::size_t k) {
    if (k == 0 || magnitudes.empty()) return kInf;
    k = std::min(k, magnitudes.size());
    std::nth_element(magnitudes.begin(), magnitudes.begin() + static_cast<std::ptrdiff_t>(k - 1), magnitudes.end(),
                     std::greater<>());
    return magnitudes[k - 1];
}

std::size_t target_count(double current, double min_frac, double max_frac, std::size_t n) {
    const double bound = current < min_frac ? min_frac : max_frac;
    const double raw = bound * static_cast<double>(n);
    return current < min_frac ? static_cast<std::size_t>(std::ceil(raw - 1e-9))
                              : static_cast<std::size_t>(std::floor(raw + 1e-9));
}

}  // namespace

std::optional<Seqlet> slice_seqlet(const Dataset& dataset, const SeqletCoord& coord) {
    if (coord.sequence_index >= dataset.sequences.size()) return std::nullopt;
    const auto& rec = dataset.sequences[coord.sequence_index];
    if (coord.start < 0 || coord.end > static_cast<long>(rec.length) || coord.start >= coord.end)
        return std::nullopt;
    const auto b = static_cast<std::size_t>(coord.start);
    const auto e = static_cast<std::size_t>(coord.end);
    Seqlet s;
    s.coord = coord;
    s.onehot = track_slice(rec.onehot, b, e);
    for (const auto& tt : rec.tasks) {
        s.contrib.push_back(track_slice(tt.contrib, b, e));
        s.hyp.push_back(track_slice(tt.hyp, b, e));
    }
    if (coord.revcomp) {
        s.onehot = reverse_complement(s.onehot);
        for (auto& m : s.contrib) m = reverse_complement(m);
        for (auto& m : s.hyp) m = reverse_complement(m);
    }
    return s;
}

Seqlet reverse_complement(const Seqlet& s) {
    Seqlet out = s;
    out.coord.revcomp = !s.coord.revcomp;
    out.onehot = reverse_complement(s.onehot);
    for (auto& m : out.contrib) m = reverse_complement(m);
    for (auto& m : out.hyp) m = reverse_complement(m);
    return out;
}

std::vector<double> window_sums(std::span<const double> per_position, std::size_t w) {
    if (w == 0 || w > per_position.size())
        throw std::invalid_argument("window_sums: window larger than track");
    std::vector<double> prefix(per_position.size() + 1, 0.0);
    for (std::size_t i = 0; i < per_position.size(); ++i) prefix[i + 1] = prefix[i] + per_position[i];
    std::vector<double> out(per_position.size() - w + 1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = prefix[i + w] - prefix[i];
    return out;
}

std::vector<double> window_sums(const Matrix& contrib, std::size_t w) {
    const auto rs = row_sums(contrib);
    return window_sums(std::span<const double>(rs), w);
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile of empty vector");
    std::sort(values.begin(), values.end());
    const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

LaplaceNull fit_laplace_null(std::span<const double> window_scores) {
    if (window_scores.empty()) throw std::invalid_argument("fit_laplace_null: no scores");
    std::vector<double> v(window_scores.begin(), window_scores.end());
    std::sort(v.begin(), v.end());
    auto pct = [&](double q) {
        const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };

    LaplaceNull out;
    const double p1 = pct(1.0);
    const double p99 = pct(99.0);
    const double width = (p99 - p1) / 100.0;
    if (width > 0.0) {
        std::vector<std::size_t> counts(100, 0);
        for (double x : v) {
            if (x < p1 || x > p99) continue;
            auto bin = static_cast<std::size_t>((x - p1) / width);
            counts[std::min<std::size_t>(bin, 99)]++;
        }
        const auto peak = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        out.mode = p1 + (static_cast<double>(peak) + 0.5) * width;
    } else {
        out.mode = p1;
    }

    std::vector<double> pos, neg;
    for (double x : v) {
        if (x > out.mode) pos.push_back(x - out.mode);
        else if (x < out.mode) neg.push_back(out.mode - x);
    }
    if (pos.empty() || neg.empty())
        throw std::invalid_argument("fit_laplace_null: need scores on both sides of the mode");

    auto steepest = [](std::vector<double>& side) {
        std::sort(side.begin(), side.end());
        double best = 0.0;
        for (int k = 1; k <= 19; ++k) {
            const double q = 0.05 * k;
            const double pos = q * static_cast<double>(side.size() - 1);
            const auto lo = static_cast<std::size_t>(std::floor(pos));
            const auto hi = std::min(lo + 1, side.size() - 1);
            const double xq = side[lo] + (pos - static_cast<double>(lo)) * (side[hi] - side[lo]);
            if (xq <= 0.0) continue;
            best = std::max(best, -std::log(1.0 - q) / xq);
        }
        if (best <= 0.0) throw std::invalid_argument("fit_laplace_null: degenerate side");
        return best;
    };
    out.lambda_pos = steepest(pos);
    out.lambda_neg = steepest(neg);
    out.pos_fraction = static_cast<double>(pos.size()) / static_cast<double>(pos.size() + neg.size());
    return out;
}

std::vector<double> sample_null(const NullModel& model, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    if (const auto* emp = std::get_if<EmpiricalNull>(&model)) {
        std::vector<double> out = emp->window_scores;
        if (n > out.size() && !emp->window_scores.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, emp->window_scores.size() - 1);
            while (out.size() < n) out.push_back(emp->window_scores[pick(rng)]);
        }
        return out;
    }
    const auto& lap = std::get<LaplaceNull>(model);
    const auto n_pos = static_cast<std::size_t>(std::llround(lap.pos_fraction * static_cast<double>(n)));
    std::exponential_distribution<double> pos_dist(lap.lambda_pos);
    std::exponential_distribution<double> neg_dist(lap.lambda_neg);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n_pos; ++i) out.push_back(lap.mode + pos_dist(rng));
    for (std::size_t i = n_pos; i < n; ++i) out.push_back(lap.mode - neg_dist(rng));
    return out;
}

std::vector<double> isotonic_regression(std::span<const double> x, std::span<const double> y,
                                        std::span<const double> weights) {
    if (x.size() != y.size() || x.size() != weights.size())
        throw std::invalid_argument("isotonic_regression: length mismatch");
    const std::size_t n = x.size();
    for (std::size_t i = 1; i < n; ++i)
        if (x[i] < x[i - 1]) throw std::invalid_argument("isotonic_regression: x must be nondecreasing");

    struct Block {
        double sum_wy;
        double sum_w;
        std::size_t begin;
        std::size_t end;
        double value() const { return sum_w > 0.0 ? sum_wy / sum_w : 0.0; }
    };
    std::vector<Block> stack;
    std::size_t i = 0;
    while (i < n) {
        // Ties in x form one initial block.
        Block b{0.0, 0.0, i, i};
        double sum_y = 0.0;
        while (b.end < n && x[b.end] == x[i]) {
            b.sum_wy += weights[b.end] * y[b.end];
            b.sum_w += weights[b.end];
            sum_y += y[b.end];
            ++b.end;
        }
        if (b.sum_w == 0.0) b.sum_wy = sum_y;  // zero-weight tie group keeps its own mean
        if (b.sum_w == 0.0) b.sum_w = 0.0;
        i = b.end;
        stack.push_back(b);
        while (stack.size() > 1 && stack[stack.size() - 2].value() > stack.back().value()) {
            Block top = stack.back();
            stack.pop_back();
            Block& prev = stack.back();
            prev.sum_wy += top.sum_wy;
            prev.sum_w += top.sum_w;
            prev.end = top.end;
        }
    }
    std::vector<double> out(n);
    for (const auto& b : stack)
        for (std::size_t k = b.begin; k < b.end; ++k) out[k] = b.value();
    return out;
}

double passing_fraction(std::span<const double> windows, const ThresholdPair& t) {
    if (windows.empty()) return 0.0;
    const auto n = std::count_if(windows.begin(), windows.end(), [&](double v) { return t.passes(v); });
    return static_cast<double>(n) / static_cast<double>(windows.size());
}

ThresholdPair fdr_thresholds(std::span<const double> orig_windows, std::span<const double> null_windows,
                             double target_fdr) {
    if (orig_windows.empty() || null_windows.empty())
        throw std::invalid_argument("fdr_thresholds: empty input");
    std::vector<double> orig_pos, orig_neg, null_pos, null_neg;
    for (double v : orig_windows) {
        if (v > 0) orig_pos.push_back(v);
        else if (v < 0) orig_neg.push_back(-v);
    }
    for (double v : null_windows) {
        if (v > 0) null_pos.push_back(v);
        else if (v < 0) null_neg.push_back(-v);
    }
    const auto pos = side_threshold(std::move(orig_pos), std::move(null_pos), target_fdr);
    const auto neg = side_threshold(std::move(orig_neg), std::move(null_neg), target_fdr);
    ThresholdPair t;
    t.pos_threshold = pos.magnitude;
    t.pos_unreachable = pos.unreachable;
    t.neg_threshold = -neg.magnitude;
    t.neg_unreachable = neg.unreachable;
    set_cdf_cutoffs(t, WindowPercentile(orig_windows, false));
    return t;
}

ThresholdPair adjust_thresholds_by_frac(std::span<const double> windows, ThresholdPair t, double min_frac,
                                        double max_frac, bool separate_pos_neg) {
    if (!(min_frac > 0.0 && min_frac <= max_frac && max_frac < 1.0))
        throw std::invalid_argument("adjust_thresholds_by_frac: need 0 < min_frac <= max_frac < 1");
    if (!separate_pos_neg) {
        const double cur = passing_fraction(windows, t);
        if (cur >= min_frac && cur <= max_frac) return t;
        std::vector<double> mags;
        mags.reserve(windows.size());
        for (double v : windows)
            if (v != 0.0) mags.push_back(std::fabs(v));
        const double thr = magnitude_for_count(mags, target_count(cur, min_frac, max_frac, windows.size()));
        t.pos_threshold = thr;
        t.neg_threshold = -thr;
        t.pos_unreachable = t.neg_unreachable = std::isinf(thr);
    } else {
        std::vector<double> pos, neg;
        for (double v : windows) {
            if (v > 0) pos.push_back(v);
            else if (v < 0) neg.push_back(-v);
        }
        auto adjust_side = [&](const std::vector<double>& mags, double thr, bool& unreachable) {
            if (mags.empty()) return thr;
            const auto passing = std::count_if(mags.begin(), mags.end(), [&](double m) { return m >= thr; });
            const double cur = static_cast<double>(passing) / static_cast<double>(mags.size());
            if (cur >= min_frac && cur <= max_frac) return thr;
            const double out = magnitude_for_count(mags, target_count(cur, min_frac, max_frac, mags.size()));
            unreachable = std::isinf(out);
            return out;
        };
        t.pos_threshold = adjust_side(pos, t.pos_threshold, t.pos_unreachable);
        t.neg_threshold = -adjust_side(neg, -t.neg_threshold, t.neg_unreachable);
    }
    set_cdf_cutoffs(t, WindowPercentile(windows, separate_pos_neg));
    return t;
}

WindowPercentile::WindowPercentile(std::span<const double> windows, bool separate_pos_neg)
    : separate_(separate_pos_neg) {
    for (double v : windows) {
        abs_all_.push_back(std::fabs(v));
        if (v > 0) pos_.push_back(v);
        else if (v < 0) neg_abs_.push_back(-v);
    }
    std::sort(abs_all_.begin(), abs_all_.end());
    std::sort(pos_.begin(), pos_.end());
    std::sort(neg_abs_.begin(), neg_abs_.end());
}

double WindowPercentile::operator()(double v) const {
    const double mag = std::fabs(v);
    const std::vector<double>& ref = !separate_ ? abs_all_ : (v > 0 ? pos_ : neg_abs_);
    if (v == 0.0 || ref.empty()) return 0.0;
    const auto count = std::upper_bound(ref.begin(), ref.end(), mag) - ref.begin();
    const double frac = static_cast<double>(count) / static_cast<double>(ref.size());
    return v > 0 ? frac : -frac;
}

double WindowPercentile::below(double v) const {
    const double mag = std::fabs(v);
    const std::vector<double>& ref = !separate_ ? abs_all_ : (v >= 0 ? pos_ : neg_abs_);
    if (ref.empty()) return 1.0;
    const auto count = std::lower_bound(ref.begin(), ref.end(), mag) - ref.begin();
    return static_cast<double>(count) / static_cast<double>(ref.size());
}

void set_cdf_cutoffs(ThresholdPair& t, const WindowPercentile& pct) {
    t.pos_cdf_cutoff = pct.below(t.pos_threshold);
    t.neg_cdf_cutoff = pct.below(t.neg_threshold);
}

std::vector<std::size_t> greedy_window_selection(std::span<const double> sums, const ThresholdPair& thresholds,
                                                 std::size_t window, std::size_t flank, std::size_t seq_len) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < sums.size(); ++i)
        if (thresholds.passes(sums[i])) candidates.push_back(i);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return std::fabs(sums[a]) > std::fabs(sums[b]); });

    const double span = static_cast<double>(window + 2 * flank);
    std::vector<char> suppressed(sums.size(), 0);
    std::vector<std::size_t> chosen;
    for (std::size_t i : candidates) {
        if (suppressed[i]) continue;
        // Expanded spans overlap by more than half iff |i - j| < span / 2.
        for (std::size_t j : candidates) {
            const double d = std::fabs(static_cast<double>(i) - static_cast<double>(j));
            if (d < span / 2.0) suppressed[j] = 1;
        }
        if (i >= flank && i + window + flank <= seq_len) chosen.push_back(i);
    }
    return chosen;
}

std::vector<Seqlet> extract_seqlets_one_task(const Dataset& dataset, std::size_t task,
                                             const ThresholdPair& thresholds, std::size_t window,
                                             std::size_t flank) {
    std::vector<Seqlet> out;
    for (std::size_t s = 0; s < dataset.sequences.size(); ++s) {
        const auto& rec = dataset.sequences[s];
        if (rec.length < window) continue;
        const auto pp = per_position_sums(rec.tasks[task].contrib);
        const auto sums = window_sums(std::span<const double>(pp), window);
        auto chosen = greedy_window_selection(sums, thresholds, window, flank, rec.length);
        std::sort(chosen.begin(), chosen.end());
        for (std::size_t i : chosen) {
            SeqletCoord c{s, static_cast<long>(i) - static_cast<long>(flank),
                          static_cast<long>(i + window + flank), false};
            auto sl = slice_seqlet(dataset, c);
            if (!sl) continue;
            sl->task = task;
            sl->score = sums[i];
            out.push_back(std::move(*sl));
        }
    }
    return out;
}

long overlap_length(const SeqletCoord& a, const SeqletCoord& b) {
    if (a.sequence_index != b.sequence_index) return 0;
    return std::max(0L, std::min(a.end, b.end) - std::max(a.start, b.start));
}

std::vector<Seqlet> union_seqlets(const std::vector<std::vector<Seqlet>>& per_task, double overlap_portion) {
    std::vector<const Seqlet*> all;
    for (const auto& lst : per_task)
        for (const auto& s : lst) all.push_back(&s);
    std::stable_sort(all.begin(), all.end(), [](const Seqlet* a, const Seqlet* b) {
        const double ta = std::fabs(a->transformed_score), tb = std::fabs(b->transformed_score);
        if (ta != tb) return ta > tb;
        if (a->task != b->task) return a->task < b->task;
        if (a->coord.sequence_index != b->coord.sequence_index)
            return a->coord.sequence_index < b->coord.sequence_index;
        return a->coord.start < b->coord.start;
    });
    std::vector<const Seqlet*> kept;
    for (const Seqlet* s : all) {
        const bool clash = std::any_of(kept.begin(), kept.end(), [&](const Seqlet* k) {
            const long ov = overlap_length(s->coord, k->coord);
            const long shorter = std::min(s->coord.length(), k->coord.length());
            return static_cast<double>(ov) > overlap_portion * static_cast<double>(shorter);
        });
        if (!clash) kept.push_back(s);
    }
    std::sort(kept.begin(), kept.end(), [](const Seqlet* a, const Seqlet* b) {
        if (a->coord.sequence_index != b->coord.sequence_index)
            return a->coord.sequence_index < b->coord.sequence_index;
        if (a->coord.start != b->coord.start) return a->coord.start < b->coord.start;
        if (a->coord.end != b->coord.end) return a->coord.end < b->coord.end;
        return a->task < b->task;
    });
    std::vector<Seqlet> out;
    out.reserve(kept.size());
    for (const Seqlet* s : kept) out.push_back(*s);
    return out;
}

}  // namespace modisco
