#include "modisco/metacluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "modisco/common.hpp"

namespace modisco {

std::vector<std::size_t> Metacluster::relevant_tasks() const {
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < pattern.size(); ++t)
        if (pattern[t] != 0) out.push_back(t);
    return out;
}

double central_contribution(const Seqlet& s, std::size_t task, std::size_t window) {
    const Matrix& c = s.contrib.at(task);
    if (c.rows() < window) throw std::invalid_argument("central_contribution: seqlet shorter than window");
    const std::size_t begin = (c.rows() - window) / 2;
    double total = 0.0;
    for (std::size_t r = begin; r < begin + window; ++r)
        for (double v : c.row(r)) total += v;
    return total;
}

std::vector<std::vector<double>> percentile_transform(const std::vector<std::vector<double>>& raw,
                                                      bool separate_pos_neg) {
    std::vector<std::vector<double>> out(raw.size());
    if (raw.empty()) return out;
    const std::size_t n_tasks = raw.front().size();
    for (auto& row : out) row.assign(n_tasks, 0.0);
    std::vector<double> column(raw.size());
    for (std::size_t t = 0; t < n_tasks; ++t) {
        for (std::size_t i = 0; i < raw.size(); ++i) column[i] = raw[i].at(t);
        const WindowPercentile pct(column, separate_pos_neg);
        for (std::size_t i = 0; i < raw.size(); ++i) out[i][t] = pct(column[i]);
    }
    return out;
}

bool compatible(std::span<const double> v, const ActivityPattern& p, double threshold) {
    if (v.size() != p.size()) throw std::invalid_argument("compatible: length mismatch");
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] != 0 && !(v[i] * p[i] > threshold)) return false;
    return true;
}

namespace {

ActivityPattern decode(std::size_t code, std::size_t n) {
    ActivityPattern p(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t d = code % 3;
        p[i] = d == 0 ? 0 : (d == 1 ? 1 : -1);
        code /= 3;
    }
    return p;
}

// Codes of every pattern compatible with v at `threshold`: each task is
// either unconstrained or fixed to the sign of v when |v| clears it.
std::vector<std::size_t> compatible_codes(std::span<const double> v, double threshold) {
    std::vector<std::size_t> codes{0};
    std::size_t place = 1;
    for (double x : v) {
        const int sign = x > threshold ? 1 : (-x > threshold ? -1 : 0);
        if (sign != 0) {
            const std::size_t digit = sign == 1 ? 1 : 2;
            const std::size_t n = codes.size();
            for (std::size_t k = 0; k < n; ++k) codes.push_back(codes[k] + digit * place);
        }
        place *= 3;
    }
    return codes;
}

}  // namespace

std::vector<ActivityPattern> enumerate_patterns(std::size_t n_tasks) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n_tasks; ++i) total *= 3;
    std::vector<ActivityPattern> out;
    out.reserve(total);
    for (std::size_t c = 0; c < total; ++c) out.push_back(decode(c, n_tasks));
    return out;
}

std::vector<Metacluster> metacluster_assign(const std::vector<std::vector<double>>& scores,
                                            const MetaclusterOptions& opt) {
    if (scores.empty()) return {};
    const std::size_t n_tasks = scores.front().size();
    if (n_tasks > opt.max_tasks)
        throw ConfigError("metaclustering over " + std::to_string(n_tasks) + " tasks exceeds max_tasks=" +
                          std::to_string(opt.max_tasks) + "; run tasks separately");
    const double strong_t = opt.strong_threshold;
    const double weak_t = std::min(opt.weak_threshold, strong_t);

    std::map<std::size_t, std::size_t> strong_counts;
    for (const auto& v : scores)
        for (std::size_t c : compatible_codes(v, strong_t)) ++strong_counts[c];
    const double floor_size =
        std::min(static_cast<double>(opt.min_size), opt.min_size_frac * static_cast<double>(scores.size()));
    std::map<std::size_t, char> surviving;
    for (const auto& [code, count] : strong_counts)
        if (static_cast<double>(count) >= floor_size) surviving[code] = 1;

    std::map<std::size_t, std::vector<std::size_t>> assigned;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto& v = scores[i];
        std::size_t best_code = 0;
        int best_nonzero = -1;
        double best_min = -1.0;
        for (std::size_t code : compatible_codes(v, weak_t)) {
            if (!surviving.count(code)) continue;
            const auto p = decode(code, n_tasks);
            int nonzero = 0;
            double min_abs = std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < n_tasks; ++t) {
                if (p[t] == 0) continue;
                ++nonzero;
                min_abs = std::min(min_abs, std::fabs(v[t]));
            }
            const bool better = nonzero > best_nonzero || (nonzero == best_nonzero && min_abs > best_min) ||
                                (nonzero == best_nonzero && min_abs == best_min && code < best_code);
            if (better) {
                best_code = code;
                best_nonzero = nonzero;
                best_min = min_abs;
            }
        }
        if (best_nonzero >= 0) assigned[best_code].push_back(i);
    }

    std::vector<Metacluster> out;
    for (auto& [code, members] : assigned) {
        Metacluster mc{decode(code, n_tasks), std::move(members)};
        if (mc.members.size() > opt.max_per_metacluster) {
            const auto rel = mc.relevant_tasks();
            auto mag = [&](std::size_t i) {
                double s = 0.0;
                for (std::size_t t : rel) s += std::fabs(scores[i][t]);
                return s;
            };
            std::stable_sort(mc.members.begin(), mc.members.end(),
                             [&](std::size_t a, std::size_t b) { return mag(a) > mag(b); });
            mc.members.resize(opt.max_per_metacluster);
            std::sort(mc.members.begin(), mc.members.end());
        }
        out.push_back(std::move(mc));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Metacluster& a, const Metacluster& b) { return a.members.size() > b.members.size(); });
    return out;
}

}  // namespace modisco
