#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "grn/cartpole.hpp"
#include "grn/controller.hpp"
#include "grn/format.hpp"
#include "grn/parallel.hpp"

namespace grn {

/// The five normalized grid levels, as exact fractions k/40 so the
/// denormalized physical values land exactly on the benchmark's figures
/// (0.275 over theta's range is -5.4 degrees, bit for bit).
inline constexpr std::array<int, 5> kGridNumerators{2, 11, 20, 29, 38};
inline constexpr int kGridDenominator = 40;

struct GeneralizationCase {
    std::array<double, 4> normalized{}; // (x, theta, x_dot, theta_dot)
    double x_m = 0.0;
    double theta_deg = 0.0;
    double xdot = 0.0;
    double thetadot_deg = 0.0;

    CartState state() const {
        CartState s;
        s.x = x_m;
        s.theta = deg_to_rad(theta_deg);
        s.x_dot = xdot;
        s.theta_dot = deg_to_rad(thetadot_deg);
        return s;
    }
};

namespace detail {
/// Exactly-rounded denormalization: ((40-k)*lo + k*hi) / 40.
inline double denorm(int num, double lo, double hi) {
    return (static_cast<double>(kGridDenominator - num) * lo + static_cast<double>(num) * hi) /
           static_cast<double>(kGridDenominator);
}
} // namespace detail

/// The 5^4 = 625 initial cases, full Cartesian product in lexicographic
/// order: x slowest, theta_dot fastest. Angular values denormalize over the
/// degree ranges [-12, 12] and [-1.5, 1.5].
inline std::vector<GeneralizationCase> generalization_grid() {
    std::vector<GeneralizationCase> grid;
    grid.reserve(625);
    for (int a : kGridNumerators)
        for (int b : kGridNumerators)
            for (int c : kGridNumerators)
                for (int d : kGridNumerators) {
                    GeneralizationCase g;
                    g.normalized = {
                        static_cast<double>(a) / kGridDenominator,
                        static_cast<double>(b) / kGridDenominator,
                        static_cast<double>(c) / kGridDenominator,
                        static_cast<double>(d) / kGridDenominator,
                    };
                    g.x_m = detail::denorm(a, -kTrackLimit, kTrackLimit);
                    g.theta_deg = detail::denorm(b, -12.0, 12.0);
                    g.xdot = detail::denorm(c, -kCartVelLimit, kCartVelLimit);
                    g.thetadot_deg = detail::denorm(d, -1.5, 1.5);
                    grid.push_back(g);
                }
    return grid;
}

struct GeneralizationReport {
    std::vector<std::uint8_t> passed; // one flag per grid case
    int score = 0;                    // number of passes, out of 625
    bool valid = false;
};

/// Balances each grid case for `balance_steps` cart steps with the elected
/// P gene; a case passes when the controller survives all of them.
inline GeneralizationReport generalization_score(const BitGenome& genome, std::size_t p_index,
                                                 const ControllerConfig& cfg,
                                                 std::size_t balance_steps = 1000,
                                                 std::size_t workers = 1) {
    const std::vector<GeneralizationCase> grid = generalization_grid();
    GeneralizationReport rep;
    rep.passed.assign(grid.size(), 0);
    const RegulatoryNetwork net =
        compile(scan_genes(genome), {kInputSignatures.begin(), kInputSignatures.end()});
    if (net.tf_count() == 0 || net.p_count() == 0 || p_index >= net.p_count())
        return rep;
    rep.valid = true;
    parallel_for_indexed(grid.size(), workers, [&](std::size_t i) {
        const EpisodeResult r =
            run_episode(net, p_index, cfg, grid[i].state(), balance_steps, false);
        rep.passed[i] = r.steps_survived >= balance_steps ? 1 : 0;
    });
    for (std::uint8_t p : rep.passed)
        rep.score += p;
    return rep;
}

inline std::string report_to_csv(const std::vector<GeneralizationCase>& grid,
                                 const GeneralizationReport& rep) {
    std::string out = "case_index,x,theta_deg,xdot,thetadot_deg,passed\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += fmt_double(grid[i].x_m);
        out += ',';
        out += fmt_double(grid[i].theta_deg);
        out += ',';
        out += fmt_double(grid[i].xdot);
        out += ',';
        out += fmt_double(grid[i].thetadot_deg);
        out += ',';
        out += (i < rep.passed.size() && rep.passed[i]) ? '1' : '0';
        out += '\n';
    }
    return out;
}

struct ScoreSummary {
    int best = 0;
    int worst = 0;
    double median = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
};

inline ScoreSummary summarize_scores(std::vector<int> scores) {
    ScoreSummary s;
    if (scores.empty())
        return s;
    std::sort(scores.begin(), scores.end());
    s.worst = scores.front();
    s.best = scores.back();
    const std::size_t n = scores.size();
    s.median = n % 2 == 1 ? scores[n / 2] : (scores[n / 2 - 1] + scores[n / 2]) / 2.0;
    double sum = 0.0;
    for (int v : scores)
        sum += v;
    s.mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (int v : scores)
        var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(n));
    return s;
}

// --- bang-bang solvability oracle -------------------------------------------

struct SolverOptions {
    /// Quantized-state memoization for deep searches. Trades exactness for
    /// speed: states are binned on a fine grid before lookup. Off by default,
    /// where the search is exact.
    bool memoize = false;
    /// Bins per variable when memoizing (at most 2^13).
    std::size_t bins = 1 << 13;
};

namespace detail {

class SolvabilityMemo {
  public:
    explicit SolvabilityMemo(std::size_t bins) : bins_(std::min<std::size_t>(bins, 1 << 13)) {}

    std::uint64_t key(const CartState& s, std::size_t depth) const {
        const auto q = [this](double v, double lo, double hi) -> std::uint64_t {
            double t = (v - lo) / (hi - lo);
            if (t < 0.0)
                t = 0.0;
            if (t > 1.0)
                t = 1.0;
            return static_cast<std::uint64_t>(t * static_cast<double>(bins_ - 1));
        };
        // 4 x 13-bit coordinates + 12-bit depth in one 64-bit key. Velocity
        // bounds are wider than the input ranges since searches exceed them.
        const std::uint64_t kx = q(s.x, -kTrackLimit, kTrackLimit);
        const std::uint64_t kt = q(s.theta, -kAngleLimit, kAngleLimit);
        const std::uint64_t kv = q(s.x_dot, -8.0, 8.0);
        const std::uint64_t kw = q(s.theta_dot, -8.0, 8.0);
        return (kx << 51) | (kt << 38) | (kv << 25) | (kw << 12) |
               static_cast<std::uint64_t>(depth & 0xfffu);
    }

    std::optional<bool> lookup(std::uint64_t k) const {
        const auto it = table_.find(k);
        if (it == table_.end())
            return std::nullopt;
        return it->second != 0;
    }

    void store(std::uint64_t k, bool v) { table_[k] = v ? 1 : 0; }

  private:
    std::size_t bins_;
    std::unordered_map<std::uint64_t, std::uint8_t> table_;
};

inline bool solvable_dfs(const CartState& s, std::size_t depth, const CartParams& params,
                         SolvabilityMemo* memo) {
    if (depth == 0)
        return true;
    std::uint64_t k = 0;
    if (memo) {
        k = memo->key(s, depth);
        if (const auto hit = memo->lookup(k))
            return *hit;
    }
    bool ok = false;
    for (const Action a : {Action::Right, Action::Left}) {
        const CartState child = step(s, a, params);
        if (!is_failure(child) && solvable_dfs(child, depth - 1, params, memo)) {
            ok = true;
            break;
        }
    }
    if (memo)
        memo->store(k, ok);
    return ok;
}

} // namespace detail

/// True iff some bang-bang action sequence of the given length keeps every
/// intermediate state inside the failure bounds. Depth-first search over the
/// binary action tree (Right child first) with immediate pruning on failure.
inline bool solvable(const CartState& initial, std::size_t depth, const CartParams& params,
                     const SolverOptions& options = {}) {
    if (is_failure(initial))
        return false;
    if (options.memoize) {
        detail::SolvabilityMemo memo(options.bins);
        return detail::solvable_dfs(initial, depth, params, &memo);
    }
    return detail::solvable_dfs(initial, depth, params, nullptr);
}

/// Per-case solvability over the 625-case grid (1 = solvable), merged by
/// case index so worker count cannot change the result.
inline std::vector<std::uint8_t> oracle_results(std::size_t depth, const CartParams& params,
                                                std::size_t workers = 1,
                                                const SolverOptions& options = {}) {
    const std::vector<GeneralizationCase> grid = generalization_grid();
    std::vector<std::uint8_t> out(grid.size(), 0);
    parallel_for_indexed(grid.size(), workers, [&](std::size_t i) {
        out[i] = solvable(grid[i].state(), depth, params, options) ? 1 : 0;
    });
    return out;
}

inline std::size_t unsolvable_count(std::size_t depth, const CartParams& params,
                                    std::size_t workers = 1, const SolverOptions& options = {}) {
    const std::vector<std::uint8_t> res = oracle_results(depth, params, workers, options);
    std::size_t n = 0;
    for (std::uint8_t r : res)
        n += r == 0;
    return n;
}

inline std::string oracle_to_csv(const std::vector<std::uint8_t>& results, std::size_t depth) {
    std::string out = "case_index,depth,solvable\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += std::to_string(depth);
        out += ',';
        out += results[i] ? '1' : '0';
        out += '\n';
    }
    return out;
}

// --- regulatory-network extraction ------------------------------------------

enum class SiteKind { Enhancer, Inhibitor };

struct NetworkEdge {
    std::size_t regulator = 0; // TF proteins first, then extra proteins
    std::size_t gene = 0;      // combined gene index (TF genes, then P genes)
    SiteKind site = SiteKind::Enhancer;
    int match = 0;
};

/// One edge per (regulator, site) pair whose match strictly exceeds the
/// threshold; weaker connections have negligible regulatory impact.
inline std::vector<NetworkEdge> extract_network(const RegulatoryNetwork& net, int threshold) {
    if (threshold < 0 || threshold > 32)
        throw std::invalid_argument("extract_network: threshold must be in [0,32]");
    std::vector<NetworkEdge> edges;
    for (std::size_t r = 0; r < net.regulator_count(); ++r)
        for (std::size_t s = 0; s < net.site_count(); ++s) {
            const int u = net.match_at(s, r);
            if (u > threshold)
                edges.push_back({r, s / 2, s % 2 == 0 ? SiteKind::Enhancer : SiteKind::Inhibitor, u});
        }
    return edges;
}

/// DOT rendering: hexagons for TF genes, double-periphery hexagons for P
/// genes (triple for the chosen one), triangles for the extra proteins.
/// Enhancer edges are solid, inhibitor edges dashed, labels carry the match.
inline std::string to_dot(const std::vector<NetworkEdge>& edges, const RegulatoryNetwork& net,
                          std::optional<std::size_t> chosen_p = std::nullopt) {
    const auto gene_name = [](std::size_t g) { return "G" + std::to_string(g + 1); };
    const auto extra_name = [](std::size_t e) { return "P" + std::to_string(e + 1); };
    std::string out = "digraph grn {\n";
    for (std::size_t g = 0; g < net.gene_count(); ++g) {
        out += "  " + gene_name(g) + " [shape=hexagon";
        if (g >= net.tf_count()) {
            const std::size_t p = g - net.tf_count();
            out += ", peripheries=";
            out += (chosen_p && *chosen_p == p) ? '3' : '2';
        }
        out += "];\n";
    }
    for (std::size_t e = 0; e < net.extra_count(); ++e)
        out += "  " + extra_name(e) + " [shape=triangle];\n";
    for (const NetworkEdge& edge : edges) {
        const std::string src = edge.regulator < net.tf_count()
                                    ? gene_name(edge.regulator)
                                    : extra_name(edge.regulator - net.tf_count());
        out += "  " + src + " -> " + gene_name(edge.gene);
        out += " [label=\"" + std::to_string(edge.match) + "\"";
        if (edge.site == SiteKind::Inhibitor)
            out += ", style=dashed";
        out += "];\n";
    }
    out += "}\n";
    return out;
}

} // namespace grn
