#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "grn/cartpole.hpp"
#include "grn/format.hpp"
#include "grn/regulation.hpp"

namespace grn {

/// Extra-protein signatures carrying the four cart inputs, ordered
/// (x, theta, x_dot, theta_dot). Chosen maximally apart: pairwise match
/// degrees are 16 or 32.
inline constexpr std::array<Word32, 4> kInputSignatures{
    0x00000000u, // x
    0x0000ffffu, // theta
    0xffff0000u, // x_dot
    0xffffffffu, // theta_dot
};

inline constexpr double kInputConcentrationMax = 0.1;

struct InputRange {
    double lo;
    double hi;
};

inline constexpr std::array<InputRange, 4> kInputRanges{{
    {-kTrackLimit, kTrackLimit},
    {-kAngleLimit, kAngleLimit},
    {-kCartVelLimit, kCartVelLimit},
    {-kAngVelLimit, kAngVelLimit},
}};

/// Maps the cart state onto extra-protein concentrations: each variable is
/// clamped to its range and scaled linearly into [0, 0.1].
inline std::array<double, 4> encode_inputs(const CartState& s) {
    const std::array<double, 4> values{s.x, s.theta, s.x_dot, s.theta_dot};
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto [lo, hi] = kInputRanges[i];
        const double v = std::clamp(values[i], lo, hi);
        // ratio first: rounding then cannot push the result above 0.1
        out[i] = kInputConcentrationMax * ((v - lo) / (hi - lo));
    }
    return out;
}

enum class DecodeMode { Concentration, Tendency };

/// Bang-bang decoding of the elected P-protein reading. Concentration mode
/// is memoryless (above 0.5 pushes right, ties go left); tendency mode acts
/// on the sign of the change and repeats the previous action on no change.
inline Action decode_action(double p_now, double p_prev, Action prev_action, DecodeMode mode) {
    if (mode == DecodeMode::Concentration)
        return p_now > 0.5 ? Action::Right : Action::Left;
    if (p_now > p_prev)
        return Action::Right;
    if (p_now < p_prev)
        return Action::Left;
    return prev_action;
}

struct WarmupConfig {
    std::size_t max_steps = 100000;
    double tol = 1e-6;
    /// Stabilize with the episode's initial inputs already applied; when
    /// false, warm up with zeroed extras and apply the inputs afterwards.
    bool with_inputs = true;
};

struct ControllerConfig {
    DecodeMode decode_mode = DecodeMode::Concentration;
    std::size_t grn_steps_per_action = 2000;
    WarmupConfig warmup;
    Action initial_action = Action::Left;
    std::size_t success_steps = 120000;
    GrnParams grn_params;
    CartParams cart;
};

struct TrajectoryPoint {
    CartState cart;
    Action action = Action::Left;
    double p_conc = 0.0;
};

struct EpisodeResult {
    std::size_t steps_survived = 0;
    bool success = false;
    std::size_t p_index = 0;
    bool grn_degenerate = false;
    std::optional<std::vector<TrajectoryPoint>> trajectory;
};

namespace detail {

/// Episode loop from an already warmed-up GRN state. The state is taken by
/// value so callers can reuse one warm-up across several P-gene episodes.
inline EpisodeResult episode_loop(GrnDynamics& dyn, GrnState state, std::size_t p_index,
                                  const ControllerConfig& cfg, const CartState& initial,
                                  std::size_t max_steps, bool record, bool warm_degenerate) {
    EpisodeResult res;
    res.p_index = p_index;
    res.grn_degenerate = warm_degenerate;

    CartState cart = initial;
    double p_prev = state.p_conc[p_index];
    Action prev_action = cfg.initial_action;
    if (record) {
        res.trajectory.emplace();
        res.trajectory->push_back({cart, prev_action, p_prev});
    }
    if (!is_failure(cart)) {
        for (std::size_t t = 0; t < max_steps; ++t) {
            for (std::size_t k = 0; k < cfg.grn_steps_per_action; ++k)
                res.grn_degenerate = dyn.tick(state).any() || res.grn_degenerate;
            const double p_now = state.p_conc[p_index];
            const Action action = decode_action(p_now, p_prev, prev_action, cfg.decode_mode);
            cart = step(cart, action, cfg.cart);
            p_prev = p_now;
            prev_action = action;
            if (is_failure(cart))
                break;
            ++res.steps_survived;
            if (record)
                res.trajectory->push_back({cart, action, p_now});
            set_extra_inplace(state, encode_inputs(cart));
        }
    }
    res.success = res.steps_survived >= cfg.success_steps;
    return res;
}

struct WarmedState {
    GrnState state;
    bool degenerate = false;
};

inline WarmedState warm_up(GrnDynamics& dyn, const RegulatoryNetwork& net,
                           const ControllerConfig& cfg, const CartState& initial) {
    const std::array<double, 4> inputs = encode_inputs(initial);
    WarmedState out;
    if (cfg.warmup.with_inputs) {
        out.state = init_state(net, {inputs.begin(), inputs.end()});
        out.degenerate = dyn.stabilize_inplace(out.state, cfg.warmup.max_steps, cfg.warmup.tol).degenerate;
    } else {
        out.state = init_state(net, std::vector<double>(net.extra_count(), 0.0));
        out.degenerate = dyn.stabilize_inplace(out.state, cfg.warmup.max_steps, cfg.warmup.tol).degenerate;
        set_extra_inplace(out.state, inputs);
    }
    return out;
}

} // namespace detail

/// Runs one cart episode: warm the GRN up on the initial inputs, then per
/// cart step advance the GRN by grn_steps_per_action ticks, decode the
/// elected P-protein into a push, step the cart and refresh the inputs.
inline EpisodeResult run_episode(const RegulatoryNetwork& net, std::size_t p_index,
                                 const ControllerConfig& cfg, const CartState& initial,
                                 std::size_t max_steps, bool record = false) {
    if (net.tf_count() == 0 || net.p_count() == 0)
        throw std::invalid_argument("run_episode: network needs TF genes and P genes");
    if (p_index >= net.p_count())
        throw std::invalid_argument("run_episode: p_index out of range");
    GrnDynamics dyn(net, cfg.grn_params);
    auto warmed = detail::warm_up(dyn, net, cfg, initial);
    return detail::episode_loop(dyn, std::move(warmed.state), p_index, cfg, initial, max_steps,
                                record, warmed.degenerate);
}

struct GenomeEvaluation {
    double fitness = 0.0;
    int p_index = -1;
    std::size_t best_steps = 0;
    std::size_t tf_count = 0;
    std::size_t p_count = 0;
    bool success = false;
    bool valid = false;
};

/// Scans and compiles the genome, tries every P gene as the controller
/// output from the same initial state (one shared warm-up, state cloned per
/// episode) and scores the best: fitness = success_steps / surviving steps.
/// Genomes without TF or P genes get the worst fitness and an invalid flag.
inline GenomeEvaluation evaluate_genome(const BitGenome& genome, const ControllerConfig& cfg,
                                        const CartState& initial) {
    const std::vector<Gene> genes = scan_genes(genome);
    const RegulatoryNetwork net =
        compile(genes, {kInputSignatures.begin(), kInputSignatures.end()});
    GenomeEvaluation ev;
    ev.tf_count = net.tf_count();
    ev.p_count = net.p_count();
    if (net.tf_count() == 0 || net.p_count() == 0) {
        ev.fitness = static_cast<double>(cfg.success_steps);
        return ev;
    }
    ev.valid = true;
    GrnDynamics dyn(net, cfg.grn_params);
    const auto warmed = detail::warm_up(dyn, net, cfg, initial);
    ev.p_index = 0;
    for (std::size_t p = 0; p < net.p_count(); ++p) {
        const EpisodeResult r = detail::episode_loop(dyn, warmed.state, p, cfg, initial,
                                                     cfg.success_steps, false, warmed.degenerate);
        if (p == 0 || r.steps_survived > ev.best_steps) {
            ev.best_steps = r.steps_survived;
            ev.p_index = static_cast<int>(p);
        }
        if (ev.best_steps >= cfg.success_steps)
            break; // later P genes can at best tie; lowest index wins ties
    }
    ev.success = ev.best_steps >= cfg.success_steps;
    ev.fitness = static_cast<double>(cfg.success_steps) /
                 static_cast<double>(std::max<std::size_t>(1, ev.best_steps));
    return ev;
}

inline const char* action_name(Action a) { return a == Action::Right ? "right" : "left"; }

/// CSV rows: the initial sample (step 0) followed by one row per surviving
/// cart step, angles reported in degrees.
inline std::string trajectory_to_csv(const std::vector<TrajectoryPoint>& traj) {
    std::string out = "step,x_m,theta_deg,xdot,thetadot_deg,action,p_conc\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const TrajectoryPoint& t = traj[i];
        out += std::to_string(i);
        out += ',';
        out += fmt_double(t.cart.x);
        out += ',';
        out += fmt_double(rad_to_deg(t.cart.theta));
        out += ',';
        out += fmt_double(t.cart.x_dot);
        out += ',';
        out += fmt_double(rad_to_deg(t.cart.theta_dot));
        out += ',';
        out += action_name(t.action);
        out += ',';
        out += fmt_double(t.p_conc);
        out += '\n';
    }
    return out;
}

} // namespace grn
