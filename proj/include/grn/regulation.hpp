#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "grn/genome.hpp"

namespace grn {

struct GrnParams {
    double beta = 1.0;  // matching-sharpness scale in the binding exponential
    double delta = 1.0; // time-unit scale of the Euler update
};

/// Compiled genome: typed gene lists, extra-protein signatures and the
/// precomputed regulator-by-site match table. Immutable after compile();
/// safe to share across threads.
///
/// Regulators are the TF proteins (in genome order) followed by the extra
/// proteins. P proteins are only regulated, never regulators. Sites are the
/// enhancer and inhibitor of every gene, TF genes first, then P genes:
/// site 2*g is gene g's enhancer, site 2*g+1 its inhibitor.
struct RegulatoryNetwork {
    std::vector<Gene> tf_genes;
    std::vector<Gene> p_genes;
    std::vector<Word32> extra_sigs;
    std::vector<std::uint8_t> match_table; // site-major: [site * regulator_count + regulator]
    int u_max = 0;

    std::size_t tf_count() const { return tf_genes.size(); }
    std::size_t p_count() const { return p_genes.size(); }
    std::size_t extra_count() const { return extra_sigs.size(); }
    std::size_t regulator_count() const { return tf_count() + extra_count(); }
    std::size_t gene_count() const { return tf_count() + p_count(); }
    std::size_t site_count() const { return 2 * gene_count(); }

    /// Gene by combined index (TF genes first, then P genes).
    const Gene& gene(std::size_t g) const {
        return g < tf_count() ? tf_genes[g] : p_genes[g - tf_count()];
    }

    Word32 regulator_sig(std::size_t r) const {
        return r < tf_count() ? tf_genes[r].protein_sig : extra_sigs[r - tf_count()];
    }

    Word32 site_sig(std::size_t s) const {
        const Gene& g = gene(s / 2);
        return (s % 2 == 0) ? g.enhancer_sig : g.inhibitor_sig;
    }

    int match_at(std::size_t site, std::size_t regulator) const {
        return match_table[site * regulator_count() + regulator];
    }
};

inline RegulatoryNetwork compile(const std::vector<Gene>& genes,
                                 const std::vector<Word32>& extra_sigs) {
    RegulatoryNetwork net;
    net.extra_sigs = extra_sigs;
    for (const Gene& g : genes)
        (g.kind == GeneKind::TF ? net.tf_genes : net.p_genes).push_back(g);
    const std::size_t n_sites = net.site_count();
    const std::size_t n_reg = net.regulator_count();
    net.match_table.resize(n_sites * n_reg);
    int u_max = 0;
    for (std::size_t s = 0; s < n_sites; ++s) {
        const Word32 site = net.site_sig(s);
        for (std::size_t r = 0; r < n_reg; ++r) {
            const int u = match_degree(net.regulator_sig(r), site);
            net.match_table[s * n_reg + r] = static_cast<std::uint8_t>(u);
            u_max = std::max(u_max, u);
        }
    }
    net.u_max = u_max;
    return net;
}

/// Concentration vectors; invariants kept by every step:
///   sum(tf_conc) + sum(extra_conc) == 1 and sum(p_conc) == 1 (given P genes),
///   all entries >= 0. TF and P pools are normalised independently.
struct GrnState {
    std::vector<double> tf_conc;
    std::vector<double> p_conc;
    std::vector<double> extra_conc;
};

inline double sum_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
}

inline GrnState init_state(const RegulatoryNetwork& net, const std::vector<double>& extra_conc) {
    if (extra_conc.size() != net.extra_count())
        throw std::invalid_argument("init_state: extra concentration count mismatch");
    double extra_sum = 0.0;
    for (double c : extra_conc) {
        if (c < 0.0)
            throw std::invalid_argument("init_state: extra concentrations must be >= 0");
        extra_sum += c;
    }
    if (extra_sum > 1.0)
        throw std::invalid_argument("init_state: extra concentrations must sum to <= 1");
    if (net.tf_count() == 0)
        throw std::invalid_argument("init_state: network has no TF genes");
    GrnState s;
    s.extra_conc = extra_conc;
    s.tf_conc.assign(net.tf_count(), (1.0 - extra_sum) / static_cast<double>(net.tf_count()));
    if (net.p_count() > 0)
        s.p_conc.assign(net.p_count(), 1.0 / static_cast<double>(net.p_count()));
    return s;
}

enum class GeneSet { Tf, Products };

struct SignalPair {
    double enhance = 0.0;
    double inhibit = 0.0;
};

struct TickFlags {
    bool tf_degenerate = false;
    bool p_degenerate = false;
    bool any() const { return tf_degenerate || p_degenerate; }
};

/// Dynamics engine for one network + parameter set. Precomputes the binding
/// weights exp(beta * (u - u_max)) per (site, regulator) pair so a tick is
/// pure multiply-add work. Holds scratch buffers: use one engine per thread.
class GrnDynamics {
  public:
    GrnDynamics(const RegulatoryNetwork& net, const GrnParams& params)
        : net_(&net), params_(params), n_tf_(net.tf_count()), n_p_(net.p_count()),
          n_reg_(net.regulator_count()) {
        if (params.beta <= 0.0 || params.delta <= 0.0)
            throw std::invalid_argument("GrnDynamics: beta and delta must be positive");
        weights_.resize(net.site_count() * n_reg_);
        for (std::size_t s = 0; s < net.site_count(); ++s)
            for (std::size_t r = 0; r < n_reg_; ++r)
                weights_[s * n_reg_ + r] =
                    std::exp(params.beta * static_cast<double>(net.match_at(s, r) - net.u_max));
        inv_n_ = n_reg_ > 0 ? 1.0 / static_cast<double>(n_reg_) : 0.0;
    }

    const RegulatoryNetwork& network() const { return *net_; }
    const GrnParams& params() const { return params_; }

    /// Eq.-1 signal for one site given the current regulator concentrations.
    double site_signal(std::size_t site, const GrnState& s) const {
        const double* w = weights_.data() + site * n_reg_;
        double acc = 0.0;
        for (std::size_t r = 0; r < n_tf_; ++r)
            acc += s.tf_conc[r] * w[r];
        for (std::size_t k = 0; k < n_reg_ - n_tf_; ++k)
            acc += s.extra_conc[k] * w[n_tf_ + k];
        return acc * inv_n_;
    }

    std::vector<SignalPair> signals(const GrnState& s, GeneSet set) const {
        const std::size_t first = (set == GeneSet::Tf) ? 0 : n_tf_;
        const std::size_t count = (set == GeneSet::Tf) ? n_tf_ : n_p_;
        std::vector<SignalPair> out(count);
        for (std::size_t i = 0; i < count; ++i) {
            out[i].enhance = site_signal(2 * (first + i), s);
            out[i].inhibit = site_signal(2 * (first + i) + 1, s);
        }
        return out;
    }

    /// Synchronous Euler update of the TF pool followed by multiplicative
    /// renormalisation to 1 - sum(extra). Returns true on degeneracy reset.
    bool step_tf_inplace(GrnState& s) {
        if (n_tf_ == 0)
            return false;
        e_.resize(n_tf_);
        h_.resize(n_tf_);
        for (std::size_t i = 0; i < n_tf_; ++i) {
            e_[i] = site_signal(2 * i, s);
            h_[i] = site_signal(2 * i + 1, s);
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < n_tf_; ++i) {
            double c = s.tf_conc[i];
            c += params_.delta * (e_[i] - h_[i]) * c;
            if (c < 0.0)
                c = 0.0;
            s.tf_conc[i] = c;
            sum += c;
        }
        const double target = 1.0 - sum_of(s.extra_conc);
        if (sum == 0.0) {
            std::fill(s.tf_conc.begin(), s.tf_conc.end(), target / static_cast<double>(n_tf_));
            return true;
        }
        const double scale = target / sum;
        for (double& c : s.tf_conc)
            c *= scale;
        return false;
    }

    /// Euler update of the P pool (additive, not concentration-weighted),
    /// renormalised to 1. Signals use the current regulator concentrations.
    bool step_products_inplace(GrnState& s) {
        if (n_p_ == 0)
            return false;
        e_.resize(n_p_);
        h_.resize(n_p_);
        for (std::size_t i = 0; i < n_p_; ++i) {
            e_[i] = site_signal(2 * (n_tf_ + i), s);
            h_[i] = site_signal(2 * (n_tf_ + i) + 1, s);
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < n_p_; ++i) {
            double c = s.p_conc[i];
            c += params_.delta * (e_[i] - h_[i]);
            if (c < 0.0)
                c = 0.0;
            s.p_conc[i] = c;
            sum += c;
        }
        if (sum == 0.0) {
            std::fill(s.p_conc.begin(), s.p_conc.end(), 1.0 / static_cast<double>(n_p_));
            return true;
        }
        const double scale = 1.0 / sum;
        for (double& c : s.p_conc)
            c *= scale;
        return false;
    }

    /// One GRN tick: TF update first, then products read the fresh state.
    TickFlags tick(GrnState& s) {
        TickFlags f;
        f.tf_degenerate = step_tf_inplace(s);
        f.p_degenerate = step_products_inplace(s);
        return f;
    }

    struct StabilizeStats {
        std::size_t steps_used = 0;
        bool degenerate = false;
    };

    /// Ticks until the largest per-protein change falls below tol (strict)
    /// or max_steps is reached.
    StabilizeStats stabilize_inplace(GrnState& s, std::size_t max_steps, double tol) {
        if (max_steps < 1)
            throw std::invalid_argument("stabilize: max_steps must be >= 1");
        StabilizeStats st;
        prev_tf_ = s.tf_conc;
        prev_p_ = s.p_conc;
        for (std::size_t t = 1; t <= max_steps; ++t) {
            const TickFlags f = tick(s);
            st.degenerate = st.degenerate || f.any();
            double change = 0.0;
            for (std::size_t i = 0; i < s.tf_conc.size(); ++i)
                change = std::max(change, std::abs(s.tf_conc[i] - prev_tf_[i]));
            for (std::size_t i = 0; i < s.p_conc.size(); ++i)
                change = std::max(change, std::abs(s.p_conc[i] - prev_p_[i]));
            st.steps_used = t;
            if (change < tol)
                return st;
            prev_tf_ = s.tf_conc;
            prev_p_ = s.p_conc;
        }
        return st;
    }

  private:
    const RegulatoryNetwork* net_;
    GrnParams params_;
    std::size_t n_tf_;
    std::size_t n_p_;
    std::size_t n_reg_;
    double inv_n_ = 0.0;
    std::vector<double> weights_;
    std::vector<double> e_, h_, prev_tf_, prev_p_;
};

// --- value-semantics wrappers over the engine -------------------------------

inline std::vector<SignalPair> regulation_signals(const RegulatoryNetwork& net,
                                                  const GrnState& state, const GrnParams& params,
                                                  GeneSet set) {
    return GrnDynamics(net, params).signals(state, set);
}

struct StepResult {
    GrnState state;
    bool degenerate = false;
};

inline StepResult step_tf(const RegulatoryNetwork& net, const GrnState& state,
                          const GrnParams& params) {
    GrnDynamics dyn(net, params);
    StepResult out{state, false};
    out.degenerate = dyn.step_tf_inplace(out.state);
    return out;
}

inline StepResult step_products(const RegulatoryNetwork& net, const GrnState& state,
                                const GrnParams& params) {
    if (net.p_count() == 0)
        throw std::invalid_argument("step_products: network has no P genes");
    GrnDynamics dyn(net, params);
    StepResult out{state, false};
    out.degenerate = dyn.step_products_inplace(out.state);
    return out;
}

/// In-place core of set_extra; inputs must already be validated.
inline void set_extra_inplace(GrnState& s, std::span<const double> values) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        s.extra_conc[i] = values[i];
        sum += values[i];
    }
    const double target = 1.0 - sum;
    const double tf_sum = sum_of(s.tf_conc);
    if (tf_sum == 0.0) {
        if (!s.tf_conc.empty())
            std::fill(s.tf_conc.begin(), s.tf_conc.end(),
                      target / static_cast<double>(s.tf_conc.size()));
    } else {
        const double scale = target / tf_sum;
        for (double& c : s.tf_conc)
            c *= scale;
    }
}

/// Replaces the extra-protein concentrations and rescales the TF pool so the
/// conservation constraint keeps holding. P concentrations are untouched.
inline GrnState set_extra(const GrnState& state, const std::vector<double>& values) {
    if (values.size() != state.extra_conc.size())
        throw std::invalid_argument("set_extra: extra concentration count mismatch");
    double sum = 0.0;
    for (double v : values) {
        if (v < 0.0)
            throw std::invalid_argument("set_extra: values must be >= 0");
        sum += v;
    }
    if (sum > 0.5)
        throw std::invalid_argument("set_extra: values must sum to <= 0.5");
    GrnState out = state;
    set_extra_inplace(out, values);
    return out;
}

struct StabilizeResult {
    GrnState state;
    std::size_t steps_used = 0;
    bool degenerate = false;
};

inline StabilizeResult stabilize(const RegulatoryNetwork& net, const GrnState& state,
                                 const GrnParams& params, std::size_t max_steps, double tol) {
    GrnDynamics dyn(net, params);
    StabilizeResult out{state, 0, false};
    const auto st = dyn.stabilize_inplace(out.state, max_steps, tol);
    out.steps_used = st.steps_used;
    out.degenerate = st.degenerate;
    return out;
}

} // namespace grn
