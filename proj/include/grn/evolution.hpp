#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "grn/format.hpp"
#include "grn/genome.hpp"
#include "grn/parallel.hpp"
#include "grn/rng.hpp"

namespace grn {

struct GenomeInit {
    enum class Kind { Random, Dm };
    Kind kind = Kind::Dm;
    std::size_t random_length = 4096;
    std::size_t dm_events = 7;
    double dm_rate = 0.02;
};

inline BitGenome make_genome(const GenomeInit& init, Rng& rng) {
    if (init.kind == GenomeInit::Kind::Random)
        return random_init(init.random_length, rng);
    return dm_init(init.dm_events, init.dm_rate, rng);
}

struct EsConfig {
    std::size_t mu = 250;
    std::size_t lambda = 250;
    std::size_t max_generations = 50;
    double initial_mutation_rate = 0.01;
    std::size_t min_flip_events = 250;
    double rate_min = 1e-5;
    double rate_max = 0.5;
    GenomeInit init;
    std::uint64_t seed = 0;
    /// Stop once the population best reaches this fitness (1.0 = solved for
    /// the pole task; toy objectives may set their own optimum).
    double target_fitness = 1.0;
    std::size_t workers = 1;
};

/// 1/5-rule adaptation with a flip-count floor: double on over-1/5 success,
/// halve otherwise, then double again if too few bits flipped this
/// generation; the result is clamped to [rate_min, rate_max].
inline double adapt_rate(double rate, double success_rate, std::size_t flip_events,
                         const EsConfig& cfg) {
    double r = success_rate > 0.2 ? rate * 2.0 : rate / 2.0;
    if (flip_events < cfg.min_flip_events)
        r *= 2.0;
    return std::clamp(r, cfg.rate_min, cfg.rate_max);
}

struct Individual {
    BitGenome genome;
    double fitness = 0.0;
    int p_index = -1;
    bool valid = false;
};

struct EvalContext {
    std::uint64_t seed = 0;
    std::size_t generation = 0;
    std::size_t index = 0;
};

struct EvalOutcome {
    double fitness = 0.0;
    int p_index = -1;
    bool valid = false;
};

struct GenerationStats {
    std::size_t generation = 0;
    double best = 0.0;
    double mean = 0.0;
    double worst = 0.0;
    double mutation_rate = 0.0;
    std::size_t flip_events = 0;
    double success_rate = 0.0;
};

struct RunLog {
    std::vector<GenerationStats> generations;
    std::vector<Individual> final_population;
    Individual best;
    bool success = false;
    std::size_t generations_run = 0;
    double wall_seconds = 0.0;
};

inline std::string runlog_to_csv(const RunLog& log) {
    std::string out = "generation,best,mean,worst,mut_rate,flips,success_rate\n";
    for (const GenerationStats& g : log.generations) {
        out += std::to_string(g.generation);
        out += ',';
        out += fmt_double(g.best);
        out += ',';
        out += fmt_double(g.mean);
        out += ',';
        out += fmt_double(g.worst);
        out += ',';
        out += fmt_double(g.mutation_rate);
        out += ',';
        out += std::to_string(g.flip_events);
        out += ',';
        out += fmt_double(g.success_rate);
        out += '\n';
    }
    return out;
}

/// (mu+lambda) evolution strategy over bit genomes with bit-flip mutation.
///
/// Every random decision is seeded from (run seed, stream, generation,
/// index), and parallel evaluation results are merged in offspring order, so
/// the full RunLog is bit-reproducible for any worker count. The evaluator
/// receives the derived per-evaluation seed through EvalContext and must be
/// a pure function of (genome, context).
template <typename EvalFn>
RunLog evolve(const EsConfig& cfg, EvalFn&& eval) {
    if (cfg.mu < 1 || cfg.lambda < 1)
        throw std::invalid_argument("evolve: mu and lambda must be >= 1");
    if (!(cfg.initial_mutation_rate > 0.0) || !(cfg.initial_mutation_rate < 1.0))
        throw std::invalid_argument("evolve: initial_mutation_rate must be in (0,1)");
    if (cfg.rate_min <= 0.0 || cfg.rate_min > cfg.rate_max)
        throw std::invalid_argument("evolve: bad rate bounds");

    const auto t0 = std::chrono::steady_clock::now();
    RunLog log;

    // Initial parents.
    std::vector<Individual> pop(cfg.mu);
    for (std::size_t i = 0; i < cfg.mu; ++i) {
        Rng rng(derive_seed(cfg.seed, kSeedGenomeInit, 0, i));
        pop[i].genome = make_genome(cfg.init, rng);
    }
    parallel_for_indexed(cfg.mu, cfg.workers, [&](std::size_t i) {
        const EvalContext ctx{derive_seed(cfg.seed, kSeedEvaluation, 0, i), 0, i};
        const EvalOutcome r = eval(pop[i].genome, ctx);
        pop[i].fitness = r.fitness;
        pop[i].p_index = r.p_index;
        pop[i].valid = r.valid;
    });

    double rate = cfg.initial_mutation_rate;
    const auto record_generation = [&](std::size_t gen, double used_rate, std::size_t flips,
                                       double success_rate) {
        GenerationStats st;
        st.generation = gen;
        st.mutation_rate = used_rate;
        st.flip_events = flips;
        st.success_rate = success_rate;
        st.best = pop.front().fitness;
        st.worst = pop.front().fitness;
        double sum = 0.0;
        for (const Individual& ind : pop) {
            st.best = std::min(st.best, ind.fitness);
            st.worst = std::max(st.worst, ind.fitness);
            sum += ind.fitness;
        }
        st.mean = sum / static_cast<double>(pop.size());
        log.generations.push_back(st);
        return st.best;
    };

    double best = record_generation(0, rate, 0, 0.0);
    std::size_t gen = 0;
    while (best > cfg.target_fitness && gen < cfg.max_generations) {
        ++gen;
        std::vector<Individual> offspring(cfg.lambda);
        std::vector<std::size_t> parent_of(cfg.lambda);
        std::vector<std::size_t> flips(cfg.lambda);
        for (std::size_t i = 0; i < cfg.lambda; ++i) {
            Rng pick(derive_seed(cfg.seed, kSeedParentPick, gen, i));
            parent_of[i] = pick.below(cfg.mu);
        }
        parallel_for_indexed(cfg.lambda, cfg.workers, [&](std::size_t i) {
            Rng mut(derive_seed(cfg.seed, kSeedMutation, gen, i));
            MutationResult m = mutate(pop[parent_of[i]].genome, rate, mut);
            flips[i] = m.flips;
            offspring[i].genome = std::move(m.genome);
            const EvalContext ctx{derive_seed(cfg.seed, kSeedEvaluation, gen, i), gen, i};
            const EvalOutcome r = eval(offspring[i].genome, ctx);
            offspring[i].fitness = r.fitness;
            offspring[i].p_index = r.p_index;
            offspring[i].valid = r.valid;
        });

        std::size_t total_flips = 0;
        std::size_t successes = 0;
        for (std::size_t i = 0; i < cfg.lambda; ++i) {
            total_flips += flips[i];
            if (offspring[i].fitness < pop[parent_of[i]].fitness)
                ++successes;
        }
        const double success_rate = static_cast<double>(successes) / static_cast<double>(cfg.lambda);

        // Plus selection: best mu of parents + offspring, parents and lower
        // indices preferred on fitness ties.
        std::vector<Individual> pool;
        pool.reserve(cfg.mu + cfg.lambda);
        for (auto& ind : pop)
            pool.push_back(std::move(ind));
        for (auto& ind : offspring)
            pool.push_back(std::move(ind));
        std::vector<std::size_t> order(pool.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pool[a].fitness < pool[b].fitness;
        });
        pop.clear();
        pop.reserve(cfg.mu);
        for (std::size_t i = 0; i < cfg.mu; ++i)
            pop.push_back(std::move(pool[order[i]]));

        best = record_generation(gen, rate, total_flips, success_rate);
        rate = adapt_rate(rate, success_rate, total_flips, cfg);
    }

    log.generations_run = gen;
    log.success = best <= cfg.target_fitness;
    log.best = pop.front();
    log.final_population = std::move(pop);
    log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return log;
}

} // namespace grn
