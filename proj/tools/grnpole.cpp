// grnpole: evolve and analyse gene-regulatory-network controllers for the
// single-pole balancing benchmark.
//
// Subcommands: evolve, generalize, oracle, trace, network. All runs are
// deterministic given --seed and independent of --workers.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grn/analysis.hpp"
#include "grn/controller.hpp"
#include "grn/evolution.hpp"

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path.string());
    out << content;
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Config files are flat `key = value` lines with `#` comments; keys are the
// long flag names without dashes. Values are turned into --key=value tokens
// inserted *before* the real command line, so explicit flags win (every
// option takes the last occurrence).
std::vector<std::string> read_config_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path);
    std::vector<std::string> tokens;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const std::string entry = trim(line);
        if (entry.empty())
            continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'key = value'");
        const std::string key = trim(entry.substr(0, eq));
        std::string value = trim(entry.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty key");
        if (key == "config")
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": nested config files are not supported");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        tokens.push_back(value.empty() ? "--" + key : "--" + key + "=" + value);
    }
    return tokens;
}

// Splices the config file's tokens in right after the subcommand name.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string cfg_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            cfg_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            cfg_path = args[i].substr(9);
    }
    if (cfg_path.empty() || args.empty())
        return args;
    const std::vector<std::string> tokens = read_config_tokens(cfg_path);
    std::vector<std::string> out;
    out.reserve(args.size() + tokens.size());
    out.push_back(args[0]);
    out.insert(out.end(), tokens.begin(), tokens.end());
    out.insert(out.end(), args.begin() + 1, args.end());
    return out;
}

grn::BitGenome load_genome_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open genome file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return grn::genome_from_text(text);
}

struct ControllerOpts {
    grn::ControllerConfig cfg;
    bool warmup_zero_inputs = false;

    grn::ControllerConfig resolved() const {
        grn::ControllerConfig c = cfg;
        c.warmup.with_inputs = !warmup_zero_inputs;
        return c;
    }
};

void add_controller_flags(CLI::App* cmd, ControllerOpts& o) {
    const std::map<std::string, grn::DecodeMode> decode_map{
        {"concentration", grn::DecodeMode::Concentration},
        {"tendency", grn::DecodeMode::Tendency},
    };
    const std::map<std::string, grn::Action> action_map{
        {"left", grn::Action::Left},
        {"right", grn::Action::Right},
    };
    cmd->add_option("--decode", o.cfg.decode_mode, "P-protein decoding mode")
        ->transform(CLI::CheckedTransformer(decode_map, CLI::ignore_case))
        ->default_str("concentration");
    cmd->add_option("--grn-interval", o.cfg.grn_steps_per_action,
                    "GRN ticks between consecutive cart actions")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
    cmd->add_option("--success-steps", o.cfg.success_steps, "cart steps that count as success")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
    cmd->add_option("--beta", o.cfg.grn_params.beta, "binding-exponential scale")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--delta", o.cfg.grn_params.delta, "GRN time-unit scale")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--warmup-steps", o.cfg.warmup.max_steps, "max GRN stabilization ticks")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{1}, std::size_t{1000000000}));
    cmd->add_option("--warmup-tol", o.cfg.warmup.tol, "stabilization convergence tolerance")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--warmup-zero-inputs", o.warmup_zero_inputs,
                  "stabilize with zeroed inputs, then apply the episode inputs");
    cmd->add_option("--initial-action", o.cfg.initial_action,
                    "previous action seeding the first tendency decode")
        ->transform(CLI::CheckedTransformer(action_map, CLI::ignore_case))
        ->default_str("left");
}

int pick_p_index(const grn::BitGenome& genome, const grn::ControllerConfig& cfg,
                 std::size_t max_steps) {
    grn::ControllerConfig probe = cfg;
    probe.success_steps = max_steps;
    const grn::GenomeEvaluation ev = grn::evaluate_genome(genome, probe, grn::CartState{});
    if (!ev.valid)
        throw std::runtime_error("genome has no usable TF/P gene pair");
    return ev.p_index;
}

std::size_t resolve_workers(std::size_t requested) {
    return requested == 0 ? grn::default_workers() : requested;
}

// ---------------------------------------------------------------------------

struct EvolveArgs {
    grn::EsConfig es;
    ControllerOpts ctrl;
    std::string genome_init = "dm";
    std::string state_policy = "per-individual";
    std::vector<double> fixed_state{0.0, 0.0, 0.0, 0.0};
    std::size_t workers = 0;
    std::string out_dir = ".";
};

int run_evolve(const EvolveArgs& a) {
    grn::EsConfig es = a.es;
    es.workers = resolve_workers(a.workers);
    es.init.kind =
        a.genome_init == "random" ? grn::GenomeInit::Kind::Random : grn::GenomeInit::Kind::Dm;
    const grn::ControllerConfig ctrl = a.ctrl.resolved();

    if (std::abs(a.fixed_state[0]) > grn::kTrackLimit || std::abs(a.fixed_state[1]) > 12.0 ||
        std::abs(a.fixed_state[2]) > grn::kCartVelLimit || std::abs(a.fixed_state[3]) > 1.5)
        throw std::runtime_error("--eval-state values outside the benchmark input ranges");
    grn::CartState fixed;
    fixed.x = a.fixed_state[0];
    fixed.theta = grn::deg_to_rad(a.fixed_state[1]);
    fixed.x_dot = a.fixed_state[2];
    fixed.theta_dot = grn::deg_to_rad(a.fixed_state[3]);

    const std::string policy = a.state_policy;
    const std::uint64_t run_seed = es.seed;
    const auto eval = [&](const grn::BitGenome& g, const grn::EvalContext& ctx) {
        grn::CartState init = fixed;
        if (policy == "per-individual") {
            grn::Rng r(ctx.seed);
            init = grn::random_state(r);
        } else if (policy == "per-generation") {
            grn::Rng r(grn::derive_seed(run_seed, grn::kSeedEpisodeState, ctx.generation, 0));
            init = grn::random_state(r);
        }
        const grn::GenomeEvaluation ev = grn::evaluate_genome(g, ctrl, init);
        return grn::EvalOutcome{ev.fitness, ev.p_index, ev.valid};
    };

    const grn::RunLog log = grn::evolve(es, eval);

    fs::create_directories(a.out_dir);
    write_file(fs::path(a.out_dir) / "runlog.csv", grn::runlog_to_csv(log));
    write_file(fs::path(a.out_dir) / "best_genome.txt", grn::genome_to_text(log.best.genome));
    std::printf("success: %s, generations: %zu, best fitness: %s, p_index: %d\n",
                log.success ? "yes" : "no", log.generations_run,
                grn::fmt_double(log.best.fitness).c_str(), log.best.p_index);
    return 0;
}

struct GenomeCmdArgs {
    std::string genome_file;
    ControllerOpts ctrl;
    int p_index = -1;
    std::size_t max_steps = 1000;
    std::size_t workers = 0;
    std::string out = "";
};

int run_generalize(const GenomeCmdArgs& a) {
    const grn::BitGenome genome = load_genome_file(a.genome_file);
    const grn::ControllerConfig ctrl = a.ctrl.resolved();
    const int p = a.p_index >= 0 ? a.p_index : pick_p_index(genome, ctrl, a.max_steps);
    const grn::GeneralizationReport rep = grn::generalization_score(
        genome, static_cast<std::size_t>(p), ctrl, a.max_steps, resolve_workers(a.workers));
    if (!rep.valid)
        throw std::runtime_error("genome not evaluable (missing genes or bad --p-index)");
    const std::string path = a.out.empty() ? "generalization.csv" : a.out;
    write_file(path, grn::report_to_csv(grn::generalization_grid(), rep));
    std::printf("score: %d/625\n", rep.score);
    return 0;
}

struct OracleArgs {
    std::size_t depth = 60;
    std::size_t workers = 0;
    bool memoize = false;
    std::size_t memo_bins = 1 << 13;
    std::string out = "oracle.csv";
};

int run_oracle(const OracleArgs& a) {
    grn::SolverOptions opt;
    opt.memoize = a.memoize;
    opt.bins = a.memo_bins;
    const grn::CartParams params;
    const std::vector<std::uint8_t> res =
        grn::oracle_results(a.depth, params, resolve_workers(a.workers), opt);
    write_file(a.out, grn::oracle_to_csv(res, a.depth));
    std::size_t unsolvable = 0;
    for (std::uint8_t r : res)
        unsolvable += r == 0;
    std::printf("unsolvable: %zu/625 at depth %zu\n", unsolvable, a.depth);
    return 0;
}

struct TraceArgs {
    std::string genome_file;
    ControllerOpts ctrl;
    int p_index = -1;
    std::size_t max_steps = 1000;
    double x = 0.0, theta_deg = 0.0, xdot = 0.0, thetadot_deg = 0.0;
    std::string out = "trace.csv";
};

int run_trace(const TraceArgs& a) {
    const grn::BitGenome genome = load_genome_file(a.genome_file);
    const grn::ControllerConfig ctrl = a.ctrl.resolved();
    grn::CartState init;
    init.x = a.x;
    init.theta = grn::deg_to_rad(a.theta_deg);
    init.x_dot = a.xdot;
    init.theta_dot = grn::deg_to_rad(a.thetadot_deg);

    const grn::RegulatoryNetwork net = grn::compile(
        grn::scan_genes(genome), {grn::kInputSignatures.begin(), grn::kInputSignatures.end()});
    const int p = a.p_index >= 0 ? a.p_index : pick_p_index(genome, ctrl, a.max_steps);
    if (net.p_count() == 0 || static_cast<std::size_t>(p) >= net.p_count())
        throw std::runtime_error("bad --p-index for this genome");
    const grn::EpisodeResult res =
        grn::run_episode(net, static_cast<std::size_t>(p), ctrl, init, a.max_steps, true);
    write_file(a.out, grn::trajectory_to_csv(*res.trajectory));
    std::printf("steps: %zu, p_index: %d\n", res.steps_survived, p);
    return 0;
}

struct NetworkArgs {
    std::string genome_file;
    int threshold = 19;
    int chosen_p = -1;
    std::string out = "network.dot";
};

int run_network(const NetworkArgs& a) {
    const grn::BitGenome genome = load_genome_file(a.genome_file);
    const grn::RegulatoryNetwork net = grn::compile(
        grn::scan_genes(genome), {grn::kInputSignatures.begin(), grn::kInputSignatures.end()});
    const std::vector<grn::NetworkEdge> edges = grn::extract_network(net, a.threshold);
    std::optional<std::size_t> chosen;
    if (a.chosen_p >= 0) {
        if (static_cast<std::size_t>(a.chosen_p) >= net.p_count())
            throw std::runtime_error("--chosen-p out of range for this genome");
        chosen = static_cast<std::size_t>(a.chosen_p);
    }
    write_file(a.out, grn::to_dot(edges, net, chosen));
    std::printf("nodes: %zu, edges: %zu\n", net.gene_count() + net.extra_count(), edges.size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GRN controllers for single-pole balancing"};
    app.require_subcommand(1);
    std::string config_path;

    EvolveArgs ev;
    CLI::App* evolve = app.add_subcommand("evolve", "run the (mu+lambda) evolution strategy");
    evolve->add_option("--config", config_path, "config file with key = value lines (# comments); flags override");
    evolve->add_option("--seed", ev.es.seed, "run seed")->capture_default_str();
    evolve->add_option("--mu", ev.es.mu, "parent population size")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
    evolve->add_option("--lambda", ev.es.lambda, "offspring per generation")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
    evolve->add_option("--generations", ev.es.max_generations, "maximum generations")
        ->capture_default_str();
    evolve->add_option("--mutation-rate", ev.es.initial_mutation_rate,
                       "initial per-bit mutation probability")
        ->capture_default_str()
        ->check(CLI::Range(1e-12, 0.999999));
    evolve->add_option("--min-flips", ev.es.min_flip_events,
                       "per-generation flip floor of the 1/5 rule")
        ->capture_default_str();
    evolve->add_option("--rate-min", ev.es.rate_min, "mutation rate lower bound")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    evolve->add_option("--rate-max", ev.es.rate_max, "mutation rate upper bound")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    evolve->add_option("--genome-init", ev.genome_init, "initial genome construction")
        ->check(CLI::IsMember({"dm", "random"}))
        ->capture_default_str();
    evolve->add_option("--dm-events", ev.es.init.dm_events, "duplication events for dm init")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{1}, std::size_t{24}));
    evolve->add_option("--dm-rate", ev.es.init.dm_rate, "mutation rate per dm duplication")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    evolve->add_option("--random-length", ev.es.init.random_length,
                       "genome length for random init")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{256}, std::size_t{1} << 24));
    evolve->add_option("--eval-state-policy", ev.state_policy,
                       "initial cart state per evaluation")
        ->check(CLI::IsMember({"per-individual", "per-generation", "fixed"}))
        ->capture_default_str();
    evolve->add_option("--eval-state", ev.fixed_state,
                       "fixed policy state: x theta_deg xdot thetadot_deg")
        ->expected(4);
    evolve->add_option("--workers", ev.workers, "worker threads (0 = hardware)")
        ->envname("GRN_WORKERS")
        ->capture_default_str();
    evolve->add_option("--out", ev.out_dir, "output directory")->capture_default_str();
    add_controller_flags(evolve, ev.ctrl);

    GenomeCmdArgs ge;
    CLI::App* generalize =
        app.add_subcommand("generalize", "score a genome on the 625-case generalization grid");
    generalize->add_option("--config", config_path, "config file with key = value lines (# comments); flags override");
    generalize->add_option("genome", ge.genome_file, "genome file")->required();
    generalize->add_option("--p-index", ge.p_index, "P gene to read (-1 = auto-select)")
        ->capture_default_str();
    generalize->add_option("--max-steps", ge.max_steps, "cart steps a case must survive")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
    generalize->add_option("--workers", ge.workers, "worker threads (0 = hardware)")
        ->envname("GRN_WORKERS")
        ->capture_default_str();
    generalize->add_option("--out", ge.out, "report CSV path")->default_str("generalization.csv");
    add_controller_flags(generalize, ge.ctrl);

    OracleArgs orc;
    CLI::App* oracle =
        app.add_subcommand("oracle", "bang-bang solvability search over the 625-case grid");
    oracle->add_option("--config", config_path, "config file with key = value lines (# comments); flags override");
    oracle->add_option("--depth", orc.depth, "search depth in cart steps")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{1}, std::size_t{4000}));
    oracle->add_option("--workers", orc.workers, "worker threads (0 = hardware)")
        ->envname("GRN_WORKERS")
        ->capture_default_str();
    oracle->add_flag("--memoize", orc.memoize, "quantized-state memoization (approximate)");
    oracle->add_option("--memo-bins", orc.memo_bins, "bins per variable when memoizing")
        ->capture_default_str();
    oracle->add_option("--out", orc.out, "per-case CSV path")->capture_default_str();

    TraceArgs tr;
    CLI::App* trace = app.add_subcommand("trace", "record one controller episode as CSV");
    trace->add_option("--config", config_path, "config file with key = value lines (# comments); flags override");
    trace->add_option("genome", tr.genome_file, "genome file")->required();
    trace->add_option("--x", tr.x, "initial cart position [m]")
        ->capture_default_str()
        ->check(CLI::Range(-grn::kTrackLimit, grn::kTrackLimit));
    trace->add_option("--theta", tr.theta_deg, "initial pole angle [deg]")
        ->capture_default_str()
        ->check(CLI::Range(-12.0, 12.0));
    trace->add_option("--xdot", tr.xdot, "initial cart velocity [m/s]")
        ->capture_default_str()
        ->check(CLI::Range(-grn::kCartVelLimit, grn::kCartVelLimit));
    trace->add_option("--thetadot", tr.thetadot_deg, "initial angular velocity [deg/s]")
        ->capture_default_str()
        ->check(CLI::Range(-1.5, 1.5));
    trace->add_option("--p-index", tr.p_index, "P gene to read (-1 = auto-select)")
        ->capture_default_str();
    trace->add_option("--max-steps", tr.max_steps, "episode length limit")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
    trace->add_option("--out", tr.out, "trajectory CSV path")->capture_default_str();
    add_controller_flags(trace, tr.ctrl);

    NetworkArgs nw;
    CLI::App* network =
        app.add_subcommand("network", "export the regulatory network as a DOT graph");
    network->add_option("--config", config_path, "config file with key = value lines (# comments); flags override");
    network->add_option("genome", nw.genome_file, "genome file")->required();
    network->add_option("--threshold", nw.threshold, "minimum match (exclusive) for an edge")
        ->capture_default_str()
        ->check(CLI::Range(0, 32));
    network->add_option("--chosen-p", nw.chosen_p, "P gene to highlight (-1 = none)")
        ->capture_default_str();
    network->add_option("--out", nw.out, "DOT output path")->capture_default_str();

    // last occurrence wins so config-file tokens can be overridden by flags
    for (CLI::App* sub : app.get_subcommands(nullptr))
        for (CLI::Option* opt : sub->get_options())
            if (opt->get_positional() == false)
                opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::vector<const char*> cargv;
        cargv.push_back(argv[0]);
        for (const std::string& a : args)
            cargv.push_back(a.c_str());
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (evolve->parsed())
            return run_evolve(ev);
        if (generalize->parsed())
            return run_generalize(ge);
        if (oracle->parsed())
            return run_oracle(orc);
        if (trace->parsed())
            return run_trace(tr);
        if (network->parsed())
            return run_network(nw);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
