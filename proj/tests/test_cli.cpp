#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include "dot_lint.hpp"
#include "fixtures.hpp"
#include "grn/genome.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_binary() {
    const char* bin = std::getenv("GRNPOLE_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "GRNPOLE_BIN must point at the grnpole binary");
    return bin;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch_dir() {
    const fs::path dir = fs::current_path() / "cli_test_tmp";
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args) {
    const fs::path dir = scratch_dir();
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd =
        cli_binary() + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        n += c == '\n';
    return n;
}

const std::string kTinyEvolve =
    "evolve --seed 1 --mu 4 --lambda 4 --generations 2 --success-steps 200 "
    "--grn-interval 20 --warmup-steps 2000";

fs::path write_fixture_genome() {
    const fs::path path = scratch_dir() / "fixture_genome.txt";
    std::ofstream(path) << grn::genome_to_text(fixtures::single_p_genome());
    return path;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("evolve writes artifacts and a summary line") {
    const fs::path out = scratch_dir() / "run_a";
    const CliResult r = run_cli(kTinyEvolve + " --workers 2 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("success: ") == 0);
    CHECK(r.out.find("generations: ") != std::string::npos);
    CHECK(r.out.find("best fitness: ") != std::string::npos);
    CHECK(r.out.find("p_index: ") != std::string::npos);

    const std::string runlog = slurp(out / "runlog.csv");
    CHECK(runlog.rfind("generation,best,mean,worst,mut_rate,flips,success_rate\n", 0) == 0);
    CHECK(count_lines(runlog) >= 2);
    CHECK_NOTHROW(grn::genome_from_text(slurp(out / "best_genome.txt")));
}

TEST_CASE("evolve runs are byte-reproducible across invocations and workers") {
    const fs::path a = scratch_dir() / "run_b1";
    const fs::path b = scratch_dir() / "run_b2";
    const fs::path c = scratch_dir() / "run_b3";
    REQUIRE(run_cli(kTinyEvolve + " --workers 1 --out " + a.string()).exit_code == 0);
    REQUIRE(run_cli(kTinyEvolve + " --workers 1 --out " + b.string()).exit_code == 0);
    REQUIRE(run_cli(kTinyEvolve + " --workers 3 --out " + c.string()).exit_code == 0);
    const std::string ra = slurp(a / "runlog.csv");
    CHECK(ra == slurp(b / "runlog.csv"));
    CHECK(ra == slurp(c / "runlog.csv"));
    CHECK(slurp(a / "best_genome.txt") == slurp(c / "best_genome.txt"));
}

TEST_CASE("evolve rejects bad values naming the flag") {
    const CliResult r = run_cli("evolve --mu 0");
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("--mu") != std::string::npos);
}

TEST_CASE("help lists the benchmark defaults") {
    const CliResult ev = run_cli("evolve --help");
    REQUIRE(ev.exit_code == 0);
    CHECK(ev.out.find("250") != std::string::npos);    // mu / lambda
    CHECK(ev.out.find("50") != std::string::npos);     // generations
    CHECK(ev.out.find("0.01") != std::string::npos);   // mutation rate
    CHECK(ev.out.find("120000") != std::string::npos); // success steps
    CHECK(ev.out.find("2000") != std::string::npos);   // grn interval

    const CliResult ge = run_cli("generalize --help");
    REQUIRE(ge.exit_code == 0);
    CHECK(ge.out.find("1000") != std::string::npos); // balance steps

    const CliResult nw = run_cli("network --help");
    REQUIRE(nw.exit_code == 0);
    CHECK(nw.out.find("19") != std::string::npos); // threshold

    const CliResult orc = run_cli("oracle --help");
    REQUIRE(orc.exit_code == 0);
    CHECK(orc.out.find("60") != std::string::npos); // depth
}

TEST_CASE("generalize scores the fixture genome") {
    const fs::path genome = write_fixture_genome();
    const fs::path csv = scratch_dir() / "gen.csv";
    const CliResult r = run_cli("generalize " + genome.string() +
                                " --max-steps 40 --grn-interval 10 --workers 2 --out " +
                                csv.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("score: ") == 0);
    CHECK(r.out.find("/625") != std::string::npos);
    const std::string report = slurp(csv);
    CHECK(report.rfind("case_index,x,theta_deg,xdot,thetadot_deg,passed\n", 0) == 0);
    CHECK(count_lines(report) == 626);
}

TEST_CASE("generalize rejects corrupt genome files") {
    const fs::path bad = scratch_dir() / "bad_genome.txt";
    std::ofstream(bad) << "grn-genome v1 64\nzznotahexstring\n";
    const CliResult r = run_cli("generalize " + bad.string());
    CHECK(r.exit_code != 0);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("oracle writes the per-case CSV and a count line") {
    const fs::path csv = scratch_dir() / "oracle5.csv";
    const CliResult r = run_cli("oracle --depth 5 --workers 2 --out " + csv.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out == "unsolvable: 0/625 at depth 5\n");
    const std::string body = slurp(csv);
    CHECK(body.rfind("case_index,depth,solvable\n", 0) == 0);
    CHECK(count_lines(body) == 626);

    CHECK(run_cli("oracle --depth 0").exit_code != 0);

    const CliResult memo = run_cli("oracle --depth 5 --memoize --out " + csv.string());
    REQUIRE(memo.exit_code == 0);
    CHECK(memo.out == "unsolvable: 0/625 at depth 5\n");
}

TEST_CASE("trace records the reference case and validates ranges") {
    const fs::path genome = write_fixture_genome();
    const fs::path csv = scratch_dir() / "trace.csv";
    const CliResult r = run_cli("trace " + genome.string() +
                                " --theta -5.4 --thetadot -1.35 --grn-interval 10 "
                                "--max-steps 100 --out " +
                                csv.string());
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.find("steps: ") == 0);
    const std::size_t steps = std::stoul(r.out.substr(7));
    const std::string body = slurp(csv);
    CHECK(body.rfind("step,x_m,theta_deg,xdot,thetadot_deg,action,p_conc\n", 0) == 0);
    CHECK(count_lines(body) == steps + 2); // header + initial sample + rows

    CHECK(run_cli("trace " + genome.string() + " --theta 20").exit_code != 0);
    CHECK(run_cli("trace " + genome.string() + " --xdot 1.5").exit_code != 0);
}

TEST_CASE("network exports valid DOT at both thresholds") {
    const fs::path genome = write_fixture_genome();
    const fs::path dot = scratch_dir() / "net.dot";
    const CliResult r = run_cli("network " + genome.string() + " --out " + dot.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out == "nodes: 6, edges: 0\n"); // fixture matches peak at 16 < 19

    const CliResult r10 =
        run_cli("network " + genome.string() + " --threshold 10 --out " + dot.string());
    REQUIRE(r10.exit_code == 0);
    CHECK(r10.out == "nodes: 6, edges: 16\n");
    dotlint::Stats stats;
    CHECK(dotlint::parse(slurp(dot), &stats));
    CHECK(stats.node_stmts == 6);
    CHECK(stats.edge_stmts == 16);

    CHECK(run_cli("network " + genome.string() + " --threshold 33").exit_code != 0);
}

TEST_CASE("network handles gene-less genomes: extra-protein nodes only") {
    grn::BitGenome bare(512);
    for (std::size_t i = 0; i < bare.size(); ++i)
        bare.set_bit(i, i % 2);
    const fs::path path = scratch_dir() / "bare_genome.txt";
    std::ofstream(path) << grn::genome_to_text(bare);
    const fs::path dot = scratch_dir() / "bare.dot";
    const CliResult r = run_cli("network " + path.string() + " --out " + dot.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out == "nodes: 4, edges: 0\n");
    dotlint::Stats stats;
    CHECK(dotlint::parse(slurp(dot), &stats));
    CHECK(stats.node_stmts == 4);
}

TEST_CASE("config files feed flags, and flags override the file") {
    const fs::path cfg = scratch_dir() / "run.cfg";
    std::ofstream(cfg) << "# scaled-down smoke configuration\n"
                       << "seed = 9\n"
                       << "mu = 4\n"
                       << "lambda = 4\n"
                       << "generations = 2\n"
                       << "success-steps = 200\n"
                       << "grn-interval = 20\n"
                       << "warmup-steps = 2000\n";

    const fs::path by_cfg = scratch_dir() / "run_cfg";
    const fs::path by_flags = scratch_dir() / "run_flags";
    REQUIRE(run_cli("evolve --config " + cfg.string() + " --out " + by_cfg.string()).exit_code ==
            0);
    REQUIRE(run_cli("evolve --seed 9 --mu 4 --lambda 4 --generations 2 --success-steps 200 "
                    "--grn-interval 20 --warmup-steps 2000 --out " +
                    by_flags.string())
                .exit_code == 0);
    CHECK(slurp(by_cfg / "runlog.csv") == slurp(by_flags / "runlog.csv"));

    // a flag wins over the same key in the config file
    const fs::path override_out = scratch_dir() / "run_override";
    const fs::path plain_out = scratch_dir() / "run_plain";
    REQUIRE(run_cli("evolve --config " + cfg.string() + " --seed 21 --out " +
                    override_out.string())
                .exit_code == 0);
    REQUIRE(run_cli("evolve --seed 21 --mu 4 --lambda 4 --generations 2 --success-steps 200 "
                    "--grn-interval 20 --warmup-steps 2000 --out " +
                    plain_out.string())
                .exit_code == 0);
    CHECK(slurp(override_out / "runlog.csv") == slurp(plain_out / "runlog.csv"));
}

} // TEST_SUITE
