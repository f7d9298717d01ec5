#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "grn/controller.hpp"

using namespace grn;
using fixtures::single_p_genome;

namespace {

// Cart-only oracle: steps survived under a constant action from a state.
std::size_t constant_push_survival(const CartState& initial, Action a, std::size_t cap) {
    const CartParams p;
    CartState s = initial;
    std::size_t steps = 0;
    while (steps < cap) {
        s = step(s, a, p);
        if (is_failure(s))
            break;
        ++steps;
    }
    return steps;
}

} // namespace

TEST_SUITE("controller") {

TEST_CASE("input signatures are maximally separated") {
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) {
            const int u = match_degree(kInputSignatures[i], kInputSignatures[j]);
            CHECK((u == 16 || u == 32));
        }
}

TEST_CASE("encode_inputs midpoints, endpoints and clamping") {
    const auto mid = encode_inputs(CartState{});
    for (double c : mid)
        CHECK(c == doctest::Approx(0.05).epsilon(1e-12));

    CartState low;
    low.x = -2.4;
    CHECK(encode_inputs(low)[0] == 0.0);
    CartState high;
    high.x = 2.4;
    CHECK(encode_inputs(high)[0] == doctest::Approx(0.1).epsilon(1e-15));

    CartState out_of_range;
    out_of_range.x = 7.0;
    out_of_range.theta = -1.0;
    CHECK(encode_inputs(out_of_range)[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(encode_inputs(out_of_range)[1] == 0.0);
}

TEST_CASE("encode_inputs reproduces the reference trace values") {
    CartState s;
    s.theta = deg_to_rad(-5.4);
    s.theta_dot = deg_to_rad(-1.35);
    const auto c = encode_inputs(s);
    CHECK(c[1] == doctest::Approx(0.0275).epsilon(1e-12));
    CHECK(c[3] == doctest::Approx(0.005).epsilon(1e-12));
}

TEST_CASE("encode_inputs output stays in [0,0.1]^4") {
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
        CartState s;
        s.x = rng.uniform(-5, 5);
        s.theta = rng.uniform(-1, 1);
        s.x_dot = rng.uniform(-4, 4);
        s.theta_dot = rng.uniform(-4, 4);
        double sum = 0.0;
        for (double c : encode_inputs(s)) {
            CHECK(c >= 0.0);
            CHECK(c <= 0.1);
            sum += c;
        }
        CHECK(sum <= 0.4 + 1e-15);
    }
}

TEST_CASE("decode_action in both modes") {
    CHECK(decode_action(0.7, 0.0, Action::Left, DecodeMode::Concentration) == Action::Right);
    CHECK(decode_action(0.3, 0.9, Action::Right, DecodeMode::Concentration) == Action::Left);
    CHECK(decode_action(0.5, 0.0, Action::Right, DecodeMode::Concentration) == Action::Left);

    CHECK(decode_action(0.3, 0.3, Action::Left, DecodeMode::Tendency) == Action::Left);
    CHECK(decode_action(0.3, 0.3, Action::Right, DecodeMode::Tendency) == Action::Right);
    CHECK(decode_action(0.2, 0.1, Action::Right, DecodeMode::Tendency) == Action::Right);
    CHECK(decode_action(0.2, 0.1, Action::Left, DecodeMode::Tendency) == Action::Right);
    CHECK(decode_action(0.1, 0.2, Action::Right, DecodeMode::Tendency) == Action::Left);
}

TEST_CASE("concentration decoding is memoryless, tendency repeats on ties") {
    Rng rng(12);
    for (int i = 0; i < 500; ++i) {
        const double now = rng.next_unit();
        const double prev = rng.next_unit();
        const Action a = rng.bernoulli(0.5) ? Action::Left : Action::Right;
        const Action b = a == Action::Left ? Action::Right : Action::Left;
        CHECK(decode_action(now, prev, a, DecodeMode::Concentration) ==
              decode_action(now, 1.0 - prev, b, DecodeMode::Concentration));
        CHECK(decode_action(now, now, a, DecodeMode::Tendency) == a);
    }
}

TEST_CASE("run_episode with max_steps 0 survives zero steps") {
    const BitGenome g = single_p_genome();
    const auto net = compile(scan_genes(g), {kInputSignatures.begin(), kInputSignatures.end()});
    REQUIRE(net.p_count() == 1);
    ControllerConfig cfg;
    cfg.grn_steps_per_action = 10;
    const auto res = run_episode(net, 0, cfg, CartState{}, 0);
    CHECK(res.steps_survived == 0);
    CHECK_FALSE(res.success);
}

TEST_CASE("the fixture genome contains exactly the two planted genes") {
    const auto genes = scan_genes(single_p_genome());
    REQUIRE(genes.size() == 2);
    CHECK(genes[0].kind == GeneKind::TF);
    CHECK(genes[0].promoter_start == 64);
    CHECK(genes[1].kind == GeneKind::P);
    CHECK(genes[1].promoter_start == 320);
}

TEST_CASE("pinned P concentration pushes constantly; matches the cart oracle") {
    const BitGenome g = single_p_genome();
    const auto net = compile(scan_genes(g), {kInputSignatures.begin(), kInputSignatures.end()});
    REQUIRE(net.tf_count() >= 1);
    REQUIRE(net.p_count() == 1);

    ControllerConfig cfg;
    cfg.grn_steps_per_action = 5;
    cfg.decode_mode = DecodeMode::Concentration;

    // p_conc == 1.0 > 0.5 at every reading: constant Right.
    const std::size_t expected = constant_push_survival(CartState{}, Action::Right, 10000);
    const auto res = run_episode(net, 0, cfg, CartState{}, 10000, true);
    CHECK(res.steps_survived == expected);
    REQUIRE(res.trajectory.has_value());
    CHECK(res.trajectory->size() == res.steps_survived + 1);
    for (std::size_t i = 1; i < res.trajectory->size(); ++i) {
        CHECK((*res.trajectory)[i].action == Action::Right);
        CHECK((*res.trajectory)[i].p_conc == 1.0);
    }

    // Tendency mode: the reading never changes, so the initial action is
    // repeated forever; Left by default, mirroring the Right trajectory.
    ControllerConfig tend = cfg;
    tend.decode_mode = DecodeMode::Tendency;
    const auto res_l = run_episode(net, 0, tend, CartState{}, 10000);
    CHECK(res_l.steps_survived == constant_push_survival(CartState{}, Action::Left, 10000));
    tend.initial_action = Action::Right;
    const auto res_r = run_episode(net, 0, tend, CartState{}, 10000);
    CHECK(res_r.steps_survived == expected);
}

TEST_CASE("run_episode argument validation") {
    const BitGenome g = single_p_genome();
    const auto net = compile(scan_genes(g), {kInputSignatures.begin(), kInputSignatures.end()});
    ControllerConfig cfg;
    CHECK_THROWS_AS(run_episode(net, 5, cfg, CartState{}, 10), std::invalid_argument);
    const auto empty = compile({}, {kInputSignatures.begin(), kInputSignatures.end()});
    CHECK_THROWS_AS(run_episode(empty, 0, cfg, CartState{}, 10), std::invalid_argument);
}

TEST_CASE("evaluate_genome fitness formula on the constant controller") {
    const BitGenome g = single_p_genome();
    ControllerConfig cfg;
    cfg.grn_steps_per_action = 5;
    cfg.decode_mode = DecodeMode::Concentration;

    // measure survival, then pin success_steps to it: fitness exactly 1
    cfg.success_steps = 1 << 20;
    const auto probe = evaluate_genome(g, cfg, CartState{});
    REQUIRE(probe.valid);
    const std::size_t survived = probe.best_steps;
    REQUIRE(survived > 0);

    cfg.success_steps = survived;
    const auto exact = evaluate_genome(g, cfg, CartState{});
    CHECK(exact.fitness == 1.0);
    CHECK(exact.success);
    CHECK(exact.p_index == 0);

    cfg.success_steps = 2 * survived;
    const auto half = evaluate_genome(g, cfg, CartState{});
    CHECK(half.fitness == 2.0);
    CHECK_FALSE(half.success);
}

TEST_CASE("evaluate_genome flags gene-less genomes with the worst fitness") {
    // alternating bits: no 8-bit run of equal bits anywhere
    BitGenome g(512);
    for (std::size_t i = 0; i < g.size(); ++i)
        g.set_bit(i, i % 2);
    REQUIRE(scan_genes(g).empty());
    ControllerConfig cfg;
    cfg.success_steps = 120000;
    const auto ev = evaluate_genome(g, cfg, CartState{});
    CHECK_FALSE(ev.valid);
    CHECK(ev.fitness == 120000.0);
    CHECK(ev.p_index == -1);
    CHECK(ev.tf_count == 0);
    CHECK(ev.p_count == 0);
}

TEST_CASE("evaluate_genome is deterministic") {
    Rng rng(77);
    const BitGenome g = random_init(4096, rng);
    ControllerConfig cfg;
    cfg.grn_steps_per_action = 20;
    cfg.success_steps = 300;
    CartState init;
    init.theta = deg_to_rad(3.0);
    const auto a = evaluate_genome(g, cfg, init);
    const auto b = evaluate_genome(g, cfg, init);
    CHECK(a.fitness == b.fitness);
    CHECK(a.p_index == b.p_index);
    CHECK(a.best_steps == b.best_steps);
    CHECK(a.fitness >= 1.0);
}

TEST_CASE("trajectory CSV shape") {
    const BitGenome g = single_p_genome();
    const auto net = compile(scan_genes(g), {kInputSignatures.begin(), kInputSignatures.end()});
    ControllerConfig cfg;
    cfg.grn_steps_per_action = 5;
    const auto res = run_episode(net, 0, cfg, CartState{}, 50, true);
    const std::string csv = trajectory_to_csv(*res.trajectory);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,x_m,theta_deg,xdot,thetadot_deg,action,p_conc");
    std::size_t rows = 0;
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == res.steps_survived + 1);
    CHECK(csv.back() == '\n');
}

} // TEST_SUITE
