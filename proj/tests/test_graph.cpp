#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "dopd/graph.hpp"

using namespace dopd;

namespace {

std::vector<Edge> path_edges(int n) {
    std::vector<Edge> es;
    for (int i = 0; i + 1 < n; ++i) {
        es.push_back({i, i + 1});
        es.push_back({i + 1, i});
    }
    return es;
}

}  // namespace

TEST_CASE("path weights for three agents", "[graph]") {
    Mat W = build_weights(path_edges(3), 3);
    const double th = 1.0 / 3.0;
    CHECK(W(0, 0) == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(W(0, 1) == th);
    CHECK(W(0, 2) == 0.0);
    CHECK(W(1, 0) == th);
    CHECK(W(1, 1) == Catch::Approx(th).epsilon(1e-15));
    CHECK(W(1, 2) == th);
    CHECK(W(2, 0) == 0.0);
    CHECK(W(2, 1) == th);
    CHECK(W(2, 2) == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("weight construction rejects malformed edge sets", "[graph]") {
    CHECK_THROWS_AS(build_weights({{0, 1}}, 3), std::invalid_argument);          // not symmetric
    CHECK_THROWS_AS(build_weights({{0, 0}}, 3), std::invalid_argument);          // self loop
    CHECK_THROWS_AS(build_weights({{0, 1}, {0, 1}, {1, 0}}, 3), std::invalid_argument);  // dup
    CHECK_THROWS_AS(build_weights({{0, 3}, {3, 0}}, 3), std::invalid_argument);  // out of range
}

TEST_CASE("generated sequences include the backbone and obey rho extremes", "[graph]") {
    CommGraphSequence zero = generate_graph_sequence(5, 0.0, 20, 1);
    for (const auto& round : zero.rounds) REQUIRE(round.size() == 8);  // path only, both directions
    CommGraphSequence full = generate_graph_sequence(5, 1.0, 20, 1);
    for (const auto& round : full.rounds) REQUIRE(round.size() == 20);  // complete graph
    CommGraphSequence mid = generate_graph_sequence(5, 0.5, 20, 1);
    for (const auto& round : mid.rounds) {
        REQUIRE(round.size() >= 8);
        REQUIRE(round.size() <= 20);
    }
}

TEST_CASE("generation is seed-deterministic", "[graph]") {
    CommGraphSequence a = generate_graph_sequence(6, 0.3, 30, 42);
    CommGraphSequence b = generate_graph_sequence(6, 0.3, 30, 42);
    CommGraphSequence c = generate_graph_sequence(6, 0.3, 30, 43);
    REQUIRE(a.rounds.size() == b.rounds.size());
    bool same_ab = true, same_ac = true;
    for (size_t t = 0; t < a.rounds.size(); ++t) {
        if (a.rounds[t].size() != b.rounds[t].size()) same_ab = false;
        for (size_t k = 0; k < a.rounds[t].size() && same_ab; ++k)
            if (a.rounds[t][k].from != b.rounds[t][k].from || a.rounds[t][k].to != b.rounds[t][k].to)
                same_ab = false;
        if (t < c.rounds.size() && a.rounds[t].size() != c.rounds[t].size()) same_ac = false;
    }
    CHECK(same_ab);
    CHECK_FALSE(same_ac);
}

TEST_CASE("network assumptions hold for generated sequences", "[graph]") {
    for (int n : {3, 10, 25}) {
        for (double rho : {0.0, 0.2, 1.0}) {
            CommGraphSequence seq = generate_graph_sequence(n, rho, 40, 7);
            GraphCheckReport rep = check_assumption1(seq);
            INFO("n=" << n << " rho=" << rho << ": " << rep.message);
            REQUIRE(rep.ok);
        }
    }
}

TEST_CASE("assumption check catches a disconnected union", "[graph]") {
    CommGraphSequence seq;
    seq.n = 3;
    seq.weight_floor = 1.0 / 3.0;
    seq.window = 2;
    // Only agents 0 and 1 ever talk; agent 2 is isolated.
    for (int t = 0; t < 6; ++t) {
        seq.rounds.push_back({{0, 1}, {1, 0}});
        seq.weights.push_back(build_weights(seq.rounds.back(), 3));
    }
    GraphCheckReport rep = check_assumption1(seq);
    CHECK_FALSE(rep.ok);
}

TEST_CASE("windowed joint connectivity accepts alternating links", "[graph]") {
    CommGraphSequence seq;
    seq.n = 3;
    seq.weight_floor = 1.0 / 3.0;
    seq.window = 2;
    for (int t = 0; t < 8; ++t) {
        if (t % 2 == 0)
            seq.rounds.push_back({{0, 1}, {1, 0}});
        else
            seq.rounds.push_back({{1, 2}, {2, 1}});
        seq.weights.push_back(build_weights(seq.rounds.back(), 3));
    }
    CHECK(check_assumption1(seq).ok);
    seq.window = 1;  // each single round alone is not strongly connected
    CHECK_FALSE(check_assumption1(seq).ok);
}

TEST_CASE("assumption check catches a weight-floor violation", "[graph]") {
    CommGraphSequence seq;
    seq.n = 2;
    seq.weight_floor = 0.5;
    seq.window = 1;
    seq.rounds.push_back({{0, 1}, {1, 0}});
    Mat W(2, 2);
    W(0, 0) = 0.7;
    W(0, 1) = 0.3;  // below the 1/2 floor
    W(1, 0) = 0.3;
    W(1, 1) = 0.7;
    seq.weights.push_back(W);
    GraphCheckReport rep = check_assumption1(seq);
    CHECK_FALSE(rep.ok);
}

TEST_CASE("assumption check catches a non-stochastic row", "[graph]") {
    CommGraphSequence seq;
    seq.n = 2;
    seq.weight_floor = 0.5;
    seq.window = 1;
    seq.rounds.push_back({{0, 1}, {1, 0}});
    Mat W(2, 2);
    W(0, 0) = 0.6;
    W(0, 1) = 0.5;
    W(1, 0) = 0.5;
    W(1, 1) = 0.5;
    seq.weights.push_back(W);
    CHECK_FALSE(check_assumption1(seq).ok);
}

TEST_CASE("dual mixing is the weighted average", "[graph]") {
    Mat W(2, 2);
    W(0, 0) = 0.5;
    W(0, 1) = 0.5;
    W(1, 0) = 0.5;
    W(1, 1) = 0.5;
    std::vector<Vec> duals = {Vec{1.0, 2.0}, Vec{3.0, 4.0}};
    std::vector<Vec> mixed = mix_duals(W, duals);
    CHECK(mixed[0] == Vec{2.0, 3.0});
    CHECK(mixed[1] == Vec{2.0, 3.0});
}

TEST_CASE("graph sequence serialization round trip", "[graph]") {
    CommGraphSequence seq = generate_graph_sequence(4, 0.4, 12, 9);
    std::ostringstream os;
    save_graph_sequence(seq, os);
    std::istringstream is(os.str());
    CommGraphSequence back = load_graph_sequence(is);
    REQUIRE(back.n == seq.n);
    REQUIRE(back.rounds.size() == seq.rounds.size());
    for (size_t t = 0; t < seq.rounds.size(); ++t) {
        REQUIRE(back.rounds[t].size() == seq.rounds[t].size());
        for (size_t k = 0; k < seq.rounds[t].size(); ++k) {
            REQUIRE(back.rounds[t][k].from == seq.rounds[t][k].from);
            REQUIRE(back.rounds[t][k].to == seq.rounds[t][k].to);
        }
        for (int r = 0; r < seq.n; ++r)
            for (int c = 0; c < seq.n; ++c) REQUIRE(back.weights[t](r, c) == seq.weights[t](r, c));
    }
}

TEST_CASE("graph parser rejects malformed files", "[graph]") {
    auto parse = [](const std::string& text) {
        std::istringstream is(text);
        return load_graph_sequence(is);
    };
    CHECK_THROWS_AS(parse("wrong header\n"), GraphParseError);
    CHECK_THROWS_AS(parse("graphs v1\nn 2 rounds 1 window 1\nround 2\n0 1\n1 0\n"), GraphParseError);
    CHECK_THROWS_AS(parse("graphs v1\nn 2 rounds 2 window 1\nround 1\n0 1\n1 0\n"), GraphParseError);
    CHECK_THROWS_AS(parse("graphs v1\nn 2 rounds 1 window 1\nround 1\n0 5\n5 0\n"), GraphParseError);
    CHECK_THROWS_AS(parse("graphs v1\nn 2 rounds 1 window 1\n0 1\n"), GraphParseError);
}
