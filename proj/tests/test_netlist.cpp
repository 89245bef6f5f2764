#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rlcsim/netlist.hpp"
#include "support/circuits.hpp"

using namespace rlcsim;

TEST_CASE("single resistor line maps fields directly") {
    auto spec = parse_netlist("R1 1 0 R=2.0 T=300\n");
    REQUIRE(spec.elements.size() == 1);
    const auto& r = spec.elements[0];
    CHECK(r.kind == ElementKind::resistor);
    CHECK(r.value == 2.0);
    CHECK(r.temperature == 300.0);
    CHECK(r.node_a == "1");
    CHECK(r.node_b == "0");
}

TEST_CASE("fig. 1 netlist parses to 9 elements") {
    auto spec = parse_netlist(testing::fig1_netlist());
    CHECK(spec.elements.size() == 9);
    CHECK(spec.couplings.empty());
    CHECK_FALSE(spec.has_drive_frequency());
}

TEST_CASE("comments and blank lines are ignored, element order is file order") {
    auto spec = parse_netlist(
        "# a comment\n"
        "\n"
        "R2 1 0 R=1 T=300\n"
        "#another\n"
        "R1 1 0 R=2 T=300\n"
        "C1 1 0 C=1\n");
    REQUIRE(spec.elements.size() == 3);
    CHECK(spec.elements[0].name == "R2");
    CHECK(spec.elements[1].name == "R1");
    CHECK(spec.elements[2].name == "C1");
}

TEST_CASE("parse errors carry line numbers") {
    SECTION("temperature only valid on resistors") {
        try {
            parse_netlist("R1 1 0 R=1 T=300\nC1 1 0 C=1e-6 T=300\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line == 2);
            CHECK(std::string(e.what()).find("only valid on resistors") != std::string::npos);
        }
    }
    SECTION("bad number") {
        try {
            parse_netlist("R1 1 0 R=abc T=300\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line == 1);
            CHECK(e.column > 0);
        }
    }
    SECTION("duplicate name") {
        CHECK_THROWS_AS(parse_netlist("R1 1 0 R=1 T=300\nR1 0 2 R=2 T=300\nC1 2 1 C=1\n"),
                        ParseError);
    }
    SECTION("nonpositive value") {
        CHECK_THROWS_AS(parse_netlist("R1 1 0 R=-1 T=300\n"), ParseError);
        CHECK_THROWS_AS(parse_netlist("C1 1 0 C=0\n"), ParseError);
    }
    SECTION("missing temperature on R") {
        CHECK_THROWS_AS(parse_netlist("R1 1 0 R=1\n"), ParseError);
    }
    SECTION("drive without global frequency") {
        CHECK_THROWS_AS(parse_netlist("C1 1 0 C=1 A1=0.1\nR1 1 0 R=1 T=300\n"), ParseError);
        CHECK_NOTHROW(parse_netlist(".drive wd=1.0\nC1 1 0 C=1 A1=0.1\nR1 1 0 R=1 T=300\n"));
    }
    SECTION("drive breaking positivity") {
        CHECK_THROWS_AS(parse_netlist(".drive wd=1.0\nC1 1 0 C=1 A1=2.0\nR1 1 0 R=1 T=300\n"),
                        ParseError);
    }
    SECTION("unknown inductor in K") {
        CHECK_THROWS_AS(
            parse_netlist("L1 1 0 L=1\nR1 1 0 R=1 T=300\nK K1 L1 L9 M=0.1\n"), ParseError);
        CHECK_THROWS_AS(
            parse_netlist("L1 1 0 L=1\nR1 1 0 R=1 T=300\nK K1 L1 R1 M=0.1\n"), ParseError);
    }
    SECTION("coupling magnitude bound") {
        CHECK_THROWS_AS(parse_netlist("L1 1 0 L=1\nL2 1 0 L=1\nR1 1 0 R=1 T=300\n"
                                      "K K1 L1 L2 M=1.0\n"),
                        ParseError);
    }
    SECTION("self loop") {
        CHECK_THROWS_AS(parse_netlist("R1 1 1 R=1 T=300\n"), ParseError);
    }
    SECTION("disconnected graph") {
        CHECK_THROWS_AS(parse_netlist("R1 1 0 R=1 T=300\nC1 1 0 C=1\n"
                                      "R2 5 6 R=1 T=300\nC2 5 6 C=1\n"),
                        ParseError);
    }
    SECTION("empty netlist") {
        CHECK_THROWS_AS(parse_netlist("# nothing here\n"), ParseError);
    }
}

TEST_CASE("K line round-trips") {
    auto spec = parse_netlist(
        "L1 1 0 L=1\n"
        "L2 1 0 L=2\n"
        "R1 1 0 R=1 T=300\n"
        "K K1 L1 L2 M=0.5\n");
    REQUIRE(spec.couplings.size() == 1);
    CHECK(spec.couplings[0].mutual == 0.5);
    auto text = serialize_netlist(spec);
    CHECK(text.find("K K1 L1 L2 M=0.5") != std::string::npos);
    CHECK(parse_netlist(text) == spec);
}

TEST_CASE("waveform and drive attributes parse") {
    auto spec = parse_netlist(
        ".drive wd=2.5\n"
        "V1 1 0 V=1.0 Adc=0.25 A1=0.5 P1=0.1 A3=0.2\n"
        "C1 1 0 C=1e-3 A2=1e-4 P2=0.7\n"
        "R1 1 0 R=1 T=300\n");
    const auto& v = spec.elements[0];
    REQUIRE(v.waveform.has_value());
    CHECK(v.waveform->dc == 0.25);
    REQUIRE(v.waveform->harmonics.size() == 2);
    CHECK(v.waveform->harmonics[0].k == 1);
    CHECK(v.waveform->harmonics[1].k == 3);
    CHECK(v.waveform->harmonics[1].phase == 0.0);
    const auto& c = spec.elements[1];
    REQUIRE(c.drive.has_value());
    CHECK(c.drive->base == 1e-3);
    CHECK(c.drive->harmonics[0].k == 2);
    CHECK(c.drive->value(0.0) == Catch::Approx(1e-3 + 1e-4 * std::cos(0.7)));
}

TEST_CASE("parse(serialize(spec)) is the identity on random circuits") {
    std::mt19937_64 rng(20260809);
    for (int i = 0; i < 50; ++i) {
        auto spec = testing::random_circuit(rng);
        auto text = serialize_netlist(spec);
        auto back = parse_netlist(text);
        REQUIRE(back == spec);
    }
}

TEST_CASE("fig. 1 netlist round-trips exactly") {
    auto spec = parse_netlist(testing::fig1_netlist());
    CHECK(parse_netlist(serialize_netlist(spec)) == spec);
}
