#include <doctest.h>

#include "helpers.hpp"
#include "hybridgrid/netmodel.hpp"

using namespace hybridgrid;
using namespace hybridgrid::testing;

namespace {

const char* kTwoBusDoc = R"({
  "bases": { "power_va": 1e6, "voltage_ac_v": 480, "voltage_dc_v": 750 },
  "buses": [
    { "id": 1, "kind": "ac_slack" },
    { "id": 2, "kind": "ac_pq", "p": -0.1 }
  ],
  "branches": [
    { "kind": "line", "from": 1, "to": 2, "y": { "re": 0.0, "im": -10.0 } }
  ]
})";

}  // namespace

TEST_CASE("parse minimal two-bus document") {
    NetworkModel m = parse_network(kTwoBusDoc);
    REQUIRE(m.buses.size() == 2);
    REQUIRE(m.branches.size() == 1);
    CHECK(m.buses[0].kind == BusKind::AcSlack);
    CHECK(m.buses[1].p_injection == doctest::Approx(-0.1));
    CHECK(m.branches[0].series_admittance == Complex{0.0, -10.0});
    CHECK(validate_model(m).empty());
}

TEST_CASE("parse rejects dangling bus reference") {
    std::string doc = kTwoBusDoc;
    doc.replace(doc.find("\"to\": 2"), 7, "\"to\": 99");
    CHECK_THROWS_WITH_AS(parse_network(doc), doctest::Contains("dangling bus reference 99"),
                         ParseError);
}

TEST_CASE("parse rejects duplicate ids and bad bases") {
    std::string dup = kTwoBusDoc;
    dup.replace(dup.find("\"id\": 2"), 7, "\"id\": 1");
    CHECK_THROWS_AS(parse_network(dup), ParseError);

    std::string bad = kTwoBusDoc;
    bad.replace(bad.find("\"power_va\": 1e6"), 15, "\"power_va\": 0.0");
    CHECK_THROWS_AS(parse_network(bad), ParseError);

    CHECK_THROWS_AS(parse_network("{ not json"), ParseError);
}

TEST_CASE("canonical grid document") {
    NetworkModel m = canonical_grid();
    REQUIRE(m.converters.size() == 3);
    CHECK(m.converters[0].delta == doctest::Approx(deg2rad(29.0)));
    CHECK(m.converters[1].delta == doctest::Approx(deg2rad(33.5)));
    CHECK(m.converters[2].delta == doctest::Approx(deg2rad(29.0)));
    CHECK(validate_model(m).empty());
    CHECK(m.dc_zones().size() == 1);
    CHECK(m.dc_zones()[0].size() == 4);
}

TEST_CASE("serialize then parse is identity") {
    NetworkModel m = canonical_grid();
    NetworkModel again = parse_network(serialize_network(m));
    REQUIRE(again.buses.size() == m.buses.size());
    REQUIRE(again.branches.size() == m.branches.size());
    REQUIRE(again.converters.size() == m.converters.size());
    for (size_t i = 0; i < m.buses.size(); ++i) {
        CHECK(again.buses[i].id == m.buses[i].id);
        CHECK(again.buses[i].kind == m.buses[i].kind);
        CHECK(again.buses[i].p_injection == doctest::Approx(m.buses[i].p_injection));
    }
    for (size_t i = 0; i < m.converters.size(); ++i) {
        CHECK(again.converters[i].delta == doctest::Approx(m.converters[i].delta));
        CHECK(again.converters[i].reactance == doctest::Approx(m.converters[i].reactance));
    }
    // A second round trip is byte-stable.
    CHECK(serialize_network(again) == serialize_network(m));
}

TEST_CASE("per-unit round trip") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> base(1e-3, 1e9), value(-100.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        PerUnitBases b{base(rng), base(rng), base(rng), base(rng)};
        double x = value(rng);
        CHECK(normalize_current(denormalize_current(x, b), b) ==
              doctest::Approx(x).epsilon(1e-12));
        CHECK(normalize_power(denormalize_power(x, b), b) == doctest::Approx(x).epsilon(1e-12));
    }
    PerUnitBases no_current{1e6, 480.0, 750.0, std::nullopt};
    CHECK_THROWS_AS(denormalize_current(1.0, no_current), ModelError);
}

TEST_CASE("validate: multiple slack") {
    NetworkModel m;
    m.buses = {make_bus(1, BusKind::AcSlack), make_bus(2, BusKind::AcSlack)};
    m.branches.push_back(make_line(1, 2, Complex{0.0, -5.0}));
    auto diags = validate_model(m);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].code == "multiple-slack");
}

TEST_CASE("validate: dc zone without reactive element") {
    NetworkModel m;
    m.buses = {make_bus(1, BusKind::AcSlack), make_bus(2, BusKind::CouplingAcSide),
               make_bus(3, BusKind::ReflectedDc)};
    m.branches.push_back(make_line(1, 2, Complex{2.0, -10.0}));
    attach_converter(m, make_converter(2, 3, 0.15, 30.0));
    auto diags = validate_model(m);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].code == "missing-reactive-element");
    CHECK(diags[0].message.find("bus 3") != std::string::npos);

    m.branches.push_back(make_shunt(3, Complex{0.0, -1.0}));
    CHECK(validate_model(m).empty());
}

TEST_CASE("validate: k seeded violations yield at least k diagnostics") {
    NetworkModel m;
    m.buses = {make_bus(1, BusKind::AcSlack), make_bus(2, BusKind::AcSlack),   // violation 1
               make_bus(3, BusKind::ReflectedDc, 0.0, 0.5)};                   // violation 2
    m.branches.push_back(make_line(1, 99, Complex{1.0, -5.0}));                // violation 3
    attach_converter(m, make_converter(1, 3, -0.1, 30.0));                     // violation 4 (X<0)
    auto diags = validate_model(m);
    CHECK(diags.size() >= 4);
    for (const auto& d : diags) CHECK_FALSE(d.message.empty());
}

TEST_CASE("validate: dc zone with no converter") {
    NetworkModel m;
    m.buses = {make_bus(1, BusKind::AcSlack), make_bus(2, BusKind::ReflectedDc)};
    m.branches.push_back(make_shunt(2, Complex{0.0, -1.0}));
    auto diags = validate_model(m);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].code == "isolated-dc-zone");
}
