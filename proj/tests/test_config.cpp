#include <catch2/catch_amalgamated.hpp>

#include "memsim/config.hpp"
#include "memsim/errors.hpp"

#include <string>

using namespace memsim;
using Catch::Approx;

namespace {

void expect_config_error(const std::string& doc, const std::string& needle) {
    try {
        parse_config(doc);
        FAIL("expected ConfigError for: " << doc);
    } catch (const ConfigError& e) {
        INFO(e.what());
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
}

} // namespace

TEST_CASE("minimal run document applies defaults", "[config]") {
    const ExperimentConfig cfg = parse_config(R"({"experiment":{"run":{}}})");
    CHECK(cfg.kind == ExperimentKind::Run);
    CHECK(cfg.emulator.topology == Topology::Grounded);
    CHECK(cfg.emulator.fidelity == Fidelity::Simplified);
    CHECK(cfg.emulator.R1 == 10.0);
    CHECK(cfg.emulator.C1 == 75e-12);
    CHECK(cfg.emulator.C2 == 150e-12);
    CHECK(cfg.source.kind == SourceSpec::Kind::Sine);
    CHECK(cfg.source.tones.front().amplitude == 0.14);
    CHECK(cfg.source.dc_flux_removal);
    CHECK(cfg.sim.steady_periods == 4);
}

TEST_CASE("paper-style run document round-trips its settings", "[config]") {
    const std::string doc = R"({
      "emulator": {
        "R1": 10, "C2": 1.5e-10,
        "ota4": {"Vb": 0.45},
        "cccii2": {"Ib": 2e-5}
      },
      "source": {"amplitude": 0.14, "frequency": 1e6},
      "experiment": {"run": {}}
    })";
    const ExperimentConfig cfg = parse_config(doc);
    CHECK(cfg.emulator.C2 == 1.5e-10);
    CHECK(cfg.emulator.ota4.Vb == 0.45);
    CHECK(cfg.emulator.cccii2.Rx == Approx(2.7777777777777777).epsilon(1e-13));
    CHECK(cfg.source.tones.front().frequency == 1e6);

    SECTION("the hash is stable across reparses and sensitive to edits") {
        CHECK(parse_config(doc).config_hash == cfg.config_hash);
        std::string edited = doc;
        edited.replace(edited.find("0.14"), 4, "0.15");
        CHECK(parse_config(edited).config_hash != cfg.config_hash);
    }
}

TEST_CASE("schema violations carry their JSON path", "[config]") {
    expect_config_error(R"({"emulator":{"C2":-1},"experiment":{"run":{}}})",
                        "/emulator/C2");
    expect_config_error(R"({"emulator":{"C2":-1},"experiment":{"run":{}}})",
                        "must be > 0");
    expect_config_error(R"({"emulator":{"mystery":1},"experiment":{"run":{}}})",
                        "/emulator/mystery");
    expect_config_error(R"({"experiment":{"run":{}},"extra":{}})", "/extra");
    expect_config_error(R"({"source":{"kind":"triangle"},"experiment":{"run":{}}})",
                        "/source/kind");
    expect_config_error("{not json", "parse error");
}

TEST_CASE("exactly one experiment block", "[config]") {
    expect_config_error(R"({"experiment":{}})", "exactly one");
    expect_config_error(R"({"experiment":{"run":{},"mc":{}}})", "exactly one");
    expect_config_error(R"({})", "/experiment");
}

TEST_CASE("sweep block", "[config]") {
    const ExperimentConfig cfg = parse_config(R"({
      "experiment": {"sweep": {"frequencies": [5e5, 1e6, 2e6], "hold": "c1f_const"}}
    })");
    CHECK(cfg.kind == ExperimentKind::Sweep);
    CHECK(cfg.sweep.hold == SweepHold::C1fConst);
    REQUIRE(cfg.sweep.frequencies.size() == 3);

    expect_config_error(R"({"experiment":{"sweep":{"frequencies":[1e6,2e6]}}})",
                        "at least 3");
    expect_config_error(R"({"experiment":{"sweep":{"frequencies":[2e6,1e6,3e6]}}})",
                        "strictly increasing");
}

TEST_CASE("mc block accepts published deviations and flags dead rows", "[config]") {
    const ExperimentConfig cfg = parse_config(R"({
      "experiment": {"mc": {
        "n_runs": 200, "seed": 42,
        "deviations": {
          "tox": [0.2e-9, 0.02e-9], "Vth": [0.04, 0.004],
          "L": [2e-9, 0.2e-9], "W": [2e-9, 0.2e-9],
          "Cjn": [0.00015, 0.000015]
        }
      }}
    })");
    CHECK(cfg.kind == ExperimentKind::Mc);
    CHECK(cfg.mc.n_runs == 200);
    CHECK(cfg.mc.seed == 42);
    CHECK(cfg.mc.vth.process == 0.04);
    CHECK(cfg.mc.vth.mismatch == 0.004);
    REQUIRE(cfg.warnings.size() == 1);
    CHECK(cfg.warnings.front().find("Cjn") != std::string::npos);

    expect_config_error(R"({"experiment":{"mc":{"deviations":{"Vth":[0.04]}}}})",
                        "process_sigma, mismatch_sigma");
}

TEST_CASE("am block builds the pipeline around the top-level emulator", "[config]") {
    const ExperimentConfig cfg = parse_config(R"({
      "emulator": {"C1": 32e-12, "ota4": {"Vb": 0.45}},
      "experiment": {"am": {
        "message": {"amplitude": 0.12, "frequency": 5e4},
        "carrier": {"amplitude": 0.37, "frequency": 1e6},
        "local_carrier": {"amplitude": 0.45, "frequency": 1e6},
        "bpf": {"Q": 5},
        "lpf": {"f0": 5e4, "Q": 0.7071}
      }}
    })");
    CHECK(cfg.kind == ExperimentKind::Am);
    CHECK(cfg.am.emulator.C1 == 32e-12);
    CHECK(cfg.am.bpf.f0 == 1e6);  // pinned to the carrier
    CHECK(cfg.am.message.amplitude == 0.12);
    CHECK_NOTHROW(cfg.am.validate());
}

TEST_CASE("compose block inherits and overrides the second element", "[config]") {
    const ExperimentConfig cfg = parse_config(R"({
      "emulator": {"mode": "incremental"},
      "experiment": {"compose": {"wiring": "series",
                                 "element2": {"mode": "decremental"}}}
    })");
    CHECK(cfg.kind == ExperimentKind::Compose);
    CHECK(cfg.compose.wiring == Wiring::SeriesSamePolarity);
    CHECK(cfg.emulator.mode == Mode::Incremental);
    CHECK(cfg.compose.element2.mode == Mode::Decremental);
    CHECK(cfg.compose.element2.C1 == cfg.emulator.C1);
}

TEST_CASE("conveyor bias current and explicit Rx are mutually exclusive", "[config]") {
    expect_config_error(
        R"({"emulator":{"cccii2":{"Rx":5,"Ib":2e-5}},"experiment":{"run":{}}})",
        "mutually exclusive");
    expect_config_error(
        R"({"emulator":{"cccii2":{"mos_pair":{}}},"experiment":{"run":{}}})",
        "requires Ib");
}
