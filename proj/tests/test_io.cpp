#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "semicomp/cli.hpp"

using namespace semicomp;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("semicomp_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string read_text(const fs::path& p) {
    std::ifstream is(p);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

bool mentions(const ConfigError& e, const std::string& key) {
    for (const auto& s : e.errors())
        if (s.find(key) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST(Io, DoublesRoundTripBitwise) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-1e3, 1e3);
    for (int t = 0; t < 1000; ++t) {
        const double v = U(rng) * std::pow(10.0, t % 40 - 20);
        EXPECT_EQ(parse_double(format_double(v)), v);
    }
    EXPECT_THROW((void)parse_double("1.5x"), FormatError);
    EXPECT_THROW((void)parse_double(""), FormatError);
}

TEST(Io, FieldCsvRoundTripsBitwise) {
    const GridSpec g{7, 5, 1.3, 0.9};
    ScalarField f(g);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> N;
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) f(i, j) = N(rng) / 3.0;
    std::stringstream ss;
    write_field_csv(ss, FieldFile{"p", 0.1 + 0.2, f});
    const FieldFile back = read_field_csv(ss);
    EXPECT_EQ(back.name, "p");
    EXPECT_EQ(back.time, 0.1 + 0.2);
    EXPECT_EQ(back.field.grid().nx, 7);
    EXPECT_EQ(back.field.grid().ly, 0.9);
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) EXPECT_EQ(back.field(i, j), f(i, j));
}

TEST(Io, MalformedFieldFilesAreRejected) {
    std::stringstream short_row("# field: p\n# grid: 4 4 1 1\n# time: 0\n1,2,3\n");
    EXPECT_THROW((void)read_field_csv(short_row), FormatError);
    std::stringstream no_header("1,2,3,4\n");
    EXPECT_THROW((void)read_field_csv(no_header), FormatError);
}

TEST(Io, VtkHeaderDescribesTheGrid) {
    const GridSpec g{4, 3, 2.0, 1.5};
    std::stringstream ss;
    write_vtk(ss, "t", VectorField(g), ScalarField(g, 1.0));
    const std::string s = ss.str();
    EXPECT_EQ(s.rfind("# vtk DataFile Version 3.0\n", 0), 0u);
    EXPECT_NE(s.find("DIMENSIONS 4 3 1\n"), std::string::npos);
    EXPECT_NE(s.find("SPACING 0.5 0.5 1\n"), std::string::npos);
    EXPECT_NE(s.find("POINT_DATA 12\n"), std::string::npos);
    EXPECT_NE(s.find("VECTORS v double\n"), std::string::npos);
}

TEST(Config, EmptyObjectGivesDefaults) {
    const RunConfig c = parse_config("{}", "simulate");
    EXPECT_EQ(c.grid.nx, 32);
    EXPECT_EQ(c.time.n_steps, 10);
    EXPECT_EQ(c.initial.kind, "rest");
    EXPECT_EQ(c.snapshot_stride(), 1);
    EXPECT_EQ(c.optimizer.memory, 10);
    // The resolved config parses back to the same values.
    const RunConfig again = parse_config(to_json(c).dump(), "simulate");
    EXPECT_EQ(to_json(again), to_json(c));
}

TEST(Config, NegativeBetaIsReported) {
    try {
        (void)parse_config(R"({"phys": {"beta": -1}})", "simulate");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_TRUE(mentions(e, "beta"));
    }
}

TEST(Config, ZeroKappa3MattersOnlyForCostSubcommands) {
    const std::string text = R"({"cost": {"weights": {"kappa3": 0}}})";
    EXPECT_NO_THROW((void)parse_config(text, "simulate"));
    EXPECT_THROW((void)parse_config(text, "optimize"), ConfigError);
    EXPECT_THROW((void)parse_config(text, "gradcheck"), ConfigError);
}

TEST(Config, UnknownKeysAndTypeErrorsAreAllListed) {
    try {
        (void)parse_config(R"({"grid": {"nx": "big", "nz": 3}, "phys": {"nu": -1, "gamma": -1}, "extra": 1})", "simulate");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_GE(e.errors().size(), 5u);
        EXPECT_TRUE(mentions(e, "grid.nx"));
        EXPECT_TRUE(mentions(e, "nz"));
        EXPECT_TRUE(mentions(e, "extra"));
        EXPECT_TRUE(mentions(e, "nu"));
        EXPECT_TRUE(mentions(e, "gamma"));
    }
}

TEST(Config, SyntaxErrorsCarryThePosition) {
    try {
        (void)parse_config("{\"grid\": ", "simulate");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_TRUE(mentions(e, "byte"));
    }
}

TEST(Cli, SimulateFromRestWritesZeroFields) {
    const fs::path dir = scratch_dir("simulate");
    RunContext ctx;
    ctx.config = parse_config(R"({"grid": {"nx": 8, "ny": 8}, "time": {"n_steps": 4}})", "simulate");
    ctx.out = dir;
    ASSERT_EQ(run_subcommand("simulate", ctx), kExitOk);
    for (const char* name : {"vx", "vy", "p"}) {
        const FieldFile f = read_field_csv((dir / ("state_" + std::string(name) + "_000004.csv")).string());
        for (int j = 1; j <= 8; ++j)
            for (int i = 1; i <= 8; ++i) EXPECT_EQ(f.field(i, j), 0.0);
    }
    const auto rep = nlohmann::json::parse(read_text(dir / "simulate_report.json"));
    EXPECT_EQ(rep["subcommand"], "simulate");
    EXPECT_EQ(rep["config"]["grid"]["nx"], 8);
    EXPECT_TRUE(rep["pass"].get<bool>());
    EXPECT_TRUE(fs::exists(dir / "energy.csv"));
}

TEST(Cli, FieldFilesFeedTheInitialState) {
    const fs::path dir = scratch_dir("files");
    const GridSpec g{6, 6, 1.0, 1.0};
    ScalarField vx(g), zero(g);
    for (int j = 1; j <= g.ny; ++j)
        for (int i = 1; i <= g.nx; ++i) vx(i, j) = 0.01 * i * j;
    write_field_csv((dir / "vx.csv").string(), FieldFile{"vx", 0.0, vx});
    write_field_csv((dir / "zero.csv").string(), FieldFile{"zero", 0.0, zero});
    RunConfig c = parse_config(R"({"grid": {"nx": 6, "ny": 6}})", "simulate");
    c.initial.kind = "files";
    c.initial.velocity_x = (dir / "vx.csv").string();
    c.initial.velocity_y = (dir / "zero.csv").string();
    c.initial.pressure_file = (dir / "zero.csv").string();
    const auto [v, p] = initial_state(c);
    EXPECT_EQ(v.x(3, 4), vx(3, 4));
    c.grid.nx = 8;
    EXPECT_THROW((void)initial_state(c), ConfigError);
}

TEST(Cli, ExitCodes) {
    const fs::path dir = scratch_dir("exit");
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream((dir / name).string()) << text;
        return (dir / name).string();
    };
    std::ostringstream log, err;
    const std::string ok = write("ok.json", R"({"grid": {"nx": 6, "ny": 6}, "time": {"n_steps": 2}})");
    EXPECT_EQ(run_cli("simulate", ok, (dir / "a").string(), 1, log, err), kExitOk);
    EXPECT_EQ(run_cli("simulate", (dir / "missing.json").string(), "", 1, log, err), kExitConfig);
    const std::string bad = write("bad.json", R"({"phys": {"beta": -1}})");
    EXPECT_EQ(run_cli("simulate", bad, (dir / "b").string(), 1, log, err), kExitConfig);
    // An unreachable energy bound is a threshold failure, not an error.
    const std::string strict = write("strict.json", R"({"grid": {"nx": 8, "ny": 8}, "time": {"n_steps": 4},
        "initial": {"kind": "taylor_green", "amplitude": 0.5}, "energy": {"tolerance_per_dt": 1e-300}})");
    EXPECT_EQ(run_cli("energy-audit", strict, (dir / "c").string(), 1, log, err), kExitThreshold);
    // A forward blow-up is a solver failure.
    const std::string blow = write("blow.json", R"({"grid": {"nx": 8, "ny": 8}, "time": {"t_final": 100, "n_steps": 5},
        "phys": {"nu": 1e-6, "gamma": 0}, "initial": {"kind": "taylor_green", "amplitude": 1e150}})");
    EXPECT_EQ(run_cli("simulate", blow, (dir / "d").string(), 1, log, err), kExitSolver);
}
