#include <gtest/gtest.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "twkb/commands.hpp"
#include "twkb/validate.hpp"

using namespace twkb;
namespace fs = std::filesystem;

namespace {

const char* barrier_json = R"({
  "potential": {"type": "linear", "V0": 0.1, "d": 100.0},
  "energy": 0.1,
  "interval": [-50.0, 50.0],
  "orders": [0, 1, 2],
  "grid_points": 2001
})";

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

std::vector<double> parse_row(const std::string& line) {
    std::vector<double> v;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        const auto end = std::min(line.find(',', pos), line.size());
        double d = 0.0;
        std::from_chars(line.data() + pos, line.data() + end, d);
        v.push_back(d);
        pos = end + 1;
    }
    return v;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) { fs::remove_all(path); }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Config, ParsesBarrierPreset) {
    const auto rc = parse_run_config(std::string(barrier_json));
    EXPECT_TRUE(rc.potential.is_linear());
    EXPECT_EQ(rc.orders, (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(rc.grid_points, 2001u);
    EXPECT_EQ(rc.a, -50.0);
    EXPECT_EQ(rc.sign_convention, SignConvention::lower);
    EXPECT_FALSE(rc.rho_override);
}

TEST(Config, LoadsShippedPreset) {
    const auto rc = load_run_config(fs::path(TWKB_SOURCE_DIR) / "presets" / "linear_barrier.json");
    EXPECT_EQ(rc.lambda_samples.size(), 5u);
    EXPECT_EQ(rc.guard_band, 0.5);
}

TEST(Config, Errors) {
    auto bad = [](const std::string& s) { return [s] { parse_run_config(s); }; };
    try {
        parse_run_config(std::string(R"({"potential":{"type":"linear","V0":0.1,"d":100},"energy":0.1,"orders":[]})"));
        FAIL();
    } catch (const config_error& e) {
        EXPECT_NE(std::string(e.what()).find("no orders requested"), std::string::npos);
    }
    EXPECT_THROW(bad("{not json")(), config_error);
    EXPECT_THROW(bad(R"({"potential":{"type":"linear","V0":0.1,"d":100},"energy":0.1,"grid_points":2000})")(),
                 config_error);
    EXPECT_THROW(bad(R"({"potential":{"type":"cubic"},"energy":0.1})")(), config_error);
    EXPECT_THROW(bad(R"({"potential":{"type":"polynomial","coefficients":[0.1]},"energy":0.1})")(), config_error);
    EXPECT_THROW(bad(R"({"potential":{"type":"linear","V0":0.1,"d":100},"energy":"x"})")(), config_error);
    EXPECT_THROW(bad(R"({"potential":{"type":"linear","V0":0.1,"d":100},"energy":0.1,"sign_convention":"up"})")(),
                 config_error);
    EXPECT_THROW(load_run_config("/nonexistent/config.json"), config_error);
}

TEST(Csv, SeventeenDigitsRoundTrip) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::uint64_t> bits;
    for (int i = 0; i < 2000; ++i) {
        double v;
        const std::uint64_t b = bits(rng);
        std::memcpy(&v, &b, sizeof v);
        if (!std::isfinite(v)) continue;
        const auto s = format_double(v);
        EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
        char ref[64];
        std::snprintf(ref, sizeof ref, "%.17g", v);
        EXPECT_EQ(std::strtod(ref, nullptr), std::strtod(s.c_str(), nullptr));
    }
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Csv, LayoutAndWidthCheck) {
    CsvTable t({"x", "y"});
    t.add_row({1.0, -2.5});
    EXPECT_EQ(t.str(), "x,y\n1,-2.5\n");
    EXPECT_THROW(t.add_row({1.0}), invalid_argument);
}

TEST(Commands, SolveWritesExpectedFiles) {
    TempDir d("twkb_cli_solve");
    CommandOptions o;
    o.out_dir = d.path.string();
    o.grid = 201;
    std::ostringstream log;
    auto rc = parse_run_config(std::string(barrier_json));
    EXPECT_EQ(cmd_solve(rc, o, log), 0);
    for (const char* f : {"branches_N0.csv", "branches_N1.csv", "branches_N2.csv", "kappa1_N0.csv", "kappa1_N1.csv",
                          "kappa1_N2.csv", "exact_y.csv"})
        EXPECT_TRUE(fs::exists(d.path / f)) << f;
    EXPECT_FALSE(fs::exists(d.path / "kappa1_N1.csv.tmp"));

    const auto b1 = lines(slurp(d.path / "branches_N1.csv"));
    ASSERT_EQ(b1.size(), 202u);
    EXPECT_EQ(b1[0], "x,re_0,im_0,abs_0,re_1,im_1,abs_1,re_2,im_2,abs_2");
    EXPECT_EQ(parse_row(b1[1]).size(), 10u);
    EXPECT_EQ(slurp(d.path / "kappa1_N1.csv").find('\r'), std::string::npos);

    // CSV values round-trip to the in-memory solution
    SolveOptions so;
    so.grid_points = 201;
    const auto sol = solve_kappa1(rc.physical(), rc.potential, 1, so);
    const auto k1 = lines(slurp(d.path / "kappa1_N1.csv"));
    EXPECT_EQ(k1[0], "x,re,im,abs");
    for (std::size_t i = 0; i < 201; i += 20) {
        const auto row = parse_row(k1[i + 1]);
        EXPECT_EQ(row[0], sol.kappa1.grid[i]);
        EXPECT_EQ(row[1], sol.kappa1.values[i].real());
        EXPECT_EQ(row[2], sol.kappa1.values[i].imag());
    }
    EXPECT_NE(log.str().find("N=1: 3 branches"), std::string::npos);
}

TEST(Commands, WavefunctionForConstantPotential) {
    TempDir d("twkb_cli_wave");
    auto rc = parse_run_config(std::string(
        R"({"potential":{"type":"polynomial","coefficients":[0.2]},"energy":0.1,"interval":[0,5],"orders":[0],"grid_points":51})"));
    CommandOptions o;
    o.out_dir = d.path.string();
    o.quiet = true;
    EXPECT_EQ(cmd_wavefunction(rc, o), 0);
    const double k = std::sqrt(eval_Q(rc.physical(), rc.potential, 0.0, 0));
    const auto psi = lines(slurp(d.path / "psi_N0.csv"));
    ASSERT_EQ(psi.size(), 52u);
    EXPECT_EQ(psi[0], "x,re,im");
    for (std::size_t i = 1; i < psi.size(); ++i) {
        const auto row = parse_row(psi[i]);
        EXPECT_NEAR(row[1], std::exp(k * row[0]), 1e-12 * std::exp(k * row[0]));
        EXPECT_EQ(row[2], 0.0);
    }
    EXPECT_FALSE(fs::exists(d.path / "psi_exact.csv"));
}

TEST(Commands, ScalingReportsExponentAndMultiplicity) {
    TempDir d("twkb_cli_scaling");
    auto rc = parse_run_config(std::string(barrier_json));
    CommandOptions o;
    o.out_dir = d.path.string();
    o.quiet = true;
    std::ostringstream out, log;
    EXPECT_EQ(cmd_scaling(rc, o, out, log), 0);
    EXPECT_NE(out.str().find("exponent=-0.66"), std::string::npos) << out.str();
    EXPECT_NE(out.str().find("multiplicity=3"), std::string::npos) << out.str();
    const auto s = lines(slurp(d.path / "scaling.csv"));
    ASSERT_EQ(s.size(), 6u);
    EXPECT_EQ(s[0], "lambda,abs_kappa1,running_slope");
    EXPECT_NE(s[1].find("nan"), std::string::npos);
}

TEST(Commands, ExitCodes) {
    std::ostringstream err;
    EXPECT_EQ(run_guarded([]() -> int { throw config_error("x"); }, err), exit_config);
    EXPECT_EQ(run_guarded([]() -> int { throw no_convergence("x"); }, err), exit_no_convergence);
    EXPECT_EQ(run_guarded([]() -> int { throw no_regular_branch("x"); }, err), exit_no_regular_branch);
    EXPECT_EQ(run_guarded([]() -> int { throw out_of_envelope("x"); }, err), exit_failure);

    // Q identically zero leaves no regular branch
    TempDir d("twkb_cli_exit");
    auto rc = parse_run_config(std::string(
        R"({"potential":{"type":"polynomial","coefficients":[0.1]},"energy":0.1,"interval":[0,5],"orders":[0],"grid_points":51})"));
    CommandOptions o;
    o.out_dir = d.path.string();
    EXPECT_EQ(run_guarded([&] { return cmd_solve(rc, o, err); }, err), exit_no_regular_branch);
    CommandOptions even = o;
    even.grid = 100;
    EXPECT_EQ(run_guarded([&] { return cmd_solve(rc, even, err); }, err), exit_config);
}

TEST(Commands, ThreadCountDoesNotChangeOutput) {
    TempDir d("twkb_cli_threads");
    auto rc = parse_run_config(std::string(barrier_json));
    std::ostringstream log;
    for (unsigned t : {1u, 8u}) {
        CommandOptions o;
        o.threads = t;
        o.quiet = true;
        o.out_dir = (d.path / std::to_string(t)).string();
        ASSERT_EQ(cmd_solve(rc, o, log), 0);
    }
    for (const auto& e : fs::directory_iterator(d.path / "1"))
        EXPECT_EQ(slurp(e.path()), slurp(d.path / "8" / e.path().filename())) << e.path().filename();
}

TEST(Commands, ValidatePassesAndFaultIsNamed) {
    std::ostringstream out, err;
    EXPECT_EQ(cmd_validate("", false, out, err), 0);
    EXPECT_NE(out.str().find("ok    companion"), std::string::npos);
    std::ostringstream out2, err2;
    EXPECT_EQ(cmd_validate("airy-constant", true, out2, err2), exit_failure);
    EXPECT_NE(err2.str().find("wronskian"), std::string::npos);
    EXPECT_TRUE(out2.str().empty());
}
