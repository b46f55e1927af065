#include "oracle.hpp"

#include <benj/cli/commands.hpp>
#include <benj/cli/config.hpp>
#include <benj/snapshot_io.hpp>

#include <gtest/gtest.h>

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

namespace fs = std::filesystem;
using benj::SpectralField;
using benj::cli::parse_config;

namespace {

const char* kMinimal =
    "# Benjamin equation\n"
    "model.m = 1\n"
    "model.r = 0.5\n"
    "model.gamma = 1\n"
    "model.delta = 1\n"
    "model.q = 1\n"
    "grid.N = 32\n";

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() /
                ("benj_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

benj::cli::CommandOptions silent(std::ostream& log) {
    benj::cli::CommandOptions o;
    o.quiet = true;
    o.log = &log;
    return o;
}

template <class E>
std::string message_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
    try {
        parse_config(text, overrides);
    } catch (const E& e) {
        return e.what();
    }
    return "<no error>";
}

}  // namespace

TEST(Snapshot, RoundTripIsExact) {
    std::mt19937_64 rng(40);
    for (double L : {1.0, 8.0, 0.1}) {
        SpectralField u = oracle::random_field(17, L, rng);
        u *= 1.0 / 3.0;  // awkward binary expansions
        std::stringstream ss;
        benj::write_snapshot(ss, u, 0.1 + 0.2);
        const benj::SnapshotData back = benj::read_snapshot(ss);
        EXPECT_EQ(back.field, u);
        EXPECT_EQ(back.t, 0.1 + 0.2);
        EXPECT_EQ(back.field.domain_scale(), L);
    }
}

TEST(Snapshot, Layout) {
    SpectralField u(1, 1.0);
    u.set(1, benj::Complex(0.5, -0.25));
    std::stringstream ss;
    benj::write_snapshot(ss, u, 2.0);
    EXPECT_EQ(ss.str(),
              "benj-snapshot 1\n"
              "N 1\n"
              "L 1.0000000000000000e+00\n"
              "t 2.0000000000000000e+00\n"
              "-1 5.0000000000000000e-01 2.5000000000000000e-01\n"
              "0 0.0000000000000000e+00 0.0000000000000000e+00\n"
              "1 5.0000000000000000e-01 -2.5000000000000000e-01\n");
}

TEST(Snapshot, MalformedInputReportsLine) {
    auto line_of = [](const std::string& text) {
        std::istringstream is(text);
        try {
            benj::read_snapshot(is);
        } catch (const benj::ParseError& e) {
            return e.line();
        }
        return -1;
    };
    EXPECT_EQ(line_of("benj-snapshot 2\n"), 1);
    EXPECT_EQ(line_of("hello 1\n"), 1);
    EXPECT_EQ(line_of("benj-snapshot 1\nN 1\nL 1\nt 0\n-1 0 0\n0 x 0\n1 0 0\n"), 6);
    EXPECT_EQ(line_of("benj-snapshot 1\nN 1\nL 1\nt 0\n-1 0 0\n1 0 0\n"), 6);
    EXPECT_EQ(line_of("benj-snapshot 1\nN 1\nL 1\nt 0\n-1 0 0\n0 0 0\n"), 7);
    EXPECT_EQ(line_of("benj-snapshot 1\nN 1\nL -1\nt 0\n"), 3);
}

TEST(Config, MinimalDefaults) {
    const auto cfg = parse_config(kMinimal);
    EXPECT_EQ(cfg.model, benj::ModelParams::benjamin(1.0, 1.0));
    EXPECT_EQ(cfg.n_modes, 32);
    EXPECT_EQ(cfg.integrator.method, benj::Method::etdrk4);
    EXPECT_TRUE(cfg.auto_dt);
    EXPECT_EQ(cfg.integrator.t_end, 1.0);
    EXPECT_EQ(cfg.initial.kind, benj::InitialKind::gaussian);
    EXPECT_EQ(cfg.converge.n_ref, 512);
    EXPECT_EQ(cfg.output_dir, "out");
}

TEST(Config, ValidationNamesConstraint) {
    EXPECT_NE(message_of<benj::ParameterError>(kMinimal, {"model.gamma=-1"}).find("gamma >= 0"), std::string::npos);
    EXPECT_NE(message_of<benj::ParameterError>(kMinimal, {"model.r=1"}).find("r < m"), std::string::npos);
    EXPECT_NE(message_of<benj::ParameterError>(kMinimal, {"grid.N=0"}).find("grid.N"), std::string::npos);
    EXPECT_NE(message_of<benj::ParameterError>(kMinimal, {"converge.n_values=32,16"}).find("increasing"),
              std::string::npos);
}

TEST(Config, ParseErrorsCarryLineAndKey) {
    const std::string unknown = std::string(kMinimal) + "model.x = 3\n";
    EXPECT_NE(message_of<benj::ParseError>(unknown).find("'model.x' (line 8)"), std::string::npos);
    const std::string dup = std::string(kMinimal) + "grid.N = 64\n";
    EXPECT_NE(message_of<benj::ParseError>(dup).find("duplicate"), std::string::npos);
    const std::string junk = std::string(kMinimal) + "just words\n";
    EXPECT_NE(message_of<benj::ParseError>(junk).find("line 8"), std::string::npos);
    const std::string bad = std::string(kMinimal) + "integrator.dt = fast\n";
    EXPECT_NE(message_of<benj::ParseError>(bad).find("integrator.dt"), std::string::npos);
    EXPECT_NE(message_of<benj::ParseError>("model.m = 1\n").find("model.r"), std::string::npos);
    EXPECT_NE(message_of<benj::ParseError>(kMinimal, {"nope=1"}).find("nope"), std::string::npos);
}

TEST(Config, OverridesAndLists) {
    const auto cfg = parse_config(kMinimal, {"integrator.dt=1e-3", "integrator.method=ifrk4",
                                             "converge.n_values=8, 16 ,32", "converge.study=intermediate",
                                             "initial.kind=random_sobolev", "seed=9"});
    EXPECT_FALSE(cfg.auto_dt);
    EXPECT_EQ(cfg.integrator.dt, 1e-3);
    EXPECT_EQ(cfg.integrator.method, benj::Method::ifrk4);
    EXPECT_EQ(cfg.converge.n_values, (std::vector<int>{8, 16, 32}));
    EXPECT_EQ(cfg.converge.n_ref, 128);
    EXPECT_TRUE(cfg.converge.intermediate);
    EXPECT_EQ(cfg.initial.seed, 9u);
    EXPECT_EQ(cfg.echo.at("seed"), "9");
}

TEST(Config, GridOptionalForInvariants) {
    const std::string text = "model.m = 1\nmodel.r = 0.5\nmodel.gamma = 1\nmodel.delta = 1\nmodel.q = 1\n";
    EXPECT_THROW(parse_config(text), benj::ParseError);
    EXPECT_NO_THROW(parse_config(text, {}, benj::cli::ParseOptions{.require_grid = false}));
}

TEST(Commands, SolveIsDeterministicAndRoundTrips) {
    TempDir tmp;
    std::ostringstream log;
    std::vector<fs::path> dirs{tmp.path() / "a", tmp.path() / "b"};
    for (const auto& d : dirs) {
        const auto cfg = parse_config(kMinimal, {"output.dir=" + d.string(), "integrator.t_end=0.2",
                                                 "integrator.snapshot_stride=10", "integrator.dt=5e-3"});
        ASSERT_EQ(benj::cli::cmd_solve(cfg, silent(log)), 0) << log.str();
    }
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dirs[0])) names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    ASSERT_EQ(names.size(), 7u);  // 5 snapshots, invariants.csv, manifest.json
    for (const auto& name : names) {
        if (name == "manifest.json") continue;
        EXPECT_EQ(slurp(dirs[0] / name), slurp(dirs[1] / name)) << name;
    }

    const auto manifest = nlohmann::json::parse(slurp(dirs[0] / "manifest.json"));
    EXPECT_EQ(manifest["status"], "ok");
    EXPECT_EQ(manifest["version"], benj::cli::kVersion);
    EXPECT_EQ(manifest["config"]["grid.N"], "32");
    EXPECT_LE(manifest["results"]["drift"]["C"].get<double>(), 1e-14);

    // the last CSV row must be reproduced by recomputing from the last snapshot
    const std::string csv = slurp(dirs[0] / "invariants.csv");
    const std::string last_row = csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
    std::ostringstream table;
    const auto last = (dirs[0] / "snapshot_000004.txt").string();
    ASSERT_EQ(benj::cli::cmd_invariants(benj::ModelParams::benjamin(1.0, 1.0), {last}, table, silent(log)), 0);
    const std::string out = table.str();
    const std::string row = out.substr(out.find('\n') + 1);
    EXPECT_EQ(row, last + "," + last_row);
}

TEST(Commands, ConvergeWritesReport) {
    TempDir tmp;
    std::ostringstream log;
    const auto cfg = parse_config(kMinimal, {"output.dir=" + tmp.path().string(), "initial.kind=random_sobolev",
                                             "initial.mu=4", "integrator.t_end=0.1",
                                             "converge.n_values=16,32,64,128"});
    ASSERT_EQ(benj::cli::cmd_converge(cfg, silent(log)), 0) << log.str();
    std::istringstream csv(slurp(tmp.path() / "convergence.csv"));
    std::vector<std::string> lines;
    for (std::string line; std::getline(csv, line);) lines.push_back(line);
    ASSERT_EQ(lines.size(), 6u);
    EXPECT_EQ(lines[0], "N,error");
    EXPECT_EQ(lines[1].substr(0, 3), "16,");
    EXPECT_EQ(lines[5].rfind("fitted_rate=", 0), 0u);
    EXPECT_NE(lines[5].find(",fit_r2="), std::string::npos);
    const auto manifest = nlohmann::json::parse(slurp(tmp.path() / "manifest.json"));
    EXPECT_GE(manifest["results"]["fitted_rate"].get<double>(), 2.5);
}

TEST(Commands, DivergenceStillWritesManifest) {
    TempDir tmp;
    std::ostringstream log;
    const auto cfg = parse_config(kMinimal, {"output.dir=" + tmp.path().string(), "model.q=3",
                                             "initial.amplitude=40", "integrator.dt=0.1"});
    EXPECT_EQ(benj::cli::cmd_solve(cfg, silent(log)), 3);
    const auto manifest = nlohmann::json::parse(slurp(tmp.path() / "manifest.json"));
    EXPECT_EQ(manifest["status"], "diverged");
    EXPECT_EQ(manifest["exit_code"], 3);
    EXPECT_TRUE(manifest["results"].contains("diverged_at"));
    EXPECT_TRUE(fs::exists(tmp.path() / "invariants.csv"));
    EXPECT_NE(log.str().find("benj solve"), std::string::npos);
}

TEST(Commands, ValidationFailureExitsTwo) {
    TempDir tmp;
    std::ostringstream log;
    const auto cfg = parse_config(kMinimal, {"output.dir=" + tmp.path().string(), "initial.kind=file",
                                             "initial.path=" + (tmp.path() / "missing.txt").string()});
    EXPECT_EQ(benj::cli::cmd_solve(cfg, silent(log)), 2);
    const auto manifest = nlohmann::json::parse(slurp(tmp.path() / "manifest.json"));
    EXPECT_EQ(manifest["status"], "invalid");

    std::ostringstream table;
    EXPECT_EQ(benj::cli::cmd_invariants(benj::ModelParams::benjamin(1.0, 1.0), {"/nonexistent/snap.txt"}, table,
                                        silent(log)),
              2);
    EXPECT_TRUE(table.str().empty());
}

TEST(Commands, SolitonReport) {
    TempDir tmp;
    std::ostringstream log;
    const std::string text =
        "model.m = 1\nmodel.r = 0.5\nmodel.gamma = 0\nmodel.delta = 1\nmodel.q = 1\nmodel.L = 8\ngrid.N = 128\n"
        "soliton.speed = 0.5\nintegrator.t_end = 1\n";
    const auto cfg = parse_config(text, {"output.dir=" + tmp.path().string()});
    ASSERT_EQ(benj::cli::cmd_soliton(cfg, silent(log)), 0) << log.str();
    for (const char* f : {"profile.txt", "final.txt", "propagation.csv", "soliton.csv", "manifest.json"})
        EXPECT_TRUE(fs::exists(tmp.path() / f)) << f;
    const auto manifest = nlohmann::json::parse(slurp(tmp.path() / "manifest.json"));
    EXPECT_EQ(manifest["results"]["profile"], "closed_form");
    EXPECT_NEAR(manifest["results"]["speed_estimate"].get<double>(), 0.5, 1e-4);
    EXPECT_LE(manifest["results"]["shape_error_linf"].get<double>(), 1e-6);
}

TEST(Commands, ThreadsFromEnvironment) {
    ::setenv("BENJ_THREADS", "3", 1);
    EXPECT_EQ(benj::cli::threads_from_env(), 3);
    ::setenv("BENJ_THREADS", "0", 1);
    EXPECT_GE(benj::cli::threads_from_env(), 1);
    ::setenv("BENJ_THREADS", "many", 1);
    EXPECT_THROW(benj::cli::threads_from_env(), benj::ParameterError);
    ::unsetenv("BENJ_THREADS");
    EXPECT_GE(benj::cli::threads_from_env(), 1);
}
