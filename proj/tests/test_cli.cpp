#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "z2sim/analysis.hpp"
#include "z2sim/config.hpp"
#include "z2sim/csvio.hpp"
#include "z2sim/runner.hpp"

using namespace z2sim;

namespace {
std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};
}  // namespace

TEST_CASE("config parsing") {
    SUBCASE("values, comments and dotted keys") {
        auto cfg = Config::from_text(
            "# a comment\n"
            "lattice.lx = 3   # trailing comment\n"
            "lattice.ly = 2\n"
            "schedule.total_time = 1.5\n"
            "observable.loops = 0 0 1 1 ; 1 1 2 1\n"
            "trajectory = true\n");
        CHECK(cfg.get_int("lattice.lx", 0) == 3);
        CHECK(cfg.get_double("schedule.total_time", 0) == doctest::Approx(1.5));
        CHECK(cfg.get_bool("trajectory", false));
        auto loops = cfg.get_loops("observable.loops", {});
        REQUIRE(loops.size() == 2);
        CHECK(loops[1].width == 2);
        CHECK(cfg.get_int("schedule.steps", 80) == 80);  // fallback
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(Config::from_text("lattice.xl = 3\n"), ConfigError);
    }
    SUBCASE("malformed numbers are rejected") {
        auto cfg = Config::from_text("lattice.lx = banana\n");
        CHECK_THROWS_AS(cfg.get_int("lattice.lx", 0), ConfigError);
    }
    SUBCASE("hash depends on content only") {
        auto a = Config::from_text("lattice.lx = 2\nlattice.ly = 3\n");
        auto b = Config::from_text("lattice.ly = 3\nlattice.lx = 2\n");
        auto c = Config::from_text("lattice.lx = 2\nlattice.ly = 4\n");
        CHECK(a.hash() == b.hash());
        CHECK(a.hash() != c.hash());
    }
}

TEST_CASE("csv output") {
    TempDir tmp("z2sim_csv_test");
    const auto path = (tmp.path / "t.csv").string();
    SUBCASE("17 significant digits round trip") {
        const double v = 0.12345678901234567;
        write_curve_csv(path, {{"s", v, "obs", v, "d", v, 3, "dual"}}, 0xabcdef);
        const std::string text = slurp(path);
        CHECK(text.find("# config_hash=0000000000abcdef") == 0);
        CHECK(text.find("sweep,value,observable,obs_value,direction,T,M,engine") !=
              std::string::npos);
        std::istringstream ss(text);
        std::string line;
        std::getline(ss, line);
        std::getline(ss, line);
        std::getline(ss, line);
        const auto first_comma = line.find(',');
        const auto second_comma = line.find(',', first_comma + 1);
        const double back = std::stod(line.substr(first_comma + 1, second_comma - first_comma));
        CHECK(back == v);
    }
}

TEST_CASE("slope fits") {
    SUBCASE("exact power law") {
        std::vector<std::pair<double, double>> pts;
        for (double x : {1.0, 2.0, 4.0, 8.0, 16.0}) pts.emplace_back(x, 5.0 * std::pow(x, -2.0));
        auto fit = fit_slope(pts);
        CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-9));
        CHECK(fit.stderr_slope < 1e-9);
    }
    SUBCASE("too few points") {
        CHECK_THROWS_AS(fit_slope({{1, 1}, {2, 2}}), std::invalid_argument);
    }
    SUBCASE("nonpositive data") {
        CHECK_THROWS_AS(fit_slope({{1, 1}, {2, -2}, {3, 3}}), std::invalid_argument);
    }
}

TEST_CASE("curve crossings") {
    SUBCASE("straight lines cross where expected") {
        std::vector<std::pair<double, double>> a, b;
        for (double x : {0.0, 1.0, 2.0, 3.0}) {
            a.emplace_back(x, x);
            b.emplace_back(x, 2.0 - x);
        }
        auto c = find_crossing(a, b);
        REQUIRE(c.has_value());
        CHECK(*c == doctest::Approx(1.0));
    }
    SUBCASE("parallel curves have none") {
        std::vector<std::pair<double, double>> a, b;
        for (double x : {0.0, 1.0, 2.0}) {
            a.emplace_back(x, x);
            b.emplace_back(x, x + 1.0);
        }
        CHECK_FALSE(find_crossing(a, b).has_value());
    }
    SUBCASE("mismatched grids are rejected") {
        CHECK_THROWS_AS(find_crossing({{0, 1}, {1, 2}}, {{0.25, 1}, {1, 2}}),
                        std::invalid_argument);
    }
}

TEST_CASE("command determinism: identical config gives identical bytes") {
    TempDir tmp("z2sim_det_test");
    auto cfg = Config::from_text(
        "lattice.lx = 2\nlattice.ly = 2\nwilson.state = random\nseed = 777\n"
        "observable.loops = 0 0 1 1 ; 0 0 2 2\n");
    std::ostringstream sink;
    RunContext ctx{cfg, tmp.path.string(), false, &sink};
    cmd_wilson(ctx);
    const std::string first = slurp((tmp.path / "wilson.csv").string());
    cmd_wilson(ctx);
    const std::string second = slurp((tmp.path / "wilson.csv").string());
    CHECK(first == second);
    CHECK(first.find("# config_hash=") == 0);

    // a fused-kernel run with more worker threads must also match bitwise
    worker_threads() = 3;
    cmd_wilson(ctx);
    worker_threads() = 1;
    CHECK(slurp((tmp.path / "wilson.csv").string()) == first);
}

TEST_CASE("engine selection and capacity mapping") {
    TempDir tmp("z2sim_engine_test");
    std::ostringstream sink;
    SUBCASE("auto picks full -> links -> dual by capacity") {
        CHECK(auto_engine(build_lattice(2, 2)) == EngineKind::full);    // 16 qubits
        CHECK(auto_engine(build_lattice(2, 3)) == EngineKind::full);    // 23 qubits
        CHECK(auto_engine(build_lattice(3, 3)) == EngineKind::links);   // 24 links
        CHECK(auto_engine(build_lattice(4, 4)) == EngineKind::dual);    // 40 links
    }
    SUBCASE("explicit oversize engine requests throw CapacityError") {
        auto cfg = Config::from_text("lattice.lx = 4\nlattice.ly = 4\nengine = full\n");
        RunContext ctx{cfg, tmp.path.string(), false, &sink};
        CHECK_THROWS_AS(cmd_adiabatic(ctx), CapacityError);
        auto cfg2 = Config::from_text("lattice.lx = 4\nlattice.ly = 4\nengine = links\n");
        RunContext ctx2{cfg2, tmp.path.string(), false, &sink};
        CHECK_THROWS_AS(cmd_adiabatic(ctx2), CapacityError);
    }
    SUBCASE("nonsense engine names are config errors") {
        auto cfg = Config::from_text("engine = quantum\n");
        RunContext ctx{cfg, tmp.path.string(), false, &sink};
        CHECK_THROWS_AS(cmd_adiabatic(ctx), ConfigError);
    }
    SUBCASE("iteration caps surface as convergence errors") {
        auto cfg = Config::from_text(
            "lattice.lx = 3\nlattice.ly = 3\ndual.max_iterations = 2\n"
            "dual.dense_threshold = 1\nsweep.points = 2\nsweep.min = 1\nsweep.max = 2\n");
        RunContext ctx{cfg, tmp.path.string(), false, &sink};
        CHECK_THROWS_AS(cmd_exact_gs(ctx), ConvergenceError);
    }
}

TEST_CASE("trajectory mode records step by step") {
    TempDir tmp("z2sim_traj_test");
    std::ostringstream sink;
    auto cfg = Config::from_text(
        "lattice.lx = 2\nlattice.ly = 2\nengine = dual\ntrajectory = true\n"
        "schedule.direction = electric\nschedule.final_ratio = 2\nschedule.steps = 8\n"
        "record_every = 2\nobservable.gauge = true\n");
    RunContext ctx{cfg, tmp.path.string(), false, &sink};
    cmd_adiabatic(ctx);
    const std::string text = slurp((tmp.path / "adiabatic_trajectory.csv").string());
    CHECK(text.find("step,0,") != std::string::npos);
    CHECK(text.find("step,8,") != std::string::npos);
    CHECK(text.find("gauge_max_err") != std::string::npos);
}
