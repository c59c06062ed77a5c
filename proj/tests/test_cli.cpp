#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(QNET_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult result;
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) result.output += buf;
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("qnet_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int data_rows(const std::string& csv) {
    int rows = 0;
    std::istringstream in(csv);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        ++rows;
    }
    return rows;
}

}  // namespace

TEST_CASE("bad flags exit with the usage code") {
    CHECK(run_cli("definitely-not-a-command").exit_code == 2);
    CHECK(run_cli("purify --protocol").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("plan --distances backwards").exit_code == 2);
    CHECK(run_cli("purify --protocol carrier-pigeon").exit_code == 2);
}

TEST_CASE("help exits cleanly") {
    CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("purify emits a trajectory dataset") {
    const fs::path dir = fresh_dir("purify");
    const CliResult r = run_cli("--out " + dir.string() +
                                " purify --protocol dejmps --start-fidelity 0.85 --rounds 8");
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(dir / "purify.csv");
    CHECK(csv.find("round,fidelity,error,p_success,expected_pairs") != std::string::npos);
    CHECK(csv.find("# protocol = dejmps") != std::string::npos);
    CHECK(data_rows(csv) == 9);  // round 0 plus eight rounds
}

TEST_CASE("plan emits one row per distance with feasibility markers") {
    const fs::path dir = fresh_dir("plan");
    const CliResult r =
        run_cli("--out " + dir.string() + " plan --scheme endpoints-only --distances 600:6000:600");
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(dir / "plan.csv");
    CHECK(data_rows(csv) == 10);
    CHECK(csv.find("feasible") != std::string::npos);
    CHECK(csv.find(",true") != std::string::npos);
}

TEST_CASE("model reports the crossover distance") {
    const fs::path dir = fresh_dir("model");
    const CliResult r = run_cli("--out " + dir.string() + " model --distances 0:1200:600");
    CHECK(r.exit_code == 0);
    CHECK(slurp(dir / "model.csv").find("# crossover_distance_cells = 617") != std::string::npos);
}

TEST_CASE("sensitivity marks the breakdown regime") {
    const fs::path dir = fresh_dir("sens");
    const CliResult r =
        run_cli("--out " + dir.string() + " sensitivity --rates 1e-8,1e-6,1e-3 --hops 8");
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(dir / "sensitivity.csv");
    CHECK(data_rows(csv) == 3);
    CHECK(csv.find(",false") != std::string::npos);  // 1e-3 is past breakdown
}

TEST_CASE("teleport-chain tabulates error growth") {
    const fs::path dir = fresh_dir("chain");
    const CliResult r = run_cli("--out " + dir.string() + " teleport-chain --hops 16");
    CHECK(r.exit_code == 0);
    CHECK(data_rows(slurp(dir / "teleport_chain.csv")) == 17);
}

TEST_CASE("simulate writes a parseable report") {
    const fs::path dir = fresh_dir("sim");
    const CliResult r = run_cli("--out " + dir.string() +
                                " simulate --benchmark qft --grid 2x2 --t 4 --g 4 --p 1");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("makespan_us=") != std::string::npos);
    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(report["makespan_us"].get<double>() > 0.0);
    CHECK(report["instructions"].get<int>() == 6);
}

TEST_CASE("identical invocations produce byte-identical outputs") {
    const fs::path dir1 = fresh_dir("repro1");
    const fs::path dir2 = fresh_dir("repro2");
    const std::string sweep_args =
        " sweep --benchmark qft --layout home-base --grid 2x2 --t 2,4 --couple-tg --p 1"
        " --normalize 64,64,64";
    CHECK(run_cli("--out " + dir1.string() + sweep_args).exit_code == 0);
    CHECK(run_cli("--out " + dir2.string() + sweep_args).exit_code == 0);
    std::string a = slurp(dir1 / "sweep.csv");
    std::string b = slurp(dir2 / "sweep.csv");
    // Drop the command echo; it contains the differing --out paths.
    a = a.substr(a.find('\n') + 1);
    b = b.substr(b.find('\n') + 1);
    CHECK(a == b);
    CHECK(data_rows(a) == 2);
}

TEST_CASE("json mirrors accompany datasets on request") {
    const fs::path dir = fresh_dir("mirror");
    const CliResult r = run_cli("--json --out " + dir.string() + " purify --rounds 3");
    CHECK(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(slurp(dir / "purify.json"));
    CHECK(doc["rows"].size() == 4);
}

TEST_CASE("config files configure the run") {
    const fs::path dir = fresh_dir("params");
    const fs::path cfg = dir / "slow.cfg";
    {
        std::ofstream out(cfg);
        out << "t_mv = 0.4\n";  // doubles the per-cell move time
    }
    const CliResult r = run_cli("--params " + cfg.string() + " --out " + dir.string() +
                                " model --distances 0:600:600");
    CHECK(r.exit_code == 0);
    // Crossover shifts when ballistic movement slows down.
    CHECK(slurp(dir / "model.csv").find("crossover_distance_cells = 307") != std::string::npos);
}

TEST_CASE("infeasible channels exit with the diagnosis code") {
    const fs::path dir = fresh_dir("infeasible");
    const fs::path cfg = dir / "broken.cfg";
    {
        std::ofstream out(cfg);
        out << "p_1q = 1e-4\np_2q = 1e-4\np_mv = 1e-4\np_ms = 1e-4\n";
    }
    const CliResult r = run_cli("--params " + cfg.string() + " --out " + dir.string() +
                                " simulate --benchmark qft --grid 2x2 --t 4 --g 4 --p 1");
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("infeasible") != std::string::npos);
}
