#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tlsel/cli.hpp"

using namespace tlsel;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

// runs the built binary from inside `dir`, capturing stdout+stderr
RunResult run_cli(const fs::path& dir, const std::string& args) {
    const fs::path log = dir / "cli_output.log";
    const std::string cmd = "cd " + dir.string() + " && " + std::string(TLSEL_BIN) + " " +
                            args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream file(log);
    std::stringstream buffer;
    buffer << file.rdbuf();
    res.output = buffer.str();
    return res;
}

fs::path make_workdir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::trunc);
    file << content;
}

std::string fixture_config(const std::string& extra = "") {
    const std::string fixtures = TLSEL_FIXTURE_DIR;
    return std::string("{\n") +
           "  \"task_id\": \"fixture\",\n"
           "  \"method\": \"idtr\",\n"
           "  \"mode\": \"exhaustive\",\n"
           "  \"metrics\": [\"euclidean\", \"cosine\"],\n"
           "  \"n_in\": 3,\n"
           "  \"n_out\": 1,\n"
           "  \"n_runs\": 3,\n"
           "  \"sources\": [{\"path\": \"" +
           fixtures + "/shifted_cluster_source.csv\", \"domain_id\": \"src\"}],\n" +
           "  \"target\": {\"path\": \"" + fixtures +
           "/shifted_cluster_target.csv\", \"domain_id\": \"tgt\"}" +
           (extra.empty() ? "" : ",\n" + extra) + "\n}\n";
}

std::string read_file(const fs::path& path) {
    std::ifstream file(path);
    std::stringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

}  // namespace

TEST_CASE("config parsing") {
    SUBCASE("valid config round") {
        const CliConfig cfg = parse_config_text(fixture_config());
        CHECK(cfg.method == "idtr");
        CHECK(cfg.metrics.size() == 2);
        CHECK(cfg.n_runs == 3);
        CHECK(cfg.sources.size() == 1);
        CHECK(cfg.sources[0].domain_id == "src");
    }
    SUBCASE("unknown top-level key is rejected") {
        CHECK_THROWS_AS(parse_config_text(fixture_config("  \"tpyo\": 1")), ConfigError);
    }
    SUBCASE("unknown nested key is rejected") {
        CHECK_THROWS_AS(parse_config_text(fixture_config("  \"elm\": {\"hidde\": 3}")),
                        ConfigError);
    }
    SUBCASE("unknown metric is rejected") {
        std::string text = fixture_config();
        const auto pos = text.find("\"cosine\"");
        text.replace(pos, 8, "\"cosign\"");
        CHECK_THROWS_AS(parse_config_text(text), ConfigError);
    }
    SUBCASE("malformed json") {
        CHECK_THROWS_AS(parse_config_text("{oops"), ConfigError);
    }
    SUBCASE("missing required fields") {
        CHECK_THROWS_AS(parse_config_text("{}"), ConfigError);
    }
    SUBCASE("domain id defaults to the file stem") {
        const CliConfig cfg = parse_config_text(
            "{\"n_in\":1,\"n_out\":1,\"target\":{\"path\":\"/tmp/foo_bar.csv\"}}");
        CHECK(cfg.target.domain_id == "foo_bar");
    }
}

TEST_CASE("cli distances") {
    const fs::path dir = make_workdir("tlsel_cli_distances");
    write_file(dir / "cfg.json", fixture_config());

    SUBCASE("writes one row per source datum") {
        const RunResult res = run_cli(dir, "distances --config cfg.json");
        CHECK(res.exit_code == 0);
        const std::string csv = read_file(dir / "distances.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 61);  // header + 60 rows
        CHECK(csv.rfind("source_index,euclidean_raw,euclidean_norm", 0) == 0);
    }
    SUBCASE("missing dataset file exits 3 and names the path") {
        std::string text = fixture_config();
        const auto pos = text.find("shifted_cluster_source.csv");
        text.replace(pos, 26, "no_such_source.csv");
        write_file(dir / "missing.json", text);
        const RunResult res = run_cli(dir, "distances --config missing.json");
        CHECK(res.exit_code == 3);
        CHECK(res.output.find("no_such_source.csv") != std::string::npos);
    }
    SUBCASE("unknown metric exits 2") {
        std::string text = fixture_config();
        const auto pos = text.find("\"cosine\"");
        text.replace(pos, 8, "\"cosign\"");
        write_file(dir / "bad_metric.json", text);
        const RunResult res = run_cli(dir, "distances --config bad_metric.json");
        CHECK(res.exit_code == 2);
    }
    SUBCASE("missing config exits 2") {
        const RunResult res = run_cli(dir, "distances --config nope.json");
        CHECK(res.exit_code == 2);
    }
}

TEST_CASE("cli select") {
    const fs::path dir = make_workdir("tlsel_cli_select");
    write_file(dir / "cfg.json", fixture_config("  \"out\": \"report.json\""));

    SUBCASE("exhaustive run picks the argmin step and is repeatable") {
        const RunResult res = run_cli(dir, "select --config cfg.json --mode exhaustive");
        CHECK(res.exit_code == 0);
        const std::string json = read_file(dir / "report.json");
        const EvalReport report = report_from_json(json);
        REQUIRE(report.trace.has_value());
        double best = report.trace->steps[0].sigma;
        for (const auto& e : report.trace->steps) best = std::min(best, e.sigma);
        CHECK(report.median_rmse == best);

        // same seed: byte-identical output (needs --force to overwrite)
        const RunResult repeat =
            run_cli(dir, "select --config cfg.json --mode exhaustive --force");
        CHECK(repeat.exit_code == 0);
        CHECK(read_file(dir / "report.json") == json);
    }
    SUBCASE("refuses to clobber without --force") {
        write_file(dir / "report.json", "sentinel");
        const RunResult res = run_cli(dir, "select --config cfg.json --mode exhaustive");
        CHECK(res.exit_code == 2);
        CHECK(read_file(dir / "report.json") == "sentinel");
    }
    SUBCASE("local mode matches the trigger rule") {
        write_file(dir / "local.json", fixture_config("  \"out\": \"local.json.out\""));
        const RunResult res = run_cli(dir, "select --config local.json --mode local");
        CHECK(res.exit_code == 0);
        CHECK(res.output.find("chosen step") != std::string::npos);
    }
}

TEST_CASE("cli evaluate") {
    const fs::path dir = make_workdir("tlsel_cli_evaluate");
    write_file(dir / "cfg.json", fixture_config("  \"out\": \"eval.csv\""));

    SUBCASE("subset all") {
        const RunResult res = run_cli(dir, "evaluate --config cfg.json --subset all");
        CHECK(res.exit_code == 0);
        const std::string csv = read_file(dir / "eval.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
        CHECK(csv.find("all-source") != std::string::npos);
    }
    SUBCASE("subset from a file") {
        write_file(dir / "subset.txt", "0 1 2 3 4 5 6 7\n");
        const RunResult res = run_cli(
            dir, "evaluate --config cfg.json --subset subset.txt --out sub.csv");
        CHECK(res.exit_code == 0);
        CHECK(read_file(dir / "sub.csv").find("fixture,idtr") != std::string::npos);
    }
    SUBCASE("out-of-range subset index exits 3") {
        write_file(dir / "bad.txt", "0 99\n");
        const RunResult res =
            run_cli(dir, "evaluate --config cfg.json --subset bad.txt --out bad.csv");
        CHECK(res.exit_code == 3);
    }
    SUBCASE("non-numeric subset file exits 3") {
        write_file(dir / "junk.txt", "0 abc\n");
        const RunResult res =
            run_cli(dir, "evaluate --config cfg.json --subset junk.txt --out junk.csv");
        CHECK(res.exit_code == 3);
    }
}

TEST_CASE("cli reproduce guards") {
    const fs::path dir = make_workdir("tlsel_cli_reproduce");
    SUBCASE("unknown task exits 2") {
        fs::create_directories(dir / "data");
        const RunResult res = run_cli(dir, "reproduce --task 99 --data data");
        CHECK(res.exit_code == 2);
    }
    SUBCASE("missing data directory exits 3") {
        const RunResult res = run_cli(dir, "reproduce --task 1 --data missing_dir");
        CHECK(res.exit_code == 3);
    }
    SUBCASE("present directory without datasets exits 3 with a hint") {
        fs::create_directories(dir / "data");
        const RunResult res = run_cli(dir, "reproduce --task 1 --data data");
        CHECK(res.exit_code == 3);
        CHECK(res.output.find("README") != std::string::npos);
    }
}

TEST_CASE("cli global flags") {
    const fs::path dir = make_workdir("tlsel_cli_flags");
    write_file(dir / "cfg.json", fixture_config("  \"out\": \"a.json\""));

    // --seed changes results; --out overrides the config
    const RunResult a = run_cli(dir, "select --config cfg.json --mode exhaustive");
    CHECK(a.exit_code == 0);
    const RunResult b =
        run_cli(dir, "select --config cfg.json --mode exhaustive --seed 5 --out b.json");
    CHECK(b.exit_code == 0);
    const EvalReport ra = report_from_json(read_file(dir / "a.json"));
    const EvalReport rb = report_from_json(read_file(dir / "b.json"));
    CHECK(ra.master_seed == 0);
    CHECK(rb.master_seed == 5);
    CHECK(ra.digest != rb.digest);
}
