#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>
#include <sys/wait.h>

// Integration tests that exercise the installed command-line binary end to
// end: artifact determinism, sidecar reproducibility, and error surfaces.

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string cli = FRACMORT_CLI_PATH;
const std::string fixture = FRACMORT_FIXTURE_PATH;

const fs::path& work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "fracmort_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string path_in(const std::string& name) { return (work_dir() / name).string(); }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    static int counter = 0;
    const std::string out_path = path_in("stdout_" + std::to_string(++counter));
    const std::string err_path = path_in("stderr_" + std::to_string(counter));
    const std::string cmd =
        env_prefix + "\"" + cli + "\" " + args + " > " + out_path + " 2> " + err_path;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

// Shared artifacts, fitted/generated once on first use.
const std::string& model_path() {
    static const std::string path = [] {
        const auto p = path_in("model.json");
        const auto r =
            run_cli("fit -i " + fixture + " --age 50 --sex F --years 1950:2004 -o " + p);
        REQUIRE(r.exit_code == 0);
        return p;
    }();
    return path;
}

const std::string& fbm_series_path() {
    static const std::string path = [] {
        const auto p = path_in("fbm.csv");
        REQUIRE(run_cli("gen-fgn --hurst 0.7 --n 4096 --seed 9 -o " + p).exit_code == 0);
        return p;
    }();
    return path;
}

} // namespace

TEST_CASE("fixture subcommand reproduces the bundled data file byte for byte") {
    const auto out = path_in("fixture.txt");
    const auto r = run_cli("fixture -o " + out);
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(out) == slurp(fixture));

    const auto meta = json::parse(slurp(out + ".meta.json"));
    CHECK(meta.at("command") == "fixture");
    CHECK(meta.at("parameters").at("seed") == 12);
    CHECK(meta.at("parameters").at("seed_source") == "default");
}

TEST_CASE("fit on the fixture emits a model with every parameter present") {
    const auto out = model_path();
    const auto model = json::parse(slurp(out));
    for (const char* key : {"h0", "alpha0", "alpha1", "hurst", "sigma", "lambda"}) {
        INFO(key);
        REQUIRE(model.contains(key));
        CHECK(std::isfinite(model.at(key).get<double>()));
    }
    CHECK(model.at("h0").get<double>() > 0.0);
    CHECK(model.at("hurst").get<double>() >= 0.5);
    CHECK(model.at("hurst").get<double>() <= 0.99);
    CHECK(model.at("fit_window") == json::array({1950, 2004}));

    const auto meta = json::parse(slurp(out + ".meta.json"));
    CHECK(meta.at("command") == "fit");
    CHECK(meta.at("parameters").at("age") == 50);
}

TEST_CASE("forecast runs are byte-identical for equal seeds") {
    const auto model = model_path();
    const auto b1 = path_in("band1.csv");
    const auto b2 = path_in("band2.csv");
    const std::string base = "forecast --model " + model +
                             " --n-years 30 --n-paths 1000 --coverage 0.955 --seed 1 -o ";
    REQUIRE(run_cli(base + b1).exit_code == 0);
    REQUIRE(run_cli(base + b2).exit_code == 0);
    const auto text = slurp(b1);
    CHECK(text == slurp(b2));
    CHECK(text.rfind("year,mean,lower,upper\n", 0) == 0);

    const auto different = path_in("band_seed2.csv");
    REQUIRE(run_cli("forecast --model " + model +
                    " --n-years 30 --n-paths 1000 --seed 2 -o " + different)
                .exit_code == 0);
    CHECK(text != slurp(different));
}

TEST_CASE("fit piped into forecast equals the one-shot pipeline bit-exactly") {
    const auto staged = path_in("band_staged.csv");
    const auto oneshot = path_in("band_oneshot.csv");
    REQUIRE(run_cli("forecast --model " + model_path() +
                    " --n-years 25 --n-paths 500 --seed 7 -o " + staged)
                .exit_code == 0);
    REQUIRE(run_cli("forecast -i " + fixture +
                    " --age 50 --sex F --years 1950:2004 --n-years 25 --n-paths 500 --seed 7 -o " +
                    oneshot)
                .exit_code == 0);
    CHECK(slurp(staged) == slurp(oneshot));
}

TEST_CASE("a forecast artifact is reproducible from its sidecar alone") {
    const auto band = path_in("band_sidecar.csv");
    REQUIRE(run_cli("forecast --model " + model_path() +
                    " --n-years 20 --n-paths 400 --coverage 0.9 --seed 11 -o " + band)
                .exit_code == 0);
    const auto meta = json::parse(slurp(band + ".meta.json"));
    const auto& params = meta.at("parameters");

    // Rebuild the inputs using nothing but the sidecar.
    const auto model_copy = path_in("model_from_sidecar.json");
    std::ofstream(model_copy) << params.at("model").dump(2) << "\n";
    std::ostringstream cmd;
    cmd << "forecast --model " << model_copy << " --n-years " << params.at("n_years")
        << " --n-paths " << params.at("n_paths") << " --coverage "
        << params.at("coverage").get<double>();
    if (params.at("quantile_bands").get<bool>()) cmd << " --quantile-bands";
    cmd << " --seed " << params.at("seed") << " -o " << path_in("band_rebuilt.csv");
    REQUIRE(run_cli(cmd.str()).exit_code == 0);
    CHECK(slurp(path_in("band_rebuilt.csv")) == slurp(band));
}

TEST_CASE("est-hurst on a constant column fails with an insufficient-data error") {
    const auto series = path_in("const.csv");
    {
        std::ofstream out(series);
        out << "value\n";
        for (int i = 0; i < 24; ++i) out << "3.5\n";
    }
    const auto r = run_cli("est-hurst -i " + series + " --method whittle");
    REQUIRE(r.exit_code != 0);
    const auto err = json::parse(r.err);
    CHECK(err.at("error").at("module") == "hurst");
    CHECK(err.at("error").at("type") == "insufficient-data");
}

TEST_CASE("estimators recover the generator parameters through the file pipeline") {
    const auto& series = fbm_series_path();

    auto r = run_cli("est-qgv -i " + series);
    REQUIRE(r.exit_code == 0);
    auto est = json::parse(r.out);
    CHECK(est.at("h").get<double>() == Catch::Approx(0.7).margin(0.05));
    CHECK(est.at("sigma").get<double>() == Catch::Approx(1.0).margin(0.1));

    r = run_cli("est-hurst -i " + series + " --column increment --method whittle");
    REQUIRE(r.exit_code == 0);
    est = json::parse(r.out);
    CHECK(est.at("hurst").get<double>() == Catch::Approx(0.7).margin(0.1));
    CHECK(est.at("method") == "local-whittle");

    const auto diag = path_in("diag.csv");
    r = run_cli("est-hurst -i " + series + " --column increment --diagnostics " + diag);
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(diag).rfind("scale,statistic\n", 0) == 0);
}

TEST_CASE("compare mode tabulates all three estimators over sliding windows") {
    const auto out = path_in("compare.csv");
    const auto r = run_cli("est-hurst -i " + fbm_series_path() +
                           " --column increment --compare-hurst --window 2048 --step 1024 -o " +
                           out);
    REQUIRE(r.exit_code == 0);
    std::istringstream is(slurp(out));
    std::string line;
    std::getline(is, line);
    CHECK(line == "start,end,rs-analysis,rescaled-range,local-whittle");
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        // start,end plus three numeric estimates
        CHECK(std::count(line.begin(), line.end(), ',') == 4);
    }
    CHECK(rows == 3);
}

TEST_CASE("seed precedence is flag over environment over default") {
    const std::string args = "gen-fgn --hurst 0.5 --n 4";
    const auto by_flag = run_cli(args + " --seed 777");
    const auto by_env = run_cli(args, "FRACMORT_SEED=777 ");
    const auto flag_beats_env = run_cli(args + " --seed 777", "FRACMORT_SEED=111 ");
    const auto by_default = run_cli(args);
    REQUIRE(by_flag.exit_code == 0);
    CHECK(by_flag.out == by_env.out);
    CHECK(by_flag.out == flag_beats_env.out);
    CHECK(by_flag.out != by_default.out);

    const auto bad_env = run_cli(args, "FRACMORT_SEED=bogus ");
    REQUIRE(bad_env.exit_code == 1);
    const auto err = json::parse(bad_env.err);
    CHECK(err.at("error").at("type") == "invalid-argument");
}

TEST_CASE("error JSON names the originating module") {
    auto r = run_cli("fit -i " + path_in("does_not_exist.txt") + " --age 50");
    REQUIRE(r.exit_code == 1);
    auto err = json::parse(r.err);
    CHECK(err.at("error").at("module") == "cli");
    CHECK(err.at("error").at("type") == "not-found");

    r = run_cli("fit -i " + fixture + " --age 95");
    REQUIRE(r.exit_code == 1);
    err = json::parse(r.err);
    CHECK(err.at("error").at("type") == "invalid-argument");
    CHECK(err.at("error").at("message").get<std::string>().find("max-age") != std::string::npos);

    r = run_cli("est-hurst --definitely-not-a-flag");
    REQUIRE(r.exit_code == 2);
    err = json::parse(r.err);
    CHECK(err.at("error").at("module") == "cli");
    CHECK(err.at("error").at("type") == "usage");
}

TEST_CASE("survival subcommand reports a probability with its standard error") {
    const auto r = run_cli("survival --model " + model_path() +
                           " --horizon 15 --n-paths 300 --seed 21");
    REQUIRE(r.exit_code == 0);
    const auto out = json::parse(r.out);
    const double estimate = out.at("estimate").get<double>();
    CHECK(estimate > 0.0);
    CHECK(estimate <= 1.0);
    CHECK(out.at("std_error").get<double>() >= 0.0);
    CHECK(out.at("seed") == 21);
}
