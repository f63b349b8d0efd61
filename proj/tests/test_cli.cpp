#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "hdrelay_cli_test";

int run(const std::string& args) {
    const std::string cmd = std::string(HDRELAY_CLI) + " " + args + " > " + (kDir / "out.txt").string() + " 2> " +
                            (kDir / "err.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path write_config(const std::string& name, const std::string& text) {
    const auto p = kDir / name;
    std::ofstream(p) << text;
    return p;
}

struct Scratch {
    Scratch() {
        fs::remove_all(kDir);
        fs::create_directories(kDir);
    }
    ~Scratch() { fs::remove_all(kDir); }
};

}  // namespace

TEST_CASE("cli rate prints one csv row") {
    Scratch s;
    const auto cfg = write_config("a.cfg", "budget = 200\n");
    CHECK(run("rate single-hop --config " + cfg.string() + " --n-relays 0") == 0);
    const auto out = slurp(kDir / "out.txt");
    CHECK(out.rfind("r,N,theta,snr_db,protocol,schedule,combining,rate_bpcu,binding,evals,seed\n", 0) == 0);
    CHECK(out.find(",3.45943,") != std::string::npos);
}

TEST_CASE("cli validation errors exit with 2") {
    Scratch s;
    const auto bad = write_config("bad.cfg", "theta = 4\nfoo = 1\n");
    CHECK(run("rate df --config " + bad.string()) == 2);
    CHECK(slurp(kDir / "err.txt").find("unknown key 'foo'") != std::string::npos);
    const auto ok = write_config("ok.cfg", "budget = 50\n");
    CHECK(run("rate nonsense --config " + ok.string()) == 2);
    CHECK(run("rate df --config " + ok.string() + " --schedule sometimes") == 2);
    CHECK(run("rate df") == 2);
    CHECK(run("sweep NoSuchKind --config " + ok.string() + " --out " + (kDir / "o").string()) == 2);
    CHECK(run("rate df --config " + (kDir / "missing.cfg").string()) == 2);
    CHECK(run("rate df --config " + ok.string() + " --theta -1") == 2);
}

TEST_CASE("cli sweep writes csv and svg") {
    Scratch s;
    const auto cfg = write_config("sweep.cfg", "start = 0\nstop = 0.5\nstep = 0.5\nprotocols = single-hop, cutset\nbudget = 100\n");
    const auto out = kDir / "res";
    CHECK(run("sweep SingleRelayDistance --config " + cfg.string() + " --out " + out.string() + " --plot") == 0);
    CHECK(fs::exists(out / "results.csv"));
    CHECK(fs::exists(out / "results.svg"));
    const auto csv = slurp(out / "results.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("cli selftest passes") {
    Scratch s;
    CHECK(run("selftest") == 0);
    CHECK(slurp(kDir / "out.txt").find("FAIL") == std::string::npos);
}
