#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "voxrefine/data.hpp"

namespace fs = std::filesystem;
using namespace voxrefine;

namespace {

const fs::path kWork = fs::temp_directory_path() / "voxrefine_cli_test";

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args) {
    const fs::path log = kWork / "last_output.txt";
    const std::string cmd = "cd '" + kWork.string() + "' && '" VOXREFINE_BIN "' " + args + " > '" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_tree(const fs::path& a, const fs::path& b) {
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), a);
        if (!fs::exists(b / rel) || slurp(e.path()) != slurp(b / rel)) return false;
        ++n;
    }
    std::size_t m = 0;
    for (const auto& e : fs::recursive_directory_iterator(b)) m += e.is_regular_file();
    return n == m && n > 0;
}

struct Workspace {
    Workspace() {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
    }
};

const std::string kSmallData = "--resolution 16 --image-size 56 --candidates 40";

}  // namespace

TEST_CASE_FIXTURE(Workspace, "eval of a grid against itself") {
    REQUIRE(run("gen-data --out ds --count 1 --seed 3 " + kSmallData).code == 0);
    const auto r = run("eval --pred ds/sample_000000/clean.vxg --gt ds/sample_000000/clean.vxg");
    CHECK(r.code == 0);
    CHECK(r.out.find("IoU 1.000000") != std::string::npos);
    CHECK(r.out.find("CD 0.000000") != std::string::npos);
}

TEST_CASE_FIXTURE(Workspace, "corrupt is reproducible for a fixed seed") {
    REQUIRE(run("gen-data --out ds --count 1 --seed 3 " + kSmallData).code == 0);
    CHECK(run("corrupt --in ds/sample_000000/clean.vxg --out a.vxg --family synthetic --seed 7").code == 0);
    CHECK(run("corrupt --in ds/sample_000000/clean.vxg --out b.vxg --family synthetic --seed 7 --spec-out s.json").code == 0);
    CHECK(slurp(kWork / "a.vxg") == slurp(kWork / "b.vxg"));
    CHECK(nlohmann::json::parse(slurp(kWork / "s.json"))["family"] == "synthetic");
    CHECK(run("corrupt --in ds/sample_000000/clean.vxg --out c.vxg --family halfspace --seed 7").code == 0);
    CHECK(slurp(kWork / "a.vxg") != slurp(kWork / "c.vxg"));
}

TEST_CASE_FIXTURE(Workspace, "exit codes") {
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("eval --pred x.vxg").code == 1);
    CHECK(run("eval --pred x.vxg --gt y.vxg --bogus 1").code == 1);
    CHECK(run("corrupt --in x.vxg --out y.vxg --family vfm").code == 1);
    CHECK(run("refine --run r --out o.vxg --ode rk4").code == 1);
    const auto missing = run("eval --pred missing.vxg --gt missing.vxg");
    CHECK(missing.code == 2);
    CHECK(missing.out.find("missing.vxg") != std::string::npos);
    CHECK(run("gen-data --out ds --count 1 --resolution 4").code == 1);
    CHECK(run("gen-data --out ds --count 1 --image-size 50").code == 1);
    CHECK(run("--help").code == 0);
}

TEST_CASE_FIXTURE(Workspace, "help documents every flag") {
    for (const std::string sub : {"gen-data", "corrupt", "sdf", "select-views", "render-index", "train", "refine", "eval", "attn-dump"}) {
        const auto r = run(sub + " --help");
        CHECK(r.code == 0);
        CHECK(r.out.find("--config") != std::string::npos);
        // every option line carries a description
        std::istringstream lines(r.out);
        for (std::string line; std::getline(lines, line);) {
            const auto pos = line.find("  --");
            if (pos == std::string::npos || pos > 2) continue;
            const auto rest = line.substr(pos + 2);
            const bool described = rest.find("  ") != std::string::npos;
            INFO(sub << ": " << line);
            if (!described) {
                std::string next;
                std::getline(lines, next);
                CHECK(next.find_first_not_of(' ') != std::string::npos);
            }
        }
    }
    CHECK(run("gen-data --help").out.find("--pitch-min") != std::string::npos);
    CHECK(run("refine --help").out.find("--ode") != std::string::npos);
}

TEST_CASE_FIXTURE(Workspace, "config files: precedence, echo and unknown keys") {
    {
        std::ofstream cfg(kWork / "gen.toml");
        cfg << "seed = 11\ncount = 2\nresolution = 16\nimage-size = 56\ncandidates = 40\n";
    }
    REQUIRE(run("gen-data --out a --config gen.toml").code == 0);
    REQUIRE(run("gen-data --out b --config gen.toml --seed 12").code == 0);
    const auto manifest_a = nlohmann::json::parse(slurp(kWork / "a" / "manifest.json"));
    const auto manifest_b = nlohmann::json::parse(slurp(kWork / "b" / "manifest.json"));
    CHECK(manifest_a["seed"] == 11);
    CHECK(manifest_b["seed"] == 12);
    CHECK(manifest_a["samples"].size() == 2);
    const auto echoed = slurp(kWork / "b" / "resolved_config.toml");
    CHECK(echoed.find("seed=12") != std::string::npos);
    CHECK(echoed.find("resolution=16") != std::string::npos);
    // the echoed file is itself a valid config
    REQUIRE(run("gen-data --out c --config b/resolved_config.toml").code == 0);
    CHECK(same_tree(kWork / "b" / "sample_000000", kWork / "c" / "sample_000000"));

    {
        std::ofstream cfg(kWork / "bad.toml");
        cfg << "seed = 1\ncolour = 3\n";
    }
    const auto bad = run("gen-data --out d --config bad.toml");
    CHECK(bad.code == 1);
    CHECK(bad.out.find("colour") != std::string::npos);
    CHECK(run("gen-data --out d --config nope.toml").code == 2);
}

TEST_CASE_FIXTURE(Workspace, "gen-data output is independent of the thread count") {
    REQUIRE(run("gen-data --out t1 --count 5 --seed 9 --threads 1 " + kSmallData).code == 0);
    REQUIRE(run("gen-data --out t4 --count 5 --seed 9 --threads 4 " + kSmallData).code == 0);
    REQUIRE(run("gen-data --out t1b --count 5 --seed 9 --threads 1 " + kSmallData).code == 0);
    CHECK(slurp(kWork / "t1" / "manifest.json") == slurp(kWork / "t4" / "manifest.json"));
    for (int i = 0; i < 5; ++i) {
        const auto dir = data::sample_dir_name(static_cast<std::uint64_t>(i));
        CHECK(same_tree(kWork / "t1" / dir, kWork / "t4" / dir));
        CHECK(same_tree(kWork / "t1" / dir, kWork / "t1b" / dir));
    }
}

TEST_CASE_FIXTURE(Workspace, "sdf, select-views and render-index") {
    REQUIRE(run("gen-data --out ds --count 1 --seed 5 " + kSmallData).code == 0);
    const std::string smp = "ds/sample_000000/";
    CHECK(run("sdf --in " + smp + "clean.vxg --out g.sdf").code == 0);
    CHECK(fs::file_size(kWork / "g.sdf") > 16u * 16u * 16u * 4u);

    const auto sel = run("select-views --cameras " + smp + "cam_0.json " + smp + "cam_1.json " + smp + "cam_2.json " + smp +
                         "cam_3.json --views 2 --seed 1 --out sel.json");
    CHECK(sel.code == 0);
    const auto ids = nlohmann::json::parse(slurp(kWork / "sel.json")).get<std::vector<int>>();
    CHECK(ids.size() == 2u);
    CHECK(std::set<int>(ids.begin(), ids.end()).size() == 2u);
    for (int i : ids) CHECK((i >= 0 && i < 4));
    CHECK(run("select-views --cameras " + smp + "cam_0.json --views 2").code == 1);

    for (int k = 0; k < 4; ++k) {
        const auto ks = std::to_string(k);
        REQUIRE(run("render-index --in " + smp + "corrupt.vxg --camera " + smp + "cam_" + ks + ".json --out view" + ks + " --image").code == 0);
        CHECK(slurp(kWork / ("view" + ks + ".iix")) == slurp(kWork / smp / ("idx_" + ks + ".iix")));
        CHECK(fs::exists(kWork / ("view" + ks + ".pgm")));
        CHECK(fs::exists(kWork / ("view" + ks + ".csv")));
        CHECK(fs::exists(kWork / ("view" + ks + "_img.bin")));
    }
}

TEST_CASE_FIXTURE(Workspace, "train, refine and attn-dump") {
    REQUIRE(run("gen-data --out ds --count 2 --seed 2 " + kSmallData).code == 0);
    const std::string model = "--width 12 --heads 2 --dual-blocks 1 --single-blocks 2 --time-dim 8 --mlp-ratio 2";
    const auto tr = run("train --data ds --out run --steps 5 --seed 4 " + model);
    REQUIRE(tr.code == 0);
    for (const auto* f : {"model.json", "model.viap", "train_log.jsonl", "resolved_config.toml"}) CHECK(fs::exists(kWork / "run" / f));
    std::ifstream log(kWork / "run" / "train_log.jsonl");
    int lines = 0;
    for (std::string line; std::getline(log, line); ++lines) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j["step"] == lines + 1);
        CHECK(j.contains("loss"));
    }
    CHECK(lines == 5);
    REQUIRE(run("train --data ds --out run2 --steps 5 --seed 4 " + model).code == 0);
    CHECK(slurp(kWork / "run" / "model.viap") == slurp(kWork / "run2" / "model.viap"));

    CHECK(run("refine --run run --sample ds/sample_000000 --out r1.vxg --steps 3 --ode midpoint").code == 0);
    CHECK(run("refine --run run --sample ds/sample_000000 --out r2.vxg --steps 3 --ode midpoint").code == 0);
    CHECK(slurp(kWork / "r1.vxg") == slurp(kWork / "r2.vxg"));
    CHECK(run("refine --run run --in ds/sample_000000/corrupt.vxg --out r3.vxg").code == 0);
    CHECK(run("refine --run run --out r4.vxg").code == 1);

    REQUIRE(run("attn-dump --run run --sample ds/sample_000000 --out attn").code == 0);
    const int expected = 1 * (1 + 4) + 2;
    int pgm = 0, csv = 0;
    for (const auto& e : fs::directory_iterator(kWork / "attn")) {
        pgm += e.path().extension() == ".pgm";
        csv += e.path().extension() == ".csv";
    }
    CHECK(pgm == expected);
    CHECK(csv == expected);
    CHECK(nlohmann::json::parse(slurp(kWork / "attn" / "sites.json")).size() == static_cast<std::size_t>(expected));
}
