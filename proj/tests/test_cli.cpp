#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpv/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

fs::path scratch() {
    auto dir = fs::temp_directory_path() / ("dpv_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

Run run(const std::string& args) {
    auto dir = scratch();
    auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    std::string cmd = std::string(DPV_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, dpv::readFile(out.string()), dpv::readFile(err.string())};
}

std::string workflow(const std::string& prefixes = "") {
    std::string d = std::string(DPV_SAMPLES) + "/workflow/";
    return "--topology " + d + "topology.txt --fib " + d + "fib.txt --prefixes " +
           (prefixes.empty() ? d + "prefixes.txt" : prefixes) + " --requirements " + d + "requirements.txt";
}

std::string events() { return std::string(" --events ") + DPV_SAMPLES + "/workflow/events.txt"; }

}  // namespace

TEST_CASE("cli plan") {
    auto dir = scratch();
    auto a = run("plan " + workflow() + " --out " + (dir / "a").string());
    auto b = run("plan " + workflow() + " --out " + (dir / "b").string());
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    auto dot = dpv::readFile((dir / "a" / "plan_r0_0.dot").string());
    for (const char* id : {"S1", "A1", "B1", "B2", "C1", "C2", "W1", "W2", "W3", "D1"})
        CHECK(dot.find(std::string("\"") + id + "\"") != std::string::npos);
    CHECK(dot == dpv::readFile((dir / "b" / "plan_r0_0.dot").string()));
    CHECK(dpv::readFile((dir / "a" / "plan_r0_0.txt").string()) ==
          dpv::readFile((dir / "b" / "plan_r0_0.txt").string()));

    auto bad = dir / "narrow.txt";
    dpv::writeFile(bad.string(), "prefix D 10.0.0.0/24\n");
    auto r = run("plan " + workflow(bad.string()));
    CHECK(r.code == 2);
    CHECK(r.err.find("PrefixMismatch") != std::string::npos);

    CHECK(run("plan --topology /nonexistent").code == 2);
    CHECK(run("").code == 2);
}

TEST_CASE("cli verification modes") {
    auto sim = run("simulate " + workflow());
    CHECK(sim.code == 1);
    CHECK(sim.out.find("0,0,S,violated,dst 10.0.0.0/24,0,") != std::string::npos);
    CHECK(sim.out.find("0,0,S,satisfied,dst 10.0.1.0/24,,") != std::string::npos);
    CHECK(sim.out.find("event_id,convergence_us,messages,bytes_proxy,devices_changed") != std::string::npos);

    CHECK(run("simulate " + workflow() + " --check-against-oracle").code == 0);
    CHECK(run("simulate " + workflow() + " --seed 3 --dampening --check-against-oracle").code == 0);
    CHECK(run("verify " + workflow() + " --check-against-oracle").code == 0);

    auto fixed = run("simulate " + workflow() + events());
    CHECK(fixed.code == 0);
    CHECK(fixed.out.find("0,0,S,satisfied,dst 10.0.0.0/23,,") != std::string::npos);
    CHECK(run("verify " + workflow() + events() + " --mode centralized").code == 0);
    CHECK(run("verify " + workflow() + events() + " --mode oracle").code == 0);

    auto oracle = run("oracle " + workflow());
    CHECK(oracle.code == 1);
    CHECK(oracle.out.find("universe [S,A,B,C,D] delivered") != std::string::npos);

    auto dir = scratch() / "sim";
    CHECK(run("verify " + workflow() + " --mode simulate --out " + dir.string()).code == 1);
    CHECK(fs::exists(dir / "report.csv"));
    CHECK(fs::exists(dir / "stats.csv"));
    CHECK(run("verify " + workflow() + " --mode bogus").code == 2);
}

TEST_CASE("cli oracle refuses oversized networks") {
    // 17 diamonds in a row give 2^17 forwarding universes.
    std::ostringstream topo, fib;
    fib << "device X0\n";
    for (int i = 0; i < 17; ++i) {
        auto x = "X" + std::to_string(i), nx = "X" + std::to_string(i + 1);
        auto u = "U" + std::to_string(i), v = "V" + std::to_string(i);
        topo << "node " << x << "\nnode " << u << "\nnode " << v << "\n";
        topo << "link " << x << " " << u << "\nlink " << x << " " << v << "\nlink " << u << " " << nx
             << "\nlink " << v << " " << nx << "\n";
        if (i) fib << "device " << x << "\n";
        fib << "rule 1 - - ANY " << u << "," << v << "\ndevice " << u << "\nrule 1 - - ALL " << nx
            << "\ndevice " << v << "\nrule 1 - - ALL " << nx << "\n";
    }
    topo << "node X17\n";
    auto dir = scratch() / "big";
    fs::create_directories(dir);
    dpv::writeFile((dir / "t.txt").string(), topo.str());
    dpv::writeFile((dir / "f.txt").string(), fib.str());
    dpv::writeFile((dir / "p.txt").string(), "prefix X17 10.0.0.0/8\n");
    dpv::writeFile((dir / "r.txt").string(), "(dstIP in 10.0.0.0/8, [X0], (exist >= 1, X0 .* X17))\n");
    auto args = " --topology " + (dir / "t.txt").string() + " --fib " + (dir / "f.txt").string() +
                " --prefixes " + (dir / "p.txt").string() + " --requirements " + (dir / "r.txt").string();
    auto r = run("oracle" + args);
    CHECK(r.code == 2);
    CHECK(r.err.find("ScaleRefusal") != std::string::npos);
    CHECK(run("verify" + args).code == 0);
}

TEST_CASE("cli fabric generator") {
    auto dir = scratch() / "ft";
    auto r = run("gen --kind fattree --k 4 --ecmp all --out " + dir.string());
    REQUIRE(r.code == 0);
    CHECK(r.err.find("20 switches, 8 ToR prefixes") != std::string::npos);
    for (const char* f : {"topology.txt", "prefixes.txt", "fib.txt", "requirements.txt", "requirements_ecmp.txt"})
        CHECK(fs::exists(dir / f));
    auto args = " --topology " + (dir / "topology.txt").string() + " --fib " + (dir / "fib.txt").string() +
                " --prefixes " + (dir / "prefixes.txt").string() + " --requirements " +
                (dir / "requirements_ecmp.txt").string();
    CHECK(run("simulate" + args).code == 0);

    CHECK(run("gen --kind clos").code == 0);
    auto odd = run("gen --k 5");
    CHECK(odd.code == 2);
    CHECK(odd.err.find("even") != std::string::npos);
}
