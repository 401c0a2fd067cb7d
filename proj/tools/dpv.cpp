// Command-line front end: plan, verify, simulate, oracle, gen.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include "dpv/countalg.hpp"
#include "dpv/fabric.hpp"
#include "dpv/io.hpp"
#include "dpv/oracle.hpp"
#include "dpv/planner.hpp"
#include "dpv/simnet.hpp"

namespace fs = std::filesystem;
using namespace dpv;

namespace {

enum Exit { Ok = 0, Violated = 1, Usage = 2, Internal = 3 };

struct Config {
    std::string topology, fib, prefixes, requirements, latency, events, out;
    std::string mode = "centralized";
    std::uint64_t seed = 0;
    bool seeded = false;
    bool minInfo = false;
    bool dampening = false;
    std::int64_t dampingWindow = 0;
    bool checkOracle = false;
};

struct Inputs {
    std::unique_ptr<BddStore> store = std::make_unique<BddStore>();
    Topology topo;
    PrefixMap prefixes;
    std::unique_ptr<DataPlane> dp;
    std::vector<Requirement> reqs;
    LatencyMap latency;
    std::vector<ScriptEvent> events;
};

Inputs load(const Config& c) {
    Inputs in;
    in.topo = parseTopology(readFile(c.topology));
    in.prefixes = parsePrefixes(readFile(c.prefixes));
    in.dp = std::make_unique<DataPlane>(*in.store);
    installFibs(*in.dp, in.topo, parseFibs(readFile(c.fib), *in.store));
    in.reqs = parseRequirements(readFile(c.requirements));
    if (!c.latency.empty()) in.latency = parseLatency(readFile(c.latency));
    if (!c.events.empty()) in.events = parseEvents(readFile(c.events), *in.store);
    return in;
}

struct Planned {
    int requirement;
    int index;
    Plan plan;
};

std::vector<Planned> planAll(Inputs& in, const Config& c) {
    std::vector<Planned> out;
    PlanOptions opt;
    opt.minInfo = c.minInfo;
    for (std::size_t r = 0; r < in.reqs.size(); ++r) {
        auto set = planRequirement(in.reqs[r], in.topo, in.prefixes, *in.store, opt);
        for (std::size_t i = 0; i < set.plans.size(); ++i)
            out.push_back({static_cast<int>(r), static_cast<int>(i), std::move(set.plans[i])});
    }
    return out;
}

std::string csvField(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

std::string vectorText(const std::vector<std::uint32_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
    return s;
}

const char* kReportHeader = "requirement,plan,ingress,status,predicate,witness,detail\n";

struct Report {
    std::ostringstream csv;
    std::size_t cells = 0, violated = 0;

    Report() { csv << kReportHeader; }

    void row(int req, const std::string& plan, const std::string& ingress, bool ok, const std::string& pred,
             const std::string& witness, const std::string& detail) {
        ++cells;
        if (!ok) ++violated;
        csv << req << ',' << plan << ',' << csvField(ingress) << ',' << (ok ? "satisfied" : "violated") << ','
            << csvField(pred) << ',' << csvField(witness) << ',' << csvField(detail) << '\n';
    }

    void add(const Planned& p, const std::vector<CellVerdict>& cells) {
        for (const auto& v : cells)
            row(p.requirement, std::to_string(p.index), v.ingress, v.satisfied, v.pred.describe(),
                v.witness ? vectorText(*v.witness) : "", v.detail);
    }
};

void emit(const Config& c, const std::string& name, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    fs::create_directories(c.out);
    writeFile((fs::path(c.out) / name).string(), text);
}

/// Compares plan verdicts with the brute-force oracle; returns the mismatch count.
int crossCheck(Inputs& in, const std::vector<Planned>& plans,
               const std::vector<std::vector<CellVerdict>>& verdicts) {
    int mismatches = 0;
    for (std::size_t r = 0; r < in.reqs.size(); ++r) {
        std::vector<std::vector<CellVerdict>> mine;
        for (std::size_t i = 0; i < plans.size(); ++i)
            if (plans[i].requirement == static_cast<int>(r)) mine.push_back(verdicts[i]);
        for (const auto& cell : oracleVerdict(in.reqs[r], in.topo, *in.dp, in.prefixes, *in.store)) {
            bool ours = satisfiedAt(mine, cell.ingress, cell.representative);
            if (ours == cell.satisfied) continue;
            ++mismatches;
            std::cerr << "oracle mismatch: requirement " << r << " ingress " << cell.ingress << " "
                      << cell.pred.describe() << ": oracle " << (cell.satisfied ? "satisfied" : "violated")
                      << ", verifier " << (ours ? "satisfied" : "violated") << "\n";
        }
    }
    return mismatches;
}

/// With the oracle cross-check the exit code reports agreement, not the verdicts.
int finish(const Config& c, const Report& report, int mismatches) {
    emit(c, "report.csv", report.csv.str());
    std::cerr << report.cells << " cells, " << report.violated << " violated\n";
    if (c.checkOracle) {
        std::cerr << (mismatches ? "oracle cross-check failed\n" : "oracle cross-check passed\n");
        return mismatches ? Internal : Ok;
    }
    return report.violated ? Violated : Ok;
}

int cmdPlan(const Config& c) {
    auto in = load(c);
    auto plans = planAll(in, c);
    for (const auto& p : plans) {
        auto stem = "plan_r" + std::to_string(p.requirement) + "_" + std::to_string(p.index);
        emit(c, stem + ".txt", exportPlan(p.plan));
        emit(c, stem + ".dot", exportDot(p.plan.net));
        for (std::size_t k = 0; k < p.plan.naiveNets.size(); ++k)
            emit(c, stem + "_naive" + std::to_string(k) + ".dot", exportDot(p.plan.naiveNets[k]));
    }
    std::cerr << plans.size() << " plans\n";
    return Ok;
}

int cmdCentralized(const Config& c) {
    auto in = load(c);
    auto plans = planAll(in, c);
    for (const auto& e : in.events) applyScriptEvent(in.topo, *in.dp, e);
    Report report;
    std::vector<std::vector<CellVerdict>> strict;
    for (const auto& p : plans) {
        report.add(p, verifyPlan(p.plan, *in.dp, in.prefixes));
        if (c.checkOracle) strict.push_back(verifyPlan(p.plan, *in.dp, in.prefixes, false));
    }
    return finish(c, report, c.checkOracle ? crossCheck(in, plans, strict) : 0);
}

int cmdSimulate(const Config& c) {
    auto in = load(c);
    auto plans = planAll(in, c);
    std::vector<Plan> raw;
    for (const auto& p : plans) raw.push_back(p.plan);

    SimOptions opt;
    opt.dampening = c.dampening;
    opt.dampingWindow = c.dampingWindow;
    opt.perturb = c.seeded;
    opt.seed = c.seed;
    Simulation sim(in.topo, *in.dp, in.prefixes, std::move(raw), in.latency, opt);
    std::string stats = statsCsvHeader() + "\n" + statsCsvRow(sim.runBurst()) + "\n";
    for (const auto& s : sim.runIncremental(in.events)) stats += statsCsvRow(s) + "\n";

    Report report;
    std::vector<std::vector<CellVerdict>> strict;
    auto verdicts = sim.verdicts();
    for (std::size_t i = 0; i < plans.size(); ++i) report.add(plans[i], verdicts[i].cells);
    if (c.checkOracle)
        for (const auto& v : sim.verdicts(false)) strict.push_back(v.cells);
    int code = finish(c, report, c.checkOracle ? crossCheck(in, plans, strict) : 0);
    if (c.out.empty()) std::cout << "\n";
    emit(c, "stats.csv", stats);
    return code;
}

int cmdOracle(const Config& c) {
    auto in = load(c);
    for (const auto& e : in.events) applyScriptEvent(in.topo, *in.dp, e);
    Report report;
    for (std::size_t r = 0; r < in.reqs.size(); ++r)
        for (const auto& cell : oracleVerdict(in.reqs[r], in.topo, *in.dp, in.prefixes, *in.store))
            report.row(static_cast<int>(r), "-", cell.ingress, cell.satisfied, cell.pred.describe(),
                       vectorText({cell.witness.begin(), cell.witness.end()}), cell.detail);
    return finish(c, report, 0);
}

std::string formatRequirements(const std::vector<Requirement>& reqs) {
    std::string s;
    for (const auto& r : reqs) s += printRequirement(r) + "\n";
    return s;
}

int cmdGen(const Config& c, const std::string& kind, int k, const std::string& ecmp) {
    auto group = ecmp == "all" ? GroupKind::All : GroupKind::Any;
    auto g = kind == "clos" ? twoPodClos(group) : fatTree(k, group);
    emit(c, "topology.txt", formatTopology(g.topo));
    emit(c, "prefixes.txt", formatPrefixes(g.prefixes));
    emit(c, "fib.txt", formatFibs(g.fibs));
    emit(c, "requirements.txt", formatRequirements(renderTemplates(TemplateKind::TorToTorShortest, g.fabric)));
    emit(c, "requirements_ecmp.txt", formatRequirements(renderTemplates(TemplateKind::TorToTorEcmp, g.fabric)));
    std::cerr << g.topo.devices().size() << " switches, " << g.fabric.tors.size() << " ToR prefixes\n";
    return Ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed data plane verification toolkit"};
    app.require_subcommand(1);
    Config c;

    auto inputs = [&](CLI::App* sub) {
        sub->add_option("--topology", c.topology, "Topology file")->required()->check(CLI::ExistingFile);
        sub->add_option("--fib", c.fib, "Forwarding rules file")->required()->check(CLI::ExistingFile);
        sub->add_option("--prefixes", c.prefixes, "Prefix map file")->required()->check(CLI::ExistingFile);
        sub->add_option("--requirements", c.requirements, "Requirements file")->required()->check(CLI::ExistingFile);
        sub->add_option("--events", c.events, "Event script")->check(CLI::ExistingFile);
        sub->add_flag("--min-info", c.minInfo, "Send only the counts needed for scalar requirements");
        sub->add_option("--out", c.out, "Output directory; stdout when omitted");
    };
    auto simFlags = [&](CLI::App* sub) {
        sub->add_option("--latency", c.latency, "Link latency file")->check(CLI::ExistingFile);
        sub->add_option("--seed", c.seed, "Randomize link timing with this seed");
        sub->add_flag("--dampening", c.dampening, "Batch announcements per device");
        sub->add_option("--damping-window", c.dampingWindow, "Dampening delay in microseconds");
    };

    auto* plan = app.add_subcommand("plan", "Compile requirements into per-device tasks and DOT graphs");
    inputs(plan);

    auto* verify = app.add_subcommand("verify", "Verify requirements and write a verdict report");
    inputs(verify);
    simFlags(verify);
    verify->add_option("--mode", c.mode, "centralized, simulate or oracle")
        ->check(CLI::IsMember({"centralized", "simulate", "oracle"}));
    verify->add_flag("--check-against-oracle", c.checkOracle, "Cross-check verdicts with the brute-force oracle");

    auto* simulate = app.add_subcommand("simulate", "Run the distributed protocol in the network simulator");
    inputs(simulate);
    simFlags(simulate);
    simulate->add_flag("--check-against-oracle", c.checkOracle, "Cross-check verdicts with the brute-force oracle");

    auto* oracle = app.add_subcommand("oracle", "Enumerate forwarding universes for ground truth");
    inputs(oracle);

    std::string kind = "fattree", ecmp = "any";
    int k = 4;
    auto* gen = app.add_subcommand("gen", "Generate a data center fabric with shortest-path rules");
    gen->add_option("--kind", kind, "fattree or clos")->check(CLI::IsMember({"fattree", "clos"}));
    gen->add_option("--k", k, "Fat-tree arity");
    gen->add_option("--ecmp", ecmp, "Group type of multipath rules")->check(CLI::IsMember({"all", "any"}));
    gen->add_option("--out", c.out, "Output directory; stdout when omitted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? Ok : Usage;
    }
    for (auto* sub : {verify, simulate})
        if (*sub) c.seeded = sub->count("--seed") > 0;

    try {
        if (*plan) return cmdPlan(c);
        if (*gen) return cmdGen(c, kind, k, ecmp);
        if (*oracle) return cmdOracle(c);
        if (*simulate) return cmdSimulate(c);
        if (c.mode == "simulate") return cmdSimulate(c);
        if (c.mode == "oracle") return cmdOracle(c);
        return cmdCentralized(c);
    } catch (const SimulationTrap& e) {
        std::cerr << "error: SimulationTrap: " << e.what() << "\n";
        return Internal;
    } catch (const ProtocolError& e) {
        std::cerr << "error: ProtocolError: " << e.what() << "\n";
        return Internal;
    } catch (const ScaleRefusal& e) {
        std::cerr << "error: ScaleRefusal: " << e.what() << "\n";
        return Usage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Usage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return Internal;
    }
}
