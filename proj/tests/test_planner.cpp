#include <doctest.h>

#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include "dpv/automaton.hpp"
#include "dpv/fabric.hpp"
#include "dpv/oracle.hpp"
#include "dpv/planner.hpp"
#include "randompath.hpp"
#include "support.hpp"

using namespace dpv;

namespace {

std::set<std::string> nodeIds(const DvNet& net) {
    std::set<std::string> ids;
    for (const auto& n : net.nodes) ids.insert(n.id);
    return ids;
}

/// Device sequences of every source path ending at a node accepting `bits`.
std::set<std::vector<std::string>> acceptedPaths(const DvNet& net, const Topology& topo, std::uint64_t bits = 1) {
    std::set<std::vector<std::string>> out;
    std::vector<std::string> word;
    std::function<void(int)> walk = [&](int u) {
        word.push_back(topo.physical(net.nodes[u].dev));
        if (net.nodes[u].accept & bits) out.insert(word);
        for (int v : net.nodes[u].down) walk(v);
        word.pop_back();
    };
    for (const auto& [ingress, src] : net.sources) walk(src);
    return out;
}

bool acyclic(const DvNet& net) {
    std::vector<int> state(net.nodes.size(), 0);
    std::function<bool(int)> visit = [&](int u) {
        if (state[u] == 1) return false;
        if (state[u] == 2) return true;
        state[u] = 1;
        for (int v : net.nodes[u].down)
            if (!visit(v)) return false;
        state[u] = 2;
        return true;
    };
    for (std::size_t u = 0; u < net.nodes.size(); ++u)
        if (!visit(static_cast<int>(u))) return false;
    return true;
}

/// Every node is reachable from a source and reaches an accepting node.
bool trimmed(const DvNet& net) {
    std::vector<bool> fwd(net.nodes.size()), back(net.nodes.size());
    std::function<void(int)> down = [&](int u) {
        if (fwd[u]) return;
        fwd[u] = true;
        for (int v : net.nodes[u].down) down(v);
    };
    std::function<void(int)> up = [&](int u) {
        if (back[u]) return;
        back[u] = true;
        for (int v : net.nodes[u].up) up(v);
    };
    for (const auto& [i, s] : net.sources) down(s);
    for (std::size_t u = 0; u < net.nodes.size(); ++u)
        if (net.nodes[u].accept) up(static_cast<int>(u));
    return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
           std::all_of(back.begin(), back.end(), [](bool b) { return b; });
}

Topology randomTopology(std::mt19937_64& rng, int n) {
    Topology t;
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) {
        names.push_back(std::string(1, static_cast<char>('A' + i)));
        t.addDevice(names.back());
    }
    // a random spanning tree keeps the graph connected
    for (int i = 1; i < n; ++i) t.addLink(names[i], names[std::uniform_int_distribution<int>(0, i - 1)(rng)]);
    std::bernoulli_distribution extra(0.3);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (!t.hasLink(names[i], names[j]) && extra(rng)) t.addLink(names[i], names[j]);
    return t;
}

}  // namespace

TEST_CASE("automaton of the waypoint expression") {
    const std::vector<std::string> sigma{"A", "B", "C", "D", "S", "W"};
    auto dfa = minimize(regexToDfa(*parsePath("S .* W .* D"), sigma));
    // Minimal machine: start, seen S, seen W, and accepting after D.
    CHECK(dfa.numStates() == 4);
    CHECK(std::count_if(dfa.accept.begin(), dfa.accept.end(), [](auto a) { return a != 0; }) == 1);
    CHECK(dfa.run({"S", "W", "D"}) == 1);
    CHECK(dfa.run({"S", "A", "W", "B", "D"}) == 1);
    CHECK(dfa.run({"S", "D", "W"}) == 0);
    CHECK(dfa.run({"S", "W", "D", "A"}) == 0);
    CHECK(dfa.run({"S", "W", "D", "A", "D"}) == 1);

    auto empty = minimize(regexToDfa(*parsePath("D and not D"), sigma));
    CHECK(empty.initial == -1);
    CHECK(empty.run({"D"}) == 0);
}

TEST_CASE("waypoint DVNet of the workflow network") {
    auto net = testsupport::load(fixtures::workflow);
    auto plan = planSingle(net.reqs[0], net.topo, net.prefixes, *net.store);
    CHECK(nodeIds(plan.net) == std::set<std::string>{"S1", "A1", "B1", "B2", "C1", "C2", "W1", "W2", "W3", "D1"});
    CHECK(plan.tasks.size() == 10);
    CHECK(plan.net.sources.at("S") == plan.net.find("S1"));
    CHECK(acyclic(plan.net));
    CHECK(trimmed(plan.net));

    // Edges follow topology links only.
    for (const auto& n : plan.net.nodes)
        for (int v : n.down) CHECK(net.topo.hasLink(n.dev, plan.net.nodes[v].dev));

    auto paths = acceptedPaths(plan.net, plan.topo);
    auto lf = desugar(net.reqs[0], net.topo.devices());
    auto expected = simplePathsMatching(net.topo, "S", *behaviorLeaves(*lf.behavior)[0]->path);
    CHECK(paths == std::set<std::vector<std::string>>(expected.begin(), expected.end()));
    CHECK(paths.count({"S", "A", "W", "D"}));
    CHECK(paths.count({"S", "A", "B", "C", "W", "D"}));
}

TEST_CASE("DVNet paths equal the matching simple paths") {
    std::mt19937_64 rng(31);
    int nonEmpty = 0;
    for (int trial = 0; trial < 150; ++trial) {
        int n = std::uniform_int_distribution<int>(2, 8)(rng);
        auto topo = randomTopology(rng, n);
        std::vector<std::string> sigma(topo.devices().begin(), topo.devices().end());
        std::string ingress = sigma[std::uniform_int_distribution<int>(0, n - 1)(rng)];
        auto p = path::concat({path::sym(ingress), path::star(path::any()), testsupport::randomPath(rng, sigma, 4)});

        for (bool bisim : {false, true}) {
            auto net = buildDvnet(minimize(regexToDfa(*p, sigma)), topo, {ingress}, {bisim});
            CHECK(acyclic(net));
            CHECK(trimmed(net));
            auto expected = simplePathsMatching(topo, ingress, *p);
            CHECK_MESSAGE(acceptedPaths(net, topo) ==
                              std::set<std::vector<std::string>>(expected.begin(), expected.end()),
                          printPath(*p));
            if (bisim && !expected.empty()) ++nonEmpty;
        }
    }
    CHECK(nonEmpty > 50);
}

TEST_CASE("bisimulation never grows the network") {
    auto net = testsupport::load(fixtures::workflow);
    std::vector<std::string> sigma(net.topo.devices().begin(), net.topo.devices().end());
    auto dfa = minimize(regexToDfa(*parsePath("S .* D"), sigma, true));
    auto raw = buildDvnet(dfa, net.topo, {"S"}, {false});
    auto merged = buildDvnet(dfa, net.topo, {"S"}, {true});
    CHECK(merged.nodes.size() <= raw.nodes.size());
    CHECK(acceptedPaths(raw, net.topo) == acceptedPaths(merged, net.topo));
}

TEST_CASE("plan shapes and task annotations") {
    auto chain = testsupport::load("node S\nnode D\nlink S D\n", "prefix D 10.0.0.0/24\n", "device S\ndevice D\n",
                                   "(dstIP in 10.0.0.0/24, [S], (exist >= 1, S D))\n"
                                   "(dstIP in 10.0.0.0/24, [S], (exist >= 1, S .* D))\n");
    auto single = planSingle(chain.reqs[0], chain.topo, chain.prefixes, *chain.store);
    CHECK(single.tasks.size() == 2);
    CHECK(nodeIds(single.net) == std::set<std::string>{"S1", "D1"});

    PlanOptions mi;
    mi.minInfo = true;
    auto minPlan = planSingle(chain.reqs[1], chain.topo, chain.prefixes, *chain.store, mi);
    for (const auto& t : minPlan.tasks) {
        CHECK(t.mode == TaskMode::MinInfo);
        CHECK(t.cmp == Cmp::Ge);
        CHECK(t.n == 1);
    }
    auto full = planSingle(chain.reqs[1], chain.topo, chain.prefixes, *chain.store);
    for (const auto& t : full.tasks) CHECK(t.mode == TaskMode::FullCount);

    auto noLink = testsupport::load("node S\nnode A\nnode D\nlink S A\nlink A D\n", "prefix D 10.0.0.0/24\n",
                                    "device S\n", "(dstIP in 10.0.0.0/24, [S], (exist >= 1, S D))\n");
    auto empty = planSingle(noLink.reqs[0], noLink.topo, noLink.prefixes, *noLink.store);
    CHECK(empty.net.nodes.empty());
    CHECK(empty.net.sources.empty());
    auto verdict = verifyPlan(empty, *noLink.dp, noLink.prefixes);
    REQUIRE(verdict.size() == 1);
    CHECK_FALSE(verdict[0].satisfied);

    auto wrongStart = testsupport::load(fixtures::workflow.topology, fixtures::workflow.prefixes,
                                        fixtures::workflow.fibs,
                                        "(dstIP in 10.0.0.0/23, [A], (exist >= 1, S .* D))\n");
    CHECK_THROWS_AS(planSingle(wrongStart.reqs[0], wrongStart.topo, wrongStart.prefixes, *wrongStart.store),
                    IngressUnmatched);
}

TEST_CASE("compound requirements pick their plan shape") {
    auto any = testsupport::load(fixtures::anycast);
    auto ps = planRequirement(any.reqs[0], any.topo, any.prefixes, *any.store);
    REQUIRE(ps.plans.size() == 1);
    CHECK(ps.plans[0].shape == Plan::Shape::UnionDest);
    CHECK(ps.plans[0].net.dimension == 2);
    CHECK(nodeIds(ps.plans[0].net) == std::set<std::string>{"S1", "D1", "E1"});

    PlanOptions naive;
    naive.compound = CompoundMode::Naive;
    auto nv = planRequirement(any.reqs[0], any.topo, any.prefixes, *any.store, naive);
    CHECK(nv.plans[0].shape == Plan::Shape::Naive);
    CHECK(nv.plans[0].naiveNets.size() == 2);

    auto same = testsupport::load(fixtures::sameDest);
    auto vd = planRequirement(same.reqs[0], same.topo, same.prefixes, *same.store);
    REQUIRE(vd.plans.size() == 1);
    CHECK(vd.plans[0].shape == Plan::Shape::VirtualDest);
    CHECK(vd.plans[0].topo.hasDevice("D^1"));
    CHECK(vd.plans[0].topo.hasDevice("D^2"));
    CHECK_FALSE(vd.plans[0].topo.hasDevice("D"));

    auto equalAnd = testsupport::load(fixtures::workflow.topology, fixtures::workflow.prefixes,
                                      fixtures::workflow.fibs,
                                      "(dstIP in 10.0.0.0/23, [S], (equal, S .* D) and (exist >= 1, S .* W .* D))\n");
    auto mixed = planRequirement(equalAnd.reqs[0], equalAnd.topo, equalAnd.prefixes, *equalAnd.store);
    REQUIRE(mixed.plans.size() == 2);
    CHECK(mixed.plans[0].kind == Plan::Kind::Counting);
    CHECK(mixed.plans[1].kind == Plan::Kind::Equal);
    for (const auto& t : mixed.plans[1].tasks) CHECK(t.mode == TaskMode::EqualLocal);
}

TEST_CASE("virtual destination rewrite") {
    auto same = testsupport::load(fixtures::sameDest);
    auto one = withVirtualDestinations(same.topo, "D", 1);
    CHECK(one.devices() == same.topo.devices());
    CHECK(one.links() == same.topo.links());

    auto two = withVirtualDestinations(same.topo, "D", 2);
    CHECK(two.neighbors("D^1") == same.topo.neighbors("D"));
    CHECK(two.neighbors("D^2") == same.topo.neighbors("D"));
    CHECK(two.physical("D^2") == "D");
    CHECK(two.isVirtual("D^1"));
}

TEST_CASE("plan export is deterministic") {
    auto render = [] {
        auto net = testsupport::load(fixtures::sameDest);
        auto ps = planRequirement(net.reqs[0], net.topo, net.prefixes, *net.store);
        std::string out;
        for (const auto& p : ps.plans) out += exportPlan(p) + exportDot(p.net);
        return out;
    };
    auto first = render();
    CHECK(first == render());
    CHECK(first.find("digraph") != std::string::npos);

    auto wf = testsupport::load(fixtures::workflow);
    auto dot = exportDot(planSingle(wf.reqs[0], wf.topo, wf.prefixes, *wf.store).net);
    for (const char* id : {"S1", "A1", "B1", "B2", "C1", "C2", "W1", "W2", "W3", "D1"})
        CHECK(dot.find(std::string("\"") + id + "\"") != std::string::npos);
}

TEST_CASE("equal plans detect missing shortest-path hops locally") {
    auto g = twoPodClos(GroupKind::All);
    BddStore store;
    DataPlane dp(store);
    FibSet fibs;
    for (const auto& [dev, specs] : g.fibs)
        for (const auto& r : specs)
            fibs[dev].push_back({r.priority, Predicate::fromCidr(store, Field::Dst, parseCidr(r.dst)), r.action});
    installFibs(dp, g.topo, fibs);

    auto reqs = renderTemplates(TemplateKind::TorToTorEcmp, g.fabric);
    std::vector<Plan> plans;
    for (const auto& r : reqs)
        for (auto& p : planRequirement(r, g.topo, g.prefixes, store).plans) plans.push_back(std::move(p));

    auto violatedAt = [&](const Plan& p) {
        std::set<std::string> devs;
        for (std::size_t u = 0; u < p.net.nodes.size(); ++u)
            for (const auto& v : equalCheckNode(p, static_cast<int>(u), dp, g.prefixes)) devs.insert(v.device);
        return devs;
    };
    for (const auto& p : plans) CHECK(violatedAt(p).empty());

    // T0_0 drops one of its two uplinks toward T1_0.
    const auto& rules = g.fibs.at("T0_0");
    auto it = std::find_if(rules.begin(), rules.end(), [](const RuleSpec& r) { return r.dst == "10.1.0.0/24"; });
    REQUIRE(it != rules.end());
    const auto& rule = *it;
    dp.apply({FibUpdate::Kind::Modify, "T0_0",
              {rule.priority, Predicate::fromCidr(store, Field::Dst, parseCidr(rule.dst)),
               ActionGroup(GroupKind::All, {"A0_0"})}});
    int reporting = 0;
    for (const auto& p : plans) {
        auto devs = violatedAt(p);
        if (devs.empty()) continue;
        ++reporting;
        CHECK(devs == std::set<std::string>{"T0_0"});
    }
    CHECK(reporting == 1);
}
