#include <doctest.h>

#include <algorithm>

#include "dpv/countalg.hpp"
#include "dpv/fabric.hpp"
#include "dpv/planner.hpp"

using namespace dpv;

namespace {

FibSet compile(const GeneratedFabric& g, BddStore& store) {
    FibSet fibs;
    for (const auto& [dev, specs] : g.fibs)
        for (const auto& r : specs)
            fibs[dev].push_back({r.priority, Predicate::fromCidr(store, Field::Dst, parseCidr(r.dst)), r.action});
    return fibs;
}

bool allSatisfied(const GeneratedFabric& g, TemplateKind kind) {
    BddStore store;
    DataPlane dp(store);
    installFibs(dp, g.topo, compile(g, store));
    for (const auto& r : renderTemplates(kind, g.fabric))
        for (const auto& p : planRequirement(r, g.topo, g.prefixes, store).plans)
            for (const auto& v : verifyPlan(p, dp, g.prefixes))
                if (!v.satisfied) return false;
    return true;
}

}  // namespace

TEST_CASE("fat-tree arithmetic") {
    auto g = fatTree(4);
    CHECK(g.topo.devices().size() == 20);
    CHECK(g.topo.links().size() == 32);
    CHECK(g.fabric.tors.size() == 8);
    CHECK(g.prefixes.all().size() == 8);
    CHECK(g.topo.neighbors("C0").size() == 4);
    CHECK(g.topo.neighbors("T0_0") == std::set<std::string>{"A0_0", "A0_1"});

    auto six = fatTree(6);
    CHECK(six.topo.devices().size() == 45);
    CHECK(six.fabric.tors.size() == 18);

    CHECK_THROWS_AS(fatTree(5), ValidationError);
    CHECK_THROWS_AS(fatTree(2), ValidationError);
}

TEST_CASE("shortest-path rules") {
    auto g = fatTree(4);
    // Every switch has one rule per ToR prefix other than its own.
    for (const auto& d : g.topo.devices())
        CHECK(g.fibs.at(d).size() == (d[0] == 'T' ? 7u : 8u));
    const auto& t = g.fibs.at("T0_0");
    auto cross = std::find_if(t.begin(), t.end(), [](const RuleSpec& r) { return r.dst == "10.1.0.0/24"; });
    REQUIRE(cross != t.end());
    CHECK(cross->action.kind() == GroupKind::Any);
    CHECK(cross->action.hops() == std::vector<std::string>{"A0_0", "A0_1"});
    const auto& a = g.fibs.at("A0_0");
    auto down = std::find_if(a.begin(), a.end(), [](const RuleSpec& r) { return r.dst == "10.0.1.0/24"; });
    REQUIRE(down != a.end());
    CHECK(down->action.hops() == std::vector<std::string>{"T0_1"});
    CHECK(down->action.kind() == GroupKind::All);

    auto all = fatTree(4, GroupKind::All).fibs.at("T0_0");
    CHECK(std::find_if(all.begin(), all.end(), [](const RuleSpec& r) {
              return r.dst == "10.1.0.0/24";
          })->action.kind() == GroupKind::All);
}

TEST_CASE("generated fabrics meet their templates") {
    for (auto ecmp : {GroupKind::All, GroupKind::Any}) {
        auto clos = twoPodClos(ecmp);
        CHECK(clos.topo.devices().size() == 10);
        CHECK(allSatisfied(clos, TemplateKind::TorToTorShortest));
        CHECK(allSatisfied(clos, TemplateKind::TorToTorEcmp));
    }
    CHECK(allSatisfied(fatTree(4), TemplateKind::TorToTorShortest));
}

TEST_CASE("random rule updates") {
    auto g = fatTree(4);
    BddStore store;
    auto a = randomRuleUpdates(g, store, 200, 9);
    auto b = randomRuleUpdates(g, store, 200, 9);
    REQUIRE(a.size() == 200);
    std::size_t offPath = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].at == static_cast<std::int64_t>(1000 * (i + 1)));
        CHECK(a[i].kind == ScriptEvent::Kind::Rule);
        CHECK(a[i].device == b[i].device);
        CHECK(a[i].rule.action == b[i].rule.action);
        CHECK_FALSE(a[i].rule.action.hops().empty());
        for (const auto& h : a[i].rule.action.hops()) CHECK(g.topo.hasLink(a[i].device, h));
        const auto& specs = g.fibs.at(a[i].device);
        auto same = std::find_if(specs.begin(), specs.end(),
                                 [&](const RuleSpec& r) { return r.priority == a[i].rule.priority; });
        REQUIRE(same != specs.end());
        const auto& shortest = same->action.hops();
        for (const auto& h : a[i].rule.action.hops())
            if (std::find(shortest.begin(), shortest.end(), h) == shortest.end()) {
                ++offPath;
                break;
            }
    }
    CHECK(offPath > 0);
    CHECK(offPath < 100);
}
