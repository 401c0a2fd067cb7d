#include <random>

#include "doctest.h"
#include "dpv/dataplane.hpp"

using namespace dpv;

namespace {

constexpr unsigned kBits = 12;

Predicate randomCube(BddStore& store, std::mt19937& rng) {
    Predicate cube = Predicate::all(store);
    for (unsigned v = 0; v < kBits; ++v) {
        int r = std::uniform_int_distribution<int>(0, 4)(rng);
        if (r <= 1) cube &= Predicate::bit(store, v, r == 1);
    }
    return cube;
}

ActionGroup randomAction(std::mt19937& rng) {
    static const std::vector<std::string> names{"A", "B", "C", "D"};
    std::vector<std::string> hops;
    for (const auto& n : names)
        if (rng() % 3 == 0) hops.push_back(n);
    return ActionGroup(rng() % 2 ? GroupKind::All : GroupKind::Any, hops);
}

FibRule randomRule(BddStore& store, std::mt19937& rng, int priority) {
    return FibRule{priority, randomCube(store, rng), randomAction(rng)};
}

// Linear scan without any BDD machinery beyond membership.
ActionGroup scan(const Fib& fib, Header h) {
    ActionGroup result = ActionGroup::drop();
    int best = INT32_MIN;
    for (const auto& [prio, rule] : fib)
        if (rule.match.contains(h) && prio > best) {
            best = prio;
            result = rule.action;
        }
    return result;
}

void checkPartition(BddStore& store, const LecTable& table) {
    Predicate acc = Predicate::none(store);
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK_FALSE(table[i].pred.isEmpty());
        CHECK_FALSE(acc.intersects(table[i].pred));
        acc |= table[i].pred;
        for (std::size_t j = i + 1; j < table.size(); ++j) CHECK(table[i].action != table[j].action);
    }
    CHECK(acc.isAll());
}

bool sameTable(const LecTable& a, const LecTable& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].pred != b[i].pred || a[i].action != b[i].action) return false;
    return true;
}

}  // namespace

TEST_CASE("action group normalization") {
    ActionGroup g(GroupKind::Any, {"W", "B"});
    CHECK(g.hops() == std::vector<std::string>{"B", "W"});
    CHECK(g.str() == "ANY{B,W}");
    CHECK(ActionGroup(GroupKind::Any, {"B"}) == ActionGroup(GroupKind::All, {"B"}));
    CHECK(ActionGroup(GroupKind::Any, {}).isDrop());
    CHECK(ActionGroup(GroupKind::Any, {}) == ActionGroup::drop());
    CHECK_THROWS_AS(ActionGroup(GroupKind::All, {"B", "B"}), ParseError);
    CHECK(g.without({"B"}) == ActionGroup(GroupKind::All, {"W"}));
}

TEST_CASE("effectiveAction basics") {
    BddStore store(kBits);
    Fib fib;
    CHECK(effectiveAction(fib, 5).isDrop());
    fib[10] = {10, Predicate::all(store), ActionGroup(GroupKind::All, {"A"})};
    fib[5] = {5, Predicate::all(store), ActionGroup(GroupKind::All, {"B"})};
    CHECK(effectiveAction(fib, 5) == ActionGroup(GroupKind::All, {"A"}));
}

TEST_CASE("effectiveAction and LEC tables agree with linear scan") {
    BddStore store(kBits);
    std::mt19937 rng(5);
    for (int iter = 0; iter < 60; ++iter) {
        Fib fib;
        for (int i = 0; i < 8; ++i) fib[i * 3 + 1] = randomRule(store, rng, i * 3 + 1);
        auto table = buildLecTable(store, fib);
        checkPartition(store, table);
        for (Header h = 0; h < (1u << kBits); ++h) {
            auto expect = scan(fib, h);
            REQUIRE(effectiveAction(fib, h) == expect);
            for (const auto& e : table)
                if (e.pred.contains(h)) REQUIRE(e.action == expect);
        }
    }
}

TEST_CASE("buildLecTable small examples") {
    BddStore store;
    CHECK(buildLecTable(store, {}).size() == 1);
    CHECK(buildLecTable(store, {})[0].pred.isAll());

    auto p1 = Predicate::fromCidr(store, Field::Dst, parseCidr("10.0.0.0/23"));
    auto p2 = Predicate::fromCidr(store, Field::Dst, parseCidr("10.0.0.0/24"));
    auto p3 = Predicate::fromCidr(store, Field::Dst, parseCidr("10.0.1.0/24"));

    Fib one;
    one[1] = {1, p1, ActionGroup(GroupKind::All, {"B"})};
    auto t1 = buildLecTable(store, one);
    REQUIRE(t1.size() == 2);
    CHECK(t1[0].action.isDrop());
    CHECK(t1[0].pred == ~p1);
    CHECK(t1[1].pred == p1);

    Fib a;
    a[20] = {20, p2, ActionGroup(GroupKind::Any, {"B", "W"})};
    a[10] = {10, p3, ActionGroup(GroupKind::All, {"W"})};
    auto ta = buildLecTable(store, a);
    REQUIRE(ta.size() == 3);
    int found = 0;
    for (const auto& e : ta) {
        if (e.action.isDrop()) found += e.pred == ~p1;
        else if (e.action.kind() == GroupKind::Any) found += e.pred == p2;
        else found += e.pred == p3;
    }
    CHECK(found == 3);
}

TEST_CASE("incremental updates equal rebuild") {
    BddStore store(kBits);
    std::mt19937 rng(9);
    DeviceDataPlane dev(store, "X");
    int applied = 0;
    while (applied < 1000) {
        int prio = static_cast<int>(rng() % 12);
        bool exists = dev.fib().count(prio) != 0;
        FibUpdate upd;
        upd.device = "X";
        upd.rule = randomRule(store, rng, prio);
        if (!exists) upd.kind = FibUpdate::Kind::Insert;
        else upd.kind = rng() % 2 ? FibUpdate::Kind::Delete : FibUpdate::Kind::Modify;

        auto before = dev.table();
        auto delta = dev.apply(upd);
        ++applied;
        auto rebuilt = buildLecTable(store, dev.fib());
        REQUIRE(sameTable(rebuilt, dev.table()));
        checkPartition(store, dev.table());

        // delta covers exactly the headers whose action changed
        Predicate changed = Predicate::none(store);
        for (std::size_t i = 0; i < delta.size(); ++i) {
            CHECK(delta[i].before != delta[i].after);
            CHECK_FALSE(changed.intersects(delta[i].pred));
            changed |= delta[i].pred;
        }
        for (Header h = 0; h < (1u << kBits); h += 7) {
            ActionGroup old = ActionGroup::drop();
            for (const auto& e : before)
                if (e.pred.contains(h)) old = e.action;
            CHECK(changed.contains(h) == (old != dev.actionFor(h)));
        }
    }
}

TEST_CASE("re-adding an identical rule is a no-op") {
    BddStore store(kBits);
    DeviceDataPlane dev(store, "X");
    FibRule r{5, Predicate::bit(store, 0, true), ActionGroup(GroupKind::All, {"A"})};
    dev.install(r);
    CHECK(dev.apply({FibUpdate::Kind::Insert, "X", r}).empty());
    FibRule other{5, Predicate::bit(store, 1, true), ActionGroup(GroupKind::All, {"A"})};
    CHECK_THROWS_AS(dev.install(other), ValidationError);
    CHECK_THROWS_AS(dev.apply({FibUpdate::Kind::Delete, "X", FibRule{6, {}, {}}}), ValidationError);
}

TEST_CASE("workflow fixture update on B") {
    BddStore store;
    auto p1 = Predicate::fromCidr(store, Field::Dst, parseCidr("10.0.0.0/23"));
    DeviceDataPlane b(store, "B");
    b.install({10, p1, ActionGroup(GroupKind::All, {"C"})});
    auto delta = b.apply({FibUpdate::Kind::Modify, "B", {10, p1, ActionGroup(GroupKind::All, {"W"})}});
    REQUIRE(delta.size() == 1);
    CHECK(delta[0].pred == p1);
    CHECK(delta[0].before == ActionGroup(GroupKind::All, {"C"}));
    CHECK(delta[0].after == ActionGroup(GroupKind::All, {"W"}));
}

TEST_CASE("link events filter dead hops") {
    BddStore store(kBits);
    Topology topo;
    for (auto d : {"X", "A", "B", "C"}) topo.addDevice(d);
    topo.addLink("X", "A");
    topo.addLink("X", "B");
    topo.addLink("X", "C");
    DataPlane dp(store);
    dp.ensureDevices(topo);
    auto p = Predicate::bit(store, 0, true);
    dp.device("X").install({2, p, ActionGroup(GroupKind::All, {"C"})});
    dp.device("X").install({1, ~p, ActionGroup(GroupKind::Any, {"A", "B"})});
    auto original = dp.device("X").table();

    CHECK_THROWS_AS(dp.linkEvent(topo, "X", "Z", false), ValidationError);
    topo.addDevice("E");
    topo.addLink("X", "E");
    CHECK(dp.linkEvent(topo, "X", "E", false).empty());

    auto delta = dp.linkEvent(topo, "X", "C", false);
    REQUIRE(delta.size() == 1);
    CHECK(delta[0].pred == p);
    CHECK(delta[0].after.isDrop());

    delta = dp.linkEvent(topo, "X", "A", false);
    REQUIRE(delta.size() == 1);
    CHECK(delta[0].after == ActionGroup(GroupKind::All, {"B"}));

    dp.linkEvent(topo, "X", "A", true);
    dp.linkEvent(topo, "X", "C", true);
    dp.linkEvent(topo, "X", "E", true);
    CHECK(sameTable(original, dp.device("X").table()));
}
