#include <random>

#include "doctest.h"
#include "support.hpp"

using namespace dpv;
using testsupport::dst;

namespace {

CountSet randomSet(std::mt19937& rng, int dim) {
    std::uniform_int_distribution<int> size(1, 4), val(0, 4);
    std::vector<CountVector> vs;
    for (int i = size(rng); i > 0; --i) {
        CountVector v(dim);
        for (auto& x : v) x = val(rng);
        vs.push_back(v);
    }
    return CountSet(dim, vs);
}

std::string render(const CellList& cells) {
    std::string out;
    for (const auto& c : cells) out += "(" + c.pred.describe() + "," + c.count.str() + ")";
    return out;
}

}  // namespace

TEST_CASE("cross sum and union examples") {
    CHECK(crossSum(CountSet::scalars({1}), CountSet::scalars({1})) == CountSet::scalars({2}));
    CHECK(crossSum(CountSet::scalars({0, 1}), CountSet::scalars({1})) == CountSet::scalars({1, 2}));
    CHECK(crossSum(CountSet::unit(2, 1), CountSet::unit(2, 2)) == CountSet::unit(2, 3));
    CHECK(crossSumAll({}, 3) == CountSet::zero(3));
    CHECK(unionSet(CountSet::scalars({0}), CountSet::scalars({1})) == CountSet::scalars({0, 1}));
    CHECK(zeroAugment(CountSet::scalars({1})) == CountSet::scalars({0, 1}));
    CHECK(CountSet::scalars({0, 1}).str() == "{0,1}");
    CHECK(CountSet::unit(2, 1).str() == "{(1,0)}");
    CHECK_THROWS_AS(crossSum(CountSet::zero(1), CountSet::zero(2)), Error);
    CHECK_THROWS_AS(unionSet(CountSet::zero(1), CountSet::zero(2)), Error);
}

TEST_CASE("algebra laws on random count sets") {
    std::mt19937 rng(17);
    for (int i = 0; i < 500; ++i) {
        int dim = 1 + i % 3;
        auto a = randomSet(rng, dim), b = randomSet(rng, dim), c = randomSet(rng, dim);
        CHECK(crossSum(a, b) == crossSum(b, a));
        CHECK(crossSum(crossSum(a, b), c) == crossSum(a, crossSum(b, c)));
        CHECK(crossSum(a, CountSet::zero(dim)) == a);
        CHECK(unionSet(a, b) == unionSet(b, a));
        CHECK(unionSet(unionSet(a, b), c) == unionSet(a, unionSet(b, c)));
        CHECK(unionSet(a, a) == a);
        if (dim == 1) {
            auto lo = std::max(a.vectors().front()[0], b.vectors().front()[0]);
            auto sum = crossSum(a, b);
            for (const auto& v : sum.vectors()) CHECK(v[0] >= lo);
        }
    }
}

TEST_CASE("minimal counting information truncation") {
    auto c = CountSet::scalars({0, 1, 2});
    CHECK(truncateMinInfo(c, Cmp::Ge, 1) == CountSet::scalars({0}));
    CHECK(truncateMinInfo(c, Cmp::Gt, 1) == CountSet::scalars({0}));
    CHECK(truncateMinInfo(c, Cmp::Eq, 1) == CountSet::scalars({0, 1}));
    CHECK(truncateMinInfo(c, Cmp::Le, 1) == CountSet::scalars({2}));
    CHECK(truncateMinInfo(CountSet::scalars({5}), Cmp::Le, 3) == CountSet::scalars({5}));
    CHECK_THROWS_AS(truncateMinInfo(CountSet::zero(2), Cmp::Ge, 1), Error);
}

TEST_CASE("node count for the worked example actions") {
    auto one = CountSet::scalars({1});
    auto zero = CountSet::scalars({0});
    // W forwards to C only, so D1 does not contribute.
    CHECK(nodeCount(ActionGroup(GroupKind::All, {"C"}), {{"C", &one}, {"D", &one}}, 1) == one);
    CHECK(nodeCount(ActionGroup(GroupKind::Any, {"B", "W"}), {{"B", &zero}, {"W", &one}}, 1) ==
          CountSet::scalars({0, 1}));
    CHECK(nodeCount(ActionGroup::drop(), {{"B", &one}}, 1) == zero);
    // ANY with a hop outside the network adds the zero outcome.
    CHECK(nodeCount(ActionGroup(GroupKind::Any, {"B", "X"}), {{"B", &one}}, 1) == CountSet::scalars({0, 1}));
    CHECK(nodeCount(ActionGroup(GroupKind::All, {"B", "C"}), {{"B", &one}, {"C", &one}}, 1) ==
          CountSet::scalars({2}));
}

TEST_CASE("worked example source results before and after the update") {
    auto net = testsupport::load(fixtures::workflow);
    auto plan = planSingle(net.reqs[0], net.topo, net.prefixes, *net.store);
    auto p1 = dst(net, "10.0.0.0/23"), p2 = dst(net, "10.0.0.0/24"), p3 = dst(net, "10.0.1.0/24");

    auto results = sourceResults(plan, *net.dp, net.prefixes);
    const auto& s1 = results.at("S");
    REQUIRE(s1.size() == 2);
    CHECK(s1[0].pred == p2);
    CHECK(s1[0].count == CountSet::scalars({0, 1}));
    CHECK(s1[1].pred == p3);
    CHECK(s1[1].count == CountSet::scalars({1}));

    auto verdicts = evaluate(plan, results);
    REQUIRE(verdicts.size() == 2);
    CHECK_FALSE(verdicts[0].satisfied);
    CHECK(*verdicts[0].witness == CountVector{0});
    CHECK(verdicts[1].satisfied);

    net.dp->apply({FibUpdate::Kind::Modify, "B", {10, p1, ActionGroup(GroupKind::All, {"W"})}});
    results = sourceResults(plan, *net.dp, net.prefixes);
    INFO(render(results.at("S")));
    REQUIRE(results.at("S").size() == 1);
    CHECK(results.at("S")[0].pred == p1);
    CHECK(results.at("S")[0].count == CountSet::scalars({1}));
    for (const auto& v : evaluate(plan, results)) CHECK(v.satisfied);
}

TEST_CASE("anycast compound counting") {
    auto net = testsupport::load(fixtures::anycast);
    auto plan = planSingle(net.reqs[0], net.topo, net.prefixes, *net.store);
    CHECK(plan.shape == Plan::Shape::UnionDest);
    CountContext ctx{&plan.topo, net.dp.get(), &net.prefixes, plan.space};
    auto cells = centralizedCount(plan.net, ctx);
    int d1 = plan.net.find("D1"), e1 = plan.net.find("E1");
    REQUIRE(d1 >= 0);
    REQUIRE(e1 >= 0);
    REQUIRE(cells[d1].size() == 1);
    CHECK(cells[d1][0].count == CountSet(2, {{1, 0}}));
    CHECK(cells[e1][0].count == CountSet(2, {{0, 1}}));
    auto results = sourceResults(plan, *net.dp, net.prefixes);
    CHECK(results.at("S")[0].count == CountSet(2, {{1, 0}, {0, 1}}));
    for (const auto& v : evaluate(plan, results)) CHECK(v.satisfied);

    PlanOptions naive;
    naive.compound = CompoundMode::Naive;
    auto nplan = planSingle(net.reqs[0], net.topo, net.prefixes, *net.store, naive);
    auto nres = sourceResults(nplan, *net.dp, net.prefixes);
    CHECK(nres.at("S")[0].count == CountSet(2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
    bool violated = false;
    for (const auto& v : evaluate(nplan, nres)) violated |= !v.satisfied;
    CHECK(violated);
}

TEST_CASE("shared destination counting with virtual destinations") {
    auto net = testsupport::load(fixtures::sameDest);
    auto plan = planSingle(net.reqs[0], net.topo, net.prefixes, *net.store);
    CHECK(plan.shape == Plan::Shape::VirtualDest);
    CHECK(plan.topo.hasDevice("D^1"));
    CHECK(plan.topo.hasDevice("D^2"));
    auto results = sourceResults(plan, *net.dp, net.prefixes);
    CHECK(results.at("S")[0].count == CountSet(2, {{1, 1}, {2, 0}}));
    for (const auto& v : evaluate(plan, results)) CHECK(v.satisfied);

    PlanOptions naive;
    naive.compound = CompoundMode::Naive;
    auto nplan = planSingle(net.reqs[0], net.topo, net.prefixes, *net.store, naive);
    auto nres = sourceResults(nplan, *net.dp, net.prefixes);
    CHECK(nres.at("S")[0].count == CountSet(2, {{1, 0}, {1, 1}, {2, 0}, {2, 1}}));
}
