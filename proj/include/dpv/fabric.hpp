#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dpv/io.hpp"
#include "dpv/reqlang.hpp"

namespace dpv {

/// A generated data center network with shortest-path forwarding.
struct GeneratedFabric {
    Topology topo;
    PrefixMap prefixes;
    std::map<std::string, std::vector<RuleSpec>> fibs;
    Fabric fabric;
    GroupKind ecmp = GroupKind::Any;
};

/// k-ary fat-tree: k pods of k/2 ToRs and k/2 aggregation switches, (k/2)^2
/// cores. Each ToR owns one /24. `ecmp` is the group type of multi-hop rules.
GeneratedFabric fatTree(int k, GroupKind ecmp = GroupKind::Any);

/// Two pods of two ToRs and two aggregation switches under two spines.
GeneratedFabric twoPodClos(GroupKind ecmp = GroupKind::Any);

/// Destination-based rules that forward along every shortest path to each ToR.
std::map<std::string, std::vector<RuleSpec>> shortestPathFibs(const Topology& topo, const Fabric& fabric,
                                                              GroupKind ecmp);

/// Random single-rule changes to the per-ToR rules of a generated fabric.
/// Most keep a non-empty subset of the shortest-path hops; the rest pick
/// any non-empty subset of neighbors.
std::vector<ScriptEvent> randomRuleUpdates(const GeneratedFabric& net, BddStore& store, int count, std::uint64_t seed,
                                           double offPathShare = 0.3);

}  // namespace dpv
