#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpv/automaton.hpp"
#include "dpv/reqlang.hpp"
#include "dpv/topology.hpp"

namespace dpv {

struct DvNode {
    std::string id;   // device name followed by an index, e.g. "W2"
    std::string dev;  // may be a virtual destination
    int state = -1;   // automaton state of a representative product node
    std::uint64_t accept = 0;
    int layer = 0;    // longest path from any source
    std::vector<int> down;
    std::vector<int> up;
};

/// DAG of (device, automaton state) nodes. Node indices are sorted by id.
struct DvNet {
    std::vector<DvNode> nodes;
    std::map<std::string, int> sources;  // ingress -> node, absent when nothing is reachable
    int dimension = 1;

    int find(const std::string& id) const;
    /// Downstream nodes before upstream ones.
    std::vector<int> reverseTopological() const;
};

struct BuildOptions {
    bool bisimulation = true;
};

/// Product of the automaton with the simple paths of the topology, pruned to
/// nodes on some source-to-accepting path.
DvNet buildDvnet(const Dfa& dfa, const Topology& topo, const std::vector<std::string>& ingress,
                 const BuildOptions& options = {});

enum class TaskMode { FullCount, MinInfo, EqualLocal };

struct DeviceTask {
    int node = -1;
    std::string nodeId;
    std::string device;  // physical device hosting the task
    std::vector<int> down;
    std::vector<int> up;
    int dimension = 1;
    TaskMode mode = TaskMode::FullCount;
    Cmp cmp = Cmp::Ge;
    std::uint32_t n = 0;
};

enum class CompoundMode { Auto, Naive };

struct PlanOptions {
    bool bisimulation = true;
    bool minInfo = false;
    CompoundMode compound = CompoundMode::Auto;
};

/// Compiled verification work for one requirement component.
struct Plan {
    enum class Kind { Counting, Equal };
    enum class Shape { Single, UnionDest, VirtualDest, Naive, Empty };

    Kind kind = Kind::Counting;
    Shape shape = Shape::Single;
    int version = 1;
    Requirement req;      // desugared, loop_free atoms kept
    BehaviorPtr behavior; // the part this plan decides
    Predicate space;
    Topology topo;        // possibly rewritten with virtual destinations
    std::vector<std::string> ingress;

    DvNet net;
    std::vector<DeviceTask> tasks;
    /// Per behavior leaf: count dimension, or -1 for leaves that can never match.
    std::vector<int> leafDim;

    /// Naive shape only: one scalar network per active dimension.
    std::vector<DvNet> naiveNets;
};

/// A requirement compiles to one counting plan (possibly trivial) and one
/// equal plan per top-level equal conjunct.
struct PlanSet {
    Requirement req;
    std::vector<Plan> plans;
};

PlanSet planRequirement(const Requirement& parsed, const Topology& topo, const PrefixMap& prefixes, BddStore& store,
                        const PlanOptions& options = {});

/// Single-leaf planning shortcut used by tests and tools.
Plan planSingle(const Requirement& parsed, const Topology& topo, const PrefixMap& prefixes, BddStore& store,
                const PlanOptions& options = {});

/// Topology with `dest` replaced by `copies` aliases named dest^1..dest^copies;
/// a single copy leaves the topology unchanged.
Topology withVirtualDestinations(const Topology& topo, const std::string& dest, int copies);

std::string exportPlan(const Plan& plan);
std::string exportDot(const DvNet& net);

}  // namespace dpv
