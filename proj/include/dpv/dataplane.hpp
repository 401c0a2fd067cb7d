#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dpv/predicate.hpp"
#include "dpv/topology.hpp"

namespace dpv {

enum class GroupKind { All, Any };

/// Forwarding action: send to every hop (ALL) or to exactly one hop (ANY).
/// Hops are kept sorted. An empty group drops; a single-hop ANY group is
/// stored as ALL since both forward to the same device.
class ActionGroup {
public:
    ActionGroup() = default;
    ActionGroup(GroupKind kind, std::vector<std::string> hops);

    static ActionGroup drop() { return {}; }

    GroupKind kind() const { return kind_; }
    const std::vector<std::string>& hops() const { return hops_; }
    bool isDrop() const { return hops_.empty(); }
    bool forwardsTo(const std::string& device) const;

    /// Copy with the given neighbors removed from the hop list.
    ActionGroup without(const std::set<std::string>& dead) const;

    std::string str() const;

    auto operator<=>(const ActionGroup&) const = default;

private:
    GroupKind kind_ = GroupKind::All;
    std::vector<std::string> hops_;
};

struct FibRule {
    int priority = 0;
    Predicate match;
    ActionGroup action;
};

/// Prioritized match-action table, highest priority first.
using Fib = std::map<int, FibRule, std::greater<>>;

struct LecEntry {
    Predicate pred;
    ActionGroup action;
};

/// Partition of the header space into maximal classes with one action each,
/// ordered by action.
using LecTable = std::vector<LecEntry>;

struct LecDelta {
    Predicate pred;
    ActionGroup before;
    ActionGroup after;
};

struct FibUpdate {
    enum class Kind { Insert, Delete, Modify };
    Kind kind = Kind::Insert;
    std::string device;
    FibRule rule;  // only priority is read for Delete
};

ActionGroup effectiveAction(const Fib& fib, Header header);
LecTable buildLecTable(BddStore& store, const Fib& fib, const std::set<std::string>& deadNeighbors = {});
/// Headers whose action differs between two tables over the same store.
std::vector<LecDelta> diffTables(const LecTable& before, const LecTable& after);

/// Forwarding state of one device: its FIB, the dead neighbor set, and the
/// LEC table, maintained incrementally.
class DeviceDataPlane {
public:
    DeviceDataPlane(BddStore& store, std::string name);

    const std::string& name() const { return name_; }
    const Fib& fib() const { return fib_; }
    const LecTable& table() const { return table_; }
    const std::set<std::string>& deadNeighbors() const { return dead_; }

    /// Adds a rule during ingestion; duplicate priorities are rejected.
    void install(const FibRule& rule);
    std::vector<LecDelta> apply(const FibUpdate& update);
    std::vector<LecDelta> setNeighborState(const std::string& neighbor, bool up);

    ActionGroup actionFor(Header header) const;

private:
    Predicate higherThan(int priority) const;
    void moveRegion(const Predicate& region, const ActionGroup& to);
    void assignFromRules(const Predicate& region, int belowPriority);
    void rebuildEffective();

    BddStore* store_;
    std::string name_;
    Fib fib_;
    std::set<std::string> dead_;
    std::map<ActionGroup, Predicate> raw_;  // unfiltered action -> headers
    LecTable table_;
};

/// Forwarding state for a whole network.
class DataPlane {
public:
    explicit DataPlane(BddStore& store) : store_(&store) {}

    BddStore& store() const { return *store_; }
    DeviceDataPlane& device(const std::string& name);
    const DeviceDataPlane& device(const std::string& name) const;
    bool hasDevice(const std::string& name) const { return devices_.count(name) != 0; }
    const std::map<std::string, DeviceDataPlane>& devices() const { return devices_; }

    void ensureDevices(const Topology& topo);
    /// Rejects hops that are not topology neighbors.
    void validate(const Topology& topo) const;

    std::vector<LecDelta> apply(const FibUpdate& update);
    /// Link state change seen from `device` toward `neighbor`.
    std::vector<LecDelta> linkEvent(const Topology& topo, const std::string& device, const std::string& neighbor, bool up);

private:
    BddStore* store_;
    std::map<std::string, DeviceDataPlane> devices_;
};

}  // namespace dpv
