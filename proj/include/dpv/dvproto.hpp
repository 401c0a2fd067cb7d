#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dpv/countalg.hpp"

namespace dpv {

/// Counting results sent from a downstream node to one upstream node. The
/// withdrawn predicates and the incoming predicates cover the same headers.
struct UpdateMessage {
    int plan = 0;
    int version = 1;
    std::string up;    // receiving node
    std::string down;  // sending node
    std::string fromDevice;
    std::string toDevice;
    std::vector<Predicate> withdrawn;
    std::vector<std::pair<Predicate, CountSet>> incoming;
};

/// Throws ProtocolError unless union(withdrawn) == union(incoming) and the
/// incoming predicates are pairwise disjoint.
void checkMessage(const UpdateMessage& msg);
/// `UPD <up> <down> W:[ids] I:[(id,countset)]`, predicates by handle id.
std::string serialize(const UpdateMessage& msg);
/// 16 bytes per predicate node plus 8 per count component.
std::size_t bytesProxy(const UpdateMessage& msg);

struct Causality {
    int node;  // downstream node index
    CountSet count;
    auto operator<=>(const Causality&) const = default;
};

struct LocEntry {
    Predicate pred;
    CountSet count;
    ActionGroup action;
    bool delivered = false;
    std::vector<Causality> causality;
};

/// On-device verifier. Hosts every plan node whose physical device is this
/// device and keeps one CIB per node.
class Verifier {
public:
    Verifier(std::string device, const Topology& topo, const DataPlane& dp, const PrefixMap& prefixes);

    const std::string& device() const { return device_; }
    void addPlan(int index, const Plan& plan);
    bool hostsAny() const { return !tasks_.empty(); }

    void setDampening(bool on) { dampening_ = on; }
    bool dampening() const { return dampening_; }

    /// Computes every hosted node from scratch and emits initial results.
    std::vector<UpdateMessage> start();
    std::vector<UpdateMessage> handleUpdate(const UpdateMessage& msg);
    /// Reacts to local forwarding changes (rule updates or link events).
    std::vector<UpdateMessage> handleInternalEvent(const std::vector<LecDelta>& delta);
    /// Emits pending results: one message per changed (node, upstream node).
    std::vector<UpdateMessage> flush();
    bool hasPendingOutput() const;

    bool hosts(int plan, int node) const { return tasks_.count({plan, node}) != 0; }
    std::vector<LocEntry> locCib(int plan, int node) const;
    /// Coalesced results as announced upstream.
    CellList results(int plan, int node) const;
    const CellList& cibIn(int plan, int node, int downstream) const;
    std::vector<EqualViolation> violations() const;

    /// Set whenever a hosted node's announced results change.
    bool takeChanged();
    std::size_t staleDropped() const { return stale_; }

    /// Checks partitioning and that every count is recomputable from its causality.
    void checkInvariants() const;

private:
    struct Key {
        bool delivered;
        ActionGroup action;
        std::vector<Causality> causality;
        auto operator<=>(const Key&) const = default;
    };
    struct Task {
        const Plan* plan = nullptr;
        int index = 0;
        int node = -1;
        std::map<int, CellList> cibIn;
        std::map<Key, Predicate> loc;
        CellList advertised;
        bool dirty = false;
        std::vector<EqualViolation> violations;
    };

    CountSet countOf(const Task& t, const Key& k) const;
    CountSet outbound(const Task& t, const CountSet& c) const;
    void recompute(Task& t, const Predicate& region);
    CellList view(const Task& t) const;
    void emit(Task& t, std::vector<UpdateMessage>& out);
    std::vector<UpdateMessage> maybeFlush();

    std::string device_;
    const Topology* topo_;
    const DataPlane* dp_;
    const PrefixMap* prefixes_;
    std::map<std::pair<int, int>, Task> tasks_;
    bool dampening_ = false;
    bool changed_ = false;
    std::size_t stale_ = 0;
};

}  // namespace dpv
