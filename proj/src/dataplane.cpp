#include "dpv/dataplane.hpp"

#include <algorithm>

namespace dpv {

ActionGroup::ActionGroup(GroupKind kind, std::vector<std::string> hops) : kind_(kind), hops_(std::move(hops)) {
    std::sort(hops_.begin(), hops_.end());
    if (std::adjacent_find(hops_.begin(), hops_.end()) != hops_.end())
        throw ParseError("duplicate next hop in action group");
    if (hops_.size() <= 1) kind_ = GroupKind::All;
}

bool ActionGroup::forwardsTo(const std::string& device) const {
    return std::binary_search(hops_.begin(), hops_.end(), device);
}

ActionGroup ActionGroup::without(const std::set<std::string>& dead) const {
    if (dead.empty()) return *this;
    std::vector<std::string> live;
    for (const auto& h : hops_)
        if (!dead.count(h)) live.push_back(h);
    return ActionGroup(kind_, std::move(live));
}

std::string ActionGroup::str() const {
    if (isDrop()) return "drop";
    std::string out = kind_ == GroupKind::All ? "ALL{" : "ANY{";
    for (std::size_t i = 0; i < hops_.size(); ++i) out += (i ? "," : "") + hops_[i];
    return out + "}";
}

ActionGroup effectiveAction(const Fib& fib, Header header) {
    for (const auto& [prio, rule] : fib)
        if (rule.match.contains(header)) return rule.action;
    return ActionGroup::drop();
}

namespace {

LecTable tableFrom(const std::map<ActionGroup, Predicate>& byAction) {
    LecTable table;
    for (const auto& [action, pred] : byAction)
        if (!pred.isEmpty()) table.push_back({pred, action});
    return table;
}

}  // namespace

LecTable buildLecTable(BddStore& store, const Fib& fib, const std::set<std::string>& deadNeighbors) {
    std::map<ActionGroup, Predicate> byAction;
    Predicate remaining = Predicate::all(store);
    for (const auto& [prio, rule] : fib) {
        Predicate effective = rule.match & remaining;
        if (effective.isEmpty()) continue;
        auto action = rule.action.without(deadNeighbors);
        auto [it, fresh] = byAction.try_emplace(action, effective);
        if (!fresh) it->second |= effective;
        remaining -= rule.match;
    }
    if (!remaining.isEmpty()) {
        auto [it, fresh] = byAction.try_emplace(ActionGroup::drop(), remaining);
        if (!fresh) it->second |= remaining;
    }
    return tableFrom(byAction);
}

std::vector<LecDelta> diffTables(const LecTable& before, const LecTable& after) {
    std::vector<LecDelta> delta;
    for (const auto& b : before)
        for (const auto& a : after) {
            if (a.action == b.action) continue;
            Predicate both = a.pred & b.pred;
            if (!both.isEmpty()) delta.push_back({both, b.action, a.action});
        }
    return delta;
}

DeviceDataPlane::DeviceDataPlane(BddStore& store, std::string name) : store_(&store), name_(std::move(name)) {
    raw_.emplace(ActionGroup::drop(), Predicate::all(store));
    rebuildEffective();
}

Predicate DeviceDataPlane::higherThan(int priority) const {
    Predicate acc = Predicate::none(*store_);
    for (const auto& [prio, rule] : fib_) {
        if (prio <= priority) break;
        acc |= rule.match;
    }
    return acc;
}

void DeviceDataPlane::moveRegion(const Predicate& region, const ActionGroup& to) {
    if (region.isEmpty()) return;
    for (auto it = raw_.begin(); it != raw_.end();) {
        it->second -= region;
        it = it->second.isEmpty() ? raw_.erase(it) : std::next(it);
    }
    auto [it, fresh] = raw_.try_emplace(to, region);
    if (!fresh) it->second |= region;
}

void DeviceDataPlane::assignFromRules(const Predicate& region, int belowPriority) {
    Predicate remaining = region;
    for (const auto& [prio, rule] : fib_) {
        if (prio >= belowPriority) continue;
        if (remaining.isEmpty()) break;
        Predicate part = remaining & rule.match;
        moveRegion(part, rule.action);
        remaining -= part;
    }
    moveRegion(remaining, ActionGroup::drop());
}

void DeviceDataPlane::rebuildEffective() {
    std::map<ActionGroup, Predicate> byAction;
    for (const auto& [action, pred] : raw_) {
        auto filtered = action.without(dead_);
        auto [it, fresh] = byAction.try_emplace(filtered, pred);
        if (!fresh) it->second |= pred;
    }
    table_ = tableFrom(byAction);
}

void DeviceDataPlane::install(const FibRule& rule) {
    if (fib_.count(rule.priority))
        throw ValidationError(ValidationError::Kind::DuplicatePriority,
                              name_ + " priority " + std::to_string(rule.priority));
    apply(FibUpdate{FibUpdate::Kind::Insert, name_, rule});
}

std::vector<LecDelta> DeviceDataPlane::apply(const FibUpdate& update) {
    const int prio = update.rule.priority;
    auto existing = fib_.find(prio);
    auto before = table_;

    auto remove = [&]() {
        Predicate region = existing->second.match - higherThan(prio);
        fib_.erase(existing);
        assignFromRules(region, prio);
    };
    auto insert = [&](const FibRule& rule) {
        Predicate region = rule.match - higherThan(rule.priority);
        fib_.emplace(rule.priority, rule);
        moveRegion(region, rule.action);
    };

    switch (update.kind) {
    case FibUpdate::Kind::Insert:
        if (existing != fib_.end()) {
            const auto& cur = existing->second;
            if (cur.match == update.rule.match && cur.action == update.rule.action) return {};
            throw ValidationError(ValidationError::Kind::DuplicatePriority,
                                  name_ + " priority " + std::to_string(prio));
        }
        insert(update.rule);
        break;
    case FibUpdate::Kind::Delete:
        if (existing == fib_.end())
            throw ValidationError(ValidationError::Kind::UnknownPriority, name_ + " priority " + std::to_string(prio));
        remove();
        break;
    case FibUpdate::Kind::Modify:
        if (existing == fib_.end())
            throw ValidationError(ValidationError::Kind::UnknownPriority, name_ + " priority " + std::to_string(prio));
        remove();
        insert(update.rule);
        break;
    }
    rebuildEffective();
    return diffTables(before, table_);
}

std::vector<LecDelta> DeviceDataPlane::setNeighborState(const std::string& neighbor, bool up) {
    auto before = table_;
    if (up)
        dead_.erase(neighbor);
    else
        dead_.insert(neighbor);
    rebuildEffective();
    return diffTables(before, table_);
}

ActionGroup DeviceDataPlane::actionFor(Header header) const {
    for (const auto& e : table_)
        if (e.pred.contains(header)) return e.action;
    return ActionGroup::drop();
}

DeviceDataPlane& DataPlane::device(const std::string& name) {
    auto it = devices_.find(name);
    if (it == devices_.end()) it = devices_.emplace(name, DeviceDataPlane(*store_, name)).first;
    return it->second;
}

const DeviceDataPlane& DataPlane::device(const std::string& name) const {
    auto it = devices_.find(name);
    if (it == devices_.end()) throw ValidationError(ValidationError::Kind::UnknownDevice, name);
    return it->second;
}

void DataPlane::ensureDevices(const Topology& topo) {
    for (const auto& d : topo.devices())
        if (!topo.isVirtual(d)) device(d);
}

void DataPlane::validate(const Topology& topo) const {
    for (const auto& [name, dev] : devices_) {
        if (!topo.hasDevice(name)) throw ValidationError(ValidationError::Kind::UnknownDevice, name);
        for (const auto& [prio, rule] : dev.fib())
            for (const auto& hop : rule.action.hops())
                if (!topo.hasLink(name, hop))
                    throw ValidationError(ValidationError::Kind::UnknownLink,
                                          name + " -> " + hop + " (rule " + std::to_string(prio) + ")");
    }
}

std::vector<LecDelta> DataPlane::apply(const FibUpdate& update) {
    if (!devices_.count(update.device)) throw ValidationError(ValidationError::Kind::UnknownDevice, update.device);
    return device(update.device).apply(update);
}

std::vector<LecDelta> DataPlane::linkEvent(const Topology& topo, const std::string& deviceName,
                                           const std::string& neighbor, bool up) {
    if (!topo.hasLink(deviceName, neighbor))
        throw ValidationError(ValidationError::Kind::UnknownLink, deviceName + " - " + neighbor);
    return device(deviceName).setNeighborState(neighbor, up);
}

}  // namespace dpv
