#include "dpv/dvproto.hpp"

#include <sstream>

namespace dpv {

void checkMessage(const UpdateMessage& msg) {
    if (msg.withdrawn.empty() && msg.incoming.empty()) throw ProtocolError("empty UPDATE " + msg.down + "->" + msg.up);
    BddStore* store = !msg.withdrawn.empty() ? msg.withdrawn[0].store() : msg.incoming[0].first.store();
    Predicate w = Predicate::none(*store), in = Predicate::none(*store);
    for (const auto& p : msg.withdrawn) w |= p;
    for (const auto& [p, c] : msg.incoming) {
        if (in.intersects(p)) throw ProtocolError("overlapping incoming predicates in UPDATE " + msg.down + "->" + msg.up);
        in |= p;
    }
    if (w != in) throw ProtocolError("withdrawn and incoming predicates differ in UPDATE " + msg.down + "->" + msg.up);
}

std::string serialize(const UpdateMessage& msg) {
    std::ostringstream os;
    os << "UPD " << msg.up << " " << msg.down << " W:[";
    for (std::size_t i = 0; i < msg.withdrawn.size(); ++i) os << (i ? "," : "") << msg.withdrawn[i].id();
    os << "] I:[";
    for (std::size_t i = 0; i < msg.incoming.size(); ++i)
        os << (i ? "," : "") << "(" << msg.incoming[i].first.id() << "," << msg.incoming[i].second.str() << ")";
    os << "]";
    return os.str();
}

std::size_t bytesProxy(const UpdateMessage& msg) {
    std::size_t nodes = 0, counts = 0;
    for (const auto& p : msg.withdrawn) nodes += p.sizeNodes();
    for (const auto& [p, c] : msg.incoming) {
        nodes += p.sizeNodes();
        counts += c.size() * static_cast<std::size_t>(c.dimension());
    }
    return nodes * 16 + counts * 8;
}

Verifier::Verifier(std::string device, const Topology& topo, const DataPlane& dp, const PrefixMap& prefixes)
    : device_(std::move(device)), topo_(&topo), dp_(&dp), prefixes_(&prefixes) {}

void Verifier::addPlan(int index, const Plan& plan) {
    for (std::size_t u = 0; u < plan.net.nodes.size(); ++u) {
        if (plan.topo.physical(plan.net.nodes[u].dev) != device_) continue;
        Task t;
        t.plan = &plan;
        t.index = index;
        t.node = static_cast<int>(u);
        if (plan.kind == Plan::Kind::Counting) {
            const int dim = plan.net.dimension;
            for (int v : plan.net.nodes[u].down) t.cibIn[v] = {{plan.space, CountSet::zero(dim)}};
            if (!plan.space.isEmpty()) t.advertised = {{plan.space, CountSet::zero(dim)}};
        }
        tasks_.emplace(std::make_pair(index, static_cast<int>(u)), std::move(t));
    }
}

CountSet Verifier::countOf(const Task& t, const Key& k) const {
    const auto& net = t.plan->net;
    if (k.delivered) return CountSet::unit(net.dimension, net.nodes[t.node].accept);
    std::vector<Contribution> contrib;
    for (const auto& c : k.causality) contrib.push_back({t.plan->topo.physical(net.nodes[c.node].dev), &c.count});
    return nodeCount(k.action, contrib, net.dimension);
}

CountSet Verifier::outbound(const Task& t, const CountSet& c) const {
    if (t.plan->tasks.empty()) return c;
    const auto& task = t.plan->tasks[t.node];
    if (task.mode != TaskMode::MinInfo) return c;
    return truncateMinInfo(c, task.cmp, task.n);
}

void Verifier::recompute(Task& t, const Predicate& affected) {
    const Plan& plan = *t.plan;
    Predicate region = affected & plan.space;
    if (region.isEmpty()) return;
    if (plan.kind == Plan::Kind::Equal) {
        t.violations = equalCheckNode(plan, t.node, *dp_, *prefixes_);
        return;
    }
    for (auto it = t.loc.begin(); it != t.loc.end();) {
        it->second -= region;
        it = it->second.isEmpty() ? t.loc.erase(it) : std::next(it);
    }

    BddStore& store = *plan.space.store();
    const auto& node = plan.net.nodes[t.node];
    auto add = [&](Key k, const Predicate& p) {
        auto [it, fresh] = t.loc.try_emplace(std::move(k), p);
        if (!fresh) it->second |= p;
    };

    Predicate deliver = prefixes_->predicate(store, device_);
    if (Predicate here = region & deliver; !here.isEmpty()) add({true, ActionGroup::drop(), {}}, here);
    Predicate rest = region - deliver;
    if (rest.isEmpty()) {
        t.dirty = true;
        return;
    }

    LecTable fallback{{Predicate::all(store), ActionGroup::drop()}};
    const LecTable& table = dp_->hasDevice(device_) ? dp_->device(device_).table() : fallback;
    for (const auto& lec : table) {
        Predicate base = rest & lec.pred;
        if (base.isEmpty()) continue;
        std::vector<std::pair<Predicate, std::vector<Causality>>> parts{{base, {}}};
        if (!lec.action.isDrop()) {
            for (int v : node.down) {
                if (!lec.action.forwardsTo(plan.topo.physical(plan.net.nodes[v].dev))) continue;
                std::vector<std::pair<Predicate, std::vector<Causality>>> next;
                for (const auto& [pred, causes] : parts)
                    for (const auto& cell : t.cibIn.at(v)) {
                        Predicate both = pred & cell.pred;
                        if (both.isEmpty()) continue;
                        auto c = causes;
                        c.push_back({v, cell.count});
                        next.emplace_back(both, std::move(c));
                    }
                parts = std::move(next);
            }
        }
        for (auto& [pred, causes] : parts) add({false, lec.action, std::move(causes)}, pred);
    }
    t.dirty = true;
}

CellList Verifier::view(const Task& t) const {
    CellList cells;
    for (const auto& [k, p] : t.loc) cells.push_back({p, outbound(t, countOf(t, k))});
    return coalesce(cells);
}

void Verifier::emit(Task& t, std::vector<UpdateMessage>& out) {
    if (!t.dirty) return;
    t.dirty = false;
    if (t.plan->kind != Plan::Kind::Counting) return;
    CellList now = view(t);
    BddStore& store = *t.plan->space.store();
    Predicate changed = Predicate::none(store);
    for (const auto& a : t.advertised)
        for (const auto& b : now)
            if (a.count != b.count) changed |= a.pred & b.pred;
    if (changed.isEmpty()) return;
    changed_ = true;

    UpdateMessage base;
    base.plan = t.index;
    base.version = t.plan->version;
    base.down = t.plan->net.nodes[t.node].id;
    base.fromDevice = device_;
    for (const auto& a : t.advertised)
        if (Predicate w = a.pred & changed; !w.isEmpty()) base.withdrawn.push_back(w);
    for (const auto& b : now)
        if (Predicate p = b.pred & changed; !p.isEmpty()) base.incoming.emplace_back(p, b.count);
    t.advertised = std::move(now);

    for (int w : t.plan->net.nodes[t.node].up) {
        UpdateMessage msg = base;
        msg.up = t.plan->net.nodes[w].id;
        msg.toDevice = t.plan->topo.physical(t.plan->net.nodes[w].dev);
        checkMessage(msg);
        out.push_back(std::move(msg));
    }
}

std::vector<UpdateMessage> Verifier::flush() {
    std::vector<UpdateMessage> out;
    for (auto& [key, t] : tasks_) emit(t, out);
    return out;
}

std::vector<UpdateMessage> Verifier::maybeFlush() { return dampening_ ? std::vector<UpdateMessage>{} : flush(); }

bool Verifier::hasPendingOutput() const {
    for (const auto& [key, t] : tasks_)
        if (t.dirty) return true;
    return false;
}

std::vector<UpdateMessage> Verifier::start() {
    for (auto& [key, t] : tasks_) recompute(t, Predicate::all(*t.plan->space.store()));
    return maybeFlush();
}

std::vector<UpdateMessage> Verifier::handleUpdate(const UpdateMessage& msg) {
    if (msg.toDevice != device_) throw ProtocolError("UPDATE for " + msg.toDevice + " delivered to " + device_);
    auto it = tasks_.end();
    for (auto i = tasks_.lower_bound({msg.plan, 0}); i != tasks_.end() && i->first.first == msg.plan; ++i)
        if (i->second.plan->net.nodes[i->second.node].id == msg.up) it = i;
    if (it == tasks_.end()) throw ProtocolError("UPDATE for unknown node " + msg.up + " at " + device_);
    Task& t = it->second;
    if (msg.version != t.plan->version) {
        ++stale_;
        return {};
    }
    checkMessage(msg);
    int v = t.plan->net.find(msg.down);
    auto in = t.cibIn.find(v);
    if (in == t.cibIn.end()) throw ProtocolError(msg.down + " is not downstream of " + msg.up);

    BddStore& store = *t.plan->space.store();
    Predicate withdrawn = Predicate::none(store);
    for (const auto& p : msg.withdrawn) withdrawn |= p;
    CellList cells;
    for (const auto& c : in->second)
        if (Predicate keep = c.pred - withdrawn; !keep.isEmpty()) cells.push_back({keep, c.count});
    for (const auto& [p, c] : msg.incoming) cells.push_back({p, c});
    in->second = coalesce(cells);

    Predicate affected = Predicate::none(store);
    for (const auto& [k, p] : t.loc)
        for (const auto& c : k.causality)
            if (c.node == v) {
                affected |= p & withdrawn;
                break;
            }
    recompute(t, affected);
    return maybeFlush();
}

std::vector<UpdateMessage> Verifier::handleInternalEvent(const std::vector<LecDelta>& delta) {
    if (delta.empty() || tasks_.empty()) return {};
    BddStore& store = *delta[0].pred.store();
    Predicate region = Predicate::none(store);
    for (const auto& d : delta) region |= d.pred;
    for (auto& [key, t] : tasks_) recompute(t, region);
    return maybeFlush();
}

std::vector<LocEntry> Verifier::locCib(int plan, int node) const {
    const Task& t = tasks_.at({plan, node});
    std::vector<LocEntry> out;
    for (const auto& [k, p] : t.loc) out.push_back({p, countOf(t, k), k.action, k.delivered, k.causality});
    return out;
}

CellList Verifier::results(int plan, int node) const { return view(tasks_.at({plan, node})); }

const CellList& Verifier::cibIn(int plan, int node, int downstream) const {
    return tasks_.at({plan, node}).cibIn.at(downstream);
}

std::vector<EqualViolation> Verifier::violations() const {
    std::vector<EqualViolation> out;
    for (const auto& [key, t] : tasks_) out.insert(out.end(), t.violations.begin(), t.violations.end());
    return out;
}

bool Verifier::takeChanged() {
    bool c = changed_;
    changed_ = false;
    return c;
}

void Verifier::checkInvariants() const {
    for (const auto& [key, t] : tasks_) {
        if (t.plan->kind != Plan::Kind::Counting) continue;
        BddStore& store = *t.plan->space.store();
        Predicate seen = Predicate::none(store);
        for (const auto& [k, p] : t.loc) {
            if (seen.intersects(p)) throw ProtocolError("LocCIB overlap at " + t.plan->net.nodes[t.node].id);
            seen |= p;
        }
        if (seen != t.plan->space) throw ProtocolError("LocCIB does not cover the space at " + t.plan->net.nodes[t.node].id);
        for (const auto& [v, cells] : t.cibIn) {
            Predicate all = Predicate::none(store);
            for (const auto& c : cells) all |= c.pred;
            if (all != t.plan->space) throw ProtocolError("CIBIn does not cover the space at " + t.plan->net.nodes[t.node].id);
        }
    }
}

}  // namespace dpv
