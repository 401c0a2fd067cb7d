#include "dpv/simnet.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

namespace dpv {

std::string statsCsvHeader() { return "event_id,convergence_us,messages,bytes_proxy,devices_changed"; }

std::string statsCsvRow(const RunStats& s) {
    return std::to_string(s.eventId) + "," + std::to_string(s.convergenceUs) + "," + std::to_string(s.messages) + "," +
           std::to_string(s.bytes) + "," + std::to_string(s.devicesChanged);
}

Simulation::Simulation(const Topology& topo, DataPlane& dp, const PrefixMap& prefixes, std::vector<Plan> plans,
                       LatencyMap latency, SimOptions options)
    : topo_(&topo), dp_(&dp), prefixes_(&prefixes), plans_(std::move(plans)), latency_(std::move(latency)),
      opt_(options), rng_(options.seed) {
    for (const auto& [key, us] : latency_)
        if (us < 0) throw ValidationError(ValidationError::Kind::Unsupported, "negative latency");
    for (const auto& plan : plans_)
        if (plan.shape == Plan::Shape::Naive)
            throw ValidationError(ValidationError::Kind::Unsupported, "naive compound plans run centrally only");
    for (const auto& d : topo.devices()) {
        if (topo.isVirtual(d)) continue;
        auto& v = verifiers_.emplace(d, Verifier(d, topo, dp, prefixes)).first->second;
        v.setDampening(opt_.dampening);
        for (std::size_t i = 0; i < plans_.size(); ++i) v.addPlan(static_cast<int>(i), plans_[i]);
    }
    if (opt_.perturb)
        for (const auto& [a, b] : topo.links()) {
            auto base = linkLatency(a, b);
            std::uniform_int_distribution<std::int64_t> band(base / 2, base + base / 2);
            perturbed_[{std::min(a, b), std::max(a, b)}] = band(rng_);
        }
}

std::int64_t Simulation::linkLatency(const std::string& a, const std::string& b) {
    if (opt_.zeroLatency) return 0;
    std::pair key{std::min(a, b), std::max(a, b)};
    if (auto it = perturbed_.find(key); it != perturbed_.end()) return it->second;
    if (auto it = latency_.find(key); it != latency_.end()) return it->second;
    return opt_.defaultLatency;
}

void Simulation::push(Event e) {
    e.seq = seq_++;
    if (e.kind != Event::Kind::Flush) ++pendingFor_[e.device];
    queue_.push(std::move(e));
}

void Simulation::record(const std::string& line) {
    for (unsigned char c : line) traceHash_ = (traceHash_ ^ c) * 1099511628211ULL;
    traceHash_ = (traceHash_ ^ '\n') * 1099511628211ULL;
}

void Simulation::send(std::vector<UpdateMessage> msgs, const std::string& from) {
    for (auto& m : msgs) {
        std::int64_t at = now_ + linkLatency(from, m.toDevice) + opt_.processingCost;
        if (opt_.perturb) {
            std::uniform_int_distribution<std::int64_t> jitter(0, std::max<std::int64_t>(1, linkLatency(from, m.toDevice) / 2));
            at += jitter(rng_);
        }
        // FIFO per directed device pair.
        auto& last = lastArrival_[{from, m.toDevice}];
        at = std::max(at, last);
        last = at;
        ++runMessages_;
        ++totalMessages_;
        runBytes_ += bytesProxy(m);
        record("send " + std::to_string(now_) + " " + serialize(m));
        std::string to = m.toDevice;
        push({at, 0, Event::Kind::Deliver, to, std::move(m), {}});
    }
}

void Simulation::afterHandling(const std::string& device) {
    auto& v = verifiers_.at(device);
    if (!v.dampening() || !v.hasPendingOutput() || flushScheduled_[device]) return;
    flushScheduled_[device] = true;
    push({now_ + opt_.dampingWindow, 0, Event::Kind::Flush, device, {}, {}});
}

RunStats Simulation::runToQuiescence(int eventId, std::int64_t start) {
    std::size_t processed = 0;
    while (!queue_.empty()) {
        if (++processed > opt_.eventBudget) {
            std::ostringstream os;
            os << "no quiescence after " << opt_.eventBudget << " events; " << queue_.size()
               << " queued, next at t=" << queue_.top().time << " for " << queue_.top().device;
            throw SimulationTrap(os.str());
        }
        Event e = queue_.top();
        queue_.pop();
        now_ = e.time;
        auto& v = verifiers_.at(e.device);
        switch (e.kind) {
        case Event::Kind::Start:
            --pendingFor_[e.device];
            record("start " + e.device);
            send(v.start(), e.device);
            break;
        case Event::Kind::Deliver:
            --pendingFor_[e.device];
            record("deliver " + std::to_string(now_) + " " + serialize(e.msg));
            send(v.handleUpdate(e.msg), e.device);
            break;
        case Event::Kind::Internal:
            --pendingFor_[e.device];
            internal(e.script);
            continue;
        case Event::Kind::Flush:
            // Wait until nothing for this device remains queued at this instant.
            if (pendingFor_[e.device] > 0 && !queue_.empty() && queue_.top().time == now_) {
                push({now_, 0, Event::Kind::Flush, e.device, {}, {}});
                continue;
            }
            flushScheduled_[e.device] = false;
            record("flush " + e.device);
            send(v.flush(), e.device);
            break;
        }
        if (opt_.checkInvariants) v.checkInvariants();
        afterHandling(e.device);
    }
    RunStats s;
    s.eventId = eventId;
    s.convergenceUs = now_ - start;
    s.messages = runMessages_;
    s.bytes = runBytes_;
    for (auto& [d, v] : verifiers_) s.devicesChanged += v.takeChanged();
    runMessages_ = runBytes_ = 0;
    return s;
}

RunStats Simulation::runBurst() {
    for (const auto& [d, v] : verifiers_)
        if (v.hostsAny()) push({now_, 0, Event::Kind::Start, d, {}, {}});
    return runToQuiescence(nextEventId_++, now_);
}

std::vector<std::pair<std::string, std::vector<LecDelta>>> applyScriptEvent(const Topology& topo, DataPlane& dp,
                                                                           const ScriptEvent& event) {
    if (!topo.hasDevice(event.device)) throw ValidationError(ValidationError::Kind::UnknownDevice, event.device);
    std::vector<std::pair<std::string, std::vector<LecDelta>>> deltas;
    switch (event.kind) {
    case ScriptEvent::Kind::Rule: {
        auto& dev = dp.device(event.device);
        auto kind = dev.fib().count(event.rule.priority) ? FibUpdate::Kind::Modify : FibUpdate::Kind::Insert;
        for (const auto& hop : event.rule.action.hops())
            if (!topo.hasLink(event.device, hop))
                throw ValidationError(ValidationError::Kind::UnknownLink, event.device + " -> " + hop);
        deltas.emplace_back(event.device, dp.apply({kind, event.device, event.rule}));
        break;
    }
    case ScriptEvent::Kind::DeleteRule:
        deltas.emplace_back(event.device, dp.apply({FibUpdate::Kind::Delete, event.device, event.rule}));
        break;
    case ScriptEvent::Kind::Link:
        deltas.emplace_back(event.device, dp.linkEvent(topo, event.device, event.peer, event.up));
        deltas.emplace_back(event.peer, dp.linkEvent(topo, event.peer, event.device, event.up));
        break;
    }
    return deltas;
}

void Simulation::internal(const ScriptEvent& event) {
    auto deltas = applyScriptEvent(*topo_, *dp_, event);
    switch (event.kind) {
    case ScriptEvent::Kind::Rule:
        record("update " + std::to_string(now_) + " " + event.device + " " + std::to_string(event.rule.priority));
        break;
    case ScriptEvent::Kind::DeleteRule:
        record("delete " + std::to_string(now_) + " " + event.device + " " + std::to_string(event.rule.priority));
        break;
    case ScriptEvent::Kind::Link:
        record("link " + std::to_string(now_) + " " + event.device + " " + event.peer + (event.up ? " up" : " down"));
        break;
    }
    for (auto& [dev, delta] : deltas) {
        auto& v = verifiers_.at(dev);
        send(v.handleInternalEvent(delta), dev);
        afterHandling(dev);
    }
}

RunStats Simulation::apply(const ScriptEvent& event) { return applyBatch({event}); }

RunStats Simulation::applyBatch(const std::vector<ScriptEvent>& events) {
    const std::int64_t start = events.empty() ? now_ : std::max(now_, events.front().at);
    for (const auto& e : events) {
        if (!verifiers_.count(e.device)) throw ValidationError(ValidationError::Kind::UnknownDevice, e.device);
        Event ev{std::max(now_, e.at), 0, Event::Kind::Internal, e.device, {}, e};
        push(std::move(ev));
    }
    return runToQuiescence(nextEventId_++, start);
}

std::vector<RunStats> Simulation::runIncremental(const std::vector<ScriptEvent>& events) {
    std::vector<RunStats> out;
    for (const auto& e : events) out.push_back(apply(e));
    return out;
}

std::map<std::string, CellList> Simulation::sourceResults(int index) const {
    const Plan& plan = plans_.at(index);
    std::map<std::string, CellList> out;
    for (const auto& i : plan.ingress) {
        auto it = plan.net.sources.find(i);
        if (it == plan.net.sources.end()) {
            out[i] = plan.space.isEmpty() ? CellList{} : CellList{{plan.space, CountSet::zero(plan.net.dimension)}};
            continue;
        }
        const auto& dev = plan.topo.physical(plan.net.nodes[it->second].dev);
        out[i] = verifiers_.at(dev).results(index, it->second);
    }
    return out;
}

std::vector<EqualViolation> Simulation::violations(int plan) const {
    std::vector<EqualViolation> out;
    for (const auto& [d, v] : verifiers_)
        for (auto& x : v.violations())
            if (plans_[plan].net.find(x.nodeId) >= 0) out.push_back(x);
    return out;
}

std::vector<PlanVerdicts> Simulation::verdicts(bool includeExtra) const {
    std::vector<PlanVerdicts> out;
    for (std::size_t i = 0; i < plans_.size(); ++i) {
        const Plan& p = plans_[i];
        if (p.kind == Plan::Kind::Counting) out.push_back({&p, evaluate(p, sourceResults(static_cast<int>(i)))});
        else out.push_back({&p, equalVerdicts(p, violations(static_cast<int>(i)), includeExtra)});
    }
    return out;
}

std::string Simulation::stateDigest() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < plans_.size(); ++i) {
        const Plan& p = plans_[i];
        for (std::size_t u = 0; u < p.net.nodes.size(); ++u) {
            const auto& dev = p.topo.physical(p.net.nodes[u].dev);
            os << i << " " << p.net.nodes[u].id;
            if (p.kind == Plan::Kind::Counting) {
                const auto& v = verifiers_.at(dev);
                for (const auto& c : v.results(static_cast<int>(i), static_cast<int>(u)))
                    os << " (" << c.pred.describe() << "," << c.count.str() << ")";
                for (const auto& e : v.locCib(static_cast<int>(i), static_cast<int>(u))) {
                    os << "\n  loc " << e.pred.describe() << " " << e.count.str() << " " << e.action.str()
                       << (e.delivered ? " delivered" : "");
                    for (const auto& c : e.causality) os << " " << p.net.nodes[c.node].id << "=" << c.count.str();
                }
            }
            os << "\n";
        }
        if (p.kind == Plan::Kind::Equal)
            for (const auto& v : violations(static_cast<int>(i)))
                os << i << " violation " << v.nodeId << " " << violationName(v.kind) << " " << v.pred.describe() << "\n";
    }
    return os.str();
}

CentralizedBaseline centralizedBaseline(const Topology& topo, const LatencyMap& latency, std::int64_t defaultLatency) {
    auto weight = [&](const std::string& a, const std::string& b) {
        auto it = latency.find({std::min(a, b), std::max(a, b)});
        return it == latency.end() ? defaultLatency : it->second;
    };
    CentralizedBaseline best{"", std::numeric_limits<std::int64_t>::max()};
    for (const auto& c : topo.devices()) {
        if (topo.isVirtual(c)) continue;
        std::map<std::string, std::int64_t> dist{{c, 0}};
        std::set<std::pair<std::int64_t, std::string>> frontier{{0, c}};
        while (!frontier.empty()) {
            auto [d, u] = *frontier.begin();
            frontier.erase(frontier.begin());
            for (const auto& n : topo.neighbors(u)) {
                auto nd = d + weight(u, n);
                auto it = dist.find(n);
                if (it != dist.end() && it->second <= nd) continue;
                if (it != dist.end()) frontier.erase({it->second, n});
                dist[n] = nd;
                frontier.insert({nd, n});
            }
        }
        std::int64_t worst = 0;
        for (const auto& d : topo.devices())
            if (!topo.isVirtual(d))
                worst = std::max(worst, dist.count(d) ? dist[d] : std::numeric_limits<std::int64_t>::max() / 4);
        if (worst < best.collectUs) best = {c, worst};
    }
    if (best.collector.empty()) best.collectUs = 0;
    return best;
}

}  // namespace dpv
