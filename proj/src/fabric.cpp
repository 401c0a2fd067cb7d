#include "dpv/fabric.hpp"

#include <algorithm>
#include <deque>

namespace dpv {

namespace {

std::string torName(int pod, int i) { return "T" + std::to_string(pod) + "_" + std::to_string(i); }
std::string aggName(int pod, int i) { return "A" + std::to_string(pod) + "_" + std::to_string(i); }

Cidr torPrefix(int pod, int i) { return Cidr{(10u << 24) | (static_cast<std::uint32_t>(pod) << 16) | (static_cast<std::uint32_t>(i) << 8), 24}; }

void finish(GeneratedFabric& g, GroupKind ecmp) {
    for (const auto& t : g.fabric.tors) g.prefixes.add(t.name, t.prefix);
    g.fabric.external = Cidr{0, 0};
    g.ecmp = ecmp;
    g.fibs = shortestPathFibs(g.topo, g.fabric, ecmp);
}

std::map<std::string, int> distancesTo(const Topology& topo, const std::string& dest) {
    std::map<std::string, int> dist{{dest, 0}};
    std::deque<std::string> q{dest};
    while (!q.empty()) {
        auto u = q.front();
        q.pop_front();
        for (const auto& n : topo.neighbors(u))
            if (!dist.count(n)) {
                dist[n] = dist[u] + 1;
                q.push_back(n);
            }
    }
    return dist;
}

std::vector<std::string> shortestHops(const Topology& topo, const std::map<std::string, int>& dist, const std::string& dev) {
    std::vector<std::string> hops;
    auto here = dist.find(dev);
    if (here == dist.end()) return hops;
    for (const auto& n : topo.neighbors(dev))
        if (auto it = dist.find(n); it != dist.end() && it->second + 1 == here->second) hops.push_back(n);
    return hops;
}

}  // namespace

std::map<std::string, std::vector<RuleSpec>> shortestPathFibs(const Topology& topo, const Fabric& fabric,
                                                              GroupKind ecmp) {
    std::map<std::string, std::vector<RuleSpec>> fibs;
    int priority = 100;
    for (const auto& t : fabric.tors) {
        auto dist = distancesTo(topo, t.name);
        for (const auto& dev : topo.devices()) {
            if (dev == t.name) continue;
            auto hops = shortestHops(topo, dist, dev);
            if (hops.empty()) continue;
            fibs[dev].push_back({priority, "-", t.prefix.str(), ActionGroup(hops.size() > 1 ? ecmp : GroupKind::All, hops)});
        }
        ++priority;
    }
    return fibs;
}

GeneratedFabric fatTree(int k, GroupKind ecmp) {
    if (k < 4 || k % 2) throw ValidationError(ValidationError::Kind::Unsupported, "fat-tree arity must be even and >= 4");
    GeneratedFabric g;
    const int half = k / 2;
    for (int c = 0; c < half * half; ++c) g.topo.addDevice("C" + std::to_string(c));
    for (int p = 0; p < k; ++p) {
        for (int i = 0; i < half; ++i) {
            g.topo.addDevice(torName(p, i));
            g.topo.addDevice(aggName(p, i));
            g.fabric.tors.push_back({torName(p, i), p, torPrefix(p, i)});
        }
        for (int i = 0; i < half; ++i)
            for (int j = 0; j < half; ++j) g.topo.addLink(torName(p, i), aggName(p, j));
        for (int j = 0; j < half; ++j)
            for (int c = 0; c < half; ++c) g.topo.addLink(aggName(p, j), "C" + std::to_string(j * half + c));
    }
    finish(g, ecmp);
    return g;
}

GeneratedFabric twoPodClos(GroupKind ecmp) {
    GeneratedFabric g;
    for (int s = 0; s < 2; ++s) g.topo.addDevice("S" + std::to_string(s));
    for (int p = 0; p < 2; ++p) {
        for (int i = 0; i < 2; ++i) {
            g.topo.addDevice(torName(p, i));
            g.topo.addDevice(aggName(p, i));
            g.fabric.tors.push_back({torName(p, i), p, torPrefix(p, i)});
        }
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                g.topo.addLink(torName(p, i), aggName(p, j));
                g.topo.addLink(aggName(p, j), "S" + std::to_string(i));
            }
    }
    finish(g, ecmp);
    return g;
}

std::vector<ScriptEvent> randomRuleUpdates(const GeneratedFabric& net, BddStore& store, int count, std::uint64_t seed,
                                           double offPathShare) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<std::string, RuleSpec>> rules;
    for (const auto& [dev, specs] : net.fibs)
        for (const auto& r : specs) rules.emplace_back(dev, r);
    if (rules.empty()) return {};

    std::map<std::string, std::map<std::string, int>> dist;
    for (const auto& t : net.fabric.tors) dist[t.prefix.str()] = distancesTo(net.topo, t.name);

    auto subset = [&](std::vector<std::string> from) {
        std::shuffle(from.begin(), from.end(), rng);
        std::uniform_int_distribution<std::size_t> size(1, from.size());
        from.resize(size(rng));
        return from;
    };

    std::vector<ScriptEvent> out;
    std::uniform_int_distribution<std::size_t> pick(0, rules.size() - 1);
    std::bernoulli_distribution offPath(offPathShare);
    for (int i = 0; i < count; ++i) {
        auto [dev, rule] = rules[pick(rng)];
        std::vector<std::string> hops;
        if (offPath(rng)) {
            const auto& nb = net.topo.neighbors(dev);
            hops = subset({nb.begin(), nb.end()});
        } else {
            hops = subset(shortestHops(net.topo, dist.at(rule.dst), dev));
        }
        ScriptEvent e;
        e.at = 1000 * (i + 1);
        e.kind = ScriptEvent::Kind::Rule;
        e.device = dev;
        e.rule = FibRule{rule.priority, Predicate::fromCidr(store, Field::Dst, parseCidr(rule.dst)),
                         ActionGroup(hops.size() > 1 ? net.ecmp : GroupKind::All, hops)};
        out.push_back(e);
    }
    return out;
}

}  // namespace dpv
