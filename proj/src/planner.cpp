#include "dpv/planner.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <sstream>

namespace dpv {

int DvNet::find(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return static_cast<int>(i);
    return -1;
}

std::vector<int> DvNet::reverseTopological() const {
    std::vector<int> order;
    std::vector<char> mark(nodes.size(), 0);
    std::function<void(int)> visit = [&](int u) {
        if (mark[u]) return;
        mark[u] = 1;
        for (int v : nodes[u].down) visit(v);
        order.push_back(u);
    };
    for (std::size_t u = 0; u < nodes.size(); ++u) visit(static_cast<int>(u));
    return order;
}

namespace {

class ProductBuilder {
public:
    ProductBuilder(const Dfa& dfa, const Topology& topo) : dfa_(dfa), topo_(topo) {
        for (const auto& d : topo.devices()) {
            devIndex_.emplace(d, static_cast<int>(devNames_.size()));
            devNames_.push_back(d);
            physIndex_.try_emplace(topo.physical(d), static_cast<int>(physIndex_.size()));
        }
        words_ = (physIndex_.size() + 63) / 64;
    }

    struct Node {
        int dev;
        int state;
        std::uint64_t accept;
        std::vector<int> kids;
        bool alive;
    };

    // Returns the product node for a source, or -1 when nothing is reachable.
    int source(const std::string& ingress, int state) {
        std::vector<std::uint64_t> visited(words_, 0);
        mark(visited, ingress);
        int id = visit(devIndex_.at(ingress), state, visited);
        return nodes_[id].alive ? id : -1;
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::string& devName(int i) const { return devNames_[i]; }

private:
    void mark(std::vector<std::uint64_t>& v, const std::string& dev) const {
        int p = physIndex_.at(topo_.physical(dev));
        v[p / 64] |= std::uint64_t{1} << (p % 64);
    }
    bool marked(const std::vector<std::uint64_t>& v, const std::string& dev) const {
        int p = physIndex_.at(topo_.physical(dev));
        return (v[p / 64] >> (p % 64)) & 1u;
    }

    int visit(int dev, int state, const std::vector<std::uint64_t>& visited) {
        auto key = std::make_tuple(dev, state, visited);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        int id = static_cast<int>(nodes_.size());
        nodes_.push_back({dev, state, dfa_.accept[state], {}, false});
        memo_.emplace(key, id);
        std::vector<int> kids;
        for (const auto& n : topo_.neighbors(devNames_[dev])) {
            if (marked(visited, n)) continue;
            int t = dfa_.step(state, n);
            if (t < 0) continue;
            auto next = visited;
            mark(next, n);
            int c = visit(devIndex_.at(n), t, next);
            if (nodes_[c].alive) kids.push_back(c);
        }
        nodes_[id].kids = std::move(kids);
        nodes_[id].alive = nodes_[id].accept != 0 || !nodes_[id].kids.empty();
        return id;
    }

    const Dfa& dfa_;
    const Topology& topo_;
    std::map<std::string, int> devIndex_;
    std::vector<std::string> devNames_;
    std::map<std::string, int> physIndex_;
    std::size_t words_;
    std::vector<Node> nodes_;
    std::map<std::tuple<int, int, std::vector<std::uint64_t>>, int> memo_;
};

}  // namespace

DvNet buildDvnet(const Dfa& dfa, const Topology& topo, const std::vector<std::string>& ingress,
                 const BuildOptions& options) {
    DvNet net;
    if (dfa.initial < 0) {
        for (const auto& i : ingress)
            if (!topo.hasDevice(i)) throw ValidationError(ValidationError::Kind::UnknownDevice, i);
        return net;
    }
    ProductBuilder builder(dfa, topo);
    std::vector<std::pair<std::string, int>> roots;
    for (const auto& i : ingress) {
        if (!topo.hasDevice(i)) throw ValidationError(ValidationError::Kind::UnknownDevice, i);
        int q = dfa.step(dfa.initial, i);
        if (q < 0) throw IngressUnmatched(i);
        int root = builder.source(i, q);
        if (root >= 0) roots.emplace_back(i, root);
    }
    const auto& prod = builder.nodes();

    // Group live product nodes into classes, discovering classes depth-first
    // from the sources so numbering is stable.
    std::vector<int> cls(prod.size(), -1);
    std::map<std::tuple<int, std::uint64_t, std::vector<int>>, int> bySignature;
    struct Cls {
        int dev, state;
        std::uint64_t accept;
        std::vector<int> down;
    };
    std::vector<Cls> classes;
    std::function<int(int)> classify = [&](int p) {
        if (cls[p] >= 0) return cls[p];
        std::vector<int> down;
        for (int k : prod[p].kids) down.push_back(classify(k));
        std::sort(down.begin(), down.end());
        down.erase(std::unique(down.begin(), down.end()), down.end());
        int c;
        if (options.bisimulation) {
            auto key = std::make_tuple(prod[p].dev, prod[p].accept, down);
            auto [it, fresh] = bySignature.try_emplace(key, static_cast<int>(classes.size()));
            if (fresh) classes.push_back({prod[p].dev, prod[p].state, prod[p].accept, down});
            c = it->second;
        } else {
            c = static_cast<int>(classes.size());
            classes.push_back({prod[p].dev, prod[p].state, prod[p].accept, down});
        }
        return cls[p] = c;
    };
    for (const auto& [i, root] : roots) classify(root);

    // Longest-path layers from the sources.
    const int n = static_cast<int>(classes.size());
    std::vector<int> indeg(n, 0), layer(n, 0);
    for (const auto& c : classes)
        for (int d : c.down) ++indeg[d];
    std::deque<int> work;
    for (int c = 0; c < n; ++c)
        if (!indeg[c]) work.push_back(c);
    while (!work.empty()) {
        int c = work.front();
        work.pop_front();
        for (int d : classes[c].down) {
            layer[d] = std::max(layer[d], layer[c] + 1);
            if (--indeg[d] == 0) work.push_back(d);
        }
    }

    std::vector<int> order(n);
    for (int c = 0; c < n; ++c) order[c] = c;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& da = builder.devName(classes[a].dev);
        const auto& db = builder.devName(classes[b].dev);
        if (da != db) return da < db;
        if (layer[a] != layer[b]) return layer[a] < layer[b];
        return a < b;  // creation order
    });
    std::vector<int> index(n);
    for (int i = 0; i < n; ++i) index[order[i]] = i;

    net.nodes.resize(n);
    std::map<std::string, int> perDev;
    for (int i = 0; i < n; ++i) {
        const auto& c = classes[order[i]];
        auto& node = net.nodes[i];
        node.dev = builder.devName(c.dev);
        bool digitEnd = !node.dev.empty() && std::isdigit(static_cast<unsigned char>(node.dev.back()));
        node.id = node.dev + (digitEnd ? "_" : "") + std::to_string(++perDev[node.dev]);
        node.state = c.state;
        node.accept = c.accept;
        node.layer = layer[order[i]];
        for (int d : c.down) node.down.push_back(index[d]);
        std::sort(node.down.begin(), node.down.end());
    }
    for (int i = 0; i < n; ++i)
        for (int d : net.nodes[i].down) net.nodes[d].up.push_back(i);
    for (const auto& [ingress, root] : roots) net.sources[ingress] = index[cls[root]];
    return net;
}

Topology withVirtualDestinations(const Topology& topo, const std::string& dest, int copies) {
    if (copies <= 1) return topo;
    Topology out = topo;
    std::vector<std::string> names;
    for (int i = 1; i <= copies; ++i) names.push_back(dest + "^" + std::to_string(i));
    for (const auto& nm : names)
        if (topo.hasDevice(nm)) throw ValidationError(ValidationError::Kind::Unsupported, "device name clash: " + nm);
    out.splitDevice(dest, names);
    return out;
}

namespace {

using VK = ValidationError::Kind;

std::vector<std::string> alphabetOf(const Topology& topo) { return {topo.devices().begin(), topo.devices().end()}; }

// Rewrites `dest` to `target` and widens exclusions of `dest` to all aliases.
PathPtr retarget(const PathPtr& p, const std::string& dest, const std::string& target,
                 const std::vector<std::string>& aliases) {
    if (p->kind == PathExpr::Kind::Symbol) return p->name == dest ? path::sym(target) : p;
    if (p->kind == PathExpr::Kind::Except) {
        if (!std::binary_search(p->excluded.begin(), p->excluded.end(), dest)) return p;
        auto names = p->excluded;
        names.insert(names.end(), aliases.begin(), aliases.end());
        names.erase(std::remove(names.begin(), names.end(), dest), names.end());
        return path::except(names);
    }
    if (p->kids.empty()) return p;
    auto copy = std::make_shared<PathExpr>(*p);
    for (auto& k : copy->kids) k = retarget(k, dest, target, aliases);
    return copy;
}

// Whether the verdict depends on the single active leaf monotonically, which
// is what truncation to minimal counting information relies on.
bool truncationSafe(const Behavior& behavior, int active) {
    auto leaves = behaviorLeaves(behavior);
    const Behavior& leaf = *leaves[active];
    std::optional<std::uint64_t> yes, no;
    std::vector<std::uint64_t> probes{0, leaf.n, std::uint64_t{leaf.n} + 1};
    if (leaf.n > 0) probes.push_back(leaf.n - 1);
    for (auto v : probes) (compare(leaf.cmp, v, leaf.n) ? yes : no) = v;
    if (!yes || !no) return true;
    std::vector<std::uint64_t> values(leaves.size(), 0);
    values[active] = *yes;
    bool whenTrue = evaluateBehavior(behavior, values);
    values[active] = *no;
    bool whenFalse = evaluateBehavior(behavior, values);
    return whenTrue || !whenFalse;
}

struct LeafInfo {
    Dfa dfa;
    DvNet net;
    bool active = false;
    std::set<std::string> dests;
};

// Builds the leaf's network without failing on ingresses it cannot start at.
LeafInfo analyzeLeaf(const PathExpr& p, const Topology& topo, const std::vector<std::string>& ingress,
                     const BuildOptions& build, std::set<std::string>& startable) {
    LeafInfo info;
    info.dfa = regexToDfa(p, alphabetOf(topo), true);
    std::vector<std::string> usable;
    for (const auto& i : ingress)
        if (info.dfa.step(info.dfa.initial, i) >= 0) {
            usable.push_back(i);
            startable.insert(i);
        }
    info.net = buildDvnet(info.dfa, topo, usable, build);
    info.active = std::any_of(info.net.nodes.begin(), info.net.nodes.end(),
                              [](const DvNode& n) { return n.accept != 0; });
    info.dests = finalSymbols(info.dfa);
    return info;
}

void assignTasks(Plan& plan, TaskMode mode, Cmp cmp, std::uint32_t n) {
    plan.tasks.clear();
    for (std::size_t i = 0; i < plan.net.nodes.size(); ++i) {
        const auto& node = plan.net.nodes[i];
        DeviceTask t;
        t.node = static_cast<int>(i);
        t.nodeId = node.id;
        t.device = plan.topo.physical(node.dev);
        t.down = node.down;
        if (mode != TaskMode::EqualLocal) t.up = node.up;
        t.dimension = plan.net.dimension;
        t.mode = mode;
        t.cmp = cmp;
        t.n = n;
        plan.tasks.push_back(t);
    }
}

Plan planCounting(const Requirement& req, const BehaviorPtr& behavior, const Topology& topo, const PlanOptions& opt) {
    Plan plan;
    plan.kind = Plan::Kind::Counting;
    plan.req = req;
    plan.behavior = behavior;
    plan.topo = topo;
    plan.ingress = req.ingress;
    BuildOptions build{opt.bisimulation};

    auto leaves = behaviorLeaves(*behavior);
    std::vector<LeafInfo> infos;
    std::set<std::string> startable;
    bool anyLanguage = false;
    for (const auto* leaf : leaves) {
        infos.push_back(analyzeLeaf(*leaf->path, topo, req.ingress, build, startable));
        anyLanguage |= infos.back().dfa.initial >= 0;
    }
    if (anyLanguage)
        for (const auto& i : req.ingress)
            if (!startable.count(i)) throw IngressUnmatched(i);

    // Leaves with the same path share one count dimension.
    std::vector<int> active;
    plan.leafDim.assign(leaves.size(), -1);
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (!infos[i].active) continue;
        for (std::size_t d = 0; d < active.size() && plan.leafDim[i] < 0; ++d)
            if (equalPath(*leaves[active[d]]->path, *leaves[i]->path)) plan.leafDim[i] = static_cast<int>(d);
        if (plan.leafDim[i] >= 0) continue;
        plan.leafDim[i] = static_cast<int>(active.size());
        active.push_back(static_cast<int>(i));
    }
    const int m = static_cast<int>(active.size());

    if (m == 0) {
        plan.shape = Plan::Shape::Empty;
        plan.net.dimension = 0;
        return plan;
    }
    if (m == 1) {
        plan.shape = Plan::Shape::Single;
        plan.net = infos[active[0]].net;
        plan.net.dimension = 1;
        const auto& leaf = *leaves[active[0]];
        bool shared = std::count(plan.leafDim.begin(), plan.leafDim.end(), 0) > 1;
        bool mi = opt.minInfo && !shared && truncationSafe(*behavior, active[0]);
        assignTasks(plan, mi ? TaskMode::MinInfo : TaskMode::FullCount, leaf.cmp, leaf.n);
        return plan;
    }
    if (opt.compound == CompoundMode::Naive) {
        plan.shape = Plan::Shape::Naive;
        plan.net.dimension = m;
        for (int a : active) {
            plan.naiveNets.push_back(infos[a].net);
            plan.naiveNets.back().dimension = 1;
        }
        return plan;
    }

    bool disjoint = true;
    for (int a = 0; a < m && disjoint; ++a)
        for (int b = a + 1; b < m && disjoint; ++b)
            for (const auto& d : infos[active[a]].dests)
                if (infos[active[b]].dests.count(d)) disjoint = false;
    bool sameSingle = true;
    for (int a : active)
        sameSingle &= infos[a].dests.size() == 1 && infos[a].dests == infos[active[0]].dests;

    if (!disjoint && sameSingle) {
        const std::string dest = *infos[active[0]].dests.begin();
        if (std::find(req.ingress.begin(), req.ingress.end(), dest) != req.ingress.end())
            throw ValidationError(VK::Unsupported, "ingress " + dest + " is also the shared destination");
        plan.shape = Plan::Shape::VirtualDest;
        plan.topo = withVirtualDestinations(topo, dest, m);
        auto alphabet = alphabetOf(plan.topo);
        std::vector<std::string> aliases;
        for (int i = 1; i <= m; ++i) aliases.push_back(dest + "^" + std::to_string(i));
        std::vector<Dfa> machines;
        for (int i = 0; i < m; ++i) {
            auto p = retarget(leaves[active[i]]->path, dest, aliases[i], aliases);
            machines.push_back(regexToDfa(*p, alphabet, true));
        }
        std::vector<PathPtr> hits;
        for (const auto& a : aliases) hits.push_back(path::sym(a));
        auto others = path::star(path::except(aliases));
        auto atMostOne = path::concat({others, path::optional(path::concat({path::alt(hits), others}))});
        Dfa combined = minimize(intersect(unionProduct(machines), regexToDfa(*atMostOne, alphabet)));
        plan.net = buildDvnet(combined, plan.topo, req.ingress, build);
    } else {
        plan.shape = Plan::Shape::UnionDest;
        std::vector<Dfa> machines;
        for (int a : active) machines.push_back(infos[a].dfa);
        plan.net = buildDvnet(unionProduct(machines), topo, req.ingress, build);
    }
    plan.net.dimension = m;
    assignTasks(plan, TaskMode::FullCount, Cmp::Ge, 0);
    return plan;
}

Plan planEqual(const Requirement& req, const BehaviorPtr& leaf, const Topology& topo, const PlanOptions& opt) {
    Plan plan;
    plan.kind = Plan::Kind::Equal;
    plan.req = req;
    plan.behavior = leaf;
    plan.topo = topo;
    plan.ingress = req.ingress;
    auto dfa = regexToDfa(*leaf->path, alphabetOf(topo), true);
    plan.net = buildDvnet(dfa, topo, req.ingress, BuildOptions{opt.bisimulation});
    plan.net.dimension = 0;
    plan.leafDim = {-1};
    assignTasks(plan, TaskMode::EqualLocal, Cmp::Eq, 0);
    return plan;
}

}  // namespace

PlanSet planRequirement(const Requirement& parsed, const Topology& topo, const PrefixMap& prefixes, BddStore& store,
                        const PlanOptions& options) {
    PlanSet set;
    set.req = desugar(parsed, topo.devices(), true);
    validate(set.req, topo, prefixes, store);
    Predicate space = spacePredicate(*set.req.space, store);

    std::vector<BehaviorPtr> equals, others;
    const auto& b = set.req.behavior;
    if (b->kind == Behavior::Kind::Equal) {
        equals.push_back(b);
    } else if (b->kind == Behavior::Kind::And) {
        for (const auto& k : b->kids) (k->kind == Behavior::Kind::Equal ? equals : others).push_back(k);
    } else {
        others.push_back(b);
    }
    if (!others.empty()) set.plans.push_back(planCounting(set.req, behavior::conj(others), topo, options));
    for (const auto& e : equals) set.plans.push_back(planEqual(set.req, e, topo, options));
    for (auto& p : set.plans) p.space = space;
    return set;
}

Plan planSingle(const Requirement& parsed, const Topology& topo, const PrefixMap& prefixes, BddStore& store,
                const PlanOptions& options) {
    auto set = planRequirement(parsed, topo, prefixes, store, options);
    if (set.plans.size() != 1) throw ValidationError(VK::Unsupported, "requirement compiles to several plans");
    return set.plans[0];
}

namespace {

std::string shapeName(Plan::Shape s) {
    switch (s) {
    case Plan::Shape::Single: return "single";
    case Plan::Shape::UnionDest: return "union";
    case Plan::Shape::VirtualDest: return "virtual-destination";
    case Plan::Shape::Naive: return "naive";
    case Plan::Shape::Empty: return "empty";
    }
    return "?";
}

std::string modeName(TaskMode m) {
    switch (m) {
    case TaskMode::FullCount: return "fullCount";
    case TaskMode::MinInfo: return "minInfo";
    case TaskMode::EqualLocal: return "equalLocal";
    }
    return "?";
}

std::string idList(const DvNet& net, const std::vector<int>& ids) {
    if (ids.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + net.nodes[ids[i]].id;
    return out;
}

void exportNet(std::ostringstream& os, const DvNet& net) {
    for (const auto& [ingress, src] : net.sources) os << "source " << ingress << " " << net.nodes[src].id << "\n";
    for (const auto& n : net.nodes)
        os << "node " << n.id << " dev " << n.dev << " accept " << n.accept << " layer " << n.layer << " down "
           << idList(net, n.down) << " up " << idList(net, n.up) << "\n";
}

}  // namespace

std::string exportPlan(const Plan& plan) {
    std::ostringstream os;
    os << "plan version " << plan.version << " kind " << (plan.kind == Plan::Kind::Counting ? "counting" : "equal")
       << " shape " << shapeName(plan.shape) << " dimension " << plan.net.dimension << "\n";
    os << "requirement " << printRequirement(plan.req) << "\n";
    os << "behavior " << printBehavior(*plan.behavior) << "\n";
    os << "space " << plan.space.describe() << "\n";
    os << "leaves";
    for (int d : plan.leafDim) os << " " << d;
    os << "\n";
    for (const auto& [v, p] : plan.topo.virtualOf()) os << "virtual " << v << " of " << p << "\n";
    if (plan.shape == Plan::Shape::Naive) {
        for (std::size_t i = 0; i < plan.naiveNets.size(); ++i) {
            os << "naive-net " << i << "\n";
            exportNet(os, plan.naiveNets[i]);
        }
    }
    exportNet(os, plan.net);
    for (const auto& t : plan.tasks) {
        os << "task " << t.nodeId << " device " << t.device << " mode " << modeName(t.mode);
        if (t.mode == TaskMode::MinInfo) os << " cmp " << cmpText(t.cmp) << " n " << t.n;
        os << " down " << idList(plan.net, t.down) << " up " << idList(plan.net, t.up) << "\n";
    }
    return os.str();
}

std::string exportDot(const DvNet& net) {
    std::ostringstream os;
    os << "digraph dvnet {\n  rankdir=LR;\n";
    for (const auto& n : net.nodes) {
        os << "  \"" << n.id << "\" [label=\"" << n.id << "\"";
        if (n.accept) os << ", shape=doublecircle";
        bool isSource = false;
        for (const auto& [i, s] : net.sources) isSource |= net.nodes[s].id == n.id;
        if (isSource) os << ", style=bold";
        os << "];\n";
    }
    for (const auto& n : net.nodes)
        for (int d : n.down) os << "  \"" << n.id << "\" -> \"" << net.nodes[d].id << "\";\n";
    os << "}\n";
    return os.str();
}

}  // namespace dpv
