#include "dpv/countalg.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace dpv {

CountSet::CountSet(int dimension, std::vector<CountVector> vectors) : dim_(dimension), vecs_(std::move(vectors)) {
    for (const auto& v : vecs_)
        if (static_cast<int>(v.size()) != dim_) throw Error("count vector dimension mismatch");
    std::sort(vecs_.begin(), vecs_.end());
    vecs_.erase(std::unique(vecs_.begin(), vecs_.end()), vecs_.end());
}

CountSet CountSet::zero(int dimension) { return CountSet(dimension, {CountVector(dimension, 0)}); }

CountSet CountSet::unit(int dimension, std::uint64_t mask) {
    CountVector v(dimension, 0);
    for (int i = 0; i < dimension; ++i)
        if ((mask >> i) & 1u) v[i] = 1;
    return CountSet(dimension, {v});
}

CountSet CountSet::scalars(std::initializer_list<std::uint32_t> values) {
    std::vector<CountVector> vs;
    for (auto v : values) vs.push_back({v});
    return CountSet(1, vs);
}

bool CountSet::contains(const CountVector& v) const { return std::binary_search(vecs_.begin(), vecs_.end(), v); }

void CountSet::insert(const CountVector& v) {
    if (static_cast<int>(v.size()) != dim_) throw Error("count vector dimension mismatch");
    auto it = std::lower_bound(vecs_.begin(), vecs_.end(), v);
    if (it == vecs_.end() || *it != v) vecs_.insert(it, v);
}

std::string CountSet::str() const {
    std::string out = "{";
    for (std::size_t i = 0; i < vecs_.size(); ++i) {
        if (i) out += ",";
        if (dim_ == 1) {
            out += std::to_string(vecs_[i][0]);
        } else {
            out += "(";
            for (int k = 0; k < dim_; ++k) out += (k ? "," : "") + std::to_string(vecs_[i][k]);
            out += ")";
        }
    }
    return out + "}";
}

namespace {
void sameDim(const CountSet& a, const CountSet& b) {
    if (a.dimension() != b.dimension())
        throw Error("count set dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                    std::to_string(b.dimension()));
}
}  // namespace

CountSet crossSum(const CountSet& a, const CountSet& b) {
    sameDim(a, b);
    std::vector<CountVector> out;
    out.reserve(a.size() * b.size());
    for (const auto& x : a.vectors())
        for (const auto& y : b.vectors()) {
            CountVector s(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] + y[i];
            out.push_back(std::move(s));
        }
    return CountSet(a.dimension(), std::move(out));
}

CountSet crossSumAll(const std::vector<CountSet>& sets, int dimension) {
    CountSet acc = CountSet::zero(dimension);
    for (const auto& s : sets) acc = crossSum(acc, s);
    return acc;
}

CountSet unionSet(const CountSet& a, const CountSet& b) {
    sameDim(a, b);
    auto vs = a.vectors();
    vs.insert(vs.end(), b.vectors().begin(), b.vectors().end());
    return CountSet(a.dimension(), std::move(vs));
}

CountSet zeroAugment(const CountSet& a) { return unionSet(a, CountSet::zero(a.dimension())); }

CountSet saturate(const CountSet& a, std::uint32_t cap) {
    auto vs = a.vectors();
    for (auto& v : vs)
        for (auto& x : v) x = std::min(x, cap);
    return CountSet(a.dimension(), std::move(vs));
}

CountSet truncateMinInfo(const CountSet& c, Cmp cmp, std::uint32_t) {
    if (c.dimension() != 1) throw Error("minimal counting information is defined for scalar counts only");
    if (c.empty()) return c;
    const auto& vs = c.vectors();
    switch (cmp) {
    case Cmp::Ge:
    case Cmp::Gt: return CountSet(1, {vs.front()});
    case Cmp::Le:
    case Cmp::Lt: return CountSet(1, {vs.back()});
    case Cmp::Eq: return CountSet(1, {vs.begin(), vs.begin() + std::min<std::size_t>(vs.size(), 2)});
    }
    return c;
}

CountSet nodeCount(const ActionGroup& action, const std::vector<Contribution>& downstream, int dimension) {
    if (action.isDrop()) return CountSet::zero(dimension);
    std::vector<CountSet> perHop;
    bool missing = false;
    for (const auto& hop : action.hops()) {
        std::vector<CountSet> aliases;
        for (const auto& c : downstream)
            if (c.device == hop) aliases.push_back(*c.count);
        if (aliases.empty()) {
            missing = true;
            continue;
        }
        perHop.push_back(crossSumAll(aliases, dimension));
    }
    if (action.kind() == GroupKind::All) return crossSumAll(perHop, dimension);
    if (perHop.empty()) return CountSet::zero(dimension);
    CountSet acc = perHop[0];
    for (std::size_t i = 1; i < perHop.size(); ++i) acc = unionSet(acc, perHop[i]);
    return missing ? zeroAugment(acc) : acc;
}

CellList coalesce(const CellList& cells) {
    std::map<CountSet, Predicate> merged;
    for (const auto& c : cells) {
        if (c.pred.isEmpty()) continue;
        auto [it, fresh] = merged.try_emplace(c.count, c.pred);
        if (!fresh) it->second |= c.pred;
    }
    CellList out;
    for (const auto& [count, pred] : merged) out.push_back({pred, count});
    return out;
}

CellList countNode(const DvNet& net, int u, const CountContext& ctx, const std::vector<CellList>& results,
                   const CountOptions& options) {
    const auto& node = net.nodes[u];
    const int dim = net.dimension;
    const std::string& dev = ctx.topo->physical(node.dev);
    BddStore& store = *ctx.space.store();
    auto finish = [&](CountSet c) {
        if (options.saturateAt) c = saturate(c, options.saturateAt);
        if (options.minInfo) c = truncateMinInfo(c, options.cmp, options.n);
        return c;
    };

    CellList cells;
    Predicate delivered = ctx.prefixes->predicate(store, dev);
    Predicate here = ctx.space & delivered;
    if (!here.isEmpty()) cells.push_back({here, finish(CountSet::unit(dim, node.accept))});
    Predicate rest = ctx.space - delivered;
    if (rest.isEmpty()) return coalesce(cells);

    LecTable fallback{{Predicate::all(store), ActionGroup::drop()}};
    const LecTable& table = ctx.dp->hasDevice(dev) ? ctx.dp->device(dev).table() : fallback;
    for (const auto& lec : table) {
        Predicate base = rest & lec.pred;
        if (base.isEmpty()) continue;
        struct Part {
            Predicate pred;
            std::vector<Contribution> contrib;
        };
        std::vector<Part> parts{{base, {}}};
        if (!lec.action.isDrop()) {
            for (int v : node.down) {
                const std::string& vdev = ctx.topo->physical(net.nodes[v].dev);
                if (!lec.action.forwardsTo(vdev)) continue;
                std::vector<Part> next;
                for (const auto& part : parts)
                    for (const auto& cell : results[v]) {
                        Predicate both = part.pred & cell.pred;
                        if (both.isEmpty()) continue;
                        auto contrib = part.contrib;
                        contrib.push_back({vdev, &cell.count});
                        next.push_back({both, std::move(contrib)});
                    }
                parts = std::move(next);
            }
        }
        for (const auto& part : parts) cells.push_back({part.pred, finish(nodeCount(lec.action, part.contrib, dim))});
    }
    return coalesce(cells);
}

std::vector<CellList> centralizedCount(const DvNet& net, const CountContext& ctx, const CountOptions& options) {
    std::vector<CellList> results(net.nodes.size());
    for (int u : net.reverseTopological()) results[u] = countNode(net, u, ctx, results, options);
    return results;
}

namespace {

CountOptions optionsFor(const Plan& plan, const CountOptions& base) {
    CountOptions o = base;
    o.minInfo = false;
    if (!plan.tasks.empty() && plan.tasks[0].mode == TaskMode::MinInfo) {
        o.minInfo = true;
        o.cmp = plan.tasks[0].cmp;
        o.n = plan.tasks[0].n;
    }
    return o;
}

// Cross product of per-dimension scalar results, refining the predicates.
CellList crossCells(const std::vector<CellList>& perDim, const Predicate& space) {
    const int m = static_cast<int>(perDim.size());
    CellList acc{{space, CountSet(0, {CountVector{}})}};
    for (int d = 0; d < m; ++d) {
        CellList next;
        for (const auto& a : acc)
            for (const auto& b : perDim[d]) {
                Predicate both = a.pred & b.pred;
                if (both.isEmpty()) continue;
                std::vector<CountVector> vs;
                for (const auto& x : a.count.vectors())
                    for (const auto& y : b.count.vectors()) {
                        auto v = x;
                        v.push_back(y[0]);
                        vs.push_back(v);
                    }
                next.push_back({both, CountSet(d + 1, vs)});
            }
        acc = std::move(next);
    }
    return coalesce(acc);
}

}  // namespace

std::map<std::string, CellList> sourceResults(const Plan& plan, const DataPlane& dp, const PrefixMap& prefixes,
                                              const CountOptions& options) {
    if (plan.kind != Plan::Kind::Counting) throw Error("sourceResults needs a counting plan");
    std::map<std::string, CellList> out;
    CountContext ctx{&plan.topo, &dp, &prefixes, plan.space};
    const int m = plan.net.dimension;

    if (plan.shape == Plan::Shape::Naive) {
        std::vector<std::map<std::string, CellList>> perNet;
        for (const auto& net : plan.naiveNets) {
            auto results = centralizedCount(net, ctx, optionsFor(plan, options));
            std::map<std::string, CellList> bySource;
            for (const auto& i : plan.ingress) {
                auto it = net.sources.find(i);
                bySource[i] = it == net.sources.end() ? CellList{{plan.space, CountSet::zero(1)}} : results[it->second];
            }
            perNet.push_back(std::move(bySource));
        }
        for (const auto& i : plan.ingress) {
            std::vector<CellList> dims;
            for (auto& p : perNet) dims.push_back(p[i]);
            out[i] = plan.space.isEmpty() ? CellList{} : crossCells(dims, plan.space);
        }
        return out;
    }

    std::vector<CellList> results;
    if (!plan.net.nodes.empty()) results = centralizedCount(plan.net, ctx, optionsFor(plan, options));
    for (const auto& i : plan.ingress) {
        auto it = plan.net.sources.find(i);
        if (it != plan.net.sources.end()) out[i] = results[it->second];
        else out[i] = plan.space.isEmpty() ? CellList{} : CellList{{plan.space, CountSet::zero(m)}};
    }
    return out;
}

bool evaluateVector(const Plan& plan, const CountVector& v) {
    std::vector<std::uint64_t> values(plan.leafDim.size(), 0);
    for (std::size_t i = 0; i < plan.leafDim.size(); ++i)
        if (plan.leafDim[i] >= 0) values[i] = v.at(plan.leafDim[i]);
    return evaluateBehavior(*plan.behavior, values);
}

std::vector<CellVerdict> evaluate(const Plan& plan, const std::map<std::string, CellList>& results) {
    std::vector<CellVerdict> out;
    for (const auto& [ingress, cells] : results)
        for (const auto& cell : cells) {
            CellVerdict v;
            v.ingress = ingress;
            v.pred = cell.pred;
            v.counts = cell.count;
            for (const auto& vec : cell.count.vectors())
                if (!evaluateVector(plan, vec)) {
                    v.satisfied = false;
                    v.witness = vec;
                    break;
                }
            out.push_back(std::move(v));
        }
    return out;
}

std::string violationName(EqualViolation::Kind k) {
    switch (k) {
    case EqualViolation::Kind::MissingHop: return "MissingHop";
    case EqualViolation::Kind::NotDelivered: return "NotDelivered";
    case EqualViolation::Kind::ExtraHop: return "ExtraHop";
    }
    return "?";
}

std::vector<EqualViolation> equalCheckNode(const Plan& plan, int u, const DataPlane& dp, const PrefixMap& prefixes) {
    const auto& net = plan.net;
    const auto& node = net.nodes[u];
    const std::string dev = plan.topo.physical(node.dev);
    BddStore& store = *plan.space.store();
    std::vector<EqualViolation> out;
    auto report = [&](const Predicate& p, EqualViolation::Kind k, const std::string& detail) {
        if (!p.isEmpty()) out.push_back({node.id, dev, p, k, detail});
    };

    std::set<std::string> required;
    for (int v : node.down) required.insert(plan.topo.physical(net.nodes[v].dev));
    std::set<std::string> hosted;
    for (const auto& n : net.nodes) hosted.insert(plan.topo.physical(n.dev));

    Predicate delivered = prefixes.predicate(store, dev);
    Predicate here = plan.space & delivered;
    if (!here.isEmpty() && (!node.accept || !required.empty()))
        report(here, EqualViolation::Kind::MissingHop, "delivered locally instead of forwarding");

    Predicate rest = plan.space - delivered;
    if (rest.isEmpty()) return out;
    if (node.accept) report(rest, EqualViolation::Kind::NotDelivered, "destination does not deliver");

    LecTable fallback{{Predicate::all(store), ActionGroup::drop()}};
    const LecTable& table = dp.hasDevice(dev) ? dp.device(dev).table() : fallback;
    for (const auto& lec : table) {
        Predicate p = rest & lec.pred;
        if (p.isEmpty()) continue;
        std::string missing, extra;
        for (const auto& r : required)
            if (!lec.action.forwardsTo(r)) missing += (missing.empty() ? "" : ",") + r;
        for (const auto& h : lec.action.hops())
            if (!required.count(h) && hosted.count(h)) extra += (extra.empty() ? "" : ",") + h;
        if (!missing.empty()) report(p, EqualViolation::Kind::MissingHop, "missing " + missing);
        if (!extra.empty()) report(p, EqualViolation::Kind::ExtraHop, "extra " + extra);
    }
    return out;
}

std::vector<CellVerdict> equalVerdicts(const Plan& plan, const std::vector<EqualViolation>& violations,
                                       bool includeExtra) {
    std::vector<CellVerdict> out;
    BddStore& store = *plan.space.store();
    for (const auto& ingress : plan.ingress) {
        Predicate bad = Predicate::none(store);
        std::string detail;
        auto src = plan.net.sources.find(ingress);
        if (src != plan.net.sources.end()) {
            std::vector<char> reach(plan.net.nodes.size(), 0);
            std::function<void(int)> walk = [&](int u) {
                if (reach[u]) return;
                reach[u] = 1;
                for (int v : plan.net.nodes[u].down) walk(v);
            };
            walk(src->second);
            for (const auto& v : violations) {
                if (!includeExtra && v.kind == EqualViolation::Kind::ExtraHop) continue;
                int u = plan.net.find(v.nodeId);
                if (u < 0 || !reach[u]) continue;
                bad |= v.pred;
                if (detail.size() < 200) detail += (detail.empty() ? "" : "; ") + v.nodeId + " " + violationName(v.kind);
            }
        }
        bad &= plan.space;
        Predicate good = plan.space - bad;
        if (!bad.isEmpty()) out.push_back({ingress, bad, false, std::nullopt, CountSet(), detail});
        if (!good.isEmpty()) out.push_back({ingress, good, true, std::nullopt, CountSet(), ""});
    }
    return out;
}

std::vector<CellVerdict> verifyPlan(const Plan& plan, const DataPlane& dp, const PrefixMap& prefixes,
                                    bool includeExtra) {
    if (plan.kind == Plan::Kind::Counting) return evaluate(plan, sourceResults(plan, dp, prefixes));
    std::vector<EqualViolation> all;
    for (std::size_t u = 0; u < plan.net.nodes.size(); ++u) {
        auto v = equalCheckNode(plan, static_cast<int>(u), dp, prefixes);
        all.insert(all.end(), v.begin(), v.end());
    }
    return equalVerdicts(plan, all, includeExtra);
}

bool satisfiedAt(const std::vector<std::vector<CellVerdict>>& perPlan, const std::string& ingress, Header h) {
    for (const auto& cells : perPlan)
        for (const auto& c : cells)
            if (!c.satisfied && c.ingress == ingress && c.pred.contains(h)) return false;
    return true;
}

}  // namespace dpv
