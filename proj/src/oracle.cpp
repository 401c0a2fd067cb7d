#include "dpv/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <tuple>

namespace dpv {

std::string Trace::str() const {
    std::string out = "[";
    for (std::size_t i = 0; i < devices.size(); ++i) out += (i ? "," : "") + devices[i];
    out += "]";
    switch (end) {
    case End::Delivered: return out + " delivered";
    case End::Dropped: return out + " dropped";
    case End::Loop: return out + " loop";
    }
    return out;
}

namespace {

class UniverseWalker {
public:
    UniverseWalker(const DataPlane& dp, const PrefixMap& prefixes, Header header, std::size_t bound)
        : dp_(dp), prefixes_(prefixes), header_(header), bound_(bound) {}

    std::vector<Universe> walk(std::vector<std::string>& prefix) {
        const std::string& here = prefix.back();
        if (prefixes_.delivers(here, headerDst(header_))) return {{Trace{prefix, Trace::End::Delivered}}};
        ActionGroup action = dp_.hasDevice(here) ? dp_.device(here).actionFor(header_) : ActionGroup::drop();
        if (action.isDrop()) return {{Trace{prefix, Trace::End::Dropped}}};

        std::vector<std::vector<Universe>> branches;
        for (const auto& hop : action.hops()) {
            bool revisit = std::find(prefix.begin(), prefix.end(), hop) != prefix.end();
            prefix.push_back(hop);
            if (revisit) branches.push_back({{Trace{prefix, Trace::End::Loop}}});
            else branches.push_back(walk(prefix));
            prefix.pop_back();
        }

        std::vector<Universe> out;
        if (action.kind() == GroupKind::Any) {
            for (auto& b : branches) {
                check(out.size() + b.size());
                out.insert(out.end(), b.begin(), b.end());
            }
            return out;
        }
        out = {Universe{}};
        for (const auto& b : branches) {
            check(out.size() * b.size());
            std::vector<Universe> next;
            for (const auto& u : out)
                for (const auto& v : b) {
                    Universe joined = u;
                    joined.insert(joined.end(), v.begin(), v.end());
                    next.push_back(std::move(joined));
                }
            out = std::move(next);
        }
        return out;
    }

private:
    void check(std::size_t n) const {
        if (n > bound_) throw ScaleRefusal("more than " + std::to_string(bound_) + " universes");
    }

    const DataPlane& dp_;
    const PrefixMap& prefixes_;
    Header header_;
    std::size_t bound_;
};

class Interpreter {
public:
    explicit Interpreter(const std::vector<std::string>& word) : w_(word) {}

    bool match(const PathExpr* p, std::size_t i, std::size_t j) {
        auto key = std::make_tuple(p, i, j);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        bool r = compute(p, i, j);
        memo_[key] = r;
        return r;
    }

private:
    bool compute(const PathExpr* p, std::size_t i, std::size_t j) {
        using K = PathExpr::Kind;
        switch (p->kind) {
        case K::Symbol: return j == i + 1 && w_[i] == p->name;
        case K::Any: return j == i + 1;
        case K::Except:
            return j == i + 1 && std::find(p->excluded.begin(), p->excluded.end(), w_[i]) == p->excluded.end();
        case K::Concat: return concat(p, 0, i, j);
        case K::Alt:
            for (const auto& k : p->kids)
                if (match(k.get(), i, j)) return true;
            return false;
        case K::And:
            for (const auto& k : p->kids)
                if (!match(k.get(), i, j)) return false;
            return true;
        case K::Not: return !match(p->kids[0].get(), i, j);
        case K::Optional: return i == j || match(p->kids[0].get(), i, j);
        case K::Star:
            if (i == j) return true;
            [[fallthrough]];
        case K::Plus:
            if (i == j) return match(p->kids[0].get(), i, j);
            // extra empty iterations add nothing, so each one consumes a symbol
            for (std::size_t k = i + 1; k <= j; ++k)
                if (match(p->kids[0].get(), i, k) && (k == j || starFrom(p, k, j))) return true;
            return false;
        case K::LoopFree: {
            std::set<std::string> seen(w_.begin() + i, w_.begin() + j);
            return seen.size() == j - i;
        }
        }
        return false;
    }

    bool starFrom(const PathExpr* p, std::size_t i, std::size_t j) {
        for (std::size_t k = i + 1; k <= j; ++k)
            if (match(p->kids[0].get(), i, k) && (k == j || starFrom(p, k, j))) return true;
        return false;
    }

    bool concat(const PathExpr* p, std::size_t idx, std::size_t i, std::size_t j) {
        if (idx == p->kids.size()) return i == j;
        for (std::size_t k = i; k <= j; ++k)
            if (match(p->kids[idx].get(), i, k) && concat(p, idx + 1, k, j)) return true;
        return false;
    }

    const std::vector<std::string>& w_;
    std::map<std::tuple<const PathExpr*, std::size_t, std::size_t>, bool> memo_;
};

}  // namespace

std::vector<Universe> enumerateUniverses(const Topology& topo, const DataPlane& dp, const PrefixMap& prefixes,
                                         Header header, const std::string& ingress, std::size_t bound) {
    if (!topo.hasDevice(ingress)) throw ValidationError(ValidationError::Kind::UnknownDevice, ingress);
    std::vector<std::string> prefix{ingress};
    auto out = UniverseWalker(dp, prefixes, header, bound).walk(prefix);
    for (auto& u : out) std::sort(u.begin(), u.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool matchesPath(const PathExpr& p, const std::vector<std::string>& word) {
    Interpreter in(word);
    return in.match(&p, 0, word.size());
}

std::uint64_t countMatches(const Universe& universe, const PathExpr& p) {
    std::uint64_t n = 0;
    for (const auto& t : universe)
        if (t.end == Trace::End::Delivered && matchesPath(p, t.devices)) ++n;
    return n;
}

std::vector<std::vector<std::string>> simplePathsMatching(const Topology& topo, const std::string& from,
                                                          const PathExpr& p, std::size_t bound) {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> path{from};
    std::set<std::string> on{from};
    std::size_t visited = 0;
    std::function<void()> dfs = [&] {
        if (++visited > bound * 16) throw ScaleRefusal("too many simple paths from " + from);
        if (matchesPath(p, path)) out.push_back(path);
        for (const auto& n : topo.neighbors(path.back())) {
            if (on.count(n)) continue;
            path.push_back(n);
            on.insert(n);
            dfs();
            on.erase(n);
            path.pop_back();
        }
    };
    dfs();
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Predicate> headerCells(const Predicate& space, const DataPlane& dp, const PrefixMap& prefixes,
                                   const Topology& topo) {
    std::vector<Predicate> cells;
    if (!space.isEmpty()) cells.push_back(space);
    auto refine = [&](const Predicate& p) {
        std::vector<Predicate> next;
        for (const auto& c : cells) {
            Predicate in = c & p, out = c - p;
            if (!in.isEmpty()) next.push_back(in);
            if (!out.isEmpty()) next.push_back(out);
        }
        cells = std::move(next);
    };
    BddStore& store = *space.store();
    for (const auto& d : topo.devices()) {
        if (topo.isVirtual(d)) continue;
        refine(prefixes.predicate(store, d));
        if (!dp.hasDevice(d)) continue;
        for (const auto& e : dp.device(d).table()) refine(e.pred);
    }
    return cells;
}

std::vector<OracleCell> oracleVerdict(const Requirement& req, const Topology& topo, const DataPlane& dp,
                                      const PrefixMap& prefixes, BddStore& store, std::size_t bound) {
    Requirement r = desugar(req, topo.devices(), true);
    auto leaves = behaviorLeaves(*r.behavior);
    Predicate space = spacePredicate(*r.space, store);

    std::vector<OracleCell> out;
    for (const auto& ingress : r.ingress) {
        // Equal leaves compare against the paths the expression allows.
        std::vector<std::vector<std::vector<std::string>>> wanted(leaves.size());
        for (std::size_t i = 0; i < leaves.size(); ++i)
            if (leaves[i]->kind == Behavior::Kind::Equal)
                wanted[i] = simplePathsMatching(topo, ingress, *leaves[i]->path, bound);

        for (const auto& cell : headerCells(space, dp, prefixes, topo)) {
            OracleCell oc;
            oc.ingress = ingress;
            oc.pred = cell;
            oc.representative = *cell.anyHeader();
            auto universes = enumerateUniverses(topo, dp, prefixes, oc.representative, ingress, bound);
            oc.universes = universes.size();

            for (const auto& u : universes) {
                std::vector<std::uint64_t> values(leaves.size(), 0);
                for (std::size_t i = 0; i < leaves.size(); ++i)
                    if (leaves[i]->kind == Behavior::Kind::Exist) values[i] = countMatches(u, *leaves[i]->path);
                if (!evaluateBehavior(*r.behavior, values)) {
                    oc.satisfied = false;
                    oc.witness = values;
                    oc.detail = "universe";
                    for (const auto& t : u) oc.detail += " " + t.str();
                    break;
                }
            }
            for (std::size_t i = 0; i < leaves.size() && oc.satisfied; ++i) {
                if (leaves[i]->kind != Behavior::Kind::Equal) continue;
                std::set<std::vector<std::string>> seen;
                for (const auto& u : universes)
                    for (const auto& t : u)
                        if (t.end == Trace::End::Delivered && matchesPath(*leaves[i]->path, t.devices))
                            seen.insert(t.devices);
                std::set<std::vector<std::string>> want(wanted[i].begin(), wanted[i].end());
                if (seen != want) {
                    oc.satisfied = false;
                    oc.detail = "equal: " + std::to_string(seen.size()) + " of " + std::to_string(want.size()) +
                                " paths used";
                }
            }
            out.push_back(std::move(oc));
        }
    }
    return out;
}

}  // namespace dpv
