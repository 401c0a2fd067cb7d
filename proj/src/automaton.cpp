#include "dpv/automaton.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace dpv {

int Dfa::symbolIndex(const std::string& name) const {
    auto it = std::lower_bound(alphabet.begin(), alphabet.end(), name);
    return it != alphabet.end() && *it == name ? static_cast<int>(it - alphabet.begin()) : -1;
}

int Dfa::step(int state, const std::string& symbol) const {
    if (state < 0) return -1;
    int s = symbolIndex(symbol);
    return s < 0 ? -1 : delta[state][s];
}

std::uint64_t Dfa::run(const std::vector<std::string>& word) const {
    int q = initial;
    for (const auto& w : word) q = step(q, w);
    return q < 0 ? 0 : accept[q];
}

namespace {

struct Nfa {
    struct State {
        std::vector<int> eps;
        std::vector<std::pair<int, int>> moves;  // (symbol, target)
    };
    std::vector<State> states;
    int add() {
        states.emplace_back();
        return static_cast<int>(states.size()) - 1;
    }
};

struct Frag {
    int start;
    int end;
};

class Builder {
public:
    Builder(const std::vector<std::string>& alphabet, bool loopFreeAsAny)
        : alphabet_(alphabet), loopFreeAsAny_(loopFreeAsAny) {}

    Dfa build(const PathExpr& p) {
        Nfa nfa;
        Frag f = fragment(nfa, p);
        return determinize(nfa, f);
    }

private:
    int sigma() const { return static_cast<int>(alphabet_.size()); }

    Frag symbols(Nfa& nfa, const std::vector<bool>& allowed) {
        Frag f{nfa.add(), nfa.add()};
        for (int s = 0; s < sigma(); ++s)
            if (allowed[s]) nfa.states[f.start].moves.emplace_back(s, f.end);
        return f;
    }

    Frag embed(Nfa& nfa, const Dfa& dfa) {
        Frag f{nfa.add(), nfa.add()};
        if (dfa.initial < 0) return f;
        int base = static_cast<int>(nfa.states.size());
        for (int q = 0; q < dfa.numStates(); ++q) nfa.add();
        for (int q = 0; q < dfa.numStates(); ++q) {
            for (int s = 0; s < sigma(); ++s)
                if (dfa.delta[q][s] >= 0) nfa.states[base + q].moves.emplace_back(s, base + dfa.delta[q][s]);
            if (dfa.accept[q]) nfa.states[base + q].eps.push_back(f.end);
        }
        nfa.states[f.start].eps.push_back(base + dfa.initial);
        return f;
    }

    Frag fragment(Nfa& nfa, const PathExpr& p) {
        using K = PathExpr::Kind;
        switch (p.kind) {
        case K::Symbol: {
            std::vector<bool> allowed(sigma(), false);
            auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), p.name);
            if (it != alphabet_.end() && *it == p.name) allowed[it - alphabet_.begin()] = true;
            return symbols(nfa, allowed);
        }
        case K::Any: return symbols(nfa, std::vector<bool>(sigma(), true));
        case K::Except: {
            std::vector<bool> allowed(sigma(), true);
            for (int s = 0; s < sigma(); ++s)
                if (std::binary_search(p.excluded.begin(), p.excluded.end(), alphabet_[s])) allowed[s] = false;
            return symbols(nfa, allowed);
        }
        case K::LoopFree: {
            if (loopFreeAsAny_) return fragment(nfa, *path::star(path::any()));
            std::set<std::string> devices(alphabet_.begin(), alphabet_.end());
            return fragment(nfa, *loopFreeRegex(devices));
        }
        case K::Concat: {
            Frag first = fragment(nfa, *p.kids[0]);
            Frag cur = first;
            for (std::size_t i = 1; i < p.kids.size(); ++i) {
                Frag next = fragment(nfa, *p.kids[i]);
                nfa.states[cur.end].eps.push_back(next.start);
                cur = next;
            }
            return {first.start, cur.end};
        }
        case K::Alt: {
            Frag f{nfa.add(), nfa.add()};
            for (const auto& k : p.kids) {
                Frag inner = fragment(nfa, *k);
                nfa.states[f.start].eps.push_back(inner.start);
                nfa.states[inner.end].eps.push_back(f.end);
            }
            return f;
        }
        case K::Star:
        case K::Plus:
        case K::Optional: {
            Frag f{nfa.add(), nfa.add()};
            Frag inner = fragment(nfa, *p.kids[0]);
            nfa.states[f.start].eps.push_back(inner.start);
            nfa.states[inner.end].eps.push_back(f.end);
            if (p.kind != K::Plus) nfa.states[f.start].eps.push_back(f.end);
            if (p.kind != K::Optional) nfa.states[inner.end].eps.push_back(inner.start);
            return f;
        }
        case K::And: {
            Dfa acc = build(*p.kids[0]);
            for (std::size_t i = 1; i < p.kids.size(); ++i) acc = minimize(intersect(acc, build(*p.kids[i])));
            return embed(nfa, acc);
        }
        case K::Not: return embed(nfa, complement(build(*p.kids[0])));
        }
        throw Error("unhandled path expression");
    }

    Dfa complement(const Dfa& dfa) {
        Dfa out;
        out.alphabet = alphabet_;
        int n = std::max(dfa.numStates(), 0);
        int sink = n;
        out.accept.assign(n + 1, 0);
        out.delta.assign(n + 1, std::vector<int>(sigma(), sink));
        for (int q = 0; q < n; ++q) {
            out.accept[q] = dfa.accept[q] ? 0 : 1;
            for (int s = 0; s < sigma(); ++s)
                if (dfa.delta[q][s] >= 0) out.delta[q][s] = dfa.delta[q][s];
        }
        out.accept[sink] = 1;
        out.initial = dfa.initial < 0 ? sink : dfa.initial;
        return minimize(out);
    }

    void closure(const Nfa& nfa, std::vector<int>& set) const {
        std::vector<bool> seen(nfa.states.size(), false);
        for (int s : set) seen[s] = true;
        for (std::size_t i = 0; i < set.size(); ++i)
            for (int t : nfa.states[set[i]].eps)
                if (!seen[t]) {
                    seen[t] = true;
                    set.push_back(t);
                }
        std::sort(set.begin(), set.end());
    }

    Dfa determinize(const Nfa& nfa, Frag f) {
        Dfa out;
        out.alphabet = alphabet_;
        std::map<std::vector<int>, int> ids;
        std::deque<std::vector<int>> work;
        std::vector<int> start{f.start};
        closure(nfa, start);
        auto intern = [&](std::vector<int> set) {
            auto [it, fresh] = ids.try_emplace(set, static_cast<int>(ids.size()));
            if (fresh) {
                out.accept.push_back(std::binary_search(set.begin(), set.end(), f.end) ? 1 : 0);
                out.delta.emplace_back(sigma(), -1);
                work.push_back(std::move(set));
            }
            return it->second;
        };
        out.initial = intern(start);
        while (!work.empty()) {
            auto set = work.front();
            work.pop_front();
            int id = ids.at(set);
            std::vector<std::vector<int>> next(sigma());
            for (int s : set)
                for (auto [sym, t] : nfa.states[s].moves) next[sym].push_back(t);
            for (int sym = 0; sym < sigma(); ++sym) {
                if (next[sym].empty()) continue;
                std::sort(next[sym].begin(), next[sym].end());
                next[sym].erase(std::unique(next[sym].begin(), next[sym].end()), next[sym].end());
                closure(nfa, next[sym]);
                int target = intern(next[sym]);
                out.delta[id][sym] = target;
            }
        }
        return minimize(out);
    }

    std::vector<std::string> alphabet_;
    bool loopFreeAsAny_;
};

}  // namespace

Dfa regexToDfa(const PathExpr& p, const std::vector<std::string>& alphabet, bool loopFreeAsAny) {
    std::vector<std::string> sorted = alphabet;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    return Builder(sorted, loopFreeAsAny).build(p);
}

Dfa minimize(const Dfa& dfa) {
    const int sigma = static_cast<int>(dfa.alphabet.size());
    Dfa out;
    out.alphabet = dfa.alphabet;
    if (dfa.initial < 0) return out;

    // Complete the machine with a rejecting sink so refinement is total.
    const int n = dfa.numStates() + 1;
    const int sink = n - 1;
    auto next = [&](int q, int s) {
        if (q == sink) return sink;
        int t = dfa.delta[q][s];
        return t < 0 ? sink : t;
    };
    auto mask = [&](int q) { return q == sink ? std::uint64_t{0} : dfa.accept[q]; };

    std::vector<int> cls(n);
    {
        std::map<std::uint64_t, int> byMask;
        for (int q = 0; q < n; ++q) cls[q] = byMask.try_emplace(mask(q), static_cast<int>(byMask.size())).first->second;
    }
    for (int classes = -1;;) {
        std::map<std::vector<int>, int> sigs;
        std::vector<int> refined(n);
        for (int q = 0; q < n; ++q) {
            std::vector<int> sig{cls[q]};
            for (int s = 0; s < sigma; ++s) sig.push_back(cls[next(q, s)]);
            refined[q] = sigs.try_emplace(sig, static_cast<int>(sigs.size())).first->second;
        }
        cls = refined;
        if (static_cast<int>(sigs.size()) == classes) break;
        classes = static_cast<int>(sigs.size());
    }

    // Live classes: those that can reach an accepting class.
    int numClasses = *std::max_element(cls.begin(), cls.end()) + 1;
    std::vector<std::vector<int>> reverse(numClasses);
    std::vector<std::uint64_t> classMask(numClasses, 0);
    std::vector<int> rep(numClasses, -1);
    for (int q = 0; q < n; ++q) {
        classMask[cls[q]] = mask(q);
        if (rep[cls[q]] < 0) rep[cls[q]] = q;
        for (int s = 0; s < sigma; ++s) reverse[cls[next(q, s)]].push_back(cls[q]);
    }
    std::vector<bool> live(numClasses, false);
    std::deque<int> work;
    for (int c = 0; c < numClasses; ++c)
        if (classMask[c]) {
            live[c] = true;
            work.push_back(c);
        }
    while (!work.empty()) {
        int c = work.front();
        work.pop_front();
        for (int p : reverse[c])
            if (!live[p]) {
                live[p] = true;
                work.push_back(p);
            }
    }
    int startClass = cls[dfa.initial];
    if (!live[startClass]) return out;

    std::map<int, int> ids;
    std::deque<int> order{startClass};
    ids[startClass] = 0;
    while (!order.empty()) {
        int c = order.front();
        order.pop_front();
        out.accept.push_back(classMask[c]);
        out.delta.emplace_back(sigma, -1);
        for (int s = 0; s < sigma; ++s) {
            int t = cls[next(rep[c], s)];
            if (!live[t]) continue;
            auto [it, fresh] = ids.try_emplace(t, static_cast<int>(ids.size()));
            if (fresh) order.push_back(t);
            out.delta[ids[c]][s] = it->second;
        }
    }
    out.initial = 0;
    return out;
}

namespace {

template <typename MaskFn>
Dfa tupleProduct(const std::vector<const Dfa*>& machines, MaskFn maskOf, bool needAll) {
    Dfa out;
    if (machines.empty()) return out;
    out.alphabet = machines[0]->alphabet;
    for (const auto* m : machines)
        if (m->alphabet != out.alphabet) throw Error("automaton alphabets differ");
    const int sigma = static_cast<int>(out.alphabet.size());

    std::vector<int> start;
    for (const auto* m : machines) start.push_back(m->initial);
    auto dead = [&](const std::vector<int>& t) {
        if (needAll) return std::any_of(t.begin(), t.end(), [](int q) { return q < 0; });
        return std::all_of(t.begin(), t.end(), [](int q) { return q < 0; });
    };
    if (dead(start)) return out;

    std::map<std::vector<int>, int> ids;
    std::deque<std::vector<int>> work;
    auto intern = [&](const std::vector<int>& t) {
        auto [it, fresh] = ids.try_emplace(t, static_cast<int>(ids.size()));
        if (fresh) {
            out.accept.push_back(maskOf(t));
            out.delta.emplace_back(sigma, -1);
            work.push_back(t);
        }
        return it->second;
    };
    out.initial = intern(start);
    while (!work.empty()) {
        auto t = work.front();
        work.pop_front();
        int id = ids.at(t);
        for (int s = 0; s < sigma; ++s) {
            std::vector<int> nt;
            for (std::size_t i = 0; i < machines.size(); ++i)
                nt.push_back(t[i] < 0 ? -1 : machines[i]->delta[t[i]][s]);
            if (dead(nt)) continue;
            int target = intern(nt);
            out.delta[id][s] = target;
        }
    }
    return minimize(out);
}

}  // namespace

Dfa unionProduct(const std::vector<Dfa>& machines) {
    if (machines.size() > 64) throw ValidationError(ValidationError::Kind::Unsupported, "more than 64 path expressions");
    std::vector<const Dfa*> ptrs;
    for (const auto& m : machines) ptrs.push_back(&m);
    return tupleProduct(
        ptrs,
        [&](const std::vector<int>& t) {
            std::uint64_t mask = 0;
            for (std::size_t i = 0; i < t.size(); ++i)
                if (t[i] >= 0 && (machines[i].accept[t[i]] & 1u)) mask |= std::uint64_t{1} << i;
            return mask;
        },
        false);
}

Dfa intersect(const Dfa& a, const Dfa& b) {
    return tupleProduct(
        {&a, &b}, [&](const std::vector<int>& t) { return b.accept[t[1]] ? a.accept[t[0]] : std::uint64_t{0}; }, true);
}

std::set<std::string> finalSymbols(const Dfa& dfa, std::uint64_t bits) {
    std::set<std::string> out;
    for (int q = 0; q < dfa.numStates(); ++q)
        for (std::size_t s = 0; s < dfa.alphabet.size(); ++s) {
            int t = dfa.delta[q][s];
            if (t >= 0 && (dfa.accept[t] & bits)) out.insert(dfa.alphabet[s]);
        }
    return out;
}

}  // namespace dpv
