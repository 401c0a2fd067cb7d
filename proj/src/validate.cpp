#include "dpv/automaton.hpp"
#include "dpv/reqlang.hpp"

namespace dpv {

namespace {

using VK = ValidationError::Kind;

// Leaves that promise at least one delivered copy, and so need a destination
// whose external prefixes cover the packet space.
bool demandsDelivery(const Behavior& b) {
    if (b.kind == Behavior::Kind::Equal) return true;
    if (b.kind != Behavior::Kind::Exist) return false;
    switch (b.cmp) {
    case Cmp::Ge:
    case Cmp::Eq: return b.n >= 1;
    case Cmp::Gt: return true;
    default: return false;
    }
}

void walk(const Behavior& b, const Requirement& req, const Topology& topo, const PrefixMap& prefixes,
          BddStore& store, const Predicate& space, int depth, bool negated, bool underOr) {
    switch (b.kind) {
    case Behavior::Kind::Subset:
    case Behavior::Kind::LoopFree: throw Error("validate expects a desugared requirement");
    case Behavior::Kind::Not:
        walk(*b.kids[0], req, topo, prefixes, store, space, depth + 1, !negated, underOr);
        return;
    case Behavior::Kind::And:
        for (const auto& k : b.kids) walk(*k, req, topo, prefixes, store, space, depth + 1, negated, underOr);
        return;
    case Behavior::Kind::Or:
        for (const auto& k : b.kids) walk(*k, req, topo, prefixes, store, space, depth + 1, negated, true);
        return;
    case Behavior::Kind::Exist:
    case Behavior::Kind::Equal: break;
    }

    for (const auto& d : pathDevices(*b.path))
        if (!topo.hasDevice(d)) throw ValidationError(VK::UnknownDevice, d + " in " + printPath(*b.path));

    if (b.kind == Behavior::Kind::Equal) {
        if (negated) throw ValidationError(VK::Unsupported, "equal may not appear under not");
        if (underOr || depth > 1) throw ValidationError(VK::Unsupported, "equal is only supported as a top-level conjunct");
    }
    if (negated || !demandsDelivery(b)) return;

    std::vector<std::string> alphabet(topo.devices().begin(), topo.devices().end());
    auto dfa = regexToDfa(*b.path, alphabet, true);
    Predicate delivered = Predicate::none(store);
    std::string names;
    for (const auto& d : finalSymbols(dfa)) {
        delivered |= prefixes.predicate(store, topo.physical(d));
        names += (names.empty() ? "" : ",") + d;
    }
    Predicate uncovered = space - delivered;
    if (!uncovered.isEmpty())
        throw ValidationError(VK::PrefixMismatch, "destinations {" + names + "} of " + printPath(*b.path) +
                                                      " do not cover " + uncovered.describe());
}

}  // namespace

void validate(const Requirement& req, const Topology& topo, const PrefixMap& prefixes, BddStore& store) {
    if (req.ingress.empty()) throw ValidationError(VK::Unsupported, "empty ingress set");
    for (const auto& i : req.ingress)
        if (!topo.hasDevice(i)) throw ValidationError(VK::UnknownDevice, i);
    for (const auto& [dev, list] : prefixes.all())
        if (!topo.hasDevice(dev)) throw ValidationError(VK::UnknownDevice, dev + " in prefix map");
    Predicate space = spacePredicate(*req.space, store);
    walk(*req.behavior, req, topo, prefixes, store, space, 0, false, false);
}

}  // namespace dpv
