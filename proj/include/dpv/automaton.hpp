#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "dpv/reqlang.hpp"

namespace dpv {

/// Deterministic automaton over device names with a partial transition
/// function. Each state carries a bitmask of the regexes it accepts, so one
/// machine can track several path expressions at once.
struct Dfa {
    std::vector<std::string> alphabet;  // sorted, unique
    int initial = -1;                   // -1 denotes the empty language
    std::vector<std::uint64_t> accept;
    std::vector<std::vector<int>> delta;  // [state][symbol], -1 if undefined

    int numStates() const { return static_cast<int>(accept.size()); }
    int symbolIndex(const std::string& name) const;
    int step(int state, const std::string& symbol) const;
    /// Accept mask reached by the word, 0 if rejected.
    std::uint64_t run(const std::vector<std::string>& word) const;
};

/// With loopFreeAsAny the `loop_free` atom is read as `.*`, which is exact
/// for every consumer that only feeds the machine simple paths.
Dfa regexToDfa(const PathExpr& p, const std::vector<std::string>& alphabet, bool loopFreeAsAny = false);

/// Partition refinement on the accept masks, then trimming of unreachable and
/// dead states. States are renumbered breadth-first for stable output.
Dfa minimize(const Dfa& dfa);

/// Machine whose accept mask has bit i set exactly when machine i accepts.
/// Each input is read through its bit 0.
Dfa unionProduct(const std::vector<Dfa>& machines);

/// Keeps a's accept masks only where b accepts.
Dfa intersect(const Dfa& a, const Dfa& b);

/// Devices that end some accepted word whose accept mask intersects `bits`.
std::set<std::string> finalSymbols(const Dfa& dfa, std::uint64_t bits = ~std::uint64_t{0});

}  // namespace dpv
