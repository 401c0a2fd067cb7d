#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dpv/dataplane.hpp"
#include "dpv/reqlang.hpp"

namespace dpv {

/// Device sequence of one packet copy and how it ended.
struct Trace {
    enum class End { Delivered, Dropped, Loop };
    std::vector<std::string> devices;
    End end = End::Dropped;

    std::string str() const;
    auto operator<=>(const Trace&) const = default;
};

/// One joint resolution of the ANY choices: the traces that coexist.
using Universe = std::vector<Trace>;

constexpr std::size_t kUniverseBound = std::size_t{1} << 16;

/// Every universe of `header` entering at `ingress`. Each copy resolves ANY
/// groups independently; a copy that revisits a device ends as a loop.
/// Throws ScaleRefusal beyond `bound` universes.
std::vector<Universe> enumerateUniverses(const Topology& topo, const DataPlane& dp, const PrefixMap& prefixes,
                                         Header header, const std::string& ingress,
                                         std::size_t bound = kUniverseBound);

/// Direct interpreter for path expressions, independent of the automata.
bool matchesPath(const PathExpr& p, const std::vector<std::string>& word);

/// Delivered traces in the universe whose device sequence matches p.
std::uint64_t countMatches(const Universe& universe, const PathExpr& p);

/// Simple topology paths from `from` whose device sequence matches p.
std::vector<std::vector<std::string>> simplePathsMatching(const Topology& topo, const std::string& from,
                                                          const PathExpr& p, std::size_t bound = kUniverseBound);

struct OracleCell {
    std::string ingress;
    Predicate pred;  // headers sharing one forwarding behavior everywhere
    Header representative = 0;
    bool satisfied = true;
    std::size_t universes = 0;
    std::vector<std::uint64_t> witness;  // leaf counts of a failing universe
    std::string detail;
};

/// Header classes of the packet space on which every device forwards and
/// delivers uniformly.
std::vector<Predicate> headerCells(const Predicate& space, const DataPlane& dp, const PrefixMap& prefixes,
                                   const Topology& topo);

/// Ground-truth verdict per (ingress, header class).
std::vector<OracleCell> oracleVerdict(const Requirement& req, const Topology& topo, const DataPlane& dp,
                                      const PrefixMap& prefixes, BddStore& store,
                                      std::size_t bound = kUniverseBound);

}  // namespace dpv
