#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "dpv/countalg.hpp"
#include "dpv/io.hpp"
#include "dpv/planner.hpp"
#include "fixtures.hpp"

namespace testsupport {

struct Net {
    std::unique_ptr<dpv::BddStore> store = std::make_unique<dpv::BddStore>();
    dpv::Topology topo;
    dpv::PrefixMap prefixes;
    std::unique_ptr<dpv::DataPlane> dp;
    std::vector<dpv::Requirement> reqs;
};

inline Net load(const char* topology, const char* prefixes, const char* fibs, const char* requirements = "") {
    Net n;
    n.topo = dpv::parseTopology(topology);
    n.prefixes = dpv::parsePrefixes(prefixes);
    n.dp = std::make_unique<dpv::DataPlane>(*n.store);
    dpv::installFibs(*n.dp, n.topo, dpv::parseFibs(fibs, *n.store));
    n.reqs = dpv::parseRequirements(requirements);
    return n;
}

inline Net load(const fixtures::Text& t) { return load(t.topology, t.prefixes, t.fibs, t.requirements); }

inline dpv::Predicate dst(Net& n, const char* cidr) {
    return dpv::Predicate::fromCidr(*n.store, dpv::Field::Dst, dpv::parseCidr(cidr));
}

}  // namespace testsupport

namespace dpv {
inline std::ostream& operator<<(std::ostream& os, const CountSet& c) { return os << c.str(); }
}  // namespace dpv
