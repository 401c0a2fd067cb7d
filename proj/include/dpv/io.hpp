#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dpv/dataplane.hpp"
#include "dpv/topology.hpp"

namespace dpv {

std::string readFile(const std::string& path);
void writeFile(const std::string& path, const std::string& content);

/// `node <NAME>` and `link <A> <B>` lines.
Topology parseTopology(const std::string& text);
std::string formatTopology(const Topology& topo);

/// `prefix <DEVICE> <CIDR>` lines.
PrefixMap parsePrefixes(const std::string& text);
std::string formatPrefixes(const PrefixMap& prefixes);

using FibSet = std::map<std::string, std::vector<FibRule>>;

/// `device <NAME>` sections holding
/// `rule <PRIORITY> <srcCIDR|-> <dstCIDR|-> <ALL|ANY> <hops|->` lines.
FibSet parseFibs(const std::string& text, BddStore& store);
/// Parses the tokens after the `rule` keyword.
FibRule parseRuleTokens(const std::vector<std::string>& tokens, BddStore& store, int line = 0);

/// Rule printing needs the CIDRs a rule was built from, so generators keep them.
struct RuleSpec {
    int priority = 0;
    std::string src = "-";
    std::string dst = "-";
    ActionGroup action;
};
std::string formatRule(const RuleSpec& rule);
std::string formatFibs(const std::map<std::string, std::vector<RuleSpec>>& fibs);

/// Builds the data plane, rejecting duplicate priorities, unknown devices
/// and hops that are not neighbors.
void installFibs(DataPlane& dp, const Topology& topo, const FibSet& fibs);

using LatencyMap = std::map<std::pair<std::string, std::string>, std::int64_t>;
/// `latency <A> <B> <microseconds>` lines; keys are stored with A < B.
LatencyMap parseLatency(const std::string& text);

struct ScriptEvent {
    enum class Kind { Rule, DeleteRule, Link };
    std::int64_t at = 0;
    Kind kind = Kind::Rule;
    std::string device;  // rule target, or first link endpoint
    FibRule rule;        // Rule; DeleteRule reads only the priority
    std::string peer;    // second link endpoint
    bool up = true;
};
/// `at <us> update <dev> rule ...`, `at <us> update <dev> delete <prio>`,
/// `at <us> link <A> <B> <up|down>`.
std::vector<ScriptEvent> parseEvents(const std::string& text, BddStore& store);

/// Splits a line into whitespace tokens after stripping `#` comments.
std::vector<std::string> tokenizeLine(const std::string& line);

}  // namespace dpv
