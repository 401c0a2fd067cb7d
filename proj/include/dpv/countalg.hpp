#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpv/dataplane.hpp"
#include "dpv/planner.hpp"

namespace dpv {

using CountVector = std::vector<std::uint32_t>;

/// Deduplicated, sorted set of count vectors of one dimension.
class CountSet {
public:
    CountSet() = default;
    explicit CountSet(int dimension) : dim_(dimension) {}
    CountSet(int dimension, std::vector<CountVector> vectors);

    /// {0-vector}
    static CountSet zero(int dimension);
    /// {sum of unit vectors e_i for each bit i of mask}
    static CountSet unit(int dimension, std::uint64_t mask);
    static CountSet scalars(std::initializer_list<std::uint32_t> values);

    int dimension() const { return dim_; }
    const std::vector<CountVector>& vectors() const { return vecs_; }
    std::size_t size() const { return vecs_.size(); }
    bool empty() const { return vecs_.empty(); }
    bool contains(const CountVector& v) const;
    void insert(const CountVector& v);

    std::string str() const;

    auto operator<=>(const CountSet&) const = default;

private:
    int dim_ = 0;
    std::vector<CountVector> vecs_;
};

/// { x + y } over all pairs. Throws on dimension mismatch.
CountSet crossSum(const CountSet& a, const CountSet& b);
/// Cross sum over a collection; the empty collection yields {0}.
CountSet crossSumAll(const std::vector<CountSet>& sets, int dimension);
CountSet unionSet(const CountSet& a, const CountSet& b);
CountSet zeroAugment(const CountSet& a);
/// Clamps every component at cap (stress runs only).
CountSet saturate(const CountSet& a, std::uint32_t cap);

/// Minimal counting information for a scalar comparison against n.
CountSet truncateMinInfo(const CountSet& c, Cmp cmp, std::uint32_t n);

/// Count set contributed by one downstream node, tagged with its physical device.
struct Contribution {
    std::string device;
    const CountSet* count;
};

/// Count of a non-delivering node for one packet class. Forwarding to a
/// device counts as forwarding to every downstream node hosted on it.
CountSet nodeCount(const ActionGroup& action, const std::vector<Contribution>& downstream, int dimension);

struct Cell {
    Predicate pred;
    CountSet count;
};
using CellList = std::vector<Cell>;

/// Merges cells with equal counts; output ordered by count.
CellList coalesce(const CellList& cells);

struct CountOptions {
    bool minInfo = false;
    Cmp cmp = Cmp::Ge;
    std::uint32_t n = 0;
    std::uint32_t saturateAt = 0;  // 0 disables
};

/// Inputs every counting evaluation needs.
struct CountContext {
    const Topology* topo;  // the plan's (possibly rewritten) topology
    const DataPlane* dp;
    const PrefixMap* prefixes;
    Predicate space;
};

/// Cells of one node given the cells of its downstream nodes.
CellList countNode(const DvNet& net, int node, const CountContext& ctx, const std::vector<CellList>& results,
                   const CountOptions& options = {});

/// Reverse-topological sweep over the whole network; one cell list per node.
std::vector<CellList> centralizedCount(const DvNet& net, const CountContext& ctx, const CountOptions& options = {});

/// Result at each ingress; ingresses without a source node get {0}.
std::map<std::string, CellList> sourceResults(const Plan& plan, const DataPlane& dp, const PrefixMap& prefixes,
                                              const CountOptions& options = {});

struct CellVerdict {
    std::string ingress;
    Predicate pred;
    bool satisfied = true;
    std::optional<CountVector> witness;
    CountSet counts;
    std::string detail;
};

/// Per-cell verdict of the plan's behavior over the counts.
std::vector<CellVerdict> evaluate(const Plan& plan, const std::map<std::string, CellList>& results);
bool evaluateVector(const Plan& plan, const CountVector& v);

struct EqualViolation {
    enum class Kind { MissingHop, NotDelivered, ExtraHop };
    std::string nodeId;
    std::string device;
    Predicate pred;
    Kind kind;
    std::string detail;
};
std::string violationName(EqualViolation::Kind k);

/// Local equal-mode check of a single node against its device's LEC table.
std::vector<EqualViolation> equalCheckNode(const Plan& plan, int node, const DataPlane& dp, const PrefixMap& prefixes);
/// Verdicts from local violations at nodes reachable from each source.
/// ExtraHop counts only when includeExtra is set.
std::vector<CellVerdict> equalVerdicts(const Plan& plan, const std::vector<EqualViolation>& violations,
                                       bool includeExtra = true);

/// Centralized verdicts of one plan on the current data plane.
/// ExtraHop findings count only when includeExtra is set.
std::vector<CellVerdict> verifyPlan(const Plan& plan, const DataPlane& dp, const PrefixMap& prefixes,
                                    bool includeExtra = true);

/// False iff some plan reports a violated cell for this ingress containing h.
bool satisfiedAt(const std::vector<std::vector<CellVerdict>>& perPlan, const std::string& ingress, Header h);

}  // namespace dpv
