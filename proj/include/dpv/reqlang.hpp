#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "dpv/predicate.hpp"
#include "dpv/topology.hpp"

namespace dpv {

struct PathExpr;
using PathPtr = std::shared_ptr<const PathExpr>;

/// Regular expression over device names.
struct PathExpr {
    enum class Kind {
        Symbol,    // device literal
        Any,       // .
        Except,    // [^X Y]: any single device not listed
        Concat,
        Alt,
        And,
        Not,
        Star,
        Plus,
        Optional,
        LoopFree,  // sugar: no device repeats within the span
    };
    Kind kind = Kind::Any;
    std::string name;                   // Symbol
    std::vector<std::string> excluded;  // Except, sorted
    std::vector<PathPtr> kids;
};

namespace path {
PathPtr sym(const std::string& name);
PathPtr any();
PathPtr except(std::vector<std::string> names);
PathPtr concat(std::vector<PathPtr> kids);
PathPtr alt(std::vector<PathPtr> kids);
PathPtr conj(std::vector<PathPtr> kids);
PathPtr neg(PathPtr kid);
PathPtr star(PathPtr kid);
PathPtr plus(PathPtr kid);
PathPtr optional(PathPtr kid);
PathPtr loopFree();
}  // namespace path

bool equalPath(const PathExpr& a, const PathExpr& b);
std::string printPath(const PathExpr& p);
/// Device literals and excluded names mentioned anywhere in p.
std::set<std::string> pathDevices(const PathExpr& p);
bool containsLoopFree(const PathExpr& p);

struct SpaceExpr;
using SpacePtr = std::shared_ptr<const SpaceExpr>;

struct SpaceExpr {
    enum class Kind { True, SrcIn, DstIn, And, Or, Not };
    Kind kind = Kind::True;
    Cidr cidr;
    std::vector<SpacePtr> kids;
};

bool equalSpace(const SpaceExpr& a, const SpaceExpr& b);
std::string printSpace(const SpaceExpr& s);
Predicate spacePredicate(const SpaceExpr& s, BddStore& store);

enum class Cmp { Eq, Ge, Gt, Le, Lt };
std::string cmpText(Cmp c);
bool compare(Cmp c, std::uint64_t value, std::uint64_t n);

struct Behavior;
using BehaviorPtr = std::shared_ptr<const Behavior>;

struct Behavior {
    enum class Kind { Exist, Equal, Subset, LoopFree, And, Or, Not };
    Kind kind = Kind::Exist;
    Cmp cmp = Cmp::Ge;  // Exist
    std::uint32_t n = 0;
    PathPtr path;       // Exist, Equal, Subset
    std::vector<BehaviorPtr> kids;
};

namespace behavior {
BehaviorPtr exist(Cmp cmp, std::uint32_t n, PathPtr p);
BehaviorPtr equal(PathPtr p);
BehaviorPtr subset(PathPtr p);
BehaviorPtr loopFree();
BehaviorPtr conj(std::vector<BehaviorPtr> kids);
BehaviorPtr disj(std::vector<BehaviorPtr> kids);
BehaviorPtr neg(BehaviorPtr kid);
}  // namespace behavior

bool equalBehavior(const Behavior& a, const Behavior& b);
std::string printBehavior(const Behavior& b);

/// Leaves of a desugared behavior in left-to-right order; leaf i is regex-id i.
std::vector<const Behavior*> behaviorLeaves(const Behavior& b);
/// Evaluates the boolean combination given one value per leaf (regex-id order).
bool evaluateBehavior(const Behavior& b, const std::vector<std::uint64_t>& leafValues);

struct Requirement {
    SpacePtr space;
    std::vector<std::string> ingress;
    BehaviorPtr behavior;
    int line = 0;
};

bool equalRequirement(const Requirement& a, const Requirement& b);
std::string printRequirement(const Requirement& r);

/// Parses zero or more `(packet_space, [ingress,...], behavior)` forms.
std::vector<Requirement> parseRequirements(const std::string& text);
PathPtr parsePath(const std::string& text);

/// Expands `subset` and `loop_free`. With keepLoopFreeAtoms the path-level
/// atom is left in place for consumers that only see simple paths.
Requirement desugar(const Requirement& req, const std::set<std::string>& devices, bool keepLoopFreeAtoms = false);
PathPtr loopFreeRegex(const std::set<std::string>& devices);

/// Checks device names, destination prefix coverage and equal placement.
void validate(const Requirement& req, const Topology& topo, const PrefixMap& prefixes, BddStore& store);

/// Fabric summary consumed by the requirement templates.
struct Fabric {
    struct Tor {
        std::string name;
        int pod = 0;
        Cidr prefix;
    };
    std::vector<Tor> tors;
    std::vector<std::string> prs;
    Cidr external;
};

enum class TemplateKind { TorToTorShortest, TorToTorEcmp, TorToPr, PrToTor, FailureEcmp };
std::vector<Requirement> renderTemplates(TemplateKind kind, const Fabric& fabric);

}  // namespace dpv
