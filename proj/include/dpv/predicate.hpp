#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dpv/error.hpp"

namespace dpv {

/// Header layout used throughout: bit 63..32 hold the source IPv4 address,
/// bit 31..0 the destination address.
using Header = std::uint64_t;

constexpr Header makeHeader(std::uint32_t src, std::uint32_t dst) {
    return (static_cast<Header>(src) << 32) | dst;
}
constexpr std::uint32_t headerSrc(Header h) { return static_cast<std::uint32_t>(h >> 32); }
constexpr std::uint32_t headerDst(Header h) { return static_cast<std::uint32_t>(h); }

enum class Field { Src, Dst };

struct Cidr {
    std::uint32_t addr = 0;  // host bits already cleared
    int length = 0;

    bool contains(std::uint32_t ip) const;
    bool covers(const Cidr& other) const;
    std::string str() const;
    auto operator<=>(const Cidr&) const = default;
};

/// Parses "a.b.c.d/len". Host bits beyond the prefix length are cleared.
Cidr parseCidr(std::string_view text);
std::uint32_t parseIpv4(std::string_view text);
std::string formatIpv4(std::uint32_t ip);

/// Hash-consed reduced ordered BDD store. Variable 0 is the most significant
/// header bit. Nodes are never collected; ids stay valid for the store's lifetime.
class BddStore {
public:
    using NodeId = std::uint32_t;
    static constexpr NodeId kFalse = 0;
    static constexpr NodeId kTrue = 1;

    explicit BddStore(unsigned numVars = 64);
    BddStore(const BddStore&) = delete;
    BddStore& operator=(const BddStore&) = delete;

    unsigned numVars() const { return numVars_; }
    std::size_t nodeCount() const { return nodes_.size(); }

    NodeId variable(unsigned var);
    NodeId literal(unsigned var, bool value);
    NodeId negate(NodeId a);
    NodeId conj(NodeId a, NodeId b);
    NodeId disj(NodeId a, NodeId b);
    NodeId diff(NodeId a, NodeId b);
    NodeId exclusive(NodeId a, NodeId b);

    bool evaluate(NodeId a, std::uint64_t assignment) const;
    /// Internal plus terminal nodes reachable from a; FALSE and TRUE count as 1.
    std::size_t size(NodeId a) const;
    /// Smallest satisfying assignment (unconstrained bits are 0).
    std::optional<std::uint64_t> anySat(NodeId a) const;

    struct Cube {
        std::uint64_t mask = 0;   // bit set => variable fixed
        std::uint64_t value = 0;  // fixed values
    };
    /// Disjoint cubes whose union is a (one per path to TRUE).
    std::vector<Cube> cubes(NodeId a) const;

    unsigned varOf(NodeId a) const { return nodes_[a].var; }
    NodeId low(NodeId a) const { return nodes_[a].lo; }
    NodeId high(NodeId a) const { return nodes_[a].hi; }

    /// Bit position in the assignment word that variable `var` reads.
    unsigned bitOf(unsigned var) const { return numVars_ - 1 - var; }

    void clearCache() { cache_.clear(); }

private:
    enum class Op : std::uint8_t { And, Or, Diff, Xor, Not };

    struct Node {
        unsigned var;
        NodeId lo;
        NodeId hi;
    };

    NodeId make(unsigned var, NodeId lo, NodeId hi);
    NodeId apply(Op op, NodeId a, NodeId b);

    struct PairKey {
        std::uint64_t hi, lo;
        bool operator==(const PairKey&) const = default;
    };
    struct PairHash {
        std::size_t operator()(const PairKey& k) const {
            return std::hash<std::uint64_t>{}(k.hi * 0x9E3779B97F4A7C15ULL ^ k.lo);
        }
    };

    unsigned numVars_;
    std::vector<Node> nodes_;
    std::unordered_map<PairKey, NodeId, PairHash> unique_;
    std::unordered_map<PairKey, NodeId, PairHash> cache_;
};

/// A set of packet headers. A thin value handle into a BddStore; two
/// predicates from the same store denote the same set iff their ids match.
class Predicate {
public:
    Predicate() = default;
    Predicate(BddStore* store, BddStore::NodeId id) : store_(store), id_(id) {}

    static Predicate none(BddStore& store) { return {&store, BddStore::kFalse}; }
    static Predicate all(BddStore& store) { return {&store, BddStore::kTrue}; }
    static Predicate bit(BddStore& store, unsigned var, bool value) {
        return {&store, store.literal(var, value)};
    }
    /// Packets whose `field` lies inside `prefix` (64-bit header stores only).
    static Predicate fromCidr(BddStore& store, Field field, const Cidr& prefix);

    BddStore* store() const { return store_; }
    BddStore::NodeId id() const { return id_; }
    bool valid() const { return store_ != nullptr; }

    bool isEmpty() const { return id_ == BddStore::kFalse; }
    bool isAll() const { return id_ == BddStore::kTrue; }
    bool contains(Header h) const { return store_->evaluate(id_, h); }
    bool intersects(const Predicate& o) const { return !(*this & o).isEmpty(); }
    bool subsetOf(const Predicate& o) const { return (*this - o).isEmpty(); }
    std::size_t sizeNodes() const { return store_->size(id_); }
    std::optional<Header> anyHeader() const { return store_->anySat(id_); }

    Predicate operator&(const Predicate& o) const { return {store_, store_->conj(id_, o.id_)}; }
    Predicate operator|(const Predicate& o) const { return {store_, store_->disj(id_, o.id_)}; }
    Predicate operator-(const Predicate& o) const { return {store_, store_->diff(id_, o.id_)}; }
    Predicate operator^(const Predicate& o) const { return {store_, store_->exclusive(id_, o.id_)}; }
    Predicate operator~() const { return {store_, store_->negate(id_)}; }
    Predicate& operator&=(const Predicate& o) { return *this = *this & o; }
    Predicate& operator|=(const Predicate& o) { return *this = *this | o; }
    Predicate& operator-=(const Predicate& o) { return *this = *this - o; }

    bool operator==(const Predicate& o) const { return id_ == o.id_ && store_ == o.store_; }
    bool operator!=(const Predicate& o) const { return !(*this == o); }
    bool operator<(const Predicate& o) const { return id_ < o.id_; }

    /// Human-readable union of src/dst prefix pairs, e.g. "dst 10.0.0.0/24".
    std::string describe() const;

private:
    BddStore* store_ = nullptr;
    BddStore::NodeId id_ = BddStore::kFalse;
};

Predicate unionOf(BddStore& store, const std::vector<Predicate>& preds);

}  // namespace dpv
