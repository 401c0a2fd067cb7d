#include "dpv/predicate.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace dpv {

namespace {

std::uint32_t prefixMask(int length) {
    return length == 0 ? 0u : ~std::uint32_t{0} << (32 - length);
}

}  // namespace

bool Cidr::contains(std::uint32_t ip) const { return (ip & prefixMask(length)) == addr; }

bool Cidr::covers(const Cidr& other) const { return other.length >= length && contains(other.addr); }

std::string Cidr::str() const { return formatIpv4(addr) + "/" + std::to_string(length); }

std::uint32_t parseIpv4(std::string_view text) {
    std::uint32_t value = 0;
    int octets = 0;
    std::size_t pos = 0;
    while (octets < 4) {
        unsigned octet = 0;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), octet);
        if (ec != std::errc{} || ptr == text.data() + pos || octet > 255)
            throw ParseError("malformed IPv4 address '" + std::string(text) + "'");
        value = (value << 8) | octet;
        pos = static_cast<std::size_t>(ptr - text.data());
        ++octets;
        if (octets < 4) {
            if (pos >= text.size() || text[pos] != '.')
                throw ParseError("malformed IPv4 address '" + std::string(text) + "'");
            ++pos;
        }
    }
    if (pos != text.size()) throw ParseError("malformed IPv4 address '" + std::string(text) + "'");
    return value;
}

std::string formatIpv4(std::uint32_t ip) {
    std::ostringstream os;
    os << (ip >> 24) << '.' << ((ip >> 16) & 0xff) << '.' << ((ip >> 8) & 0xff) << '.' << (ip & 0xff);
    return os.str();
}

Cidr parseCidr(std::string_view text) {
    auto slash = text.find('/');
    if (slash == std::string_view::npos) throw ParseError("malformed CIDR '" + std::string(text) + "'");
    std::uint32_t addr = parseIpv4(text.substr(0, slash));
    auto lenText = text.substr(slash + 1);
    int length = -1;
    auto [ptr, ec] = std::from_chars(lenText.data(), lenText.data() + lenText.size(), length);
    if (ec != std::errc{} || ptr != lenText.data() + lenText.size() || length < 0 || length > 32)
        throw ParseError("malformed CIDR '" + std::string(text) + "'");
    return Cidr{addr & prefixMask(length), length};
}

BddStore::BddStore(unsigned numVars) : numVars_(numVars) {
    if (numVars == 0 || numVars > 64) throw Error("BddStore supports 1..64 variables");
    nodes_.push_back({numVars_, kFalse, kFalse});
    nodes_.push_back({numVars_, kTrue, kTrue});
}

BddStore::NodeId BddStore::make(unsigned var, NodeId lo, NodeId hi) {
    if (lo == hi) return lo;
    PairKey key{var, (static_cast<std::uint64_t>(lo) << 32) | hi};
    auto it = unique_.find(key);
    if (it != unique_.end()) return it->second;
    auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back({var, lo, hi});
    unique_.emplace(key, id);
    return id;
}

BddStore::NodeId BddStore::variable(unsigned var) { return literal(var, true); }

BddStore::NodeId BddStore::literal(unsigned var, bool value) {
    if (var >= numVars_) throw Error("BDD variable out of range");
    return value ? make(var, kFalse, kTrue) : make(var, kTrue, kFalse);
}

BddStore::NodeId BddStore::negate(NodeId a) { return apply(Op::Not, a, kFalse); }
BddStore::NodeId BddStore::conj(NodeId a, NodeId b) { return apply(Op::And, a, b); }
BddStore::NodeId BddStore::disj(NodeId a, NodeId b) { return apply(Op::Or, a, b); }
BddStore::NodeId BddStore::diff(NodeId a, NodeId b) { return apply(Op::Diff, a, b); }
BddStore::NodeId BddStore::exclusive(NodeId a, NodeId b) { return apply(Op::Xor, a, b); }

BddStore::NodeId BddStore::apply(Op op, NodeId a, NodeId b) {
    switch (op) {
    case Op::And:
        if (a == kFalse || b == kFalse) return kFalse;
        if (a == kTrue) return b;
        if (b == kTrue || a == b) return a;
        if (a > b) std::swap(a, b);
        break;
    case Op::Or:
        if (a == kTrue || b == kTrue) return kTrue;
        if (a == kFalse) return b;
        if (b == kFalse || a == b) return a;
        if (a > b) std::swap(a, b);
        break;
    case Op::Diff:
        if (a == kFalse || b == kTrue || a == b) return kFalse;
        if (b == kFalse) return a;
        if (a == kTrue) return negate(b);
        break;
    case Op::Xor:
        if (a == b) return kFalse;
        if (a == kFalse) return b;
        if (b == kFalse) return a;
        if (a == kTrue) return negate(b);
        if (b == kTrue) return negate(a);
        if (a > b) std::swap(a, b);
        break;
    case Op::Not:
        if (a == kFalse) return kTrue;
        if (a == kTrue) return kFalse;
        break;
    }

    PairKey key{static_cast<std::uint64_t>(op), (static_cast<std::uint64_t>(a) << 32) | b};
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    const Node na = nodes_[a];
    const Node nb = nodes_[b];
    NodeId result;
    if (op == Op::Not) {
        NodeId lo = apply(Op::Not, na.lo, kFalse);
        NodeId hi = apply(Op::Not, na.hi, kFalse);
        result = make(na.var, lo, hi);
    } else {
        unsigned var = std::min(na.var, nb.var);
        NodeId alo = na.var == var ? na.lo : a;
        NodeId ahi = na.var == var ? na.hi : a;
        NodeId blo = nb.var == var ? nb.lo : b;
        NodeId bhi = nb.var == var ? nb.hi : b;
        NodeId lo = apply(op, alo, blo);
        NodeId hi = apply(op, ahi, bhi);
        result = make(var, lo, hi);
    }
    cache_.emplace(key, result);
    return result;
}

bool BddStore::evaluate(NodeId a, std::uint64_t assignment) const {
    while (a > kTrue) {
        const Node& n = nodes_[a];
        a = ((assignment >> bitOf(n.var)) & 1u) ? n.hi : n.lo;
    }
    return a == kTrue;
}

std::size_t BddStore::size(NodeId a) const {
    std::vector<NodeId> stack{a};
    std::unordered_map<NodeId, bool> seen;
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        if (!seen.emplace(n, true).second) continue;
        if (n > kTrue) {
            stack.push_back(nodes_[n].lo);
            stack.push_back(nodes_[n].hi);
        }
    }
    return seen.size();
}

std::optional<std::uint64_t> BddStore::anySat(NodeId a) const {
    if (a == kFalse) return std::nullopt;
    std::uint64_t assignment = 0;
    while (a > kTrue) {
        const Node& n = nodes_[a];
        if (n.lo != kFalse) {
            a = n.lo;
        } else {
            assignment |= std::uint64_t{1} << bitOf(n.var);
            a = n.hi;
        }
    }
    return assignment;
}

std::vector<BddStore::Cube> BddStore::cubes(NodeId a) const {
    std::vector<Cube> out;
    struct Frame {
        NodeId node;
        Cube cube;
    };
    std::vector<Frame> stack{{a, {}}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.node == kFalse) continue;
        if (f.node == kTrue) {
            out.push_back(f.cube);
            continue;
        }
        const Node& n = nodes_[f.node];
        std::uint64_t bit = std::uint64_t{1} << bitOf(n.var);
        Cube hi = f.cube;
        hi.mask |= bit;
        hi.value |= bit;
        Cube lo = f.cube;
        lo.mask |= bit;
        stack.push_back({n.hi, hi});
        stack.push_back({n.lo, lo});
    }
    return out;
}

Predicate Predicate::fromCidr(BddStore& store, Field field, const Cidr& prefix) {
    if (store.numVars() != 64) throw Error("CIDR predicates need a 64-bit header store");
    if (prefix.length < 0 || prefix.length > 32) throw ParseError("prefix length out of range");
    unsigned base = field == Field::Src ? 0u : 32u;
    BddStore::NodeId node = BddStore::kTrue;
    for (int i = prefix.length - 1; i >= 0; --i) {
        bool value = (prefix.addr >> (31 - i)) & 1u;
        node = store.conj(store.literal(base + static_cast<unsigned>(i), value), node);
    }
    return {&store, node};
}

namespace {

// Renders one 32-bit half of a cube, as a CIDR when the fixed bits form a prefix.
std::string describeHalf(const char* name, std::uint32_t mask, std::uint32_t value) {
    if (mask == 0) return {};
    int length = 0;
    while (length < 32 && (mask >> (31 - length)) & 1u) ++length;
    if (mask == prefixMask(length)) return std::string(name) + " " + Cidr{value, length}.str();
    std::string bits;
    for (int i = 31; i >= 0; --i) bits += ((mask >> i) & 1u) ? (((value >> i) & 1u) ? '1' : '0') : '*';
    return std::string(name) + " " + bits;
}

}  // namespace

std::string Predicate::describe() const {
    if (isEmpty()) return "none";
    if (isAll()) return "all";
    auto parts = store_->cubes(id_);
    std::vector<std::string> rendered;
    for (const auto& c : parts) {
        std::string text;
        if (store_->numVars() == 64) {
            auto src = describeHalf("src", static_cast<std::uint32_t>(c.mask >> 32), static_cast<std::uint32_t>(c.value >> 32));
            auto dst = describeHalf("dst", static_cast<std::uint32_t>(c.mask), static_cast<std::uint32_t>(c.value));
            text = src.empty() ? dst : dst.empty() ? src : src + " & " + dst;
        } else {
            for (int i = static_cast<int>(store_->numVars()) - 1; i >= 0; --i)
                text += ((c.mask >> i) & 1u) ? (((c.value >> i) & 1u) ? '1' : '0') : '*';
        }
        rendered.push_back(text.empty() ? "all" : text);
    }
    std::sort(rendered.begin(), rendered.end());
    std::string out;
    for (std::size_t i = 0; i < rendered.size(); ++i) out += (i ? " | " : "") + rendered[i];
    return out;
}

Predicate unionOf(BddStore& store, const std::vector<Predicate>& preds) {
    Predicate acc = Predicate::none(store);
    for (const auto& p : preds) acc |= p;
    return acc;
}

}  // namespace dpv
