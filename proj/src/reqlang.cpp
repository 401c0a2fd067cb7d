#include "dpv/reqlang.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>

namespace dpv {

namespace path {

namespace {
PathPtr make(PathExpr::Kind kind, std::vector<PathPtr> kids = {}) {
    auto p = std::make_shared<PathExpr>();
    p->kind = kind;
    p->kids = std::move(kids);
    return p;
}
}  // namespace

PathPtr sym(const std::string& name) {
    auto p = std::make_shared<PathExpr>();
    p->kind = PathExpr::Kind::Symbol;
    p->name = name;
    return p;
}
PathPtr any() { return make(PathExpr::Kind::Any); }
PathPtr except(std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    auto p = std::make_shared<PathExpr>();
    p->kind = PathExpr::Kind::Except;
    p->excluded = std::move(names);
    return p;
}
PathPtr concat(std::vector<PathPtr> kids) { return kids.size() == 1 ? kids[0] : make(PathExpr::Kind::Concat, std::move(kids)); }
PathPtr alt(std::vector<PathPtr> kids) { return kids.size() == 1 ? kids[0] : make(PathExpr::Kind::Alt, std::move(kids)); }
PathPtr conj(std::vector<PathPtr> kids) { return kids.size() == 1 ? kids[0] : make(PathExpr::Kind::And, std::move(kids)); }
PathPtr neg(PathPtr kid) { return make(PathExpr::Kind::Not, {std::move(kid)}); }
PathPtr star(PathPtr kid) { return make(PathExpr::Kind::Star, {std::move(kid)}); }
PathPtr plus(PathPtr kid) { return make(PathExpr::Kind::Plus, {std::move(kid)}); }
PathPtr optional(PathPtr kid) { return make(PathExpr::Kind::Optional, {std::move(kid)}); }
PathPtr loopFree() { return make(PathExpr::Kind::LoopFree); }

}  // namespace path

bool equalPath(const PathExpr& a, const PathExpr& b) {
    if (a.kind != b.kind || a.name != b.name || a.excluded != b.excluded || a.kids.size() != b.kids.size()) return false;
    for (std::size_t i = 0; i < a.kids.size(); ++i)
        if (!equalPath(*a.kids[i], *b.kids[i])) return false;
    return true;
}

namespace {

// Binding strength used by the printer: larger binds tighter.
int pathLevel(const PathExpr& p) {
    switch (p.kind) {
    case PathExpr::Kind::Alt: return 0;
    case PathExpr::Kind::And: return 1;
    case PathExpr::Kind::Not: return 2;
    case PathExpr::Kind::Concat: return 3;
    case PathExpr::Kind::Star:
    case PathExpr::Kind::Plus:
    case PathExpr::Kind::Optional: return 4;
    default: return 5;
    }
}

std::string printPathAt(const PathExpr& p, int minLevel) {
    std::string out;
    auto kid = [&](const PathPtr& k, int level) { return printPathAt(*k, level); };
    switch (p.kind) {
    case PathExpr::Kind::Symbol: out = p.name; break;
    case PathExpr::Kind::Any: out = "."; break;
    case PathExpr::Kind::LoopFree: out = "loop_free"; break;
    case PathExpr::Kind::Except:
        out = "[^";
        for (const auto& n : p.excluded) out += " " + n;
        out += "]";
        break;
    case PathExpr::Kind::Alt:
        for (std::size_t i = 0; i < p.kids.size(); ++i) out += (i ? " | " : "") + kid(p.kids[i], 1);
        break;
    case PathExpr::Kind::And:
        for (std::size_t i = 0; i < p.kids.size(); ++i) out += (i ? " and " : "") + kid(p.kids[i], 2);
        break;
    case PathExpr::Kind::Not: out = "not " + kid(p.kids[0], 3); break;
    case PathExpr::Kind::Concat:
        for (std::size_t i = 0; i < p.kids.size(); ++i) out += (i ? " " : "") + kid(p.kids[i], 4);
        break;
    case PathExpr::Kind::Star: out = kid(p.kids[0], 5) + "*"; break;
    case PathExpr::Kind::Plus: out = kid(p.kids[0], 5) + "+"; break;
    case PathExpr::Kind::Optional: out = kid(p.kids[0], 5) + "?"; break;
    }
    return pathLevel(p) < minLevel ? "(" + out + ")" : out;
}

}  // namespace

std::string printPath(const PathExpr& p) { return printPathAt(p, 0); }

std::set<std::string> pathDevices(const PathExpr& p) {
    std::set<std::string> out;
    std::function<void(const PathExpr&)> walk = [&](const PathExpr& e) {
        if (e.kind == PathExpr::Kind::Symbol) out.insert(e.name);
        for (const auto& n : e.excluded) out.insert(n);
        for (const auto& k : e.kids) walk(*k);
    };
    walk(p);
    return out;
}

bool containsLoopFree(const PathExpr& p) {
    if (p.kind == PathExpr::Kind::LoopFree) return true;
    return std::any_of(p.kids.begin(), p.kids.end(), [](const PathPtr& k) { return containsLoopFree(*k); });
}

bool equalSpace(const SpaceExpr& a, const SpaceExpr& b) {
    if (a.kind != b.kind || a.kids.size() != b.kids.size()) return false;
    if ((a.kind == SpaceExpr::Kind::SrcIn || a.kind == SpaceExpr::Kind::DstIn) && a.cidr != b.cidr) return false;
    for (std::size_t i = 0; i < a.kids.size(); ++i)
        if (!equalSpace(*a.kids[i], *b.kids[i])) return false;
    return true;
}

namespace {

std::string printSpaceAt(const SpaceExpr& s, int minLevel) {
    int level = 3;
    std::string out;
    switch (s.kind) {
    case SpaceExpr::Kind::True: out = "true"; break;
    case SpaceExpr::Kind::SrcIn: out = "srcIP in " + s.cidr.str(); break;
    case SpaceExpr::Kind::DstIn: out = "dstIP in " + s.cidr.str(); break;
    case SpaceExpr::Kind::Or:
        level = 0;
        for (std::size_t i = 0; i < s.kids.size(); ++i) out += (i ? " or " : "") + printSpaceAt(*s.kids[i], 1);
        break;
    case SpaceExpr::Kind::And:
        level = 1;
        for (std::size_t i = 0; i < s.kids.size(); ++i) out += (i ? " and " : "") + printSpaceAt(*s.kids[i], 2);
        break;
    case SpaceExpr::Kind::Not:
        level = 2;
        out = "not " + printSpaceAt(*s.kids[0], 2);
        break;
    }
    return level < minLevel ? "(" + out + ")" : out;
}

}  // namespace

std::string printSpace(const SpaceExpr& s) { return printSpaceAt(s, 0); }

Predicate spacePredicate(const SpaceExpr& s, BddStore& store) {
    switch (s.kind) {
    case SpaceExpr::Kind::True: return Predicate::all(store);
    case SpaceExpr::Kind::SrcIn: return Predicate::fromCidr(store, Field::Src, s.cidr);
    case SpaceExpr::Kind::DstIn: return Predicate::fromCidr(store, Field::Dst, s.cidr);
    case SpaceExpr::Kind::Not: return ~spacePredicate(*s.kids[0], store);
    case SpaceExpr::Kind::And: {
        Predicate acc = Predicate::all(store);
        for (const auto& k : s.kids) acc &= spacePredicate(*k, store);
        return acc;
    }
    case SpaceExpr::Kind::Or: {
        Predicate acc = Predicate::none(store);
        for (const auto& k : s.kids) acc |= spacePredicate(*k, store);
        return acc;
    }
    }
    return Predicate::none(store);
}

std::string cmpText(Cmp c) {
    switch (c) {
    case Cmp::Eq: return "==";
    case Cmp::Ge: return ">=";
    case Cmp::Gt: return ">";
    case Cmp::Le: return "<=";
    case Cmp::Lt: return "<";
    }
    return "?";
}

bool compare(Cmp c, std::uint64_t value, std::uint64_t n) {
    switch (c) {
    case Cmp::Eq: return value == n;
    case Cmp::Ge: return value >= n;
    case Cmp::Gt: return value > n;
    case Cmp::Le: return value <= n;
    case Cmp::Lt: return value < n;
    }
    return false;
}

namespace behavior {

namespace {
BehaviorPtr make(Behavior::Kind kind, std::vector<BehaviorPtr> kids = {}, PathPtr p = nullptr) {
    auto b = std::make_shared<Behavior>();
    b->kind = kind;
    b->kids = std::move(kids);
    b->path = std::move(p);
    return b;
}
}  // namespace

BehaviorPtr exist(Cmp cmp, std::uint32_t n, PathPtr p) {
    auto b = std::make_shared<Behavior>();
    b->kind = Behavior::Kind::Exist;
    b->cmp = cmp;
    b->n = n;
    b->path = std::move(p);
    return b;
}
BehaviorPtr equal(PathPtr p) { return make(Behavior::Kind::Equal, {}, std::move(p)); }
BehaviorPtr subset(PathPtr p) { return make(Behavior::Kind::Subset, {}, std::move(p)); }
BehaviorPtr loopFree() { return make(Behavior::Kind::LoopFree); }
BehaviorPtr conj(std::vector<BehaviorPtr> kids) { return kids.size() == 1 ? kids[0] : make(Behavior::Kind::And, std::move(kids)); }
BehaviorPtr disj(std::vector<BehaviorPtr> kids) { return kids.size() == 1 ? kids[0] : make(Behavior::Kind::Or, std::move(kids)); }
BehaviorPtr neg(BehaviorPtr kid) { return make(Behavior::Kind::Not, {std::move(kid)}); }

}  // namespace behavior

bool equalBehavior(const Behavior& a, const Behavior& b) {
    if (a.kind != b.kind || a.kids.size() != b.kids.size()) return false;
    if (a.kind == Behavior::Kind::Exist && (a.cmp != b.cmp || a.n != b.n)) return false;
    if (static_cast<bool>(a.path) != static_cast<bool>(b.path)) return false;
    if (a.path && !equalPath(*a.path, *b.path)) return false;
    for (std::size_t i = 0; i < a.kids.size(); ++i)
        if (!equalBehavior(*a.kids[i], *b.kids[i])) return false;
    return true;
}

namespace {

std::string printBehaviorAt(const Behavior& b, int minLevel) {
    int level = 3;
    std::string out;
    switch (b.kind) {
    case Behavior::Kind::Exist:
        out = "(exist " + cmpText(b.cmp) + " " + std::to_string(b.n) + ", " + printPath(*b.path) + ")";
        break;
    case Behavior::Kind::Equal: out = "(equal, " + printPath(*b.path) + ")"; break;
    case Behavior::Kind::Subset: out = "(subset, " + printPath(*b.path) + ")"; break;
    case Behavior::Kind::LoopFree: out = "loop_free"; break;
    case Behavior::Kind::Or:
        level = 0;
        for (std::size_t i = 0; i < b.kids.size(); ++i) out += (i ? " or " : "") + printBehaviorAt(*b.kids[i], 1);
        break;
    case Behavior::Kind::And:
        level = 1;
        for (std::size_t i = 0; i < b.kids.size(); ++i) out += (i ? " and " : "") + printBehaviorAt(*b.kids[i], 2);
        break;
    case Behavior::Kind::Not:
        level = 2;
        out = "not " + printBehaviorAt(*b.kids[0], 2);
        break;
    }
    return level < minLevel ? "(" + out + ")" : out;
}

void collectLeaves(const Behavior& b, std::vector<const Behavior*>& out) {
    if (b.kind == Behavior::Kind::Exist || b.kind == Behavior::Kind::Equal) {
        out.push_back(&b);
        return;
    }
    if (b.kind == Behavior::Kind::Subset || b.kind == Behavior::Kind::LoopFree)
        throw Error("behavior leaves requested before desugaring");
    for (const auto& k : b.kids) collectLeaves(*k, out);
}

bool evalAt(const Behavior& b, const std::vector<std::uint64_t>& values, std::size_t& next) {
    switch (b.kind) {
    case Behavior::Kind::Exist: return compare(b.cmp, values.at(next++), b.n);
    case Behavior::Kind::Equal: ++next; return true;
    case Behavior::Kind::Not: return !evalAt(*b.kids[0], values, next);
    case Behavior::Kind::And: {
        bool acc = true;
        for (const auto& k : b.kids) acc = evalAt(*k, values, next) && acc;
        return acc;
    }
    case Behavior::Kind::Or: {
        bool acc = false;
        for (const auto& k : b.kids) acc = evalAt(*k, values, next) || acc;
        return acc;
    }
    default: throw Error("behavior evaluated before desugaring");
    }
}

}  // namespace

std::string printBehavior(const Behavior& b) { return printBehaviorAt(b, 0); }

std::vector<const Behavior*> behaviorLeaves(const Behavior& b) {
    std::vector<const Behavior*> out;
    collectLeaves(b, out);
    return out;
}

bool evaluateBehavior(const Behavior& b, const std::vector<std::uint64_t>& leafValues) {
    std::size_t next = 0;
    return evalAt(b, leafValues, next);
}

bool equalRequirement(const Requirement& a, const Requirement& b) {
    return a.ingress == b.ingress && equalSpace(*a.space, *b.space) && equalBehavior(*a.behavior, *b.behavior);
}

std::string printRequirement(const Requirement& r) {
    std::string ingress;
    for (std::size_t i = 0; i < r.ingress.size(); ++i) ingress += (i ? ", " : "") + r.ingress[i];
    return "(" + printSpace(*r.space) + ", [" + ingress + "], " + printBehavior(*r.behavior) + ")";
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Token {
    enum class Kind { Ident, Number, Address, Punct, End };
    Kind kind = Kind::End;
    std::string text;
    int line = 1;
    int column = 1;
};

bool identStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool identChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '^' || c == '-'; }

std::vector<Token> lex(const std::string& text) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.column = col;
        std::size_t start = i;
        if (identStart(c)) {
            std::size_t j = i;
            while (j < text.size() && identChar(text[j])) ++j;
            t.kind = Token::Kind::Ident;
            t.text = text.substr(start, j - start);
            advance(j - start);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            bool address = false;
            while (j < text.size() &&
                   (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.' || text[j] == '/')) {
                address |= text[j] != '/' && !std::isdigit(static_cast<unsigned char>(text[j]));
                ++j;
            }
            t.kind = address ? Token::Kind::Address : Token::Kind::Number;
            t.text = text.substr(start, j - start);
            advance(j - start);
        } else {
            static const char* twoChar[] = {"==", ">=", "<="};
            t.kind = Token::Kind::Punct;
            t.text = std::string(1, c);
            for (const char* op : twoChar)
                if (text.compare(i, 2, op) == 0) t.text = op;
            if (std::string("()[],|*+?.^=<>").find(c) == std::string::npos)
                throw ParseError(std::string("unexpected character '") + c + "'", line, col);
            advance(t.text.size());
        }
        out.push_back(t);
    }
    Token end;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

const std::set<std::string> kKeywords{"true", "srcIP", "dstIP", "in", "and", "or", "not", "exist",
                                      "exists", "equal", "subset", "loop_free"};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    std::vector<Requirement> requirements() {
        std::vector<Requirement> out;
        while (peek().kind != Token::Kind::End) out.push_back(requirement());
        return out;
    }

    PathPtr pathOnly() {
        auto p = pathAlt();
        if (peek().kind != Token::Kind::End) fail("unexpected '" + peek().text + "' after path expression");
        return p;
    }

private:
    const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    Token take() {
        Token t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().line, peek().column); }
    bool isPunct(const std::string& p, std::size_t k = 0) const {
        return peek(k).kind == Token::Kind::Punct && peek(k).text == p;
    }
    bool isWord(const std::string& w, std::size_t k = 0) const {
        return peek(k).kind == Token::Kind::Ident && peek(k).text == w;
    }
    void expectPunct(const std::string& p) {
        if (!isPunct(p)) fail("expected '" + p + "'" + found());
        take();
    }
    std::string found() const {
        return peek().kind == Token::Kind::End ? ", found end of input" : ", found '" + peek().text + "'";
    }
    std::string deviceName() {
        if (peek().kind != Token::Kind::Ident || kKeywords.count(peek().text)) fail("expected device name" + found());
        return take().text;
    }

    Requirement requirement() {
        Requirement r;
        r.line = peek().line;
        expectPunct("(");
        r.space = spaceOr();
        expectPunct(",");
        expectPunct("[");
        while (!isPunct("]")) {
            r.ingress.push_back(deviceName());
            if (isPunct(",")) take();
            else if (!isPunct("]")) fail("expected ',' or ']'" + found());
        }
        take();
        if (r.ingress.empty()) fail("ingress set must not be empty");
        expectPunct(",");
        r.behavior = behaviorOr();
        expectPunct(")");
        return r;
    }

    // packet space
    SpacePtr spaceNode(SpaceExpr::Kind kind, std::vector<SpacePtr> kids) {
        if (kids.size() == 1 && kind != SpaceExpr::Kind::Not) return kids[0];
        auto s = std::make_shared<SpaceExpr>();
        s->kind = kind;
        s->kids = std::move(kids);
        return s;
    }
    SpacePtr spaceOr() {
        std::vector<SpacePtr> kids{spaceAnd()};
        while (isWord("or")) {
            take();
            kids.push_back(spaceAnd());
        }
        return spaceNode(SpaceExpr::Kind::Or, std::move(kids));
    }
    SpacePtr spaceAnd() {
        std::vector<SpacePtr> kids{spaceNot()};
        while (isWord("and")) {
            take();
            kids.push_back(spaceNot());
        }
        return spaceNode(SpaceExpr::Kind::And, std::move(kids));
    }
    SpacePtr spaceNot() {
        if (isWord("not")) {
            take();
            return spaceNode(SpaceExpr::Kind::Not, {spaceNot()});
        }
        return spaceAtom();
    }
    SpacePtr spaceAtom() {
        if (isPunct("(")) {
            take();
            auto s = spaceOr();
            expectPunct(")");
            return s;
        }
        auto s = std::make_shared<SpaceExpr>();
        if (isWord("true")) {
            take();
            return s;
        }
        if (!isWord("srcIP") && !isWord("dstIP")) fail("expected packet space atom" + found());
        s->kind = take().text == "srcIP" ? SpaceExpr::Kind::SrcIn : SpaceExpr::Kind::DstIn;
        if (isWord("in") || isPunct("=") || isPunct("==")) take();
        else fail("expected 'in' or '='" + found());
        if (peek().kind != Token::Kind::Address) fail("expected IPv4 prefix" + found());
        Token addr = take();
        try {
            s->cidr = addr.text.find('/') == std::string::npos ? Cidr{parseIpv4(addr.text), 32} : parseCidr(addr.text);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), addr.line, addr.column);
        }
        return s;
    }

    // behavior
    BehaviorPtr behaviorOr() {
        std::vector<BehaviorPtr> kids{behaviorAnd()};
        while (isWord("or")) {
            take();
            kids.push_back(behaviorAnd());
        }
        return behavior::disj(std::move(kids));
    }
    BehaviorPtr behaviorAnd() {
        std::vector<BehaviorPtr> kids{behaviorNot()};
        while (isWord("and")) {
            take();
            kids.push_back(behaviorNot());
        }
        return behavior::conj(std::move(kids));
    }
    BehaviorPtr behaviorNot() {
        if (isWord("not")) {
            take();
            return behavior::neg(behaviorNot());
        }
        return behaviorAtom();
    }
    BehaviorPtr behaviorAtom() {
        if (isWord("loop_free")) {
            take();
            return behavior::loopFree();
        }
        if (!isPunct("(")) fail("expected behavior" + found());
        if (isWord("exist", 1) || isWord("exists", 1)) {
            take();
            take();
            if (peek().kind != Token::Kind::Punct) fail("expected comparator" + found());
            Cmp cmp;
            std::string op = take().text;
            if (op == "==") cmp = Cmp::Eq;
            else if (op == ">=") cmp = Cmp::Ge;
            else if (op == ">") cmp = Cmp::Gt;
            else if (op == "<=") cmp = Cmp::Le;
            else if (op == "<") cmp = Cmp::Lt;
            else fail("unknown comparator '" + op + "'");
            if (peek().kind != Token::Kind::Number) fail("expected count" + found());
            Token num = take();
            std::uint32_t n = 0;
            auto [ptr, ec] = std::from_chars(num.text.data(), num.text.data() + num.text.size(), n);
            if (ec != std::errc{} || ptr != num.text.data() + num.text.size())
                throw ParseError("count out of range", num.line, num.column);
            expectPunct(",");
            auto p = pathAlt();
            expectPunct(")");
            return behavior::exist(cmp, n, p);
        }
        if (isWord("equal", 1) || isWord("subset", 1)) {
            take();
            bool eq = take().text == "equal";
            expectPunct(",");
            auto p = pathAlt();
            expectPunct(")");
            return eq ? behavior::equal(p) : behavior::subset(p);
        }
        if (peek(1).kind == Token::Kind::Ident && !kKeywords.count(peek(1).text))
            fail("unknown keyword '" + peek(1).text + "'");
        take();
        auto b = behaviorOr();
        expectPunct(")");
        return b;
    }

    // path expressions
    PathPtr pathAlt() {
        std::vector<PathPtr> kids{pathAnd()};
        while (isPunct("|") || isWord("or")) {
            take();
            kids.push_back(pathAnd());
        }
        return path::alt(std::move(kids));
    }
    PathPtr pathAnd() {
        std::vector<PathPtr> kids{pathNot()};
        while (isWord("and")) {
            take();
            kids.push_back(pathNot());
        }
        return path::conj(std::move(kids));
    }
    PathPtr pathNot() {
        if (isWord("not")) {
            take();
            return path::neg(pathNot());
        }
        return pathSeq();
    }
    bool atAtom() const {
        if (isPunct("(") || isPunct(".") || isPunct("[")) return true;
        return peek().kind == Token::Kind::Ident && (!kKeywords.count(peek().text) || peek().text == "loop_free");
    }
    PathPtr pathSeq() {
        if (!atAtom()) fail("expected path expression" + found());
        std::vector<PathPtr> kids;
        while (atAtom()) kids.push_back(pathPostfix());
        return path::concat(std::move(kids));
    }
    PathPtr pathPostfix() {
        auto p = pathAtom();
        while (true) {
            if (isPunct("*")) p = path::star(p);
            else if (isPunct("+")) p = path::plus(p);
            else if (isPunct("?")) p = path::optional(p);
            else break;
            take();
        }
        return p;
    }
    PathPtr pathAtom() {
        if (isPunct(".")) {
            take();
            return path::any();
        }
        if (isPunct("(")) {
            take();
            auto p = pathAlt();
            expectPunct(")");
            return p;
        }
        if (isPunct("[")) {
            take();
            expectPunct("^");
            std::vector<std::string> names;
            while (!isPunct("]")) {
                names.push_back(deviceName());
                if (isPunct(",")) take();
            }
            take();
            return path::except(std::move(names));
        }
        if (isWord("loop_free")) {
            take();
            return path::loopFree();
        }
        return path::sym(deviceName());
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<Requirement> parseRequirements(const std::string& text) { return Parser(lex(text)).requirements(); }

PathPtr parsePath(const std::string& text) { return Parser(lex(text)).pathOnly(); }

// ---------------------------------------------------------------------------
// Desugaring

PathPtr loopFreeRegex(const std::set<std::string>& devices) {
    std::vector<PathPtr> perDevice;
    for (const auto& d : devices) {
        auto others = path::star(path::except({d}));
        perDevice.push_back(path::alt({others, path::concat({others, path::sym(d), others})}));
    }
    if (perDevice.empty()) return path::star(path::any());
    return path::conj(std::move(perDevice));
}

namespace {

PathPtr desugarPath(const PathPtr& p, const std::set<std::string>& devices, bool keepAtoms) {
    if (p->kind == PathExpr::Kind::LoopFree) return keepAtoms ? p : loopFreeRegex(devices);
    if (p->kids.empty()) return p;
    auto copy = std::make_shared<PathExpr>(*p);
    for (auto& k : copy->kids) k = desugarPath(k, devices, keepAtoms);
    return copy;
}

BehaviorPtr desugarBehavior(const BehaviorPtr& b, const std::set<std::string>& devices, bool keepAtoms) {
    auto lf = [&]() { return keepAtoms ? path::loopFree() : loopFreeRegex(devices); };
    switch (b->kind) {
    case Behavior::Kind::Exist: return behavior::exist(b->cmp, b->n, desugarPath(b->path, devices, keepAtoms));
    case Behavior::Kind::Equal: return behavior::equal(desugarPath(b->path, devices, keepAtoms));
    case Behavior::Kind::Subset: {
        auto p = desugarPath(b->path, devices, keepAtoms);
        return behavior::conj({behavior::exist(Cmp::Ge, 1, p),
                               behavior::exist(Cmp::Eq, 0, path::conj({path::star(path::any()), path::neg(p)}))});
    }
    case Behavior::Kind::LoopFree:
        return behavior::exist(Cmp::Eq, 0, path::conj({path::star(path::any()), path::neg(lf())}));
    case Behavior::Kind::Not: return behavior::neg(desugarBehavior(b->kids[0], devices, keepAtoms));
    case Behavior::Kind::And:
    case Behavior::Kind::Or: {
        std::vector<BehaviorPtr> kids;
        for (const auto& k : b->kids) kids.push_back(desugarBehavior(k, devices, keepAtoms));
        return b->kind == Behavior::Kind::And ? behavior::conj(kids) : behavior::disj(kids);
    }
    }
    return b;
}

}  // namespace

Requirement desugar(const Requirement& req, const std::set<std::string>& devices, bool keepLoopFreeAtoms) {
    Requirement out = req;
    out.behavior = desugarBehavior(req.behavior, devices, keepLoopFreeAtoms);
    return out;
}

// ---------------------------------------------------------------------------
// Templates

std::vector<Requirement> renderTemplates(TemplateKind kind, const Fabric& fabric) {
    std::vector<Requirement> out;
    auto hostSpace = [](const Cidr& src, const Cidr& dst) {
        auto s = std::make_shared<SpaceExpr>();
        s->kind = SpaceExpr::Kind::SrcIn;
        s->cidr = src;
        auto d = std::make_shared<SpaceExpr>();
        d->kind = SpaceExpr::Kind::DstIn;
        d->cidr = dst;
        auto both = std::make_shared<SpaceExpr>();
        both->kind = SpaceExpr::Kind::And;
        both->kids = {s, d};
        return SpacePtr(both);
    };
    auto pattern = [](const std::string& s, const std::string& d, int wildcards) {
        std::vector<PathPtr> seq{path::sym(s)};
        for (int i = 0; i < wildcards; ++i) seq.push_back(path::any());
        seq.push_back(path::sym(d));
        return path::concat(seq);
    };

    switch (kind) {
    case TemplateKind::TorToTorShortest:
    case TemplateKind::TorToTorEcmp:
    case TemplateKind::FailureEcmp:
        for (const auto& s : fabric.tors)
            for (const auto& d : fabric.tors) {
                if (s.name == d.name) continue;
                bool samePod = s.pod == d.pod;
                if (kind == TemplateKind::FailureEcmp && samePod) continue;
                PathPtr p = pattern(s.name, d.name, samePod || kind == TemplateKind::FailureEcmp ? 1 : 3);
                Requirement r;
                r.space = hostSpace(s.prefix, d.prefix);
                r.ingress = {s.name};
                r.behavior = kind == TemplateKind::TorToTorShortest ? behavior::exist(Cmp::Ge, 1, p) : behavior::equal(p);
                out.push_back(r);
            }
        break;
    case TemplateKind::TorToPr:
        if (fabric.prs.empty()) break;
        for (const auto& s : fabric.tors) {
            std::vector<BehaviorPtr> options;
            for (const auto& pr : fabric.prs) options.push_back(behavior::exist(Cmp::Ge, 1, pattern(s.name, pr, 3)));
            Requirement r;
            r.space = hostSpace(s.prefix, fabric.external);
            r.ingress = {s.name};
            r.behavior = behavior::disj(options);
            out.push_back(r);
        }
        break;
    case TemplateKind::PrToTor:
        for (const auto& pr : fabric.prs)
            for (const auto& d : fabric.tors) {
                Requirement r;
                r.space = hostSpace(fabric.external, d.prefix);
                r.ingress = {pr};
                r.behavior = behavior::exist(Cmp::Ge, 1, pattern(pr, d.name, 3));
                out.push_back(r);
            }
        break;
    }
    return out;
}

}  // namespace dpv
