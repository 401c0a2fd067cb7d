#include "dpv/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace dpv {

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void writeFile(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

std::vector<std::string> tokenizeLine(const std::string& line) {
    std::string body = line.substr(0, line.find('#'));
    std::istringstream is(body);
    std::vector<std::string> out;
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
}

namespace {

template <typename Fn>
void forEachLine(const std::string& text, Fn&& fn) {
    std::istringstream is(text);
    std::string line;
    int number = 0;
    while (std::getline(is, line)) {
        ++number;
        auto tokens = tokenizeLine(line);
        if (!tokens.empty()) fn(tokens, number);
    }
}

std::int64_t parseInt(const std::string& s, int line, const char* what) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(std::string("expected integer ") + what + ", got '" + s + "'", line, 1);
    return v;
}

void expectArity(const std::vector<std::string>& t, std::size_t n, int line) {
    if (t.size() != n)
        throw ParseError("'" + t[0] + "' expects " + std::to_string(n - 1) + " arguments", line, 1);
}

Cidr cidrAt(const std::string& s, int line) {
    try {
        return parseCidr(s);
    } catch (const ParseError& e) {
        throw ParseError(e.what(), line, 1);
    }
}

}  // namespace

Topology parseTopology(const std::string& text) {
    Topology topo;
    std::vector<std::pair<std::string, std::string>> links;
    forEachLine(text, [&](const std::vector<std::string>& t, int line) {
        if (t[0] == "node") {
            expectArity(t, 2, line);
            topo.addDevice(t[1]);
        } else if (t[0] == "link") {
            expectArity(t, 3, line);
            links.emplace_back(t[1], t[2]);
        } else {
            throw ParseError("unknown directive '" + t[0] + "'", line, 1);
        }
    });
    for (const auto& [a, b] : links) topo.addLink(a, b);
    return topo;
}

std::string formatTopology(const Topology& topo) {
    std::string out;
    for (const auto& d : topo.devices()) out += "node " + d + "\n";
    for (const auto& [a, b] : topo.links()) out += "link " + a + " " + b + "\n";
    return out;
}

PrefixMap parsePrefixes(const std::string& text) {
    PrefixMap map;
    forEachLine(text, [&](const std::vector<std::string>& t, int line) {
        if (t[0] != "prefix") throw ParseError("unknown directive '" + t[0] + "'", line, 1);
        expectArity(t, 3, line);
        map.add(t[1], cidrAt(t[2], line));
    });
    return map;
}

std::string formatPrefixes(const PrefixMap& prefixes) {
    std::string out;
    for (const auto& [dev, list] : prefixes.all())
        for (const auto& c : list) out += "prefix " + dev + " " + c.str() + "\n";
    return out;
}

FibRule parseRuleTokens(const std::vector<std::string>& t, BddStore& store, int line) {
    if (t.size() != 5) throw ParseError("rule expects <prio> <src|-> <dst|-> <ALL|ANY> <hops|->", line, 1);
    FibRule rule;
    rule.priority = static_cast<int>(parseInt(t[0], line, "priority"));
    rule.match = Predicate::all(store);
    if (t[1] != "-") rule.match &= Predicate::fromCidr(store, Field::Src, cidrAt(t[1], line));
    if (t[2] != "-") rule.match &= Predicate::fromCidr(store, Field::Dst, cidrAt(t[2], line));
    GroupKind kind;
    if (t[3] == "ALL") kind = GroupKind::All;
    else if (t[3] == "ANY") kind = GroupKind::Any;
    else throw ParseError("expected ALL or ANY, got '" + t[3] + "'", line, 1);
    std::vector<std::string> hops;
    if (t[4] != "-") {
        std::string cur;
        std::istringstream is(t[4]);
        while (std::getline(is, cur, ',')) {
            if (cur.empty()) throw ParseError("empty hop in '" + t[4] + "'", line, 1);
            hops.push_back(cur);
        }
    }
    try {
        rule.action = ActionGroup(kind, hops);
    } catch (const ParseError& e) {
        throw ParseError(e.what(), line, 1);
    }
    return rule;
}

FibSet parseFibs(const std::string& text, BddStore& store) {
    FibSet fibs;
    std::string current;
    forEachLine(text, [&](const std::vector<std::string>& t, int line) {
        if (t[0] == "device") {
            expectArity(t, 2, line);
            current = t[1];
            fibs[current];
        } else if (t[0] == "rule") {
            if (current.empty()) throw ParseError("rule outside a device section", line, 1);
            fibs[current].push_back(parseRuleTokens({t.begin() + 1, t.end()}, store, line));
        } else {
            throw ParseError("unknown directive '" + t[0] + "'", line, 1);
        }
    });
    return fibs;
}

std::string formatRule(const RuleSpec& r) {
    std::string hops = "-";
    if (!r.action.isDrop()) {
        hops.clear();
        for (std::size_t i = 0; i < r.action.hops().size(); ++i) hops += (i ? "," : "") + r.action.hops()[i];
    }
    return "rule " + std::to_string(r.priority) + " " + r.src + " " + r.dst + " " +
           (r.action.kind() == GroupKind::All ? "ALL" : "ANY") + " " + hops;
}

std::string formatFibs(const std::map<std::string, std::vector<RuleSpec>>& fibs) {
    std::string out;
    for (const auto& [dev, rules] : fibs) {
        out += "device " + dev + "\n";
        for (const auto& r : rules) out += formatRule(r) + "\n";
    }
    return out;
}

void installFibs(DataPlane& dp, const Topology& topo, const FibSet& fibs) {
    dp.ensureDevices(topo);
    for (const auto& [dev, rules] : fibs) {
        if (!topo.hasDevice(dev)) throw ValidationError(ValidationError::Kind::UnknownDevice, dev);
        for (const auto& r : rules) dp.device(dev).install(r);
    }
    dp.validate(topo);
}

LatencyMap parseLatency(const std::string& text) {
    LatencyMap map;
    forEachLine(text, [&](const std::vector<std::string>& t, int line) {
        if (t[0] != "latency") throw ParseError("unknown directive '" + t[0] + "'", line, 1);
        expectArity(t, 4, line);
        auto us = parseInt(t[3], line, "latency");
        if (us < 0) throw ParseError("negative latency", line, 1);
        map[{std::min(t[1], t[2]), std::max(t[1], t[2])}] = us;
    });
    return map;
}

std::vector<ScriptEvent> parseEvents(const std::string& text, BddStore& store) {
    std::vector<ScriptEvent> events;
    forEachLine(text, [&](const std::vector<std::string>& t, int line) {
        if (t[0] != "at" || t.size() < 3) throw ParseError("expected 'at <us> ...'", line, 1);
        ScriptEvent ev;
        ev.at = parseInt(t[1], line, "time");
        if (ev.at < 0) throw ParseError("negative event time", line, 1);
        if (t[2] == "update") {
            if (t.size() < 5) throw ParseError("update expects <device> rule|delete ...", line, 1);
            ev.device = t[3];
            if (t[4] == "rule") {
                ev.kind = ScriptEvent::Kind::Rule;
                ev.rule = parseRuleTokens({t.begin() + 5, t.end()}, store, line);
            } else if (t[4] == "delete") {
                if (t.size() != 6) throw ParseError("delete expects a priority", line, 1);
                ev.kind = ScriptEvent::Kind::DeleteRule;
                ev.rule.priority = static_cast<int>(parseInt(t[5], line, "priority"));
            } else {
                throw ParseError("unknown update directive '" + t[4] + "'", line, 1);
            }
        } else if (t[2] == "link") {
            if (t.size() != 6 || (t[5] != "up" && t[5] != "down"))
                throw ParseError("link expects <A> <B> up|down", line, 1);
            ev.kind = ScriptEvent::Kind::Link;
            ev.device = t[3];
            ev.peer = t[4];
            ev.up = t[5] == "up";
        } else {
            throw ParseError("unknown event '" + t[2] + "'", line, 1);
        }
        events.push_back(ev);
    });
    std::stable_sort(events.begin(), events.end(),
                     [](const ScriptEvent& a, const ScriptEvent& b) { return a.at < b.at; });
    return events;
}

}  // namespace dpv
