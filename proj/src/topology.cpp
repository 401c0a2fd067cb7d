#include "dpv/topology.hpp"

namespace dpv {

void Topology::addDevice(const std::string& name) {
    devices_.insert(name);
    adjacency_[name];
}

void Topology::addLink(const std::string& a, const std::string& b) {
    if (!hasDevice(a)) throw ValidationError(ValidationError::Kind::UnknownDevice, a);
    if (!hasDevice(b)) throw ValidationError(ValidationError::Kind::UnknownDevice, b);
    if (a == b) throw ValidationError(ValidationError::Kind::UnknownLink, "self link on " + a);
    adjacency_[a].insert(b);
    adjacency_[b].insert(a);
}

void Topology::addVirtual(const std::string& name, const std::string& physical) {
    if (!hasDevice(physical)) throw ValidationError(ValidationError::Kind::UnknownDevice, physical);
    const auto& phys = this->physical(physical);
    addDevice(name);
    for (const auto& n : std::set<std::string>(neighbors(physical))) addLink(name, n);
    virtualOf_[name] = phys;
}

void Topology::renameDevice(const std::string& from, const std::string& to) {
    if (!hasDevice(from)) throw ValidationError(ValidationError::Kind::UnknownDevice, from);
    auto nbrs = adjacency_[from];
    for (const auto& n : nbrs) adjacency_[n].erase(from);
    adjacency_.erase(from);
    devices_.erase(from);
    addDevice(to);
    for (const auto& n : nbrs) addLink(to, n);
}

void Topology::splitDevice(const std::string& device, const std::vector<std::string>& aliases) {
    if (!hasDevice(device)) throw ValidationError(ValidationError::Kind::UnknownDevice, device);
    auto nbrs = adjacency_[device];
    std::string phys = physical(device);
    for (const auto& n : nbrs) adjacency_[n].erase(device);
    adjacency_.erase(device);
    devices_.erase(device);
    virtualOf_.erase(device);
    for (const auto& a : aliases) {
        addDevice(a);
        for (const auto& n : nbrs) addLink(a, n);
        virtualOf_[a] = phys;
    }
}

bool Topology::hasLink(const std::string& a, const std::string& b) const {
    auto it = adjacency_.find(a);
    return it != adjacency_.end() && it->second.count(b) != 0;
}

const std::set<std::string>& Topology::neighbors(const std::string& device) const {
    auto it = adjacency_.find(device);
    if (it == adjacency_.end()) throw ValidationError(ValidationError::Kind::UnknownDevice, device);
    return it->second;
}

std::vector<std::pair<std::string, std::string>> Topology::links() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [a, nbrs] : adjacency_)
        for (const auto& b : nbrs)
            if (a < b) out.emplace_back(a, b);
    return out;
}

const std::string& Topology::physical(const std::string& device) const {
    auto it = virtualOf_.find(device);
    return it == virtualOf_.end() ? device : it->second;
}

const std::vector<Cidr>& PrefixMap::of(const std::string& device) const {
    static const std::vector<Cidr> kEmpty;
    auto it = prefixes_.find(device);
    return it == prefixes_.end() ? kEmpty : it->second;
}

bool PrefixMap::delivers(const std::string& device, std::uint32_t dstIp) const {
    for (const auto& c : of(device))
        if (c.contains(dstIp)) return true;
    return false;
}

Predicate PrefixMap::predicate(BddStore& store, const std::string& device) const {
    Predicate p = Predicate::none(store);
    for (const auto& c : of(device)) p |= Predicate::fromCidr(store, Field::Dst, c);
    return p;
}

}  // namespace dpv
