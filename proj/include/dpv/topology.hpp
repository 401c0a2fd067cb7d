#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dpv/predicate.hpp"

namespace dpv {

/// Undirected device graph. Virtual devices alias a physical device and
/// share its neighbor set.
class Topology {
public:
    void addDevice(const std::string& name);
    void addLink(const std::string& a, const std::string& b);
    /// Adds `name` as an alias of `physical` with the same neighbors.
    void addVirtual(const std::string& name, const std::string& physical);
    /// Renames a device in place, keeping its links.
    void renameDevice(const std::string& from, const std::string& to);
    /// Replaces `device` by aliases that each inherit its neighbors and map
    /// back to it as their physical device.
    void splitDevice(const std::string& device, const std::vector<std::string>& aliases);

    bool hasDevice(const std::string& name) const { return devices_.count(name) != 0; }
    bool hasLink(const std::string& a, const std::string& b) const;
    const std::set<std::string>& devices() const { return devices_; }
    const std::set<std::string>& neighbors(const std::string& device) const;
    std::vector<std::pair<std::string, std::string>> links() const;

    /// Physical device behind a (possibly virtual) device name.
    const std::string& physical(const std::string& device) const;
    bool isVirtual(const std::string& device) const { return virtualOf_.count(device) != 0; }
    const std::map<std::string, std::string>& virtualOf() const { return virtualOf_; }

private:
    std::set<std::string> devices_;
    std::map<std::string, std::set<std::string>> adjacency_;
    std::map<std::string, std::string> virtualOf_;
};

/// Which destination prefixes each device delivers through an external port.
class PrefixMap {
public:
    void add(const std::string& device, const Cidr& prefix) { prefixes_[device].push_back(prefix); }
    const std::vector<Cidr>& of(const std::string& device) const;
    const std::map<std::string, std::vector<Cidr>>& all() const { return prefixes_; }
    bool delivers(const std::string& device, std::uint32_t dstIp) const;
    /// Destination-field predicate of everything `device` delivers.
    Predicate predicate(BddStore& store, const std::string& device) const;

private:
    std::map<std::string, std::vector<Cidr>> prefixes_;
};

}  // namespace dpv
