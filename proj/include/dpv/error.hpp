#pragma once

#include <stdexcept>
#include <string>

namespace dpv {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = 0, int column = 0)
        : Error(format(what, line, column)), line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    static std::string format(const std::string& what, int line, int column) {
        if (line <= 0) return what;
        return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
    }

    int line_;
    int column_;
};

class ValidationError : public Error {
public:
    enum class Kind { UnknownDevice, PrefixMismatch, UnknownLink, DuplicatePriority, UnknownPriority, Unsupported };

    ValidationError(Kind kind, const std::string& what) : Error(name(kind) + ": " + what), kind_(kind) {}

    Kind kind() const { return kind_; }

    static std::string name(Kind k) {
        switch (k) {
        case Kind::UnknownDevice: return "UnknownDevice";
        case Kind::PrefixMismatch: return "PrefixMismatch";
        case Kind::UnknownLink: return "UnknownLink";
        case Kind::DuplicatePriority: return "DuplicatePriority";
        case Kind::UnknownPriority: return "UnknownPriority";
        case Kind::Unsupported: return "Unsupported";
        }
        return "ValidationError";
    }

private:
    Kind kind_;
};

/// The path expression cannot start at the given ingress.
class IngressUnmatched : public Error {
public:
    explicit IngressUnmatched(const std::string& ingress)
        : Error("IngressUnmatched: path expression cannot start at ingress " + ingress), ingress_(ingress) {}
    const std::string& ingress() const { return ingress_; }

private:
    std::string ingress_;
};

/// A message or state broke a DV protocol invariant.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// The brute-force oracle refuses instances beyond its enumeration bound.
class ScaleRefusal : public Error {
public:
    using Error::Error;
};

/// The simulator exceeded its event budget without reaching quiescence.
class SimulationTrap : public Error {
public:
    using Error::Error;
};

}  // namespace dpv
