#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <queue>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "dpv/dvproto.hpp"
#include "dpv/io.hpp"

namespace dpv {

struct SimOptions {
    bool dampening = false;
    std::int64_t defaultLatency = 10;  // microseconds
    std::int64_t processingCost = 0;   // added to every delivery
    /// Randomizes link latencies and per-message jitter when set.
    bool perturb = false;
    std::uint64_t seed = 0;
    bool zeroLatency = false;
    /// With dampening, how long a device waits before announcing.
    std::int64_t dampingWindow = 0;
    std::size_t eventBudget = 20'000'000;
    bool checkInvariants = false;
};

struct RunStats {
    int eventId = 0;
    std::int64_t convergenceUs = 0;
    std::size_t messages = 0;
    std::size_t bytes = 0;
    std::size_t devicesChanged = 0;
};

std::string statsCsvHeader();
std::string statsCsvRow(const RunStats& s);

/// Verdicts of one plan, in the form the counting module reports them.
struct PlanVerdicts {
    const Plan* plan;
    std::vector<CellVerdict> cells;
};

/// Discrete-event network of verifiers joined by latency-weighted FIFO links.
class Simulation {
public:
    Simulation(const Topology& topo, DataPlane& dp, const PrefixMap& prefixes, std::vector<Plan> plans,
               LatencyMap latency = {}, SimOptions options = {});
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Starts every verifier at t=0 and runs to quiescence.
    RunStats runBurst();
    /// Applies one scripted event after the previous quiescence.
    RunStats apply(const ScriptEvent& event);
    std::vector<RunStats> runIncremental(const std::vector<ScriptEvent>& events);
    /// Queues all events at their script times and runs once to quiescence.
    RunStats applyBatch(const std::vector<ScriptEvent>& events);

    std::int64_t now() const { return now_; }
    const std::vector<Plan>& plans() const { return plans_; }
    std::map<std::string, CellList> sourceResults(int plan) const;
    std::vector<PlanVerdicts> verdicts(bool includeExtra = true) const;
    std::vector<EqualViolation> violations(int plan) const;
    /// Canonical text of every node's announced results, LocCIB entries and
    /// equal violations. Independent of BDD node numbering.
    std::string stateDigest() const;
    std::uint64_t traceHash() const { return traceHash_; }
    std::size_t totalMessages() const { return totalMessages_; }
    const Verifier& verifier(const std::string& device) const { return verifiers_.at(device); }

private:
    struct Event {
        std::int64_t time;
        std::uint64_t seq;
        enum class Kind { Deliver, Flush, Start, Internal } kind;
        std::string device;
        UpdateMessage msg;
        ScriptEvent script;
        bool operator>(const Event& o) const { return std::tie(time, seq) > std::tie(o.time, o.seq); }
    };

    void push(Event e);
    void send(std::vector<UpdateMessage> msgs, const std::string& from);
    void afterHandling(const std::string& device);
    RunStats runToQuiescence(int eventId, std::int64_t start);
    std::int64_t linkLatency(const std::string& a, const std::string& b);
    void record(const std::string& line);
    void internal(const ScriptEvent& event);

    const Topology* topo_;
    DataPlane* dp_;
    const PrefixMap* prefixes_;
    std::vector<Plan> plans_;
    LatencyMap latency_;
    SimOptions opt_;
    std::mt19937_64 rng_;
    std::map<std::string, Verifier> verifiers_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::map<std::pair<std::string, std::string>, std::int64_t> lastArrival_;
    std::map<std::pair<std::string, std::string>, std::int64_t> perturbed_;
    std::map<std::string, std::size_t> pendingFor_;
    std::map<std::string, bool> flushScheduled_;
    std::uint64_t seq_ = 0;
    std::int64_t now_ = 0;
    std::size_t runMessages_ = 0, runBytes_ = 0, totalMessages_ = 0;
    std::uint64_t traceHash_ = 1469598103934665603ULL;
    int nextEventId_ = 0;
};

/// Applies a scripted event to the data plane; LEC deltas per affected device.
std::vector<std::pair<std::string, std::vector<LecDelta>>> applyScriptEvent(const Topology& topo, DataPlane& dp,
                                                                           const ScriptEvent& event);

/// Time for every device's data plane to reach the best-placed collector
/// over shortest latency paths; the collector then counts centrally.
struct CentralizedBaseline {
    std::string collector;
    std::int64_t collectUs = 0;
};
CentralizedBaseline centralizedBaseline(const Topology& topo, const LatencyMap& latency,
                                        std::int64_t defaultLatency = 10);

}  // namespace dpv
