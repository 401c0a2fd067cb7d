#pragma once

#include <string>

// Small worked networks shared by the unit and acceptance tests.
namespace fixtures {

struct Text {
    const char* topology;
    const char* prefixes;
    const char* fibs;
    const char* requirements;
};

// Waypoint example: S must reach D through W on a simple path.
inline constexpr Text workflow{
    R"(node S
node A
node B
node C
node W
node D
link S A
link A B
link A W
link B C
link B W
link C W
link C D
link W D
)",
    "prefix D 10.0.0.0/23\n",
    R"(device S
rule 10 - 10.0.0.0/23 ALL A
device A
rule 20 - 10.0.0.0/24 ANY B,W
rule 10 - 10.0.1.0/24 ALL W
device B
rule 10 - 10.0.0.0/23 ALL C
device C
rule 10 - 10.0.0.0/23 ALL D
device W
rule 10 - 10.0.0.0/23 ALL C
device D
)",
    "(dstIP in 10.0.0.0/23, [S], (exist >= 1, S .* W .* D and loop_free))\n"};

// B redirects P1 to W instead of C.
inline constexpr const char* workflowUpdate = "at 100 update B rule 10 - 10.0.0.0/23 ALL W\n";

inline constexpr const char* modelTopology = R"(node S
node A
node B
node C
node D
link S A
link A B
link A C
link B C
link B D
)";

// A copies to B and C; B forwards to D.
inline constexpr const char* modelCase1 = R"(device S
rule 1 - - ALL A
device A
rule 1 - - ALL B,C
device B
rule 1 - - ALL D
)";

// As above, but B picks one of C and D.
inline constexpr const char* modelCase2 = R"(device S
rule 1 - - ALL A
device A
rule 1 - - ALL B,C
device B
rule 1 - - ANY C,D
)";

// Anycast: S must reach exactly one of D and E.
inline constexpr Text anycast{
    R"(node S
node D
node E
link S D
link S E
)",
    "prefix D 10.9.0.0/16\nprefix E 10.9.0.0/16\n",
    R"(device S
rule 1 - 10.9.0.0/16 ANY D,E
)",
    "(dstIP in 10.9.0.0/16, [S], ((exist >= 1, S .* D) and (exist == 0, S .* E)) or "
    "((exist == 0, S .* D) and (exist >= 1, S .* E)))\n"};

// Two copies to D on simple paths, or one through W.
inline constexpr Text sameDest{
    R"(node S
node A
node B
node C
node W
node D
link S A
link S W
link A B
link A C
link B D
link C D
link W D
)",
    "prefix D 10.7.0.0/16\n",
    R"(device S
rule 1 - 10.7.0.0/16 ANY A,W
device A
rule 1 - 10.7.0.0/16 ALL B,C
device B
rule 1 - 10.7.0.0/16 ALL D
device C
rule 1 - 10.7.0.0/16 ALL D
device W
rule 1 - 10.7.0.0/16 ALL D
)",
    "(dstIP in 10.7.0.0/16, [S], (exist >= 2, S .* D and loop_free) or "
    "(exist >= 1, S .* W .* D and loop_free))\n"};

}  // namespace fixtures
