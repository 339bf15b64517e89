#pragma once

#include <string>
#include <vector>

namespace suite {

struct SuiteFormula {
    const char* text;
    int q;
    /// Expected a_0..a_{q-1} as "r/s" strings.
    std::vector<std::string> profile;
};

/// Depth <= 2 sentences for the soundness and convergence gates. The first
/// four are the worked sentences.
inline const std::vector<SuiteFormula>& formulas()
{
    static const std::vector<SuiteFormula> list{
        {"exists x. x = x", 2, {"1/1", "1/1"}},
        {"parity x. x = x", 2, {"0/1", "1/1"}},
        {"parity x. parity y. E(x,y)", 2, {"0/1", "0/1"}},
        {"forall x. parity y. E(x,y)", 2, {"0/1", "0/1"}},
        {"exists x. parity y. E(x,y)", 2, {"1/1", "1/1"}},
        {"mod[3,0] x. mod[3,0] y. E(x,y)", 3, {"1/3", "1/3", "1/3"}},
        {"mod[3,1] x. mod[3,2] y. (E(x,y) | x = y)", 3, {"1/3", "1/3", "1/3"}},
        {"(mod[3,0] x. x = x | mod[3,1] x. mod[3,0] y. E(x,y))", 3, {"1/1", "1/3", "1/3"}},
    };
    return list;
}

} // namespace suite
