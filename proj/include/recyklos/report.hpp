#ifndef RECYKLOS_REPORT_HPP
#define RECYKLOS_REPORT_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "recyklos/vec.hpp"

namespace recyklos {

enum class Termination { Tolerance, MaxIter, Breakdown };

inline std::string to_string(Termination t) {
    switch (t) {
        case Termination::Tolerance: return "tolerance";
        case Termination::MaxIter: return "maxiter";
        case Termination::Breakdown: return "breakdown";
    }
    return "?";
}

struct SolveReport {
    Vector x;
    std::vector<double> resnorms; // resnorms[0] = ||r_0||, then one per iteration
    std::size_t matvecs = 0;
    std::size_t iterations = 0;
    bool converged = false;
    Termination termination = Termination::MaxIter;
    double ls_condition = 0.0; // condition estimate of the final small LS, where tracked
};

} // namespace recyklos

#endif
