#ifndef RECYKLOS_RECYKLOS_HPP
#define RECYKLOS_RECYKLOS_HPP

#include "recyklos/errors.hpp"
#include "recyklos/vec.hpp"
#include "recyklos/dense.hpp"
#include "recyklos/csr.hpp"
#include "recyklos/matrix_market.hpp"
#include "recyklos/report.hpp"
#include "recyklos/arnoldi.hpp"
#include "recyklos/solvers.hpp"
#include "recyklos/recycle.hpp"
#include "recyklos/selection.hpp"
#include "recyklos/recycle_solvers.hpp"
#include "recyklos/oracle.hpp"
#include "recyklos/generate.hpp"
#include "recyklos/manifest.hpp"

#endif
