#pragma once

// Umbrella header.

#include "qcbf/affine.hpp"
#include "qcbf/cbf.hpp"
#include "qcbf/cbf_qp.hpp"
#include "qcbf/conic.hpp"
#include "qcbf/error.hpp"
#include "qcbf/ipm.hpp"
#include "qcbf/layout.hpp"
#include "qcbf/linalg.hpp"
#include "qcbf/model.hpp"
#include "qcbf/monomial_basis.hpp"
#include "qcbf/polynomial.hpp"
#include "qcbf/problem_file.hpp"
#include "qcbf/programs.hpp"
#include "qcbf/result.hpp"
#include "qcbf/result_io.hpp"
#include "qcbf/simulate.hpp"
#include "qcbf/sos.hpp"
#include "qcbf/synthesis.hpp"
#include "qcbf/verify.hpp"
