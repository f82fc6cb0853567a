#pragma once

#include "strictlyap/decay.hpp"
#include "strictlyap/dynsys.hpp"
#include "strictlyap/error.hpp"
#include "strictlyap/expr.hpp"
#include "strictlyap/funcalc.hpp"
#include "strictlyap/lyapunov.hpp"
#include "strictlyap/quadrature.hpp"
#include "strictlyap/strictify.hpp"
#include "strictlyap/verify.hpp"
