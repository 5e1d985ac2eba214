#pragma once

#include "qacor/error.hpp"
#include "qacor/types.hpp"
#include "qacor/matfun.hpp"
#include "qacor/spd.hpp"
#include "qacor/bfgs.hpp"
#include "qacor/quotient.hpp"
#include "qacor/dim2.hpp"
#include "qacor/product.hpp"
#include "qacor/io.hpp"
