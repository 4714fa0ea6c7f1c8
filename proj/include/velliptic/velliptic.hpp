#pragma once

#include "velliptic/error.hpp"
#include "velliptic/field.hpp"
#include "velliptic/fiber_algebra.hpp"
#include "velliptic/expression.hpp"
#include "velliptic/structure_field.hpp"
#include "velliptic/epsilon_family.hpp"
#include "velliptic/burgers_transport.hpp"
#include "velliptic/quadrature.hpp"
#include "velliptic/region.hpp"
#include "velliptic/cr_calculus.hpp"
#include "velliptic/cauchy_pompeiu.hpp"
#include "velliptic/second_order.hpp"
#include "velliptic/jets.hpp"
