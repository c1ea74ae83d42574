#pragma once

#include "combkit/tensor.hpp"
#include "combkit/normalization.hpp"
#include "combkit/sdp.hpp"
#include "combkit/random.hpp"
#include "combkit/comb.hpp"
#include "combkit/tester.hpp"
#include "combkit/group.hpp"
#include "combkit/covariant.hpp"
#include "combkit/estimation.hpp"
#include "combkit/io.hpp"
