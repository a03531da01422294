#pragma once

#include "selene/ast.hpp"
#include "selene/env.hpp"
#include "selene/events.hpp"
#include "selene/interp.hpp"
#include "selene/json_io.hpp"
#include "selene/lattice.hpp"
#include "selene/ni.hpp"
#include "selene/observe.hpp"
#include "selene/parser.hpp"
#include "selene/pretty.hpp"
#include "selene/program.hpp"
#include "selene/runtime.hpp"
#include "selene/typecheck.hpp"
#include "selene/value.hpp"
