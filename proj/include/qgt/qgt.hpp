#pragma once

#include "qgt/bit_matrix.hpp"
#include "qgt/bounds.hpp"
#include "qgt/error.hpp"
#include "qgt/exactla.hpp"
#include "qgt/harness.hpp"
#include "qgt/instance_json.hpp"
#include "qgt/item_set.hpp"
#include "qgt/matrix.hpp"
#include "qgt/model.hpp"
#include "qgt/recover.hpp"
#include "qgt/select.hpp"
#include "qgt/splitmix.hpp"
