#pragma once

#include "lmtight/core.hpp"
#include "lmtight/linalg.hpp"
#include "lmtight/verdict.hpp"
#include "lmtight/sfssm.hpp"
#include "lmtight/zoo.hpp"
#include "lmtight/tightness.hpp"
#include "lmtight/model_file.hpp"
