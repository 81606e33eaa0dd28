#pragma once

#include "logspec/bandwidth.hpp"
#include "logspec/errors.hpp"
#include "logspec/harness.hpp"
#include "logspec/kernels.hpp"
#include "logspec/multitaper.hpp"
#include "logspec/pipeline.hpp"
#include "logspec/specmath.hpp"
#include "logspec/tapers.hpp"
#include "logspec/theory.hpp"
