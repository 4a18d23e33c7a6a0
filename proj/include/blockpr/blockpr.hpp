#pragma once

#include "blockpr/analysis.hpp"
#include "blockpr/angular_sync.hpp"
#include "blockpr/closed_form.hpp"
#include "blockpr/core.hpp"
#include "blockpr/fft.hpp"
#include "blockpr/lifted_solver.hpp"
#include "blockpr/masks.hpp"
#include "blockpr/random.hpp"
#include "blockpr/signals.hpp"
#include "blockpr/sparse_pipeline.hpp"
