// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "faultvit/adam.hpp"
#include "faultvit/autodiff.hpp"
#include "faultvit/bytes.hpp"
#include "faultvit/config.hpp"
#include "faultvit/dataset.hpp"
#include "faultvit/errors.hpp"
#include "faultvit/evaluator.hpp"
#include "faultvit/fft.hpp"
#include "faultvit/mat5.hpp"
#include "faultvit/rng.hpp"
#include "faultvit/serialize.hpp"
#include "faultvit/signal.hpp"
#include "faultvit/signal_io.hpp"
#include "faultvit/stft.hpp"
#include "faultvit/synth.hpp"
#include "faultvit/tensor.hpp"
#include "faultvit/trainer.hpp"
#include "faultvit/vit.hpp"
