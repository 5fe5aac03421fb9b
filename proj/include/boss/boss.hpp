#pragma once

// Umbrella header: the whole library.

#include "boss/common.hpp"
#include "boss/hmm.hpp"
#include "boss/infobound.hpp"
#include "boss/io.hpp"
#include "boss/relevance.hpp"
#include "boss/score.hpp"
#include "boss/synth.hpp"
#include "boss/train.hpp"
#include "boss/vectors.hpp"
