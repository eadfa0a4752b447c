#pragma once

#include "correctspeech/audio.hpp"
#include "correctspeech/ctcdecode.hpp"
#include "correctspeech/error.hpp"
#include "correctspeech/lexicon.hpp"
#include "correctspeech/metrics.hpp"
#include "correctspeech/perturb.hpp"
#include "correctspeech/planner.hpp"
#include "correctspeech/seqalign.hpp"
#include "correctspeech/splice.hpp"
#include "correctspeech/synth.hpp"
#include "correctspeech/timeline.hpp"
