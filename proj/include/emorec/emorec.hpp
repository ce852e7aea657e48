#pragma once

// emorec: two-stage speech emotion recognition with acoustic and
// suprasegmental hidden Markov models.

#include "emorec/audio.hpp"
#include "emorec/config.hpp"
#include "emorec/dataset.hpp"
#include "emorec/eval.hpp"
#include "emorec/features.hpp"
#include "emorec/fft.hpp"
#include "emorec/gmm.hpp"
#include "emorec/hmm.hpp"
#include "emorec/manifest.hpp"
#include "emorec/model_io.hpp"
#include "emorec/observation.hpp"
#include "emorec/pipeline.hpp"
#include "emorec/sphmm.hpp"
#include "emorec/synth.hpp"
#include "emorec/util.hpp"
