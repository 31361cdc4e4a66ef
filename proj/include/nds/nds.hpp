#pragma once

#include "nds/core.hpp"
#include "nds/errors.hpp"
#include "nds/eval.hpp"
#include "nds/exstream.hpp"
#include "nds/heads.hpp"
#include "nds/ingest.hpp"
#include "nds/learner.hpp"
#include "nds/replay.hpp"
#include "nds/rng.hpp"
#include "nds/runner.hpp"
#include "nds/slda.hpp"
#include "nds/snapshot.hpp"
#include "nds/synth.hpp"
