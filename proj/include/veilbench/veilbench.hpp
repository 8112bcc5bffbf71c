#pragma once

// Convenience umbrella: pulls in every module of the benchmark toolkit.

#include "veilbench/common.hpp"
#include "veilbench/html.hpp"
#include "veilbench/corpus.hpp"
#include "veilbench/inject.hpp"
#include "veilbench/metrics.hpp"
#include "veilbench/runner.hpp"
#include "veilbench/report.hpp"
