#pragma once

#include "llmrank/checkpoint.hpp"
#include "llmrank/common.hpp"
#include "llmrank/dataset.hpp"
#include "llmrank/embeddings.hpp"
#include "llmrank/features.hpp"
#include "llmrank/pipeline.hpp"
#include "llmrank/proxy.hpp"
#include "llmrank/ranker.hpp"
#include "llmrank/routing.hpp"
#include "llmrank/sweep.hpp"
#include "llmrank/synthetic.hpp"
#include "llmrank/training.hpp"
