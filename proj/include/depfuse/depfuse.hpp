#pragma once

#include "depfuse/core.hpp"
#include "depfuse/io.hpp"
#include "depfuse/text.hpp"
#include "depfuse/lexfeat.hpp"
#include "depfuse/encoder.hpp"
#include "depfuse/nn.hpp"
#include "depfuse/emonet.hpp"
#include "depfuse/seqmodel.hpp"
#include "depfuse/pipeline.hpp"
#include "depfuse/metrics.hpp"
#include "depfuse/trainer.hpp"
#include "depfuse/evalkit.hpp"
#include "depfuse/config.hpp"
