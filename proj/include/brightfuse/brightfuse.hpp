#pragma once

#include "brightfuse/crf.hpp"
#include "brightfuse/crf_estimate.hpp"
#include "brightfuse/error.hpp"
#include "brightfuse/fusion.hpp"
#include "brightfuse/image.hpp"
#include "brightfuse/image_io.hpp"
#include "brightfuse/mef_ssim.hpp"
#include "brightfuse/parallel.hpp"
#include "brightfuse/pipeline.hpp"
#include "brightfuse/pyramid.hpp"
#include "brightfuse/residual_net.hpp"
#include "brightfuse/stack.hpp"
#include "brightfuse/synth.hpp"
#include "brightfuse/virtual_image.hpp"
#include "brightfuse/wgif.hpp"
