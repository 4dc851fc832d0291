#pragma once

#include "nui/attack.hpp"
#include "nui/dataset.hpp"
#include "nui/error.hpp"
#include "nui/harness.hpp"
#include "nui/image.hpp"
#include "nui/image_io.hpp"
#include "nui/mask.hpp"
#include "nui/mask_export.hpp"
#include "nui/metrics.hpp"
