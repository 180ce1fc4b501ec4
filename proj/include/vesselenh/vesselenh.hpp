#pragma once

#include "vesselenh/background.hpp"
#include "vesselenh/clahe.hpp"
#include "vesselenh/error.hpp"
#include "vesselenh/frangi.hpp"
#include "vesselenh/gaussian.hpp"
#include "vesselenh/grayscale.hpp"
#include "vesselenh/image.hpp"
#include "vesselenh/median.hpp"
#include "vesselenh/netpbm.hpp"
#include "vesselenh/pipeline.hpp"
#include "vesselenh/pipeline_json.hpp"
#include "vesselenh/y4m.hpp"
