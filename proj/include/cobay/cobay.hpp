#pragma once

#include "cobay/basis.hpp"
#include "cobay/common.hpp"
#include "cobay/datagen.hpp"
#include "cobay/detector.hpp"
#include "cobay/eval.hpp"
#include "cobay/events.hpp"
#include "cobay/gibbs.hpp"
#include "cobay/io.hpp"
#include "cobay/model.hpp"
#include "cobay/polya_gamma.hpp"
#include "cobay/simulate.hpp"
