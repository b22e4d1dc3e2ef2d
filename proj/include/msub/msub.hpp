#pragma once

#include "msub/behavioral.hpp"
#include "msub/compound.hpp"
#include "msub/core.hpp"
#include "msub/diagnostics.hpp"
#include "msub/estimation.hpp"
#include "msub/logprice.hpp"
#include "msub/numerics/bessel.hpp"
#include "msub/numerics/density.hpp"
#include "msub/numerics/fft.hpp"
#include "msub/numerics/kde.hpp"
#include "msub/numerics/mixture.hpp"
#include "msub/numerics/normal.hpp"
#include "msub/numerics/quadrature.hpp"
#include "msub/numerics/stats.hpp"
#include "msub/pipeline/report.hpp"
#include "msub/pipeline/run.hpp"
#include "msub/pipeline/series.hpp"
#include "msub/subordinators.hpp"
