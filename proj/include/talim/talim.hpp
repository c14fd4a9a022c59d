#ifndef TALIM_TALIM_HPP
#define TALIM_TALIM_HPP

#include "talim/error.hpp"
#include "talim/signal_io.hpp"
#include "talim/spectrum.hpp"
#include "talim/harmonics.hpp"
#include "talim/timbre.hpp"
#include "talim/synth.hpp"
#include "talim/stats/matrix.hpp"
#include "talim/stats/distributions.hpp"
#include "talim/stats/correlation.hpp"
#include "talim/stats/jacobi.hpp"
#include "talim/stats/factor.hpp"
#include "talim/io.hpp"
#include "talim/batch.hpp"

#endif
