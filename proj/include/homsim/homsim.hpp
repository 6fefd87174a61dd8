#ifndef HOMSIM_HOMSIM_HPP
#define HOMSIM_HOMSIM_HPP

#include "homsim/config.hpp"
#include "homsim/engine.hpp"
#include "homsim/fft.hpp"
#include "homsim/fitting.hpp"
#include "homsim/grid.hpp"
#include "homsim/io.hpp"
#include "homsim/medium.hpp"
#include "homsim/spectra.hpp"
#include "homsim/spectral_field.hpp"
#include "homsim/units.hpp"

#endif
