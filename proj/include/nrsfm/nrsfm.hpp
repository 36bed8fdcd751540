/* nrsfm.hpp -- umbrella include */

#ifndef NRSFM_NRSFM_HPP
#define NRSFM_NRSFM_HPP

#include "nrsfm/csv_io.hpp"
#include "nrsfm/eval.hpp"
#include "nrsfm/geometry.hpp"
#include "nrsfm/init.hpp"
#include "nrsfm/proxy.hpp"
#include "nrsfm/segment.hpp"
#include "nrsfm/seqdata.hpp"
#include "nrsfm/solver.hpp"
#include "nrsfm/synth.hpp"
#include "nrsfm/tpa.hpp"
#include "nrsfm/types.hpp"

#endif  // NRSFM_NRSFM_HPP
