#pragma once

#include "sigrule/audit.hpp"
#include "sigrule/bitvector.hpp"
#include "sigrule/contour.hpp"
#include "sigrule/errors.hpp"
#include "sigrule/measures.hpp"
#include "sigrule/miner.hpp"
#include "sigrule/record.hpp"
#include "sigrule/redundancy.hpp"
#include "sigrule/relation.hpp"
#include "sigrule/significance.hpp"
#include "sigrule/synth.hpp"
#include "sigrule/table.hpp"
