#pragma once

// Convenience header pulling in the whole library.

#include "assembly.hpp"
#include "common.hpp"
#include "device_io.hpp"
#include "device_solver.hpp"
#include "element.hpp"
#include "export.hpp"
#include "geometry.hpp"
#include "manufactured.hpp"
#include "mesh.hpp"
#include "postprocess.hpp"
#include "solver.hpp"
#include "sparse.hpp"
