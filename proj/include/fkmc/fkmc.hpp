#pragma once

#include "fkmc/characteristics.hpp"
#include "fkmc/coefficients.hpp"
#include "fkmc/config.hpp"
#include "fkmc/csv.hpp"
#include "fkmc/domain.hpp"
#include "fkmc/errors.hpp"
#include "fkmc/exit_stats.hpp"
#include "fkmc/expr.hpp"
#include "fkmc/field.hpp"
#include "fkmc/grid.hpp"
#include "fkmc/linalg.hpp"
#include "fkmc/models.hpp"
#include "fkmc/nonlocal.hpp"
#include "fkmc/parallel.hpp"
#include "fkmc/pde_oracle.hpp"
#include "fkmc/portfolio.hpp"
#include "fkmc/rng.hpp"
#include "fkmc/run.hpp"
#include "fkmc/solver.hpp"
#include "fkmc/vec.hpp"
