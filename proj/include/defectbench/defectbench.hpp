#pragma once

#include "defectbench/arff.hpp"
#include "defectbench/benchmark.hpp"
#include "defectbench/csv.hpp"
#include "defectbench/dataset.hpp"
#include "defectbench/eigen.hpp"
#include "defectbench/error.hpp"
#include "defectbench/evaluation.hpp"
#include "defectbench/io.hpp"
#include "defectbench/matrix.hpp"
#include "defectbench/models/serialize.hpp"
#include "defectbench/models/train.hpp"
#include "defectbench/pipeline.hpp"
#include "defectbench/reference_table.hpp"
#include "defectbench/rng.hpp"
