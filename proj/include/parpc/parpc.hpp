#pragma once

#include "parpc/citest.hpp"
#include "parpc/data.hpp"
#include "parpc/distributions.hpp"
#include "parpc/error.hpp"
#include "parpc/executor.hpp"
#include "parpc/graph.hpp"
#include "parpc/inference.hpp"
#include "parpc/io.hpp"
#include "parpc/memory.hpp"
#include "parpc/orientation.hpp"
#include "parpc/sem.hpp"
#include "parpc/skeleton.hpp"
