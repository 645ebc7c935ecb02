#ifndef HOPEWAVE_HOPEWAVE_HPP
#define HOPEWAVE_HOPEWAVE_HPP

#include "hopewave/backward.hpp"
#include "hopewave/checkpoint.hpp"
#include "hopewave/corpus.hpp"
#include "hopewave/csv.hpp"
#include "hopewave/equivariant.hpp"
#include "hopewave/error.hpp"
#include "hopewave/evalkit.hpp"
#include "hopewave/graph.hpp"
#include "hopewave/loss.hpp"
#include "hopewave/model.hpp"
#include "hopewave/optimizer.hpp"
#include "hopewave/parallel.hpp"
#include "hopewave/random.hpp"
#include "hopewave/spectral.hpp"
#include "hopewave/tensor.hpp"
#include "hopewave/trainer.hpp"

#endif
