#pragma once

#include "svar/varmodel.hpp"

#include <cstdint>
#include <string>

namespace svar {

/// K = 10, p = 1, sparse A_1; noise precision with a dense first row.
VarModel model1();

/// K = 6, p = 1, built so that A_1[1,2] and A_1[4,5] are nonzero while the
/// corresponding partial coherences are meant to vanish.
VarModel model2();

/// K = 6, p = 2, circulant lag matrices and a circulant tridiagonal precision.
VarModel model3();

/// Each entry of A_1 is N(0,1) with probability `density`, then A_1 is divided
/// by (largest singular value + 0.1). Identity noise.
VarModel random_sparse_model(Index k, double density, std::uint64_t seed);

/// model1 | model2 | model3 | random-sparse (the last one takes k, density, seed).
VarModel fixture(const std::string& name, Index k = 10, double density = 0.25, std::uint64_t seed = 0);

}  // namespace svar
