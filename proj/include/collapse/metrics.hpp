#pragma once

#include "collapse/types.hpp"

#include <optional>
#include <vector>

namespace collapse {

// Deviations from the three strong-collapse conditions.
//   snc1     : |W W^T - sqrt(N)(I - (1/C) 1 1^T)|_F
//   snc2_rel : |H - (1/sqrt(N))(W (x) 1_N)^T|_F / |H|_F, empty when |H|_F = 0
//   snc3     : |b - (1/C) 1|_2
struct SncErrors {
    double snc1 = 0.0;
    std::optional<double> snc2_rel;
    double snc3 = 0.0;
};

struct ClassStatistics {
    Matrix class_means;     // feature_dim x classes
    Vector global_mean;     // mean of the class means
    Matrix normalized_means; // columns (mu_c - mu_G) / |mu_c - mu_G|
};

// Classical neural-collapse metrics; all vanish on exact strong-collapse points.
struct NcReport {
    double nc1_within_class = 0.0;  // within-class energy over total centered energy
    double nc2_equinorm = 0.0;      // coefficient of variation of |mu_c - mu_G|
    double nc2_gram = 0.0;          // Gram defect against the simplex frame
    double nc3_selfdual = 0.0;      // normalized W^T vs normalized M
    double nc4_disagreement = 0.0;  // linear classifier vs nearest class mean
};

struct EtfCheck {
    double alpha = 0.0;
    double beta = 0.0;
    bool is_etf = false;
};

SncErrors snc_errors(const ModelState& state);

// Per-class means, their average, and the normalized centered directions.
// Throws std::domain_error when some |mu_c - mu_G| vanishes.
ClassStatistics class_statistics(const Matrix& features, const ModelDims& dims);

NcReport nc_report(const ModelState& state);

// Checks tightness (sum of outer products proportional to the identity) and
// equiangularity (all squared pairwise inner products equal) of a unit-norm
// tuple, both within 1e-10. Returns the fitted constants and the verdict.
EtfCheck verify_etf(const std::vector<Vector>& vectors);

} // namespace collapse
