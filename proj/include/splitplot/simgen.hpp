#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "splitplot/pom.hpp"

namespace splitplot {

// The five generative models for the first potential-outcome column:
//   I    iid Bernoulli(0.5)
//   II   blockwise-constant Bernoulli(0.5)
//   III  independent normals, means +-2 by sub-plot position, half the
//        variances 2 and half 0 in a random arrangement
//   IV   normal block effect plus normal unit noise
//   V    blockwise-constant standard normal
enum class PoType { I = 1, II, III, IV, V };

enum class AdditivityType { Strict, BetweenBlock, None };

const char* po_type_name(PoType t);
const char* additivity_name(AdditivityType t);
PoType parse_po_type(const std::string& text);
AdditivityType parse_additivity(const std::string& text);

struct PomRecipe {
  PoType po_type;
  AdditivityType additivity;
  BlockLayout layout;
  std::uint64_t seed = 0;
};

/// First potential-outcome column for the recipe's outcome type.
Eigen::VectorXd generate_y1(const PomRecipe& recipe);

/// Full science table: column 1 from generate_y1, columns 2-4 from the
/// recipe's additivity type. Deterministic in (recipe, seed).
PotentialOutcomeMatrix build_pom(const PomRecipe& recipe);

}  // namespace splitplot
