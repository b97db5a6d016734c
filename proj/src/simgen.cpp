#include "splitplot/simgen.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "splitplot/rng.hpp"

namespace splitplot {

const char* po_type_name(PoType t) {
  switch (t) {
    case PoType::I:
      return "I";
    case PoType::II:
      return "II";
    case PoType::III:
      return "III";
    case PoType::IV:
      return "IV";
    case PoType::V:
      return "V";
  }
  return "?";
}

const char* additivity_name(AdditivityType t) {
  switch (t) {
    case AdditivityType::Strict:
      return "strict";
    case AdditivityType::BetweenBlock:
      return "between_block";
    case AdditivityType::None:
      return "none";
  }
  return "?";
}

PoType parse_po_type(const std::string& text) {
  if (text == "I" || text == "1") return PoType::I;
  if (text == "II" || text == "2") return PoType::II;
  if (text == "III" || text == "3") return PoType::III;
  if (text == "IV" || text == "4") return PoType::IV;
  if (text == "V" || text == "5") return PoType::V;
  throw std::invalid_argument("unknown potential-outcome type: " + text);
}

AdditivityType parse_additivity(const std::string& text) {
  if (text == "strict") return AdditivityType::Strict;
  if (text == "between" || text == "between_block" || text == "between-block")
    return AdditivityType::BetweenBlock;
  if (text == "none") return AdditivityType::None;
  throw std::invalid_argument("unknown additivity type: " + text);
}

namespace {

// Stream tag layout: column k of the science table draws from the child
// seed (seed, k). Replicate columns for additivity types (ii) and (iii)
// reuse the same per-column children, so Y(1) never depends on the
// additivity type.
Eigen::VectorXd draw_column(PoType type, const BlockLayout& layout,
                            SeedStream& rng) {
  const int W = layout.whole_plots;
  const int M = layout.subplots_per_plot;
  const int N = layout.units();
  Eigen::VectorXd y(N);

  switch (type) {
    case PoType::I:
      for (int i = 0; i < N; ++i) {
        y(i) = rng.below(2) ? 1.0 : 0.0;
      }
      break;
    case PoType::II:
      for (int w = 0; w < W; ++w) {
        const double value = rng.below(2) ? 1.0 : 0.0;
        y.segment(w * M, M).setConstant(value);
      }
      break;
    case PoType::III: {
      if (N % 2 != 0) {
        throw std::invalid_argument(
            "potential-outcome type III needs an even number of units");
      }
      std::vector<double> sd(N, 0.0);
      std::fill(sd.begin(), sd.begin() + N / 2, std::sqrt(2.0));
      rng.shuffle(sd);
      for (int w = 0; w < W; ++w) {
        for (int m = 0; m < M; ++m) {
          const int i = layout.unit_index(w, m);
          const double mean = 2.0 * ((m + 1) * 2 <= M ? -1.0 : 1.0);
          y(i) = mean + sd[i] * rng.normal();
        }
      }
      break;
    }
    case PoType::IV:
      for (int w = 0; w < W; ++w) {
        const double block_effect = rng.normal();
        for (int m = 0; m < M; ++m) {
          y(layout.unit_index(w, m)) = block_effect + rng.normal();
        }
      }
      break;
    case PoType::V:
      for (int w = 0; w < W; ++w) {
        y.segment(w * M, M).setConstant(rng.normal());
      }
      break;
  }
  return y;
}

SeedStream column_stream(const PomRecipe& recipe, int column) {
  return SeedStream(
      SeedStream::derive(recipe.seed, {static_cast<std::uint64_t>(column)}));
}

}  // namespace

Eigen::VectorXd generate_y1(const PomRecipe& recipe) {
  SeedStream rng = column_stream(recipe, 1);
  return draw_column(recipe.po_type, recipe.layout, rng);
}

PotentialOutcomeMatrix build_pom(const PomRecipe& recipe) {
  const int W = recipe.layout.whole_plots;
  const int M = recipe.layout.subplots_per_plot;
  const int N = recipe.layout.units();

  Eigen::MatrixXd values(N, kNumTreatments);
  values.col(0) = generate_y1(recipe);

  for (int k = 2; k <= kNumTreatments; ++k) {
    switch (recipe.additivity) {
      case AdditivityType::Strict:
        values.col(k - 1) = values.col(0);
        break;
      case AdditivityType::BetweenBlock:
        switch (recipe.po_type) {
          case PoType::I: {
            // Independent blockwise permutation of column 1; the count of
            // ones in each block is preserved by construction.
            SeedStream rng = column_stream(recipe, k);
            Eigen::VectorXd column = values.col(0);
            std::vector<double> block(M);
            for (int w = 0; w < W; ++w) {
              for (int m = 0; m < M; ++m) block[m] = column(w * M + m);
              rng.shuffle(block);
              for (int m = 0; m < M; ++m) column(w * M + m) = block[m];
            }
            values.col(k - 1) = column;
            break;
          }
          case PoType::II:
          case PoType::V:
            values.col(k - 1) = values.col(0);
            break;
          case PoType::III:
          case PoType::IV: {
            // Fresh replicate, recentered so its block means match column 1.
            SeedStream rng = column_stream(recipe, k);
            Eigen::VectorXd replicate =
                draw_column(recipe.po_type, recipe.layout, rng);
            for (int w = 0; w < W; ++w) {
              const double shift = replicate.segment(w * M, M).mean() -
                                   values.col(0).segment(w * M, M).mean();
              replicate.segment(w * M, M).array() -= shift;
            }
            values.col(k - 1) = replicate;
            break;
          }
        }
        break;
      case AdditivityType::None: {
        SeedStream rng = column_stream(recipe, k);
        values.col(k - 1) = draw_column(recipe.po_type, recipe.layout, rng);
        break;
      }
    }
  }
  return PotentialOutcomeMatrix(recipe.layout, std::move(values));
}

}  // namespace splitplot
