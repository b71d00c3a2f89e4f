#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bmvdr/channel_map.hpp"
#include "bmvdr/covariance.hpp"
#include "bmvdr/linalg.hpp"

namespace bmvdr {

// Relative transfer function vector: values[ref] == 1 exactly.
class RtfVector {
 public:
  RtfVector() = default;
  // Normalizes by values[ref]. Throws ZeroDenominator when that entry is
  // below `tolerance` * ||values||, DomainError on non-finite entries.
  RtfVector(const CVector& values, std::size_t ref, Side side, double tolerance = 1e-15);

  const CVector& values() const { return values_; }
  std::size_t ref() const { return ref_; }
  Side side() const { return side_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  Complex operator[](std::size_t i) const { return values_(static_cast<Eigen::Index>(i)); }

 private:
  CVector values_;
  std::size_t ref_ = 0;
  Side side_ = Side::kLeft;
};

// a_R = a_L / (e_R^T a_L)
RtfVector change_reference(const RtfVector& rtf, std::size_t new_ref, Side new_side);

// M x M_E matrix of per-external SC estimates sharing one reference.
class RtfMatrix {
 public:
  RtfMatrix(std::vector<RtfVector> columns);

  const CMatrix& matrix() const { return columns_; }
  std::size_t num_columns() const { return static_cast<std::size_t>(columns_.cols()); }
  std::size_t ref() const { return ref_; }
  Side side() const { return side_; }
  RtfVector column(std::size_t i) const;

 private:
  CMatrix columns_;
  std::size_t ref_ = 0;
  Side side_ = Side::kLeft;
};

enum class Combination { kIsnr, kAv, kMsnr };

struct CombinationVector {
  CVector weights;
  Combination procedure = Combination::kAv;
  // Selected external (0-based) for kIsnr.
  std::size_t selected = 0;
};

// Principal eigenvector of R_n^{-H/2} R_y R_n^{-1/2} mapped back by R_n^{H/2}
// (unnormalized). `noise` must be the factor of r_n.
CVector cw_direction(const HermitianMatrix& r_y, const CholeskyFactor& noise);

// Covariance whitening. Diagonal loading is applied to r_n if it fails the PD
// check. Throws NearZeroReference when the reference entry vanishes.
RtfVector estimate_cw(const CovariancePair& pair, std::size_t ref, Side side);
RtfVector estimate_cw(const HermitianMatrix& r_y, const CholeskyFactor& noise, std::size_t ref, Side side);

// Column of r_y for external mic `ext` (1-based), normalized by its ref entry.
RtfVector estimate_sc(const CovariancePair& pair, const ChannelMap& map, std::size_t ext, Side side);
RtfVector estimate_sc(const HermitianMatrix& r_y, const ChannelMap& map, std::size_t ext, Side side);

// All M_E SC estimates as columns.
RtfMatrix sc_matrix(const HermitianMatrix& r_y, const ChannelMap& map, Side side);

// (A c) / (e_ref^T A c)
RtfVector combine(const RtfMatrix& matrix, const CVector& c);
inline RtfVector combine(const RtfMatrix& matrix, const CombinationVector& c) { return combine(matrix, c.weights); }

// Indicator of the external mic with the largest r_y / r_n diagonal ratio,
// lowest index on ties.
CombinationVector select_isnr(const CovariancePair& pair, const ChannelMap& map);
CombinationVector select_isnr(const HermitianMatrix& r_y, const HermitianMatrix& r_n, const ChannelMap& map);

CombinationVector average_weights(std::size_t num_external);

// Generalized Rayleigh quotient matrices for the output SNR of a BMVDR
// steered by combine(A, c):
//   lambda1 = A^H R_n^{-1} R_y R_n^{-1} A,  lambda2 = A^H R_n^{-1} A.
struct RayleighMatrices {
  HermitianMatrix lambda1;
  HermitianMatrix lambda2;
};
RayleighMatrices rayleigh_matrices(const RtfMatrix& matrix, const HermitianMatrix& r_y, const CholeskyFactor& noise);

// Combination vector maximizing the narrowband BMVDR output SNR.
CombinationVector msnr_weights(const RtfMatrix& matrix, const CovariancePair& pair);
CombinationVector msnr_weights(const RtfMatrix& matrix, const HermitianMatrix& r_y, const CholeskyFactor& noise);

// Output SNR predicted by the quotient, (c^H L1 c) / (c^H L2 c) - 1.
double quotient_output_snr(const RayleighMatrices& m, const CVector& c);

}  // namespace bmvdr
