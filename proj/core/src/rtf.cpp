#include "bmvdr/rtf.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bmvdr/error.hpp"

namespace bmvdr {

namespace {
constexpr double kCwReferenceTolerance = 1e-12;
constexpr double kScReferenceTolerance = 1e-15;
}  // namespace

RtfVector::RtfVector(const CVector& values, std::size_t ref, Side side, double tolerance)
    : ref_(ref), side_(side) {
  if (ref >= static_cast<std::size_t>(values.size())) {
    throw DomainError("RTF reference index " + std::to_string(ref) + " out of range");
  }
  if (!values.allFinite()) throw DomainError("RTF vector has non-finite entries");
  const Complex pivot = values(static_cast<Eigen::Index>(ref));
  if (!(std::abs(pivot) >= tolerance * values.norm()) || std::abs(pivot) == 0.0) {
    throw ZeroDenominator("RTF reference entry is numerically zero");
  }
  values_ = values / pivot;
  values_(static_cast<Eigen::Index>(ref)) = Complex(1.0, 0.0);
  if (!values_.allFinite()) throw DomainError("RTF vector has non-finite entries after normalization");
}

RtfVector change_reference(const RtfVector& rtf, std::size_t new_ref, Side new_side) {
  return RtfVector(rtf.values(), new_ref, new_side);
}

RtfMatrix::RtfMatrix(std::vector<RtfVector> columns) {
  if (columns.empty()) throw DomainError("RTF matrix needs at least one column");
  ref_ = columns.front().ref();
  side_ = columns.front().side();
  const auto m = static_cast<Eigen::Index>(columns.front().size());
  columns_.resize(m, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].ref() != ref_ || static_cast<Eigen::Index>(columns[i].size()) != m) {
      throw DomainError("RTF matrix columns disagree on reference or dimension");
    }
    columns_.col(static_cast<Eigen::Index>(i)) = columns[i].values();
  }
}

RtfVector RtfMatrix::column(std::size_t i) const {
  return RtfVector(columns_.col(static_cast<Eigen::Index>(i)), ref_, side_);
}

CVector cw_direction(const HermitianMatrix& r_y, const CholeskyFactor& noise) {
  if (r_y.dim() != noise.dim()) throw DomainError("covariance whitening: dimension mismatch");
  const HermitianMatrix whitened = noise.whiten_congruence(r_y);
  const EigenPair top = principal_eigvec_hermitian(whitened);
  return noise.apply_lower(top.vector);
}

RtfVector estimate_cw(const HermitianMatrix& r_y, const CholeskyFactor& noise, std::size_t ref, Side side) {
  const CVector v = cw_direction(r_y, noise);
  if (ref >= static_cast<std::size_t>(v.size())) throw DomainError("covariance whitening: reference out of range");
  if (!(std::abs(v(static_cast<Eigen::Index>(ref))) >= kCwReferenceTolerance * v.norm())) {
    throw NearZeroReference("covariance whitening: reference entry vanishes");
  }
  return RtfVector(v, ref, side, kCwReferenceTolerance);
}

RtfVector estimate_cw(const CovariancePair& pair, std::size_t ref, Side side) {
  const LoadedFactor noise = cholesky_with_loading(pair.r_n);
  return estimate_cw(pair.r_y, noise.factor, ref, side);
}

RtfVector estimate_sc(const HermitianMatrix& r_y, const ChannelMap& map, std::size_t ext, Side side) {
  if (r_y.dim() != map.total()) throw DomainError("SC estimate: covariance does not match the channel map");
  const CVector column = r_y.matrix().col(static_cast<Eigen::Index>(map.external(ext)));
  return RtfVector(column, map.ref(side), side, kScReferenceTolerance);
}

RtfVector estimate_sc(const CovariancePair& pair, const ChannelMap& map, std::size_t ext, Side side) {
  return estimate_sc(pair.r_y, map, ext, side);
}

RtfMatrix sc_matrix(const HermitianMatrix& r_y, const ChannelMap& map, Side side) {
  std::vector<RtfVector> cols;
  cols.reserve(map.num_external());
  for (std::size_t i = 1; i <= map.num_external(); ++i) cols.push_back(estimate_sc(r_y, map, i, side));
  return RtfMatrix(std::move(cols));
}

RtfVector combine(const RtfMatrix& matrix, const CVector& c) {
  if (static_cast<std::size_t>(c.size()) != matrix.num_columns()) {
    throw DomainError("combination vector has " + std::to_string(c.size()) + " entries, expected " +
                      std::to_string(matrix.num_columns()));
  }
  const CVector mixed = matrix.matrix() * c;
  return RtfVector(mixed, matrix.ref(), matrix.side(), kScReferenceTolerance);
}

CombinationVector select_isnr(const HermitianMatrix& r_y, const HermitianMatrix& r_n, const ChannelMap& map) {
  const std::size_t me = map.num_external();
  if (me == 0) throw DomainError("iSNR selection needs at least one external microphone");
  std::size_t best = 0;
  double best_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < me; ++i) {
    const std::size_t ch = map.external_indices()[i];
    const double noise = r_n.diag(ch);
    if (!(noise > 0.0)) {
      throw DomainError("iSNR selection: noise power of external microphone " + std::to_string(i + 1) +
                        " is not positive");
    }
    const double ratio = r_y.diag(ch) / noise;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = i;
    }
  }
  CombinationVector c;
  c.weights = CVector::Zero(static_cast<Eigen::Index>(me));
  c.weights(static_cast<Eigen::Index>(best)) = 1.0;
  c.procedure = Combination::kIsnr;
  c.selected = best;
  return c;
}

CombinationVector select_isnr(const CovariancePair& pair, const ChannelMap& map) {
  return select_isnr(pair.r_y, pair.r_n, map);
}

CombinationVector average_weights(std::size_t num_external) {
  if (num_external == 0) throw DomainError("averaging needs at least one external microphone");
  CombinationVector c;
  c.weights = CVector::Constant(static_cast<Eigen::Index>(num_external), 1.0 / static_cast<double>(num_external));
  c.procedure = Combination::kAv;
  return c;
}

RayleighMatrices rayleigh_matrices(const RtfMatrix& matrix, const HermitianMatrix& r_y, const CholeskyFactor& noise) {
  const CMatrix& a = matrix.matrix();
  if (static_cast<std::size_t>(a.rows()) != noise.dim() || r_y.dim() != noise.dim()) {
    throw DomainError("Rayleigh matrices: dimension mismatch");
  }
  const CMatrix b = noise.solve(a);  // R_n^{-1} A
  return {HermitianMatrix::symmetrized(b.adjoint() * r_y.matrix() * b), HermitianMatrix::symmetrized(a.adjoint() * b)};
}

CombinationVector msnr_weights(const RtfMatrix& matrix, const HermitianMatrix& r_y, const CholeskyFactor& noise) {
  const RayleighMatrices m = rayleigh_matrices(matrix, r_y, noise);
  const LoadedFactor l2 = cholesky_with_loading(m.lambda2);
  HermitianMatrix lambda2 = m.lambda2;
  if (l2.loading_applied) lambda2.add_diagonal(l2.delta);
  const EigenPair top = principal_eigvec_pencil(m.lambda1, l2.factor, lambda2);
  CombinationVector c;
  c.weights = top.vector;
  c.procedure = Combination::kMsnr;
  return c;
}

CombinationVector msnr_weights(const RtfMatrix& matrix, const CovariancePair& pair) {
  const LoadedFactor noise = cholesky_with_loading(pair.r_n);
  return msnr_weights(matrix, pair.r_y, noise.factor);
}

double quotient_output_snr(const RayleighMatrices& m, const CVector& c) {
  return rayleigh_quotient(m.lambda1, m.lambda2, c) - 1.0;
}

}  // namespace bmvdr
