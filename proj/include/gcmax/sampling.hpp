#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gcmax/correlation.hpp"
#include "gcmax/error.hpp"
#include "gcmax/parallel.hpp"
#include "gcmax/rng.hpp"

namespace gcmax {

/// Rows per RNG chunk. Chunk k of a stream is always generated from the same
/// engine, so the draws are a pure function of (seed, spec, count).
inline constexpr std::size_t kChunkRows = 4096;

/// Stream tags for the two noise sources of a coupled draw.
inline constexpr std::uint64_t kXiStream = 0;
inline constexpr std::uint64_t kEtaStream = 1;

struct SampleBatch {
  std::size_t dim = 0;
  std::size_t count = 0;
  std::vector<double> data;  // row-major, count x dim
  std::uint64_t seed = 0;
  std::uint64_t spec_hash = 0;

  std::span<const double> row(std::size_t r) const { return {data.data() + r * dim, dim}; }
};

struct CoupledBatch {
  std::size_t dim = 0;
  std::size_t count = 0;
  std::vector<double> g_data;
  std::vector<double> h_data;
  double b = 0.0;
  std::uint64_t seed = 0;

  std::span<const double> g_row(std::size_t r) const { return {g_data.data() + r * dim, dim}; }
  std::span<const double> h_row(std::size_t r) const { return {h_data.data() + r * dim, dim}; }
};

inline std::size_t chunk_count(std::size_t n) { return (n + kChunkRows - 1) / kChunkRows; }

namespace detail {

struct ChunkRange {
  std::size_t first;
  std::size_t rows;
};

inline ChunkRange chunk_range(std::size_t chunk, std::size_t n) {
  const std::size_t first = chunk * kChunkRows;
  return {first, std::min(kChunkRows, n - first)};
}

/// Standard-normal noise for one chunk of the xi (or eta) stream.
inline void chunk_noise(std::uint64_t seed, std::uint64_t stream, std::size_t chunk,
                        std::span<double> out) {
  auto engine = chunk_engine(derive_seed(seed, stream), chunk);
  fill_standard_normal(engine, out);
}

}  // namespace detail

/// Visits n draws of Normal(0, spec) chunk by chunk:
/// visit(first_row, rows, span of rows*dim values). Chunks may be visited
/// concurrently and in any order.
template <class Visit>
void for_each_chunk(const CorrelationSpec& spec, std::size_t n, std::uint64_t seed, Visit&& visit) {
  const std::size_t d = spec.dim();
  parallel_chunks(chunk_count(n), [&](std::size_t c) {
    const auto [first, rows] = detail::chunk_range(c, n);
    std::vector<double> xi(rows * d), z(rows * d);
    detail::chunk_noise(seed, kXiStream, c, xi);
    for (std::size_t r = 0; r < rows; ++r)
      spec.correlate(std::span(xi).subspan(r * d, d), std::span(z).subspan(r * d, d));
    visit(first, rows, std::span<const double>(z));
  });
}

/// Like for_each_chunk, but both arms are driven by the same xi:
/// visit(first_row, rows, x_values, y_values) with X = Lx xi, Y = Ly xi.
template <class Visit>
void for_each_paired_chunk(const CorrelationSpec& spec_x, const CorrelationSpec& spec_y, std::size_t n,
                           std::uint64_t seed, Visit&& visit) {
  if (spec_x.dim() != spec_y.dim()) throw DimMismatch("paired specs must share a dimension");
  const std::size_t d = spec_x.dim();
  parallel_chunks(chunk_count(n), [&](std::size_t c) {
    const auto [first, rows] = detail::chunk_range(c, n);
    std::vector<double> xi(rows * d), x(rows * d), y(rows * d);
    detail::chunk_noise(seed, kXiStream, c, xi);
    for (std::size_t r = 0; r < rows; ++r) {
      auto noise = std::span<const double>(xi).subspan(r * d, d);
      spec_x.correlate(noise, std::span(x).subspan(r * d, d));
      spec_y.correlate(noise, std::span(y).subspan(r * d, d));
    }
    visit(first, rows, std::span<const double>(x), std::span<const double>(y));
  });
}

/// Coupled pair (G_b, H_b) with joint covariance [[C, bC], [bC, C]]:
/// G = L xi, H = L (b xi + sqrt(1 - b^2) eta). G equals sample() output for
/// the same seed; at b = 1 the two arms are bit-identical.
template <class Visit>
void for_each_coupled_chunk(const CorrelationSpec& spec, double b, std::size_t n, std::uint64_t seed,
                            Visit&& visit) {
  if (!(b >= 0.0 && b <= 1.0)) throw InvalidArgument("coupling b must lie in [0, 1]");
  const std::size_t d = spec.dim();
  const double tail = std::sqrt(1.0 - b * b);
  parallel_chunks(chunk_count(n), [&](std::size_t c) {
    const auto [first, rows] = detail::chunk_range(c, n);
    std::vector<double> xi(rows * d), eta(rows * d), mixed(rows * d), g(rows * d), h(rows * d);
    detail::chunk_noise(seed, kXiStream, c, xi);
    detail::chunk_noise(seed, kEtaStream, c, eta);
    for (std::size_t k = 0; k < rows * d; ++k) mixed[k] = b * xi[k] + tail * eta[k];
    for (std::size_t r = 0; r < rows; ++r) {
      spec.correlate(std::span<const double>(xi).subspan(r * d, d), std::span(g).subspan(r * d, d));
      spec.correlate(std::span<const double>(mixed).subspan(r * d, d), std::span(h).subspan(r * d, d));
    }
    visit(first, rows, std::span<const double>(g), std::span<const double>(h));
  });
}

inline SampleBatch sample(const CorrelationSpec& spec, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("sample count must be at least 1");
  SampleBatch batch{spec.dim(), count, std::vector<double>(count * spec.dim()), seed, spec.hash()};
  for_each_chunk(spec, count, seed, [&](std::size_t first, std::size_t, std::span<const double> z) {
    std::copy(z.begin(), z.end(), batch.data.begin() + static_cast<std::ptrdiff_t>(first * spec.dim()));
  });
  return batch;
}

inline CoupledBatch sample_coupled(const CorrelationSpec& spec, double b, std::size_t count,
                                   std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("sample count must be at least 1");
  const std::size_t d = spec.dim();
  CoupledBatch batch{d, count, std::vector<double>(count * d), std::vector<double>(count * d), b, seed};
  for_each_coupled_chunk(spec, b, count, seed,
                         [&](std::size_t first, std::size_t, std::span<const double> g,
                             std::span<const double> h) {
                           const auto offset = static_cast<std::ptrdiff_t>(first * d);
                           std::copy(g.begin(), g.end(), batch.g_data.begin() + offset);
                           std::copy(h.begin(), h.end(), batch.h_data.begin() + offset);
                         });
  return batch;
}

}  // namespace gcmax
