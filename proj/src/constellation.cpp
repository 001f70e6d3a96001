#include "ocpr/constellation.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace ocpr {

namespace {

constexpr std::uint32_t gray(std::uint32_t k) { return k ^ (k >> 1); }

}  // namespace

OffsetQamConstellation build_constellation(int order, double a_oma, double a0) {
  if (order != 4 && order != 16 && order != 64 && order != 256) {
    throw std::invalid_argument("unsupported constellation order " + std::to_string(order) +
                                " (square offset-QAM needs 4, 16, 64 or 256)");
  }
  if (!(a_oma > 0.0)) throw std::invalid_argument("a_oma must be positive");
  if (!(a0 >= 0.0)) throw std::invalid_argument("a0 must be non-negative");

  OffsetQamConstellation c;
  c.order_ = order;
  c.side_ = order == 4 ? 2 : order == 16 ? 4 : order == 64 ? 8 : 16;
  c.bits_ = std::countr_zero(static_cast<unsigned>(order));
  c.a_oma_ = a_oma;
  c.a0_ = a0;

  const int r = c.side_;
  c.levels_.resize(r);
  for (int k = 1; k <= r; ++k) {
    c.levels_[k - 1] = (2.0 * k - 1.0 - r) * a_oma / (2.0 * (r - 1));
  }
  for (int k = 0; k + 1 < r; ++k) {
    c.thresholds_.push_back(0.5 * (c.levels_[k] + c.levels_[k + 1]) + a0);
  }

  const int half_bits = c.bits_ / 2;
  c.points_.reserve(order);
  c.words_.reserve(order);
  c.word_to_index_.assign(order, 0);
  for (int li = 0; li < r; ++li) {
    for (int lq = 0; lq < r; ++lq) {
      c.points_.push_back({c.levels_[li] + a0, c.levels_[lq] + a0});
      const std::uint32_t w = (gray(static_cast<std::uint32_t>(li)) << half_bits) |
                              gray(static_cast<std::uint32_t>(lq));
      c.word_to_index_[w] = c.words_.size();
      c.words_.push_back(w);
    }
  }
  return c;
}

int OffsetQamConstellation::decide_level(double x) const {
  // Number of thresholds strictly below x; x == threshold lands on the lower level.
  const auto it = std::lower_bound(thresholds_.begin(), thresholds_.end(), x);
  return static_cast<int>(it - thresholds_.begin());
}

double average_symbol_energy(const OffsetQamConstellation& c) {
  double sum = 0.0;
  for (const auto& p : c.points()) {
    const double di = p.i - c.a0();
    const double dq = p.q - c.a0();
    sum += di * di + dq * dq;
  }
  return sum / static_cast<double>(c.order());
}

std::uint32_t bits_to_word(std::span<const std::uint8_t> bits) {
  std::uint32_t w = 0;
  for (auto b : bits) w = (w << 1) | (b ? 1U : 0U);
  return w;
}

BitVector word_to_bits(std::uint32_t word, int width) {
  BitVector bits(width);
  for (int k = 0; k < width; ++k) bits[k] = static_cast<std::uint8_t>((word >> (width - 1 - k)) & 1U);
  return bits;
}

IqPoint map_bits(const OffsetQamConstellation& c, std::span<const std::uint8_t> bits) {
  if (static_cast<int>(bits.size()) != c.bits_per_symbol()) {
    throw std::invalid_argument("map_bits: expected " + std::to_string(c.bits_per_symbol()) +
                                " bits, got " + std::to_string(bits.size()));
  }
  return c.point(c.index_of_word(bits_to_word(bits)));
}

BitVector demap_point(const OffsetQamConstellation& c, double i, double q) {
  return word_to_bits(c.words()[c.demap_index(i, q)], c.bits_per_symbol());
}

}  // namespace ocpr
