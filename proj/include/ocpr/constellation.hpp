#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ocpr {

struct IqPoint {
  double i = 0.0;
  double q = 0.0;
};

using BitVector = std::vector<std::uint8_t>;

/// Square offset-QAM constellation.
///
/// Per-axis levels are (2k-1-r) * a_oma / (2(r-1)) for k = 1..r, r = sqrt(order),
/// shifted by the common offset a0 on both axes. Points are stored I-major:
/// point index = i_level * r + q_level, with levels ascending.
///
/// Bit mapping is a per-axis reflected Gray code, I sub-word in the high bits:
/// word = gray(i_level) << (bits/2) | gray(q_level). For 4-QAM the all-zero
/// word is the (-a_oma/2 + a0, -a_oma/2 + a0) corner.
class OffsetQamConstellation {
 public:
  int order() const { return order_; }
  int side() const { return side_; }
  int bits_per_symbol() const { return bits_; }
  double a_oma() const { return a_oma_; }
  double a0() const { return a0_; }
  double m_ratio() const { return a0_ / a_oma_; }

  // Centered per-axis levels (without a0), ascending.
  std::span<const double> levels() const { return levels_; }
  // Absolute decision boundaries (levels midpoints shifted by a0), ascending.
  std::span<const double> thresholds() const { return thresholds_; }
  std::span<const IqPoint> points() const { return points_; }
  // Gray word of every point, indexed like points().
  std::span<const std::uint32_t> words() const { return words_; }

  IqPoint point(std::size_t index) const { return points_.at(index); }
  int i_level_of(std::size_t index) const { return static_cast<int>(index) / side_; }
  int q_level_of(std::size_t index) const { return static_cast<int>(index) % side_; }

  // Level index of a coordinate on either axis; ties go to the lower level.
  int decide_level(double x) const;
  std::size_t demap_index(double i, double q) const {
    return static_cast<std::size_t>(decide_level(i) * side_ + decide_level(q));
  }
  std::size_t index_of_word(std::uint32_t word) const { return word_to_index_.at(word); }

 private:
  friend OffsetQamConstellation build_constellation(int, double, double);
  OffsetQamConstellation() = default;

  int order_ = 0;
  int side_ = 0;
  int bits_ = 0;
  double a_oma_ = 0.0;
  double a0_ = 0.0;
  std::vector<double> levels_;
  std::vector<double> thresholds_;
  std::vector<IqPoint> points_;
  std::vector<std::uint32_t> words_;
  std::vector<std::size_t> word_to_index_;
};

// order in {4, 16, 64, 256}; a_oma > 0; a0 >= 0. Throws std::invalid_argument.
OffsetQamConstellation build_constellation(int order, double a_oma, double a0);

// Mean of (I - a0)^2 + (Q - a0)^2 over all points.
double average_symbol_energy(const OffsetQamConstellation& c);

IqPoint map_bits(const OffsetQamConstellation& c, std::span<const std::uint8_t> bits);
BitVector demap_point(const OffsetQamConstellation& c, double i, double q);

std::uint32_t bits_to_word(std::span<const std::uint8_t> bits);
BitVector word_to_bits(std::uint32_t word, int width);

}  // namespace ocpr
