#pragma once

#include <bit>
#include <cassert>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace fastassoc {

/// Double-ended priority queue (Atkinson et al. min-max heap). Even levels
/// hold the minimum of their subtree, odd levels the maximum. The root is
/// the minimum; the larger of its two children is the maximum.
template <class T, class Less = std::less<T>>
class MinMaxHeap {
 public:
  MinMaxHeap() = default;
  explicit MinMaxHeap(Less less) : less_(std::move(less)) {}

  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }
  void reserve(std::size_t n) { data_.reserve(n); }
  void clear() { data_.clear(); }

  const T& min() const {
    assert(!empty());
    return data_[0];
  }

  const T& max() const {
    assert(!empty());
    return data_[max_index()];
  }

  void push(T value) {
    data_.push_back(std::move(value));
    bubble_up(data_.size() - 1);
  }

  T pop_min() {
    assert(!empty());
    return remove_at(0);
  }

  T pop_max() {
    assert(!empty());
    return remove_at(max_index());
  }

  /// Underlying storage in heap order.
  const std::vector<T>& items() const { return data_; }

 private:
  static bool on_min_level(std::size_t i) { return (std::bit_width(i + 1) - 1) % 2 == 0; }
  static std::size_t parent(std::size_t i) { return (i - 1) / 2; }

  bool before(std::size_t a, std::size_t b, bool min_level) const {
    return min_level ? less_(data_[a], data_[b]) : less_(data_[b], data_[a]);
  }

  std::size_t max_index() const {
    if (data_.size() == 1) return 0;
    if (data_.size() == 2) return 1;
    return less_(data_[1], data_[2]) ? 2 : 1;
  }

  T remove_at(std::size_t i) {
    T out = std::move(data_[i]);
    if (i + 1 != data_.size()) {
      data_[i] = std::move(data_.back());
      data_.pop_back();
      trickle_down(i);
    } else {
      data_.pop_back();
    }
    return out;
  }

  void bubble_up(std::size_t i) {
    if (i == 0) return;
    std::size_t p = parent(i);
    bool min_level = on_min_level(i);
    if (before(p, i, min_level)) {
      // wrong side of the parent: belongs to the parent's level kind
      std::swap(data_[i], data_[p]);
      bubble_up_grand(p, !min_level);
    } else {
      bubble_up_grand(i, min_level);
    }
  }

  void bubble_up_grand(std::size_t i, bool min_level) {
    while (i > 2) {
      std::size_t g = parent(parent(i));
      if (!before(i, g, min_level)) break;
      std::swap(data_[i], data_[g]);
      i = g;
    }
  }

  void trickle_down(std::size_t i) {
    const std::size_t n = data_.size();
    while (true) {
      bool min_level = on_min_level(i);
      std::size_t first_child = 2 * i + 1;
      if (first_child >= n) return;
      // best among children and grandchildren
      std::size_t m = first_child;
      std::size_t candidates[6] = {first_child, first_child + 1, 2 * first_child + 1, 2 * first_child + 2,
                                   2 * first_child + 3, 2 * first_child + 4};
      for (std::size_t c : candidates) {
        if (c < n && before(c, m, min_level)) m = c;
      }
      if (m > first_child + 1) {
        // grandchild
        if (!before(m, i, min_level)) return;
        std::swap(data_[m], data_[i]);
        std::size_t p = parent(m);
        if (before(p, m, min_level)) std::swap(data_[m], data_[p]);
        i = m;
      } else {
        if (before(m, i, min_level)) std::swap(data_[m], data_[i]);
        return;
      }
    }
  }

  std::vector<T> data_;
  Less less_{};
};

}  // namespace fastassoc
