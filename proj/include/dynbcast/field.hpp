// Prime-field arithmetic for the network-coding module. q is a runtime
// parameter (default 257 in the protocol; q = 2 exercises the worst case of
// the 1 - 1/q retention bound). Extension fields are out of scope.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynbcast/graph.hpp"

namespace dynbcast {

class Fq {
 public:
  explicit Fq(uint32_t q) : q_(q) {
    if (q < 2 || !is_prime(q)) throw DomainError("Fq: modulus " + std::to_string(q) + " is not prime");
  }

  uint32_t modulus() const { return q_; }

  uint32_t add(uint32_t a, uint32_t b) const { return reduce(static_cast<uint64_t>(a) + b); }
  uint32_t sub(uint32_t a, uint32_t b) const { return reduce(static_cast<uint64_t>(a) + q_ - b); }
  uint32_t mul(uint32_t a, uint32_t b) const {
    return static_cast<uint32_t>(static_cast<uint64_t>(a) * b % q_);
  }
  uint32_t neg(uint32_t a) const { return a == 0 ? 0 : q_ - a; }

  uint32_t inv(uint32_t a) const {
    if (a % q_ == 0) throw DomainError("Fq: zero has no inverse");
    // Extended Euclid on (a, q).
    int64_t t = 0, new_t = 1;
    int64_t r = q_, new_r = a % q_;
    while (new_r != 0) {
      const int64_t quot = r / new_r;
      t -= quot * new_t;
      std::swap(t, new_t);
      r -= quot * new_r;
      std::swap(r, new_r);
    }
    if (t < 0) t += q_;
    return static_cast<uint32_t>(t);
  }

  uint32_t reduce(uint64_t a) const { return static_cast<uint32_t>(a % q_); }

  // c += k * x, elementwise.
  void add_scaled(std::vector<uint32_t>& c, const std::vector<uint32_t>& x, uint32_t k) const {
    for (size_t i = 0; i < c.size(); ++i)
      c[i] = reduce(c[i] + static_cast<uint64_t>(k) * x[i]);
  }

  void scale(std::vector<uint32_t>& c, uint32_t k) const {
    for (auto& v : c) v = mul(v, k);
  }

  uint32_t dot(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) const {
    uint64_t acc = 0;
    for (size_t i = 0; i < a.size(); ++i) acc = (acc + static_cast<uint64_t>(a[i]) * b[i]) % q_;
    return static_cast<uint32_t>(acc);
  }

 private:
  static bool is_prime(uint32_t q) {
    if (q < 2) return false;
    for (uint32_t d = 2; static_cast<uint64_t>(d) * d <= q; ++d)
      if (q % d == 0) return false;
    return true;
  }

  uint32_t q_;
};

}  // namespace dynbcast
