#include "zopn/rng.hpp"

namespace zopn {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : engine_(seed) {}

RngStream RngStream::derive(std::uint64_t master_seed, std::uint64_t run, std::uint64_t iteration) {
  std::uint64_t key = splitmix64(master_seed);
  key = splitmix64(key ^ run);
  key = splitmix64(key ^ (iteration * 0xd1342543de82ef95ULL));
  return RngStream(key);
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() { return uniform_(engine_); }

Vector RngStream::normal_vector(Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal_(engine_);
  return v;
}

Vector RngStream::unit_sphere(Index n) {
  for (;;) {
    Vector v = normal_vector(n);
    const double norm = v.norm();
    if (norm > 0.0) return v / norm;
  }
}

}  // namespace zopn
