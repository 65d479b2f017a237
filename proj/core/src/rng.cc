#include "sent/rng.h"

namespace sent {

uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t DeriveSeed(std::initializer_list<uint64_t> parts) {
  uint64_t h = 0x51ed270b27a5c3d1ULL;
  for (uint64_t part : parts) h = Mix64(h ^ Mix64(part));
  return h;
}

uint64_t HashString(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

uint64_t Rng::Below(uint64_t n) {
  // Rejection sampling on the top of the range removes modulo bias.
  const uint64_t limit = max() - (max() % n + 1) % n;
  uint64_t r;
  do {
    r = engine_();
  } while (r > limit);
  return r % n;
}

}  // namespace sent
