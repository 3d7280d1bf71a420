#include "ftb/hit_order.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ftb {

HitDesc::HitDesc(float t_, int prim_, int geom_, int inst_)
    : t(t_), prim(prim_), geom(geom_), inst(inst_) {
  if (std::isnan(t_)) throw std::domain_error("HitDesc: NaN distance");
}

std::vector<HitDesc> sortHits(std::span<const HitDesc> hits) {
  std::vector<HitDesc> out(hits.begin(), hits.end());
  std::stable_sort(out.begin(), out.end(), less);
  return out;
}

}  // namespace ftb
