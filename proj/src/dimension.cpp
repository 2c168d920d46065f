#include "orbilab/dimension.hpp"

#include <algorithm>
#include <bit>
#include <climits>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace orbilab {

PointCloud::PointCloud(Eigen::MatrixXd distances) {
  if (distances.rows() == 0 || distances.rows() != distances.cols()) {
    throw std::invalid_argument("PointCloud: square distance matrix required");
  }
  for (Eigen::Index i = 0; i < distances.rows(); ++i) {
    if (distances(i, i) != 0.0) {
      throw std::invalid_argument("PointCloud: nonzero self-distance");
    }
    for (Eigen::Index j = 0; j < distances.cols(); ++j) {
      if (distances(i, j) < 0.0) {
        throw std::invalid_argument("PointCloud: negative distance");
      }
      if (std::abs(distances(i, j) - distances(j, i)) > 1e-12) {
        throw std::invalid_argument("PointCloud: asymmetric distance");
      }
    }
  }
  dist_ = std::move(distances);
}

PointCloud PointCloud::from_points(const std::vector<Eigen::VectorXd>& points) {
  const int n = static_cast<int>(points.size());
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) d(i, j) = (points[i] - points[j]).norm();
  }
  return PointCloud(std::move(d));
}

void PointCloud::check_triangle(RngStream& rng, int triples) const {
  const int n = size();
  for (int t = 0; t < triples; ++t) {
    const int i = static_cast<int>(rng.uniform_below(n));
    const int j = static_cast<int>(rng.uniform_below(n));
    const int k = static_cast<int>(rng.uniform_below(n));
    if (dist_(i, k) > dist_(i, j) + dist_(j, k) + 1e-9) {
      throw std::invalid_argument("PointCloud: triangle inequality violated on (" +
                                  std::to_string(i) + "," + std::to_string(j) + "," +
                                  std::to_string(k) + ")");
    }
  }
}

namespace {

using Mask = std::uint64_t;

std::vector<Mask> open_balls(const PointCloud& cloud, double eps) {
  const int n = cloud.size();
  std::vector<Mask> balls(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (cloud.dist(i, j) < eps) balls[i] |= (Mask{1} << j);
    }
  }
  return balls;
}

long greedy_cover(const std::vector<Mask>& balls, Mask universe) {
  Mask uncovered = universe;
  long used = 0;
  while (uncovered != 0) {
    int best = -1;
    int best_gain = -1;
    for (std::size_t i = 0; i < balls.size(); ++i) {
      const int gain = std::popcount(balls[i] & uncovered);
      if (gain > best_gain) {
        best_gain = gain;
        best = static_cast<int>(i);
      }
    }
    uncovered &= ~balls[best];
    ++used;
  }
  return used;
}

// Branch and bound minimum set cover: branch on an uncovered element with
// the fewest candidate balls.
void cover_search(const std::vector<Mask>& balls, Mask uncovered, long used, long& best) {
  if (uncovered == 0) {
    best = std::min(best, used);
    return;
  }
  if (used + 1 >= best) return;
  int max_gain = 0;
  for (const Mask b : balls) max_gain = std::max(max_gain, std::popcount(b & uncovered));
  if (max_gain == 0) return;  // unreachable for center-in-set balls
  const long lower =
      used + (std::popcount(uncovered) + max_gain - 1) / max_gain;
  if (lower >= best) return;

  int pivot = -1;
  int fewest = INT_MAX;
  Mask rest = uncovered;
  while (rest != 0) {
    const int e = std::countr_zero(rest);
    rest &= rest - 1;
    int cnt = 0;
    for (const Mask b : balls) {
      if (b & (Mask{1} << e)) ++cnt;
    }
    if (cnt < fewest) {
      fewest = cnt;
      pivot = e;
    }
  }
  std::vector<int> candidates;
  for (std::size_t i = 0; i < balls.size(); ++i) {
    if (balls[i] & (Mask{1} << pivot)) candidates.push_back(static_cast<int>(i));
  }
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    return std::popcount(balls[a] & uncovered) > std::popcount(balls[b] & uncovered);
  });
  for (int c : candidates) {
    cover_search(balls, uncovered & ~balls[c], used + 1, best);
  }
}

long greedy_packing(const std::vector<Mask>& balls) {
  // pick balls in order of size, keeping pairwise disjointness
  std::vector<int> order(balls.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::popcount(balls[a]) < std::popcount(balls[b]);
  });
  Mask taken = 0;
  long count = 0;
  for (int i : order) {
    if ((balls[i] & taken) == 0) {
      taken |= balls[i];
      ++count;
    }
  }
  return count;
}

// Maximum independent set on the conflict graph by branch and bound.
void mis_search(const std::vector<Mask>& conflicts, Mask candidates, long current,
                long& best) {
  if (current + std::popcount(candidates) <= best) return;
  if (candidates == 0) {
    best = std::max(best, current);
    return;
  }
  const int v = std::countr_zero(candidates);
  // include v
  mis_search(conflicts, candidates & ~conflicts[v] & ~(Mask{1} << v), current + 1, best);
  // exclude v
  mis_search(conflicts, candidates & ~(Mask{1} << v), current, best);
}

void require_exact_size(const PointCloud& cloud) {
  if (cloud.size() > 64) {
    throw std::invalid_argument("exact mode limited to 64 points; use greedy");
  }
}

// exact minimum set cover over an explicit ball list
long exact_cover(std::vector<Mask> balls, Mask universe) {
  std::sort(balls.begin(), balls.end());
  balls.erase(std::unique(balls.begin(), balls.end()), balls.end());
  std::erase_if(balls, [&](Mask b) { return (b & universe) == 0; });
  long best = greedy_cover(balls, universe);
  cover_search(balls, universe, 0, best);
  return best;
}

}  // namespace

long covering_number(const PointCloud& cloud, double eps, SolveMode mode) {
  if (!(eps > 0.0)) throw std::invalid_argument("covering_number: eps must be > 0");
  const int n = cloud.size();
  const Mask universe = (n == 64) ? ~Mask{0} : ((Mask{1} << n) - 1);
  if (mode == SolveMode::Greedy) {
    if (n > 64) {
      throw std::invalid_argument("covering_number: more than 64 points unsupported");
    }
    return greedy_cover(open_balls(cloud, eps), universe);
  }
  require_exact_size(cloud);
  const std::vector<Mask> balls = open_balls(cloud, eps);
  long best = greedy_cover(balls, universe);
  cover_search(balls, universe, 0, best);
  return best;
}

long packing_number(const PointCloud& cloud, double eps, SolveMode mode) {
  if (!(eps > 0.0)) throw std::invalid_argument("packing_number: eps must be > 0");
  const int n = cloud.size();
  if (n > 64) throw std::invalid_argument("packing_number: more than 64 points unsupported");
  const std::vector<Mask> balls = open_balls(cloud, eps);
  if (mode == SolveMode::Greedy) return greedy_packing(balls);
  require_exact_size(cloud);
  std::vector<Mask> conflicts(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && (balls[i] & balls[j]) != 0) conflicts[i] |= (Mask{1} << j);
    }
  }
  long best = greedy_packing(balls);
  const Mask universe = (n == 64) ? ~Mask{0} : ((Mask{1} << n) - 1);
  mis_search(conflicts, universe, 0, best);
  return best;
}

SandwichReport check_kp_sandwich(const PointCloud& cloud, double eps) {
  SandwichReport r;
  r.p_eps = packing_number(cloud, eps, SolveMode::Exact);
  r.k_2eps = covering_number(cloud, 2 * eps, SolveMode::Exact);
  r.p_4eps = packing_number(cloud, 4 * eps, SolveMode::Exact);
  r.holds = (r.p_eps >= r.k_2eps) && (r.k_2eps >= r.p_4eps);
  return r;
}

void FiniteMetricGroup::validate() const {
  const int n = order();
  if (n == 0 || dist.rows() != n || dist.cols() != n) {
    throw std::invalid_argument("FiniteMetricGroup: table/metric size mismatch");
  }
  for (const auto& row : mul) {
    if (static_cast<int>(row.size()) != n) {
      throw std::invalid_argument("FiniteMetricGroup: ragged multiplication table");
    }
  }
  // identity is element 0 by convention
  for (int a = 0; a < n; ++a) {
    if (mul[0][a] != a || mul[a][0] != a) {
      throw std::invalid_argument("FiniteMetricGroup: element 0 is not the identity");
    }
  }
  // bi-invariance spot check: d(ga, gb) == d(a, b) == d(ag, bg)
  for (int g = 0; g < n; ++g) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (std::abs(dist(mul[g][a], mul[g][b]) - dist(a, b)) > 1e-12 ||
            std::abs(dist(mul[a][g], mul[b][g]) - dist(a, b)) > 1e-12) {
          throw std::invalid_argument("FiniteMetricGroup: metric is not bi-invariant");
        }
      }
    }
  }
}

FiniteMetricGroup FiniteMetricGroup::cyclic(int n) {
  if (n < 1) throw std::invalid_argument("cyclic: order must be >= 1");
  FiniteMetricGroup g;
  g.mul.assign(n, std::vector<int>(n, 0));
  g.dist.resize(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      g.mul[a][b] = (a + b) % n;
      const int gap = std::abs(a - b);
      g.dist(a, b) = std::min(gap, n - gap);
    }
  }
  return g;
}

std::vector<std::vector<int>> subgroups(const FiniteMetricGroup& g) {
  const int n = g.order();
  // generate the subgroup of each subset closure seeded by one element,
  // then close pairs; adequate for the small groups used here
  std::vector<std::vector<int>> found;
  auto closure = [&](std::vector<int> seed) {
    std::vector<bool> in(n, false);
    in[0] = true;
    std::vector<int> elems = {0};
    for (int s : seed) {
      if (!in[s]) {
        in[s] = true;
        elems.push_back(s);
      }
    }
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t i = 0; i < elems.size(); ++i) {
        for (std::size_t j = 0; j < elems.size(); ++j) {
          const int p = g.mul[elems[i]][elems[j]];
          if (!in[p]) {
            in[p] = true;
            elems.push_back(p);
            grew = true;
          }
        }
      }
    }
    std::sort(elems.begin(), elems.end());
    return elems;
  };
  auto add_unique = [&](std::vector<int> h) {
    if (std::find(found.begin(), found.end(), h) == found.end()) {
      found.push_back(std::move(h));
    }
  };
  add_unique(closure({}));
  for (int a = 1; a < n; ++a) add_unique(closure({a}));
  for (int a = 1; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) add_unique(closure({a, b}));
  }
  std::sort(found.begin(), found.end());
  return found;
}

namespace {

PointCloud sub_cloud(const Eigen::MatrixXd& dist, const std::vector<int>& elems) {
  const int n = static_cast<int>(elems.size());
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) d(i, j) = dist(elems[i], elems[j]);
  }
  return PointCloud(std::move(d));
}

}  // namespace

HomogeneousCoverReport homogeneous_covering_bound(const FiniteMetricGroup& g,
                                                  const std::vector<int>& subgroup,
                                                  const std::vector<int>& gamma,
                                                  double eps) {
  g.validate();
  const int n = g.order();
  // subgroup closure check
  std::vector<bool> in_h(n, false);
  for (int h : subgroup) in_h.at(h) = true;
  if (subgroup.empty() || !in_h[0]) {
    throw std::invalid_argument("homogeneous_covering_bound: subgroup must contain identity");
  }
  for (int a : subgroup) {
    for (int b : subgroup) {
      if (!in_h[g.mul[a][b]]) {
        throw std::invalid_argument("homogeneous_covering_bound: set is not a subgroup");
      }
    }
  }
  // gamma saturation: gamma must be a union of left cosets gH
  std::vector<bool> in_gamma(n, false);
  for (int x : gamma) in_gamma.at(x) = true;
  for (int x : gamma) {
    for (int h : subgroup) {
      if (!in_gamma[g.mul[x][h]]) {
        throw std::invalid_argument("homogeneous_covering_bound: gamma is not H-saturated");
      }
    }
  }

  // left cosets of H inside gamma, with the quotient metric
  std::vector<int> coset_rep;
  std::vector<bool> seen(n, false);
  for (int x : gamma) {
    if (seen[x]) continue;
    coset_rep.push_back(x);
    for (int h : subgroup) seen[g.mul[x][h]] = true;
  }
  const int q = static_cast<int>(coset_rep.size());
  Eigen::MatrixXd qdist(q, q);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (int h : subgroup) {
        best = std::min(best, g.dist(coset_rep[i], g.mul[coset_rep[j]][h]));
      }
      qdist(i, j) = best;
    }
  }
  // symmetrize exactly against rounding noise in min computations
  qdist = ((qdist + qdist.transpose()) / 2.0).eval();

  HomogeneousCoverReport r;
  r.k_eps_gamma = covering_number(sub_cloud(g.dist, gamma), eps, SolveMode::Exact);
  // The subgroup factor counts ambient balls: the nets of H produced by the
  // bound's construction have centers translated through the whole group, so
  // candidate centers range over G even though the universe is H.
  {
    if (subgroup.size() > 64) {
      throw std::invalid_argument("homogeneous_covering_bound: subgroup above 64 elements");
    }
    std::vector<Mask> balls;
    for (int center = 0; center < n; ++center) {
      Mask ball = 0;
      for (std::size_t t = 0; t < subgroup.size(); ++t) {
        if (g.dist(center, subgroup[t]) < eps) ball |= (Mask{1} << t);
      }
      balls.push_back(ball);
    }
    const Mask universe = (subgroup.size() == 64)
                              ? ~Mask{0}
                              : ((Mask{1} << subgroup.size()) - 1);
    r.k_eps_h = exact_cover(std::move(balls), universe);
  }
  r.p_2eps_quotient = packing_number(PointCloud(qdist), 2 * eps, SolveMode::Exact);
  r.holds = r.k_eps_gamma >= r.k_eps_h * r.p_2eps_quotient;
  return r;
}

Rational HyperfiniteProfile::residual() const {
  Rational total = diffuse_weight;
  for (const auto& [size, w] : atoms) total += w;
  return Rational(1) - total;
}

void HyperfiniteProfile::validate() const {
  if (diffuse_weight < Rational(0) || diffuse_weight > Rational(1)) {
    throw std::invalid_argument("HyperfiniteProfile: diffuse weight outside [0,1]");
  }
  for (const auto& [size, w] : atoms) {
    if (size < 1) throw std::invalid_argument("HyperfiniteProfile: block size must be >= 1");
    if (w <= Rational(0)) {
      throw std::invalid_argument("HyperfiniteProfile: atom weights must be positive");
    }
  }
  if (residual() < Rational(0)) {
    throw std::invalid_argument("HyperfiniteProfile: weights exceed one");
  }
  if (residual_block_size && *residual_block_size < 1) {
    throw std::invalid_argument("HyperfiniteProfile: residual block size must be >= 1");
  }
}

Delta0Result delta0_hyperfinite(const HyperfiniteProfile& profile) {
  profile.validate();
  Delta0Result out;
  Rational sum(0);
  for (const auto& [size, w] : profile.atoms) {
    sum += (w * w) / Rational(size * size);
  }
  const Rational rem = profile.residual();
  if (rem > Rational(0)) {
    if (profile.residual_block_size) {
      const long s = *profile.residual_block_size;
      sum += (rem * rem) / Rational(s * s);
    } else {
      out.residual_flagged = true;
    }
  }
  out.value = Rational(1) - sum;
  return out;
}

ComposeResult delta0_compose(const std::vector<HyperfiniteProfile>& profiles,
                             ComposeRelation relation,
                             std::optional<Rational> custom_term) {
  if (profiles.empty()) throw std::invalid_argument("delta0_compose: no profiles");
  const long n = static_cast<long>(profiles.size());
  std::vector<Rational> deltas;
  for (const auto& p : profiles) {
    const Delta0Result d = delta0_hyperfinite(p);
    if (d.residual_flagged) {
      throw std::invalid_argument(
          "delta0_compose: profiles with undeclared residual weight are not exact");
    }
    deltas.push_back(d.value);
  }

  ComposeResult out;
  switch (relation) {
    case ComposeRelation::Free:
      out.delta0_orb = Rational(0);
      break;
    case ComposeRelation::Identical: {
      for (const auto& p : profiles) {
        if (!(p == profiles.front())) {
          throw std::invalid_argument("delta0_compose: identical mode requires equal profiles");
        }
      }
      out.delta0_orb = Rational(-(n - 1)) * deltas.front();
      break;
    }
    case ComposeRelation::Custom: {
      if (!custom_term) {
        throw std::invalid_argument("delta0_compose: custom relation needs a term");
      }
      if (*custom_term > Rational(0)) {
        throw std::invalid_argument("delta0_compose: orbital term must be non-positive");
      }
      out.delta0_orb = *custom_term;
      break;
    }
  }
  out.delta0_join = out.delta0_orb;
  for (const Rational& d : deltas) out.delta0_join += d;
  return out;
}

Rational parse_rational(const nlohmann::json& j) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    if (slash == std::string::npos) {
      return Rational(std::stoll(s));
    }
    const long long num = std::stoll(s.substr(0, slash));
    const long long den = std::stoll(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("parse_rational: zero denominator");
    return Rational(num, den);
  }
  if (j.is_number_float()) {
    const double x = j.get<double>();
    const long long den = 1'000'000'000LL;
    const long long num = std::llround(x * den);
    if (std::abs(static_cast<double>(num) / den - x) > 1e-12) {
      throw std::invalid_argument("parse_rational: decimal needs more than 9 digits; "
                                  "pass a p/q string");
    }
    return Rational(num, den);
  }
  throw std::invalid_argument("parse_rational: expected number or p/q string");
}

std::string rational_to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

nlohmann::json HyperfiniteProfile::to_json() const {
  nlohmann::json j;
  j["schema"] = "profile/1";
  j["diffuse_weight"] = rational_to_string(diffuse_weight);
  nlohmann::json atoms_j = nlohmann::json::array();
  for (const auto& [size, w] : atoms) {
    atoms_j.push_back(nlohmann::json::array({size, rational_to_string(w)}));
  }
  j["atoms"] = std::move(atoms_j);
  if (residual_block_size) j["residual_block_size"] = *residual_block_size;
  return j;
}

HyperfiniteProfile HyperfiniteProfile::from_json(const nlohmann::json& j) {
  if (j.at("schema").get<std::string>() != "profile/1") {
    throw std::invalid_argument("HyperfiniteProfile: unknown schema");
  }
  HyperfiniteProfile p;
  p.diffuse_weight = parse_rational(j.at("diffuse_weight"));
  for (const auto& atom : j.at("atoms")) {
    p.atoms.push_back({atom.at(0).get<long>(), parse_rational(atom.at(1))});
  }
  if (j.contains("residual_block_size")) {
    p.residual_block_size = j.at("residual_block_size").get<long>();
  }
  p.validate();
  return p;
}

}  // namespace orbilab
