#include "orbilab/ncalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace orbilab {

Word Word::single_family(std::initializer_list<int> variables, int family) {
  Word w;
  for (int v : variables) w.letters.push_back({family, v, false});
  return w;
}

Word Word::power(int k, int family, int variable) {
  Word w;
  for (int i = 0; i < k; ++i) w.letters.push_back({family, variable, false});
  return w;
}

Word Word::rotated(int shift) const {
  if (letters.empty()) return *this;
  Word w;
  const int n = length();
  shift = ((shift % n) + n) % n;
  for (int i = 0; i < n; ++i) w.letters.push_back(letters[(i + shift) % n]);
  return w;
}

std::string Word::key() const {
  std::string k;
  k.reserve(letters.size() * 9);
  for (const Letter& l : letters) {
    k += std::to_string(l.family);
    k += ',';
    k += std::to_string(l.variable);
    k += l.adjoint ? "*;" : ";";
  }
  return k;
}

namespace {

double catalan(int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c = c * 2.0 * (2 * i + 1) / (i + 2);
  return c;
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
  return b;
}

// k-th moment of free unitary Brownian motion at time t (Biane's formula):
// tau(v_t^k) = e^{-kt/2} sum_{j=0}^{k-1} (-t)^j / j! * k^{j-1} * C(k, j+1).
double fubm_moment(int k, double t) {
  if (k == 0) return 1.0;
  double sum = 0.0;
  double tj = 1.0;   // (-t)^j
  double fact = 1.0; // j!
  for (int j = 0; j < k; ++j) {
    if (j > 0) {
      tj *= -t;
      fact *= j;
    }
    sum += tj / fact * std::pow(static_cast<double>(k), j - 1) * binom(k, j + 1);
  }
  return std::exp(-0.5 * k * t) * sum;
}

// tau(exp(i k sqrt(t) h)) for h standard semicircular: the characteristic
// function of the semicircle law, J_1(2s)/s at s = k sqrt(t).
double exp_semicircular_moment(int k, double t) {
  if (k == 0) return 1.0;
  const double s = k * std::sqrt(t);
  if (s < 1e-8) return 1.0 - s * s / 2.0;
  return std::cyl_bessel_j(1, 2.0 * s) / s;
}

}  // namespace

struct TracialSpec::Impl {
  enum class Kind {
    Semicircular,
    Projection,
    FiniteAtoms,
    FubmUnitary,
    ExpSemicircularUnitary,
    MatrixModel,
    FreeProduct,
    Liberated,
  };

  Kind kind;
  double alpha = 0.0;  // projection
  std::vector<double> atom_values, atom_weights;
  double time = 0.0;  // unitary marginals
  std::vector<std::vector<CMatrix>> families;  // matrix model
  std::vector<TracialSpec> factors;            // free product
  std::shared_ptr<const Impl> base;            // liberated: the free product
  int conjugated_families = 0;                 // liberated: number of X families
  double bound = 1.0;

  // family -> (factor index, local family) for free products
  std::vector<std::pair<int, int>> family_map;

  mutable std::mutex memo_mutex;
  mutable std::unordered_map<std::string, Complex> memo;

  int family_count() const {
    switch (kind) {
      case Kind::MatrixModel:
        return static_cast<int>(families.size());
      case Kind::FreeProduct:
        return static_cast<int>(family_map.size());
      case Kind::Liberated:
        return 2 * conjugated_families;
      default:
        return 1;
    }
  }

  int variable_count(int family) const {
    switch (kind) {
      case Kind::MatrixModel:
        return static_cast<int>(families.at(family).size());
      case Kind::FreeProduct: {
        const auto [f, lf] = family_map.at(family);
        return factors[f].variable_count(lf);
      }
      case Kind::Liberated:
        if (family < conjugated_families) {
          return base->factors[0].variable_count(family);
        }
        return 1;
      default:
        return 1;
    }
  }

  bool unitary_family(int family) const {
    switch (kind) {
      case Kind::FubmUnitary:
      case Kind::ExpSemicircularUnitary:
        return true;
      case Kind::FreeProduct: {
        const auto [f, lf] = family_map.at(family);
        return factors[f].unitary_family(lf);
      }
      case Kind::Liberated:
        return family >= conjugated_families;
      default:
        return false;
    }
  }

  TracialSpec base_spec() const { return TracialSpec(base); }

  Complex moment(const Word& w) const;
  Complex catalog_moment(const Word& w) const;
  Complex free_product_moment_impl(const Word& w) const;
  Complex liberated_moment(const Word& w) const;
};

namespace {

void validate_word(const TracialSpec& spec, const Word& w) {
  for (std::size_t i = 0; i < w.letters.size(); ++i) {
    const Letter& l = w.letters[i];
    if (l.family < 0 || l.family >= spec.family_count()) {
      throw std::invalid_argument("moment: letter " + std::to_string(i) +
                                  " family out of range");
    }
    if (l.variable < 0 || l.variable >= spec.variable_count(l.family)) {
      throw std::invalid_argument("moment: letter " + std::to_string(i) +
                                  " variable out of range");
    }
    if (l.adjoint && !spec.unitary_family(l.family)) {
      throw std::invalid_argument("moment: adjoint on self-adjoint letter " +
                                  std::to_string(i));
    }
  }
}

}  // namespace

Complex TracialSpec::Impl::catalog_moment(const Word& w) const {
  const int k = w.length();
  switch (kind) {
    case Kind::Semicircular:
      return (k % 2 == 1) ? 0.0 : catalan(k / 2);
    case Kind::Projection:
      return (k == 0) ? 1.0 : alpha;
    case Kind::FiniteAtoms: {
      double s = 0.0;
      for (std::size_t i = 0; i < atom_values.size(); ++i) {
        s += atom_weights[i] * std::pow(atom_values[i], k);
      }
      return s;
    }
    case Kind::FubmUnitary:
    case Kind::ExpSemicircularUnitary: {
      // Words in v, v* reduce by the signed exponent sum.
      int e = 0;
      for (const Letter& l : w.letters) e += l.adjoint ? -1 : 1;
      const int a = std::abs(e);
      return (kind == Kind::FubmUnitary) ? fubm_moment(a, time)
                                         : exp_semicircular_moment(a, time);
    }
    default:
      throw std::logic_error("catalog_moment: not a catalog kind");
  }
}

namespace {

struct Block {
  int factor;
  Word word;  // letters use the factor's local family indices
  bool centered;
};

class FreeProductEvaluator {
 public:
  FreeProductEvaluator(const std::vector<TracialSpec>& factors, long depth_limit)
      : factors_(factors), depth_limit_(depth_limit) {}

  Complex eval(std::vector<Block> blocks) { return phi(std::move(blocks), 0); }

 private:
  Complex factor_moment(const Block& b) const {
    return factors_[b.factor].moment(b.word);
  }

  Complex phi(std::vector<Block> blocks, long depth) {
    if (depth > depth_limit_) {
      throw std::runtime_error("free product moment: internal error, recursion depth " +
                               std::to_string(depth) + " exceeds word-length bound");
    }

    // Merge the first adjacent same-factor pair by distributing the
    // centered parts: (w1 - c1)(w2 - c2) expands into plain-word terms.
    for (std::size_t t = 0; t + 1 < blocks.size(); ++t) {
      if (blocks[t].factor != blocks[t + 1].factor) continue;
      const Block b1 = blocks[t];
      const Block b2 = blocks[t + 1];
      Word concat = b1.word;
      concat.letters.insert(concat.letters.end(), b2.word.letters.begin(),
                            b2.word.letters.end());

      std::vector<Block> merged(blocks);
      merged[t] = Block{b1.factor, std::move(concat), false};
      merged.erase(merged.begin() + t + 1);
      Complex result = phi(std::move(merged), depth + 1);

      if (b1.centered) {
        const Complex c1 = factor_moment(b1);
        std::vector<Block> rest(blocks);
        rest[t + 1].centered = b2.centered;
        rest.erase(rest.begin() + t);
        result -= c1 * phi(std::move(rest), depth + 1);
      }
      if (b2.centered) {
        const Complex c2 = factor_moment(b2);
        std::vector<Block> rest(blocks);
        rest.erase(rest.begin() + t + 1);
        result -= c2 * phi(std::move(rest), depth + 1);
      }
      if (b1.centered && b2.centered) {
        const Complex c1 = factor_moment(b1);
        const Complex c2 = factor_moment(b2);
        std::vector<Block> rest(blocks);
        rest.erase(rest.begin() + t, rest.begin() + t + 2);
        result += c1 * c2 * phi(std::move(rest), depth + 1);
      }
      return result;
    }

    if (blocks.empty()) return 1.0;
    if (blocks.size() == 1) {
      return blocks[0].centered ? Complex(0.0) : factor_moment(blocks[0]);
    }

    // Blocks alternate across factors. A product of centered elements from
    // alternating factors has vanishing moment by free independence.
    std::size_t split = blocks.size();
    for (std::size_t t = 0; t < blocks.size(); ++t) {
      if (!blocks[t].centered) {
        split = t;
        break;
      }
    }
    if (split == blocks.size()) return 0.0;

    const Complex c = factor_moment(blocks[split]);
    std::vector<Block> without(blocks);
    without.erase(without.begin() + split);
    std::vector<Block> with_centered(std::move(blocks));
    with_centered[split].centered = true;
    return c * phi(std::move(without), depth + 1) +
           phi(std::move(with_centered), depth + 1);
  }

  const std::vector<TracialSpec>& factors_;
  long depth_limit_;
};

}  // namespace

Complex TracialSpec::Impl::free_product_moment_impl(const Word& w) const {
  // Split into maximal runs within one factor, translating global family
  // indices to the factor's local ones.
  std::vector<Block> blocks;
  for (const Letter& l : w.letters) {
    const auto [f, lf] = family_map[l.family];
    const Letter local{lf, l.variable, l.adjoint};
    if (!blocks.empty() && blocks.back().factor == f) {
      blocks.back().word.letters.push_back(local);
    } else {
      blocks.push_back(Block{f, Word{{local}}, false});
    }
  }
  const long limit = std::max<long>(32, static_cast<long>(w.length()) * w.length());
  FreeProductEvaluator ev(factors, limit);
  return ev.eval(std::move(blocks));
}

Complex TracialSpec::Impl::liberated_moment(const Word& w) const {
  // Rewrite each conjugated letter Y_ij as v_i x_ij v_i^* in the base
  // free product; conjugator letters pass through unchanged.
  const int n = conjugated_families;
  Word rewritten;
  rewritten.letters.reserve(3 * w.letters.size());
  for (const Letter& l : w.letters) {
    if (l.family < n) {
      rewritten.letters.push_back({n + l.family, 0, false});
      rewritten.letters.push_back({l.family, l.variable, false});
      rewritten.letters.push_back({n + l.family, 0, true});
    } else {
      rewritten.letters.push_back(l);
    }
  }
  return base_spec().moment(rewritten);
}

Complex TracialSpec::Impl::moment(const Word& w) const {
  switch (kind) {
    case Kind::MatrixModel:
      return eval_word(w, families);
    case Kind::FreeProduct:
      return free_product_moment_impl(w);
    case Kind::Liberated:
      return liberated_moment(w);
    default:
      return catalog_moment(w);
  }
}

TracialSpec TracialSpec::semicircular() {
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::Semicircular;
  impl->bound = 2.0;
  return TracialSpec(std::move(impl));
}

TracialSpec TracialSpec::projection(double alpha) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("projection: alpha must lie in [0,1]");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::Projection;
  impl->alpha = alpha;
  impl->bound = 1.0;
  return TracialSpec(std::move(impl));
}

TracialSpec TracialSpec::finite_atoms(std::vector<double> values,
                                      std::vector<double> weights) {
  if (values.empty() || values.size() != weights.size()) {
    throw std::invalid_argument("finite_atoms: values/weights size mismatch");
  }
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("finite_atoms: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("finite_atoms: weights must sum to 1");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::FiniteAtoms;
  impl->bound = 0.0;
  for (double v : values) impl->bound = std::max(impl->bound, std::abs(v));
  impl->atom_values = std::move(values);
  impl->atom_weights = std::move(weights);
  return TracialSpec(std::move(impl));
}

TracialSpec TracialSpec::fubm_unitary(double t) {
  if (t < 0.0) throw std::invalid_argument("fubm_unitary: negative time");
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::FubmUnitary;
  impl->time = t;
  impl->bound = 1.0;
  return TracialSpec(std::move(impl));
}

TracialSpec TracialSpec::exp_semicircular_unitary(double t) {
  if (t < 0.0) throw std::invalid_argument("exp_semicircular_unitary: negative time");
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::ExpSemicircularUnitary;
  impl->time = t;
  impl->bound = 1.0;
  return TracialSpec(std::move(impl));
}

TracialSpec TracialSpec::matrix_model(std::vector<std::vector<CMatrix>> families) {
  if (families.empty()) throw std::invalid_argument("matrix_model: no families");
  Eigen::Index dim = -1;
  double bound = 0.0;
  for (const auto& fam : families) {
    if (fam.empty()) throw std::invalid_argument("matrix_model: empty family");
    for (const CMatrix& m : fam) {
      if (m.rows() != m.cols()) throw std::invalid_argument("matrix_model: non-square");
      if (dim < 0) dim = m.rows();
      if (m.rows() != dim) throw std::invalid_argument("matrix_model: dimension mismatch");
      if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("matrix_model: matrices must be self-adjoint");
      }
      bound = std::max(bound, matrix_norm(m, NormKind::Operator));
    }
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::MatrixModel;
  impl->families = std::move(families);
  impl->bound = bound;
  return TracialSpec(std::move(impl));
}

TracialSpec TracialSpec::free_product(std::vector<TracialSpec> factors) {
  if (factors.empty()) throw std::invalid_argument("free_product: no factors");
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::FreeProduct;
  impl->bound = 0.0;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    impl->bound = std::max(impl->bound, factors[f].operator_bound());
    for (int lf = 0; lf < factors[f].family_count(); ++lf) {
      impl->family_map.emplace_back(static_cast<int>(f), lf);
    }
  }
  impl->factors = std::move(factors);
  return TracialSpec(std::move(impl));
}

TracialSpec TracialSpec::liberated(const TracialSpec& x_joint,
                                   std::vector<TracialSpec> v_marginals) {
  const int n = x_joint.family_count();
  if (static_cast<int>(v_marginals.size()) != n) {
    throw std::invalid_argument("liberated: one conjugator per family required");
  }
  std::vector<TracialSpec> factors;
  factors.push_back(x_joint);
  for (auto& v : v_marginals) {
    if (v.family_count() != 1 || !v.unitary_family(0)) {
      throw std::invalid_argument("liberated: conjugators must be single unitary families");
    }
    factors.push_back(std::move(v));
  }
  TracialSpec base = free_product(std::move(factors));
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::Liberated;
  impl->base = base.impl_;
  impl->conjugated_families = n;
  impl->bound = x_joint.operator_bound();
  return TracialSpec(std::move(impl));
}

int TracialSpec::family_count() const { return impl_->family_count(); }
int TracialSpec::variable_count(int family) const { return impl_->variable_count(family); }
bool TracialSpec::unitary_family(int family) const { return impl_->unitary_family(family); }
double TracialSpec::operator_bound() const { return impl_->bound; }

Complex TracialSpec::moment(const Word& w) const {
  validate_word(*this, w);
  const std::string key = w.key();
  {
    std::lock_guard<std::mutex> lock(impl_->memo_mutex);
    auto it = impl_->memo.find(key);
    if (it != impl_->memo.end()) return it->second;
  }
  const Complex value = impl_->moment(w);
  {
    std::lock_guard<std::mutex> lock(impl_->memo_mutex);
    impl_->memo.emplace(key, value);
  }
  return value;
}

namespace {

nlohmann::json matrix_to_json(const CMatrix& m) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json rrow = nlohmann::json::array();
    nlohmann::json irow = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rrow.push_back(m(i, j).real());
      irow.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  return nlohmann::json{{"re", std::move(re)}, {"im", std::move(im)}};
}

CMatrix matrix_from_json(const nlohmann::json& j) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  const Eigen::Index n = static_cast<Eigen::Index>(re.size());
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      m(i, k) = Complex(re.at(i).at(k).get<double>(), im.at(i).at(k).get<double>());
    }
  }
  return m;
}

}  // namespace

nlohmann::json TracialSpec::to_json() const {
  nlohmann::json j;
  j["schema"] = "tracial-spec/1";
  j["operator_bound"] = impl_->bound;
  switch (impl_->kind) {
    case Impl::Kind::Semicircular:
      j["kind"] = "semicircular";
      break;
    case Impl::Kind::Projection:
      j["kind"] = "projection";
      j["alpha"] = impl_->alpha;
      break;
    case Impl::Kind::FiniteAtoms:
      j["kind"] = "finite-atoms";
      j["values"] = impl_->atom_values;
      j["weights"] = impl_->atom_weights;
      break;
    case Impl::Kind::FubmUnitary:
      j["kind"] = "fubm-unitary";
      j["time"] = impl_->time;
      break;
    case Impl::Kind::ExpSemicircularUnitary:
      j["kind"] = "exp-semicircular-unitary";
      j["time"] = impl_->time;
      break;
    case Impl::Kind::MatrixModel: {
      j["kind"] = "matrix-model";
      nlohmann::json fams = nlohmann::json::array();
      for (const auto& fam : impl_->families) {
        nlohmann::json f = nlohmann::json::array();
        for (const CMatrix& m : fam) f.push_back(matrix_to_json(m));
        fams.push_back(std::move(f));
      }
      j["families"] = std::move(fams);
      break;
    }
    case Impl::Kind::FreeProduct: {
      j["kind"] = "free-product";
      nlohmann::json factors = nlohmann::json::array();
      for (const auto& f : impl_->factors) factors.push_back(f.to_json());
      j["factors"] = std::move(factors);
      break;
    }
    case Impl::Kind::Liberated: {
      j["kind"] = "liberated";
      j["x"] = impl_->base->factors[0].to_json();
      nlohmann::json vs = nlohmann::json::array();
      for (std::size_t i = 1; i < impl_->base->factors.size(); ++i) {
        vs.push_back(impl_->base->factors[i].to_json());
      }
      j["v"] = std::move(vs);
      break;
    }
  }
  return j;
}

TracialSpec TracialSpec::from_json(const nlohmann::json& j) {
  if (j.at("schema").get<std::string>() != "tracial-spec/1") {
    throw std::invalid_argument("TracialSpec: unknown schema");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "semicircular") return semicircular();
  if (kind == "projection") return projection(j.at("alpha").get<double>());
  if (kind == "finite-atoms") {
    return finite_atoms(j.at("values").get<std::vector<double>>(),
                        j.at("weights").get<std::vector<double>>());
  }
  if (kind == "fubm-unitary") return fubm_unitary(j.at("time").get<double>());
  if (kind == "exp-semicircular-unitary") {
    return exp_semicircular_unitary(j.at("time").get<double>());
  }
  if (kind == "matrix-model") {
    std::vector<std::vector<CMatrix>> families;
    for (const auto& fam : j.at("families")) {
      std::vector<CMatrix> f;
      for (const auto& m : fam) f.push_back(matrix_from_json(m));
      families.push_back(std::move(f));
    }
    return matrix_model(std::move(families));
  }
  if (kind == "free-product") {
    std::vector<TracialSpec> factors;
    for (const auto& f : j.at("factors")) factors.push_back(from_json(f));
    return free_product(std::move(factors));
  }
  if (kind == "liberated") {
    std::vector<TracialSpec> vs;
    for (const auto& v : j.at("v")) vs.push_back(from_json(v));
    return liberated(from_json(j.at("x")), std::move(vs));
  }
  throw std::invalid_argument("TracialSpec: unknown kind " + kind);
}

Complex eval_word(const Word& w, const std::vector<std::vector<CMatrix>>& assignment) {
  if (assignment.empty() || assignment[0].empty()) {
    throw std::invalid_argument("eval_word: empty assignment");
  }
  const Eigen::Index n = assignment[0][0].rows();
  if (w.letters.empty()) return 1.0;

  CMatrix product;
  bool first = true;
  for (std::size_t i = 0; i < w.letters.size(); ++i) {
    const Letter& l = w.letters[i];
    if (l.family < 0 || l.family >= static_cast<int>(assignment.size()) ||
        l.variable < 0 ||
        l.variable >= static_cast<int>(assignment[l.family].size())) {
      throw std::invalid_argument("eval_word: letter " + std::to_string(i) +
                                  " has no assigned matrix");
    }
    const CMatrix& m = assignment[l.family][l.variable];
    if (m.rows() != n || m.cols() != n) {
      throw std::invalid_argument("eval_word: dimension mismatch at letter " +
                                  std::to_string(i));
    }
    if (first) {
      product = l.adjoint ? m.adjoint() : m;
      first = false;
    } else if (l.adjoint) {
      product = product * m.adjoint();
    } else {
      product = product * m;
    }
  }
  return product.trace() / static_cast<double>(n);
}

Complex free_product_moment(const std::vector<TracialSpec>& marginals, const Word& w) {
  return TracialSpec::free_product(marginals).moment(w);
}

long word_count(int alphabet, int m) {
  long total = 0;
  long level = 1;
  for (int k = 1; k <= m; ++k) {
    if (level > (1L << 50) / std::max(1, alphabet)) return -1;  // overflow guard
    level *= alphabet;
    total += level;
  }
  return total;
}

double mf_free_deviation(const std::vector<std::vector<CMatrix>>& families, int m,
                         long budget) {
  if (m < 1) throw std::invalid_argument("mf_free_deviation: m must be >= 1");
  if (families.empty()) throw std::invalid_argument("mf_free_deviation: no families");

  struct Sym {
    int family;
    int variable;
    const CMatrix* mat;
  };
  std::vector<Sym> alphabet;
  for (std::size_t i = 0; i < families.size(); ++i) {
    for (std::size_t j = 0; j < families[i].size(); ++j) {
      alphabet.push_back({static_cast<int>(i), static_cast<int>(j), &families[i][j]});
    }
  }
  const long n_words = word_count(static_cast<int>(alphabet.size()), m);
  if (n_words < 0 || n_words > budget) {
    throw std::runtime_error("mf_free_deviation: word enumeration (" +
                             std::to_string(n_words) + ") exceeds budget " +
                             std::to_string(budget));
  }

  // Free-product prediction from the families' own matrix marginals.
  std::vector<TracialSpec> marginals;
  for (const auto& fam : families) {
    marginals.push_back(TracialSpec::matrix_model({fam}));
  }
  const TracialSpec prediction = TracialSpec::free_product(std::move(marginals));

  const Eigen::Index n = alphabet[0].mat->rows();
  const double nn = static_cast<double>(n);
  double worst = 0.0;
  Word word;

  // Depth-first over all words; the running product is extended by one
  // multiplication per interior node, leaves use the O(N^2) trace pairing.
  std::function<void(int, const CMatrix*)> dfs = [&](int depth, const CMatrix* prefix) {
    for (const Sym& s : alphabet) {
      word.letters.push_back({s.family, s.variable, false});
      Complex tr;
      CMatrix extended;
      const CMatrix* next = nullptr;
      if (depth == 0) {
        tr = s.mat->trace() / nn;
        next = s.mat;
      } else if (depth + 1 < m) {
        extended = (*prefix) * (*s.mat);
        tr = extended.trace() / nn;
        next = &extended;
      } else {
        tr = (prefix->array() * s.mat->transpose().array()).sum() / nn;
      }
      const double gap = std::abs(tr - prediction.moment(word));
      worst = std::max(worst, gap);
      if (depth + 1 < m) dfs(depth + 1, next);
      word.letters.pop_back();
    }
  };
  dfs(0, nullptr);
  return worst;
}

}  // namespace orbilab
