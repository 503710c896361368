#include "crnosc/inheritance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "crnosc/kinetics.hpp"
#include "crnosc/stoich.hpp"

namespace crnosc {

namespace {

double powi(double base, int exponent) {
  double v = 1.0;
  for (int i = 0; i < exponent; ++i) v *= base;
  return v;
}

// x^A for an integer exponent matrix: entry i is prod_j x_j^{A(i,j)}.
Eigen::VectorXd int_mono(const Eigen::MatrixXi& A, const Eigen::VectorXd& x) {
  Eigen::VectorXd out(A.rows());
  for (int i = 0; i < A.rows(); ++i) {
    double v = 1.0;
    for (int j = 0; j < A.cols(); ++j) v *= powi(x[j], A(i, j));
    out[i] = v;
  }
  return out;
}

// x^A for a real exponent matrix; requires x >> 0.
Eigen::VectorXd real_mono(const Eigen::MatrixXd& A, const Eigen::VectorXd& x) {
  return (A * x.array().log().matrix()).array().exp();
}

std::string matrix_to_string(const Eigen::MatrixXi& M) {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) os << (j ? " " : "") << M(i, j);
    if (i + 1 < M.rows()) os << "; ";
  }
  os << "]";
  return os.str();
}

// Lexicographically first m-subset of beta's rows whose determinant clears
// the conditioning floor 1e-8 * (max row norm)^m.
std::vector<int> pivot_rows(const Eigen::MatrixXi& beta) {
  const int rows = static_cast<int>(beta.rows());
  const int m = static_cast<int>(beta.cols());
  std::vector<int> comb(m);
  for (int i = 0; i < m; ++i) comb[i] = i;
  while (true) {
    Eigen::MatrixXd cand(m, m);
    double max_row_norm = 0.0;
    for (int i = 0; i < m; ++i) {
      cand.row(i) = beta.row(comb[i]).cast<double>();
      max_row_norm = std::max(max_row_norm, cand.row(i).norm());
    }
    double det = cand.determinant();
    if (det != 0.0 && std::abs(det) >= 1e-8 * powi(max_row_norm, m)) return comb;

    // next combination
    int i = m - 1;
    while (i >= 0 && comb[i] == rows - m + i) --i;
    if (i < 0) return {};
    ++comb[i];
    for (int j = i + 1; j < m; ++j) comb[j] = comb[j - 1] + 1;
  }
}

Complex remap_complex(const Complex& c, const std::vector<int>& index_map) {
  Complex out;
  for (const auto& [idx, coeff] : c.coefficients()) out.add(index_map[idx], coeff);
  return out;
}

}  // namespace

Extension Extension::build(const Network& base, std::string_view added_text) {
  Extension ext;
  ext.base_ = base;

  Network parsed = parse_network(added_text);
  const int m = parsed.reaction_count();
  if (m == 0)
    throw ExtensionError(ExtensionError::Kind::NoAddedReactions,
                         "the added-reaction set is empty (at least one reversible reaction "
                         "is required)");
  for (int i = 0; i < m; ++i)
    if (!parsed.reactions()[i].reversible)
      throw ExtensionError(ExtensionError::Kind::NotReversible,
                           "added reaction " + std::to_string(i + 1) + " is not reversible");

  // split the added-text species into base bindings and new species
  const int n = base.species_count();
  std::vector<int> kind(parsed.species_count());  // base index, or -(new ordinal)-1
  std::vector<std::string> fresh;
  for (int s = 0; s < parsed.species_count(); ++s) {
    int bi = base.species_index(parsed.species_name(s));
    if (bi >= 0) {
      kind[s] = bi;
    } else {
      kind[s] = -static_cast<int>(fresh.size()) - 1;
      fresh.push_back(parsed.species_name(s));
    }
  }
  const int total_new = static_cast<int>(fresh.size());
  if (total_new == 0)
    throw ExtensionError(ExtensionError::Kind::NoNewSpecies,
                         "the added reactions introduce no new species");

  // coefficient matrices in first-appearance order of the new species
  ext.a_ = Eigen::MatrixXi::Zero(n, m);
  ext.a_prime_ = Eigen::MatrixXi::Zero(n, m);
  Eigen::MatrixXi b0 = Eigen::MatrixXi::Zero(total_new, m);
  Eigen::MatrixXi b0p = Eigen::MatrixXi::Zero(total_new, m);
  for (int i = 0; i < m; ++i) {
    const Reaction& r = parsed.reactions()[i];
    for (const auto& [s, c] : r.reactant.coefficients()) {
      if (kind[s] >= 0)
        ext.a_(kind[s], i) = c;
      else
        b0(-kind[s] - 1, i) = c;
    }
    for (const auto& [s, c] : r.product.coefficients()) {
      if (kind[s] >= 0)
        ext.a_prime_(kind[s], i) = c;
      else
        b0p(-kind[s] - 1, i) = c;
    }
  }
  ext.alpha_ = ext.a_prime_ - ext.a_;
  Eigen::MatrixXi beta0 = b0p - b0;

  const int rank = rank_and_image(beta0).rank;
  if (rank < m)
    throw ExtensionError(
        ExtensionError::Kind::RankDeficient,
        "rank condition failed: beta = " + matrix_to_string(beta0) + " has rank " +
            std::to_string(rank) + " but must have rank equal to " + std::to_string(m) +
            ", its number of columns (each added reaction must change some new species "
            "independently)");

  std::vector<int> pivots = pivot_rows(beta0);
  if (pivots.empty())
    throw ExtensionError(ExtensionError::Kind::RankDeficient,
                         "beta = " + matrix_to_string(beta0) +
                             " has no well-conditioned set of " + std::to_string(m) +
                             " pivot rows");

  // permutation: pivot rows first, the rest in original order
  std::vector<char> is_pivot(total_new, 0);
  for (int p : pivots) is_pivot[p] = 1;
  ext.perm_ = pivots;
  for (int s = 0; s < total_new; ++s)
    if (!is_pivot[s]) ext.perm_.push_back(s);

  ext.b_.resize(total_new, m);
  ext.b_prime_.resize(total_new, m);
  ext.beta_.resize(total_new, m);
  ext.new_species_.resize(total_new);
  std::vector<int> inv(total_new);
  for (int row = 0; row < total_new; ++row) {
    int orig = ext.perm_[row];
    ext.b_.row(row) = b0.row(orig);
    ext.b_prime_.row(row) = b0p.row(orig);
    ext.beta_.row(row) = beta0.row(orig);
    ext.new_species_[row] = fresh[orig];
    inv[orig] = row;
  }

  // reindex the added reactions over (base species, permuted new species)
  std::vector<int> index_map(parsed.species_count());
  for (int s = 0; s < parsed.species_count(); ++s)
    index_map[s] = kind[s] >= 0 ? kind[s] : n + inv[-kind[s] - 1];
  ext.added_.reserve(m);
  for (const Reaction& r : parsed.reactions()) {
    Reaction out = r;
    out.reactant = remap_complex(r.reactant, index_map);
    out.product = remap_complex(r.product, index_map);
    ext.added_.push_back(std::move(out));
  }

  Eigen::MatrixXd beta_hat_inv =
      ext.beta_.topRows(m).cast<double>().fullPivLu().inverse();
  ext.alpha_bhinv_ = ext.alpha_.cast<double>() * beta_hat_inv;
  ext.gamma_ = -ext.alpha_bhinv_.transpose();
  ext.delta_ = -(ext.beta_.bottomRows(total_new - m).cast<double>() * beta_hat_inv).transpose();
  return ext;
}

RateSchedule synthesize_rates(const Extension& ext, double epsilon, double eta) {
  if (!(epsilon > 0.0) || !(eta > 0.0))
    throw std::invalid_argument("epsilon and eta must be positive");
  RateSchedule s;
  s.epsilon = epsilon;
  s.eta = eta;
  s.sigma_forward = ext.b_hat().colwise().sum();
  s.sigma_backward = ext.b_hat_prime().colwise().sum();
  const int m = ext.m();
  s.k_forward.resize(m);
  s.k_backward.resize(m);
  const double inv_eps = 1.0 / epsilon;
  const double inv_eta = 1.0 / eta;
  for (int i = 0; i < m; ++i) {
    s.k_forward[i] = inv_eps * powi(inv_eta, s.sigma_forward[i]);
    s.k_backward[i] = inv_eps * powi(inv_eta, s.sigma_backward[i]);
  }
  return s;
}

Network extended_network(const Extension& ext, const RateSchedule& sched) {
  if (sched.k_forward.size() != ext.m())
    throw std::invalid_argument("rate schedule does not match the extension");
  std::vector<std::string> names = ext.base().species_names();
  names.insert(names.end(), ext.new_species().begin(), ext.new_species().end());
  std::vector<Reaction> reactions = ext.base().reactions();
  for (int i = 0; i < ext.m(); ++i) {
    Reaction r = ext.added()[i];
    r.k_forward = sched.k_forward[i];
    r.k_backward = sched.k_backward[i];
    reactions.push_back(std::move(r));
  }
  return Network(std::move(names), std::move(reactions));
}

Eigen::VectorXd fast_rate_residual(const Extension& ext, const Eigen::VectorXd& z,
                                   const Eigen::VectorXd& y_hat, double eta) {
  const int m = ext.m(), k = ext.k();
  Eigen::VectorXd x = z + ext.alpha_beta_hat_inv() * y_hat;
  Eigen::VectorXd y(m + k);
  y.head(m) = y_hat;
  y.tail(k) = Eigen::VectorXd::Ones(k) - ext.delta().transpose() * y_hat;

  Eigen::VectorXi sf = ext.b_hat().colwise().sum();
  Eigen::VectorXi sb = ext.b_hat_prime().colwise().sum();
  Eigen::VectorXd t1 = int_mono(ext.a().transpose(), x).cwiseProduct(
      int_mono(ext.b().transpose(), y));
  Eigen::VectorXd t2 = int_mono(ext.a_prime().transpose(), x).cwiseProduct(
      int_mono(ext.b_prime().transpose(), y));
  const double inv_eta = 1.0 / eta;
  for (int i = 0; i < m; ++i) {
    t1[i] *= powi(inv_eta, sf[i]);
    t2[i] *= powi(inv_eta, sb[i]);
  }
  return t1 - t2;
}

Eigen::VectorXd graph_residual(const Extension& ext, const Eigen::VectorXd& z,
                               const Eigen::VectorXd& y_hat, double eta) {
  Eigen::VectorXd x = z + ext.alpha_beta_hat_inv() * y_hat;
  Eigen::VectorXd w = Eigen::VectorXd::Ones(ext.k()) - ext.delta().transpose() * y_hat;
  return y_hat -
         eta * real_mono(ext.gamma(), x).cwiseProduct(real_mono(ext.delta(), w));
}

Eigen::VectorXd slow_manifold_point(const Extension& ext, const Eigen::VectorXd& z, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if ((z.array() <= 0.0).any())
    throw std::domain_error("slow_manifold_point requires z >> 0");
  const int m = ext.m(), k = ext.k();
  const Eigen::MatrixXd& abi = ext.alpha_beta_hat_inv();

  Eigen::VectorXd y_hat = eta * real_mono(ext.gamma(), z);
  double gprev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 80; ++it) {
    Eigen::VectorXd x = z + abi * y_hat;
    Eigen::VectorXd w = Eigen::VectorXd::Ones(k) - ext.delta().transpose() * y_hat;
    if ((x.array() <= 0.0).any() || (w.array() <= 0.0).any())
      throw std::runtime_error(
          "slow_manifold_point: positivity lost during Newton (eta too large)");
    Eigen::VectorXd P = real_mono(ext.gamma(), x).cwiseProduct(real_mono(ext.delta(), w));
    Eigen::VectorXd g = y_hat - eta * P;
    double gnorm = g.lpNorm<Eigen::Infinity>();
    double floor = 1e-15 * (1.0 + y_hat.lpNorm<Eigen::Infinity>());
    if (gnorm < floor || (gnorm >= gprev && gnorm < 1e-12)) break;
    gprev = gnorm;
    Eigen::MatrixXd dg =
        Eigen::MatrixXd::Identity(m, m) -
        eta * P.asDiagonal() *
            (ext.gamma() * x.cwiseInverse().asDiagonal() * abi -
             ext.delta() * w.cwiseInverse().asDiagonal() * ext.delta().transpose());
    y_hat -= dg.fullPivLu().solve(g);
  }

  double gres = graph_residual(ext, z, y_hat, eta).lpNorm<Eigen::Infinity>();
  if (gres > 1e-12 * (1.0 + y_hat.lpNorm<Eigen::Infinity>()))
    throw std::runtime_error("slow_manifold_point: Newton stalled above tolerance");
  if ((y_hat.array() <= 0.0).any())
    throw std::runtime_error("slow_manifold_point: converged point is not positive");
  double fres = fast_rate_residual(ext, z, y_hat, eta).lpNorm<Eigen::Infinity>();
  if (fres > 1e-8)
    throw std::runtime_error("slow_manifold_point: fast-rate residual " + std::to_string(fres) +
                             " exceeds 1e-8");
  return y_hat;
}

ReducedJacobian reduced_jacobian_limit(const Extension& ext, const Eigen::VectorXd& z) {
  if ((z.array() <= 0.0).any())
    throw std::domain_error("reduced_jacobian_limit requires z >> 0");
  Eigen::MatrixXd bh = ext.beta_hat().cast<double>();
  Eigen::VectorXd t0 = int_mono(ext.a().transpose(), z).cwiseProduct(
      real_mono(ext.b_hat().transpose().cast<double>() * ext.gamma(), z));
  Eigen::VectorXd zg = real_mono(ext.gamma(), z);
  ReducedJacobian rj;
  rj.wbar = -bh * t0.asDiagonal() * bh.transpose() * zg.cwiseInverse().asDiagonal();
  rj.eigenvalues = Eigen::EigenSolver<Eigen::MatrixXd>(rj.wbar).eigenvalues();
  return rj;
}

ZyCoordinates to_zy_coordinates(const Extension& ext, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y) {
  if (x.size() != ext.n() || y.size() != ext.m() + ext.k())
    throw std::invalid_argument("to_zy_coordinates: dimension mismatch");
  ZyCoordinates zy;
  zy.y_hat = y.head(ext.m());
  zy.z = x - ext.alpha_beta_hat_inv() * zy.y_hat;
  zy.conserved = ext.delta().transpose() * zy.y_hat + y.tail(ext.k());
  return zy;
}

InheritanceReport verify_inheritance(const PeriodicOrbit& base_orbit, const Extension& ext,
                                     double epsilon, double eta, const Eigen::VectorXd& y0,
                                     const OrbitSearchConfig& cfg) {
  if (base_orbit.classification != OrbitClass::NondegenerateStable)
    throw std::invalid_argument(
        "verify_inheritance requires a nondegenerate-stable base orbit");
  if (y0.size() != ext.m() + ext.k())
    throw std::invalid_argument("y0 must have one value per new species");

  InheritanceReport rep;
  rep.m = ext.m();
  rep.beta_rank = rank_and_image(ext.beta()).rank;
  rep.rank_ok = rep.beta_rank == rep.m;
  rep.permutation = ext.permutation();
  rep.rates = synthesize_rates(ext, epsilon, eta);
  rep.extended = extended_network(ext, rep.rates);

  const int n = ext.n();
  const int total = n + ext.m() + ext.k();
  Eigen::VectorXd x0(total);
  x0.head(n) = base_orbit.anchor;
  x0.tail(ext.m() + ext.k()) = y0;

  // conserved combination along the pre-orbit transient, tracked in chunks to
  // bound memory on stiff runs; there is nothing to track when k = 0
  Eigen::VectorXd c0 = to_zy_coordinates(ext, x0.head(n), y0).conserved;
  double drift = 0.0;
  try {
    MassActionSystem sys(rep.extended);
    IntegratorConfig icfg = cfg.integrator;
    icfg.positive_prefix = total;
    icfg.dense_output = false;
    Eigen::VectorXd x = x0;
    const int chunks = 16;
    for (int c = 0; c < chunks; ++c) {
      Trajectory t = integrate([&sys](const Eigen::VectorXd& s) { return sys.field_raw(s); }, x,
                               cfg.burn_in / chunks, icfg);
      if (ext.k() > 0) {
        for (const Eigen::VectorXd& s : t.states()) {
          Eigen::VectorXd cons =
              to_zy_coordinates(ext, s.head(n), s.tail(ext.m() + ext.k())).conserved;
          drift = std::max(drift, (cons - c0).lpNorm<Eigen::Infinity>());
        }
      }
      x = t.back();
    }
  } catch (const IntegrationError& e) {
    rep.failure = std::string("integration: ") + e.what();
    return rep;
  }

  try {
    rep.orbit = find_periodic_orbit(rep.extended, x0, cfg);
  } catch (const OrbitSearchError& e) {
    rep.failure = to_string(e.kind());
    rep.conservation_drift = drift;
    return rep;
  } catch (const IntegrationError& e) {
    rep.failure = std::string("integration: ") + e.what();
    rep.conservation_drift = drift;
    return rep;
  } catch (const std::runtime_error& e) {
    rep.failure = std::string("classification: ") + e.what();
    rep.conservation_drift = drift;
    return rep;
  }

  rep.hausdorff_old_species =
      hausdorff_distance(rep.orbit->samples.leftCols(n), base_orbit.samples);

  for (int j = 0; j < ext.m() + ext.k(); ++j) {
    const auto col = rep.orbit->samples.col(n + j);
    rep.new_species_ranges.push_back({ext.new_species()[j], col.minCoeff(), col.maxCoeff()});
  }
  if (ext.k() > 0) {
    for (int i = 0; i < rep.orbit->samples.rows(); ++i) {
      Eigen::VectorXd s = rep.orbit->samples.row(i);
      Eigen::VectorXd cons =
          to_zy_coordinates(ext, s.head(n), s.tail(ext.m() + ext.k())).conserved;
      drift = std::max(drift, (cons - c0).lpNorm<Eigen::Infinity>());
    }
  }
  rep.conservation_drift = drift;
  return rep;
}

}  // namespace crnosc
