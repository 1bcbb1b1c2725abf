#include "fuzzyirt/likelihood.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "fuzzyirt/error.hpp"
#include "fuzzyirt/quadrature.hpp"

namespace fzirt {

namespace {

constexpr int kBlockSize = 32;
constexpr int kMaxNewton = 200;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

void parallel_blocks(int count, int block_size, int threads,
                     const std::function<void(int, int, int)>& body) {
  const int blocks = (count + block_size - 1) / block_size;
  auto run = [&](int b) { body(b * block_size, std::min(count, (b + 1) * block_size), b); };
  if (threads <= 1 || blocks <= 1) {
    for (int b = 0; b < blocks; ++b) run(b);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  const int workers = std::min(threads, blocks);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int b = next++; b < blocks; b = next++) {
        try {
          run(b);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct LikelihoodProblem::Accumulator {
  bool with_gradient = false;
  double loglik = 0.0;
  Eigen::VectorXd grad_alpha;
  Eigen::VectorXd grad_psi;
  std::vector<double> node_p;  // rows x quadrature nodes
  std::vector<double> node_log_term;
};

LikelihoodProblem::LikelihoodProblem(const BinaryExpansion& expansion, ModelSpec spec)
    : spec_(std::move(spec)), persons_(expansion.persons), items_(expansion.items) {
  if (spec_.nodes() != expansion.nodes)
    throw Error(ErrorCode::invalid_argument, "model spec and expansion disagree on node count");
  dims_ = spec_.dimensions();
  alpha_count_ = fzirt::alpha_count(spec_, items_);
  psi_count_ = covariance_param_count(spec_);
  ones_.assign(alpha_count_, 0);
  zeros_.assign(alpha_count_, 0);
  offsets_.assign(persons_ + 1, 0);
  rows_.reserve(expansion.rows.size());
  int last_person = -1;
  for (const auto& r : expansion.rows) {
    if (r.person < last_person)
      throw Error(ErrorCode::invalid_argument, "expansion rows must be ordered by person");
    if (r.person >= persons_ || r.item >= items_ || r.node >= spec_.nodes())
      throw Error(ErrorCode::invalid_argument, "expansion row index out of range");
    last_person = r.person;
    const int a = fzirt::alpha_index(spec_, r.item, r.node);
    rows_.push_back({a, spec_.node_to_dimension[r.node], static_cast<double>(r.z)});
    ++offsets_[r.person + 1];
    (r.z ? ones_ : zeros_)[a] += 1;
  }
  for (int i = 0; i < persons_; ++i) offsets_[i + 1] += offsets_[i];
}

double LikelihoodProblem::person_conditional_loglik(int person, const Eigen::VectorXd& alpha,
                                                    const Eigen::VectorXd& eta) const {
  double f = 0.0;
  for (int r = offsets_[person]; r < offsets_[person + 1]; ++r) {
    const auto& row = rows_[r];
    const double x = eta[row.dim] + alpha[row.alpha];
    f += row.z * x - log1pexp(x);
  }
  return f;
}

// Posterior mode of u for g(u) = log p(z | sigma u) - u^2 / 2 (strictly
// concave; damped Newton).
double LikelihoodProblem::mode_1d(int person, const Eigen::VectorXd& alpha, double sigma) const {
  const int begin = offsets_[person];
  const int end = offsets_[person + 1];
  auto objective = [&](double u) {
    double g = -0.5 * u * u;
    for (int r = begin; r < end; ++r) {
      const double x = sigma * u + alpha[rows_[r].alpha];
      g += rows_[r].z * x - log1pexp(x);
    }
    return g;
  };
  double u = 0.0;
  double g_cur = objective(u);
  for (int it = 0; it < kMaxNewton; ++it) {
    double v = 0.0;
    double w = 0.0;
    for (int r = begin; r < end; ++r) {
      const double p = logistic(sigma * u + alpha[rows_[r].alpha]);
      v += rows_[r].z - p;
      w += p * (1.0 - p);
    }
    const double grad = sigma * v - u;
    const double step = grad / (1.0 + sigma * sigma * w);
    if (std::abs(step) < 1e-11 * (1.0 + std::abs(u))) {
      u += step;
      break;
    }
    double t = 1.0;
    double g_new = objective(u + step);
    for (int half = 0; half < 60 && g_new < g_cur - 1e-13 * std::abs(g_cur); ++half) {
      t *= 0.5;
      g_new = objective(u + t * step);
    }
    u += t * step;
    g_cur = g_new;
  }
  return u;
}

Eigen::VectorXd LikelihoodProblem::mode_nd(int person, const Eigen::VectorXd& alpha,
                                           const Eigen::MatrixXd& factor) const {
  const int begin = offsets_[person];
  const int end = offsets_[person + 1];
  const int d = dims_;
  auto objective = [&](const Eigen::VectorXd& u) {
    const Eigen::VectorXd eta = factor * u;
    double g = -0.5 * u.squaredNorm();
    for (int r = begin; r < end; ++r) {
      const double x = eta[rows_[r].dim] + alpha[rows_[r].alpha];
      g += rows_[r].z * x - log1pexp(x);
    }
    return g;
  };
  Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd v(d);
  Eigen::VectorXd w(d);
  double g_cur = objective(u);
  for (int it = 0; it < kMaxNewton; ++it) {
    const Eigen::VectorXd eta = factor * u;
    v.setZero();
    w.setZero();
    for (int r = begin; r < end; ++r) {
      const double p = logistic(eta[rows_[r].dim] + alpha[rows_[r].alpha]);
      v[rows_[r].dim] += rows_[r].z - p;
      w[rows_[r].dim] += p * (1.0 - p);
    }
    const Eigen::VectorXd grad = factor.transpose() * v - u;
    const Eigen::MatrixXd h =
        Eigen::MatrixXd::Identity(d, d) + factor.transpose() * w.asDiagonal() * factor;
    const Eigen::VectorXd step = h.llt().solve(grad);
    if (step.lpNorm<Eigen::Infinity>() < 1e-11 * (1.0 + u.lpNorm<Eigen::Infinity>())) {
      u += step;
      break;
    }
    double t = 1.0;
    double g_new = objective(u + step);
    for (int half = 0; half < 60 && g_new < g_cur - 1e-13 * std::abs(g_cur); ++half) {
      t *= 0.5;
      g_new = objective(u + t * step);
    }
    u += t * step;
    g_cur = g_new;
  }
  return u;
}

// One person's marginal log-likelihood and its exact gradient. For one
// dimension the adaptive rule is centered at the posterior mode u* with scale
// s = sqrt(2 / h), h = -g''(u*); the gradient differentiates through u* and s
// by the implicit function theorem. For more dimensions the Laplace
// approximation g(u*) - log det(H) / 2 is differentiated the same way.
void LikelihoodProblem::person_contribution(int person, const Eigen::VectorXd& alpha,
                                            const Eigen::MatrixXd& factor,
                                            const std::vector<FactorDerivative>* derivs,
                                            int quad_nodes, Accumulator& acc) const {
  const int begin = offsets_[person];
  const int end = offsets_[person + 1];
  const int nrows = end - begin;
  if (nrows == 0) return;

  if (dims_ == 1) {
    const double sigma = factor(0, 0);
    const double u = mode_1d(person, alpha, sigma);
    double v_mode = 0.0, w_mode = 0.0, t_mode = 0.0;
    for (int r = begin; r < end; ++r) {
      const double p = logistic(sigma * u + alpha[rows_[r].alpha]);
      const double w = p * (1.0 - p);
      v_mode += rows_[r].z - p;
      w_mode += w;
      t_mode += w * (1.0 - 2.0 * p);
    }
    const double h = 1.0 + sigma * sigma * w_mode;
    const double s = std::sqrt(2.0 / h);

    const auto& rule = gauss_hermite(quad_nodes);
    const int q = quad_nodes;
    acc.node_log_term.resize(q);
    if (acc.with_gradient) acc.node_p.resize(static_cast<size_t>(nrows) * q);
    std::vector<double> node_v(acc.with_gradient ? q : 0);
    double max_term = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < q; ++k) {
      const double uk = u + s * rule.nodes[k];
      double g = -0.5 * uk * uk;
      double vk = 0.0;
      for (int r = begin; r < end; ++r) {
        const double x = sigma * uk + alpha[rows_[r].alpha];
        g += rows_[r].z * x - log1pexp(x);
        if (acc.with_gradient) {
          const double p = logistic(x);
          acc.node_p[static_cast<size_t>(r - begin) * q + k] = p;
          vk += rows_[r].z - p;
        }
      }
      if (acc.with_gradient) node_v[k] = vk;
      acc.node_log_term[k] = rule.log_scaled_weight[k] + g;
      max_term = std::max(max_term, acc.node_log_term[k]);
    }
    double sum = 0.0;
    for (int k = 0; k < q; ++k) sum += std::exp(acc.node_log_term[k] - max_term);
    const double lse = max_term + std::log(sum);
    acc.loglik += lse + std::log(s) - kLogSqrt2Pi;
    if (!acc.with_gradient) return;

    double e_gu = 0.0, e_xgu = 0.0, e_gtau = 0.0;
    for (int k = 0; k < q; ++k) {
      const double omega = std::exp(acc.node_log_term[k] - lse);
      acc.node_log_term[k] = omega;  // reuse as normalized weight
      const double uk = u + s * rule.nodes[k];
      const double gu = sigma * node_v[k] - uk;
      e_gu += omega * gu;
      e_xgu += omega * rule.nodes[k] * gu;
      e_gtau += omega * sigma * uk * node_v[k];
    }
    const double factor_s = 1.0 + s * e_xgu;
    const double half_k = 0.5 * factor_s / h;
    const double sigma2 = sigma * sigma;
    const double coef_w = -sigma * e_gu / h + half_k * sigma2 * sigma2 * t_mode / h;
    const double coef_t = -half_k * sigma2;
    for (int r = begin; r < end; ++r) {
      double pbar = 0.0;
      const double* pr = &acc.node_p[static_cast<size_t>(r - begin) * q];
      for (int k = 0; k < q; ++k) pbar += acc.node_log_term[k] * pr[k];
      const double p = logistic(sigma * u + alpha[rows_[r].alpha]);
      const double w = p * (1.0 - p);
      const double t = w * (1.0 - 2.0 * p);
      acc.grad_alpha[rows_[r].alpha] += (rows_[r].z - pbar) + coef_w * w + coef_t * t;
    }
    if (derivs != nullptr && !derivs->empty()) {
      // psi_0 = log sigma, so d/dpsi_0 acts as sigma * d/dsigma.
      const double du = (sigma * v_mode - sigma2 * u * w_mode) / h;
      const double dh = 2.0 * sigma2 * w_mode + sigma2 * sigma * u * t_mode +
                        sigma2 * sigma * t_mode * du;
      const double dlogs = -0.5 * dh / h;
      acc.grad_psi[0] += e_gtau + du * e_gu + dlogs * factor_s;
    }
    return;
  }

  // Laplace approximation, D > 1.
  const int d = dims_;
  const Eigen::VectorXd u = mode_nd(person, alpha, factor);
  const Eigen::VectorXd eta = factor * u;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd wd = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd td = Eigen::VectorXd::Zero(d);
  double f = 0.0;
  for (int r = begin; r < end; ++r) {
    const auto& row = rows_[r];
    const double x = eta[row.dim] + alpha[row.alpha];
    const double p = logistic(x);
    const double w = p * (1.0 - p);
    f += row.z * x - log1pexp(x);
    v[row.dim] += row.z - p;
    wd[row.dim] += w;
    td[row.dim] += w * (1.0 - 2.0 * p);
  }
  const Eigen::MatrixXd h =
      Eigen::MatrixXd::Identity(d, d) + factor.transpose() * wd.asDiagonal() * factor;
  const Eigen::LLT<Eigen::MatrixXd> llt(h);
  double logdet = 0.0;
  for (int k = 0; k < d; ++k) logdet += 2.0 * std::log(llt.matrixL()(k, k));
  acc.loglik += f - 0.5 * u.squaredNorm() - 0.5 * logdet;
  if (!acc.with_gradient) return;

  const Eigen::MatrixXd h_inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  const Eigen::MatrixXd k_mat = h_inv * factor.transpose();  // H^-1 L^T
  const Eigen::MatrixXd g_mat = factor * k_mat;              // L H^-1 L^T
  const Eigen::VectorXd q = factor.transpose() * td.cwiseProduct(g_mat.diagonal());
  const Eigen::VectorXd c = k_mat.transpose() * q;
  for (int r = begin; r < end; ++r) {
    const auto& row = rows_[r];
    const double p = logistic(eta[row.dim] + alpha[row.alpha]);
    const double w = p * (1.0 - p);
    const double t = w * (1.0 - 2.0 * p);
    acc.grad_alpha[row.alpha] +=
        (row.z - p) - 0.5 * t * g_mat(row.dim, row.dim) + 0.5 * w * c[row.dim];
  }
  if (derivs == nullptr) return;
  for (size_t k = 0; k < derivs->size(); ++k) {
    const auto [r0, c0, e] = (*derivs)[k];
    const double eu = e * u[c0];
    const double g_theta = v[r0] * eu;
    Eigen::VectorXd gu_theta = -factor.row(r0).transpose() * (wd[r0] * eu);
    gu_theta[c0] += e * v[r0];
    const Eigen::VectorXd du = h_inv * gu_theta;
    const double trace = 2.0 * wd[r0] * e * k_mat(c0, r0) + td[r0] * eu * g_mat(r0, r0);
    acc.grad_psi[static_cast<Eigen::Index>(k)] += g_theta - 0.5 * (trace + q.dot(du));
  }
}

LikelihoodValue LikelihoodProblem::evaluate(const Eigen::VectorXd& alpha, const Eigen::VectorXd& psi,
                                            const IntegrationOptions& opts,
                                            bool with_gradient) const {
  if (alpha.size() != alpha_count_ || psi.size() != psi_count_)
    throw Error(ErrorCode::invalid_argument, "parameter vector has wrong length");
  if (!alpha.allFinite() || !psi.allFinite())
    throw Error(ErrorCode::invalid_argument, "non-finite parameter");
  const std::span<const double> psi_span(psi.data(), static_cast<size_t>(psi.size()));
  const Eigen::MatrixXd factor = cholesky_factor(spec_, psi_span);
  std::vector<FactorDerivative> derivs;
  for (int k = 0; k < psi_count_; ++k) derivs.push_back(cholesky_derivative(spec_, psi_span, k));

  const int blocks = (persons_ + kBlockSize - 1) / kBlockSize;
  std::vector<Accumulator> parts(blocks);
  parallel_blocks(persons_, kBlockSize, opts.threads, [&](int b0, int b1, int b) {
    Accumulator& acc = parts[b];
    acc.with_gradient = with_gradient;
    if (with_gradient) {
      acc.grad_alpha = Eigen::VectorXd::Zero(alpha_count_);
      acc.grad_psi = Eigen::VectorXd::Zero(psi_count_);
    }
    for (int i = b0; i < b1; ++i) person_contribution(i, alpha, factor, &derivs, opts.quad_nodes, acc);
  });

  LikelihoodValue out;
  if (with_gradient) {
    out.grad_alpha = Eigen::VectorXd::Zero(alpha_count_);
    out.grad_psi = Eigen::VectorXd::Zero(psi_count_);
  }
  for (const auto& part : parts) {
    out.loglik += part.loglik;
    if (with_gradient) {
      out.grad_alpha += part.grad_alpha;
      out.grad_psi += part.grad_psi;
    }
  }
  if (!std::isfinite(out.loglik) || (with_gradient && (!out.grad_alpha.allFinite() ||
                                                        !out.grad_psi.allFinite())))
    throw Error(ErrorCode::nonfinite_likelihood, "marginal log-likelihood is not finite");
  return out;
}

double LikelihoodProblem::loglik_with_factor(const Eigen::VectorXd& alpha,
                                             const Eigen::MatrixXd& factor,
                                             const IntegrationOptions& opts) const {
  if (alpha.size() != alpha_count_ || factor.rows() != dims_ || factor.cols() != dims_)
    throw Error(ErrorCode::invalid_argument, "parameter shapes do not match the model");
  const int blocks = (persons_ + kBlockSize - 1) / kBlockSize;
  std::vector<Accumulator> parts(blocks);
  parallel_blocks(persons_, kBlockSize, opts.threads, [&](int b0, int b1, int b) {
    for (int i = b0; i < b1; ++i) person_contribution(i, alpha, factor, nullptr, opts.quad_nodes, parts[b]);
  });
  double total = 0.0;
  for (const auto& part : parts) total += part.loglik;
  if (!std::isfinite(total))
    throw Error(ErrorCode::nonfinite_likelihood, "marginal log-likelihood is not finite");
  return total;
}

Eigen::MatrixXd LikelihoodProblem::posterior_modes(const Eigen::VectorXd& alpha,
                                                   const Eigen::MatrixXd& factor,
                                                   int threads) const {
  Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(persons_, dims_);
  parallel_blocks(persons_, kBlockSize, threads, [&](int b0, int b1, int) {
    for (int i = b0; i < b1; ++i) {
      if (offsets_[i] == offsets_[i + 1]) continue;
      if (dims_ == 1) {
        eta(i, 0) = factor(0, 0) * mode_1d(i, alpha, factor(0, 0));
      } else {
        eta.row(i) = (factor * mode_nd(i, alpha, factor)).transpose();
      }
    }
  });
  return eta;
}

}  // namespace fzirt
