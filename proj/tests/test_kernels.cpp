#include <Eigen/Dense>
#include <random>
#include <vector>

#include "doctest.h"
#include "respotopt/kernels/kernels.hpp"

using namespace respotopt;

namespace {

// Restores the auto-resolved backend when a test forces one.
struct BackendGuard {
  kernels::Backend saved = kernels::active_backend();
  ~BackendGuard() { kernels::set_backend(saved); }
};

struct RandomCsr {
  int n = 0;
  std::vector<int> row_ptr, cols;
  std::vector<double> vals;
};

RandomCsr make_csr(int n, int max_nnz_per_row, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> nnz(0, max_nnz_per_row);
  std::uniform_int_distribution<int> col(0, n - 1);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  RandomCsr m;
  m.n = n;
  m.row_ptr.push_back(0);
  for (int r = 0; r < n; ++r) {
    const int k = nnz(rng);
    for (int s = 0; s < k; ++s) {
      m.cols.push_back(col(rng));
      m.vals.push_back(val(rng));
    }
    m.row_ptr.push_back(static_cast<int>(m.cols.size()));
  }
  return m;
}

}  // namespace

TEST_CASE("kernel backends are reported and switchable") {
  BackendGuard guard;
  CHECK(kernels::backend_supported(kernels::Backend::Scalar));
  kernels::set_backend(kernels::Backend::Scalar);
  CHECK(kernels::active_backend() == kernels::Backend::Scalar);
  CHECK(std::string(kernels::backend_name(kernels::Backend::Scalar)) == "scalar");
  CHECK(std::string(kernels::backend_name(kernels::Backend::Avx2)) == "avx2");
}

TEST_CASE("csr_matvec matches a dense reference on every backend") {
  BackendGuard guard;
  const RandomCsr m = make_csr(173, 9, 42);
  Eigen::VectorXd x = Eigen::VectorXd::Random(m.n);
  Eigen::VectorXd expect = Eigen::VectorXd::Zero(m.n);
  for (int r = 0; r < m.n; ++r)
    for (int k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k)
      expect[r] += m.vals[k] * x[m.cols[k]];

  for (auto backend : {kernels::Backend::Scalar, kernels::Backend::Avx2}) {
    if (!kernels::backend_supported(backend)) continue;
    kernels::set_backend(backend);
    Eigen::VectorXd y(m.n);
    kernels::csr_matvec(m.n, m.row_ptr.data(), m.cols.data(), m.vals.data(), x.data(),
                        y.data());
    CHECK((y - expect).lpNorm<Eigen::Infinity>() <=
          1e-14 * (1.0 + expect.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("bilinear_form8 and dot8 match Eigen on every backend") {
  BackendGuard guard;
  const int ne = 257;
  Eigen::Matrix<double, 8, 8> M = Eigen::Matrix<double, 8, 8>::Random();
  M = (M + M.transpose()).eval();  // kernels take symmetric element matrices
  Eigen::VectorXd a = Eigen::VectorXd::Random(8 * ne);
  Eigen::VectorXd b = Eigen::VectorXd::Random(8 * ne);
  Eigen::VectorXd v = Eigen::VectorXd::Random(8);

  Eigen::VectorXd expect_bf(ne), expect_dot(ne);
  for (int e = 0; e < ne; ++e) {
    const Eigen::Map<const Eigen::Matrix<double, 8, 1>> ae(a.data() + 8 * e);
    const Eigen::Map<const Eigen::Matrix<double, 8, 1>> be(b.data() + 8 * e);
    expect_bf[e] = ae.dot(M * be);
    expect_dot[e] = v.head<8>().dot(be);
  }

  for (auto backend : {kernels::Backend::Scalar, kernels::Backend::Avx2}) {
    if (!kernels::backend_supported(backend)) continue;
    kernels::set_backend(backend);
    Eigen::VectorXd bf(ne), dt(ne);
    kernels::bilinear_form8(ne, M.data(), a.data(), b.data(), bf.data());
    kernels::dot8(ne, v.data(), b.data(), dt.data());
    CHECK((bf - expect_bf).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((dt - expect_dot).lpNorm<Eigen::Infinity>() <= 1e-13);
  }
}

TEST_CASE("mma_eval agrees across backends and respects the clamp") {
  BackendGuard guard;
  const int n = 117;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u01(0.1, 1.0);
  Eigen::VectorXd p0(n), q0(n), p1(n), q1(n), low(n), upp(n), alfa(n), beta(n);
  for (int j = 0; j < n; ++j) {
    p0[j] = u01(rng);
    q0[j] = u01(rng);
    p1[j] = u01(rng);
    q1[j] = 0.0;
    low[j] = -0.5 * u01(rng);
    upp[j] = 1.0 + 0.5 * u01(rng);
    alfa[j] = 0.05;
    beta[j] = 0.95;
  }

  Eigen::VectorXd x_scalar(n), x_simd(n);
  kernels::set_backend(kernels::Backend::Scalar);
  const double r_scalar = kernels::mma_eval(n, p0.data(), q0.data(), p1.data(),
                                            q1.data(), low.data(), upp.data(),
                                            alfa.data(), beta.data(), 0.37,
                                            x_scalar.data());
  CHECK((x_scalar.array() >= 0.05).all());
  CHECK((x_scalar.array() <= 0.95).all());

  if (kernels::backend_supported(kernels::Backend::Avx2)) {
    kernels::set_backend(kernels::Backend::Avx2);
    const double r_simd = kernels::mma_eval(n, p0.data(), q0.data(), p1.data(),
                                            q1.data(), low.data(), upp.data(),
                                            alfa.data(), beta.data(), 0.37,
                                            x_simd.data());
    CHECK((x_simd - x_scalar).lpNorm<Eigen::Infinity>() <= 1e-14);
    CHECK(r_simd == doctest::Approx(r_scalar).epsilon(1e-12));
  }

  // Null constraint slots: residual is zero and x is the unconstrained minimum.
  Eigen::VectorXd x0(n);
  kernels::set_backend(kernels::Backend::Scalar);
  const double r0 = kernels::mma_eval(n, p0.data(), q0.data(), nullptr, nullptr,
                                      low.data(), upp.data(), alfa.data(), beta.data(),
                                      0.0, x0.data());
  CHECK(r0 == 0.0);
}
