#include "badtime/forecaster.hpp"

#include "badtime/dataset.hpp"

#include <fstream>
#include <iomanip>

namespace badtime {

Forecaster init_forecaster(Index t_in, Index t_out, Index n, std::uint64_t seed) {
  if (t_in < 1 || t_out < 1 || n < 1) fail(ErrorKind::Config, "forecaster dimensions must be >= 1");
  std::mt19937_64 rng(seed);
  Forecaster p;
  p.A = gaussian_matrix(t_out, t_in, 1.0 / std::sqrt(static_cast<double>(t_in)), rng);
  p.M = gaussian_matrix(n, n, 1.0 / std::sqrt(static_cast<double>(n)), rng);
  p.b = Vector::Zero(t_out);
  p.c = Vector::Zero(n);
  return p;
}

namespace {

template <typename Param>
void adaptive_update(Param& theta, const Param& grad, Param& m, Param& v, const OptState& opt,
                     double c1, double c2) {
  m = opt.beta1 * m + (1.0 - opt.beta1) * grad;
  v = opt.beta2 * v + (1.0 - opt.beta2) * grad.cwiseAbs2();
  theta.array() -= opt.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + opt.eps);
}

}  // namespace

void sgd_step(Forecaster& params, const Forecaster& grads, OptState& opt) {
  if (!(opt.lr > 0.0)) fail(ErrorKind::Config, "learning rate must be positive");
  if (!grads.all_finite()) fail(ErrorKind::Training, "non-finite forecaster gradient");
  ++opt.step;
  if (!opt.adaptive) {
    params.A -= opt.lr * grads.A;
    params.M -= opt.lr * grads.M;
    params.b -= opt.lr * grads.b;
    params.c -= opt.lr * grads.c;
    return;
  }
  if (opt.first.A.size() == 0) {
    opt.first = Forecaster::zeros(params.t_in(), params.t_out(), params.n_vars());
    opt.second = opt.first;
  }
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  adaptive_update(params.A, grads.A, opt.first.A, opt.second.A, opt, c1, c2);
  adaptive_update(params.M, grads.M, opt.first.M, opt.second.M, opt, c1, c2);
  adaptive_update(params.b, grads.b, opt.first.b, opt.second.b, opt, c1, c2);
  adaptive_update(params.c, grads.c, opt.first.c, opt.second.c, opt, c1, c2);
}

void write_checkpoint(const Forecaster& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write checkpoint '" + path + "'");
  out << "badtime-forecaster v1 " << p.t_in() << ' ' << p.t_out() << ' ' << p.n_vars() << '\n';
  out << std::setprecision(17);
  auto emit = [&](const Matrix& m) {
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
      out << '\n';
    }
  };
  emit(p.A);
  emit(p.M);
  emit(p.b.transpose());
  emit(p.c.transpose());
  if (!out) fail(ErrorKind::Io, "write failed for checkpoint '" + path + "'");
}

Forecaster read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open checkpoint '" + path + "'");
  std::string magic, version;
  Index t_in = 0, t_out = 0, n = 0;
  in >> magic >> version >> t_in >> t_out >> n;
  if (!in || magic != "badtime-forecaster" || version != "v1" || t_in < 1 || t_out < 1 || n < 1)
    fail(ErrorKind::Format, "'" + path + "' is not a badtime-forecaster v1 checkpoint");
  Forecaster p = Forecaster::zeros(t_in, t_out, n);
  auto read = [&](auto& m) {
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c)
        if (!(in >> m(r, c))) fail(ErrorKind::Format, "checkpoint '" + path + "' is truncated");
  };
  read(p.A);
  read(p.M);
  read(p.b);
  read(p.c);
  return p;
}

std::uint64_t checksum(const Forecaster& p) {
  std::uint64_t h = checksum(p.A);
  h = h * 31 + checksum(p.M);
  h = h * 31 + checksum(Matrix(p.b));
  h = h * 31 + checksum(Matrix(p.c));
  return h;
}

}  // namespace badtime
