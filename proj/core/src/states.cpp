#include "daqec/states.hpp"

#include <fmt/format.h>

#include <cmath>

#include <json.hpp>

namespace daqec {

using json = nlohmann::json;

const char* to_string(Family f) {
  switch (f) {
    case Family::SqVac: return "SqVac";
    case Family::CPS: return "CPS";
    case Family::TSS: return "TSS";
    case Family::CAT: return "CAT";
    case Family::SqCAT: return "SqCAT";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "SqVac") return Family::SqVac;
  if (s == "CPS") return Family::CPS;
  if (s == "TSS") return Family::TSS;
  if (s == "CAT") return Family::CAT;
  if (s == "SqCAT") return Family::SqCAT;
  throw Error(ErrorKind::SpecError, "unknown family '" + s + "'");
}

double db_to_natural(double dB) { return dB / 20.0 * std::log(10.0); }
double natural_to_db(double r) { return r * 20.0 / std::log(10.0); }

NullifierSpec NullifierSpec::sqvac(double r) {
  NullifierSpec s;
  s.family = Family::SqVac;
  s.r = r;
  return s;
}
NullifierSpec NullifierSpec::cps(double r, double eta) {
  NullifierSpec s;
  s.family = Family::CPS;
  s.r = r;
  s.eta = eta;
  return s;
}
NullifierSpec NullifierSpec::tss(double xi) {
  NullifierSpec s;
  s.family = Family::TSS;
  s.xi = xi;
  return s;
}
NullifierSpec NullifierSpec::cat(cplx alpha, int sign) {
  NullifierSpec s;
  s.family = Family::CAT;
  s.alpha = alpha;
  s.sign = sign;
  return s;
}
NullifierSpec NullifierSpec::sqcat(cplx alpha, double r, int sign) {
  NullifierSpec s;
  s.family = Family::SqCAT;
  s.alpha = alpha;
  s.r = r;
  s.sign = sign;
  return s;
}

void NullifierSpec::validate() const {
  auto forbid = [&](bool set, const char* name) {
    if (set)
      throw Error(ErrorKind::SpecError,
                  std::string("parameter '") + name + "' is not used by family " + daqec::to_string(family));
  };
  const bool has_r = r != 0.0, has_eta = eta != 0.0, has_xi = xi != 0.0, has_alpha = alpha != cplx(0.0);
  if (!std::isfinite(r) || !std::isfinite(eta) || !std::isfinite(xi) || !std::isfinite(alpha.real()) ||
      !std::isfinite(alpha.imag()))
    throw Error(ErrorKind::SpecError, "non-finite spec parameter");
  switch (family) {
    case Family::SqVac: forbid(has_eta, "eta"); forbid(has_xi, "xi"); forbid(has_alpha, "alpha"); break;
    case Family::CPS: forbid(has_xi, "xi"); forbid(has_alpha, "alpha"); break;
    case Family::TSS: forbid(has_r, "r"); forbid(has_eta, "eta"); forbid(has_alpha, "alpha"); break;
    case Family::CAT: forbid(has_r, "r"); [[fallthrough]];
    case Family::SqCAT:
      forbid(has_eta, "eta");
      forbid(has_xi, "xi");
      if (sign != 1 && sign != -1) throw Error(ErrorKind::SpecError, "cat sign must be +1 or -1");
      break;
  }
}

cplx NullifierSpec::beta() const { return alpha * std::cosh(r) + std::conj(alpha) * std::sinh(r); }

QuantumState QuantumState::pure(Vec psi, bool joint) {
  QuantumState s;
  s.kind_ = Kind::Pure;
  s.joint_ = joint;
  const auto n = psi.size();
  if (joint && n % 2 != 0) throw Error(ErrorKind::ShapeError, "joint state needs even dimension");
  s.cutoff_ = static_cast<int>(joint ? n / 2 : n);
  s.psi_ = std::move(psi);
  return s;
}

QuantumState QuantumState::density(Mat rho, bool joint) {
  if (rho.rows() != rho.cols()) throw Error(ErrorKind::ShapeError, "density matrix must be square");
  QuantumState s;
  s.kind_ = Kind::Density;
  s.joint_ = joint;
  const auto n = rho.rows();
  if (joint && n % 2 != 0) throw Error(ErrorKind::ShapeError, "joint state needs even dimension");
  s.cutoff_ = static_cast<int>(joint ? n / 2 : n);
  s.rho_ = std::move(rho);
  return s;
}

const Vec& QuantumState::vector() const {
  if (kind_ != Kind::Pure) throw Error(ErrorKind::ShapeError, "state is not pure");
  return psi_;
}

const Mat& QuantumState::matrix() const {
  if (kind_ != Kind::Density) throw Error(ErrorKind::ShapeError, "state is not a density matrix");
  return rho_;
}

Mat QuantumState::rho() const { return kind_ == Kind::Pure ? Mat(psi_ * psi_.adjoint()) : rho_; }

double QuantumState::invariant_violation() const {
  if (kind_ == Kind::Pure) return std::abs(psi_.norm() - 1.0);
  double v = std::abs(rho_.trace() - cplx(1.0));
  v = std::max(v, hermiticity_error(rho_));
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho_ + rho_.adjoint()), Eigen::EigenvaluesOnly);
  v = std::max(v, -es.eigenvalues().minCoeff());
  return v;
}

Vec fock_state(int n, int D) {
  if (n < 0 || n >= D) throw Error(ErrorKind::InvalidCutoff, "Fock index outside cutoff");
  Vec v = Vec::Zero(D);
  v(n) = 1.0;
  return v;
}

Vec coherent_state(cplx alpha, int D) {
  Vec v(D);
  cplx c = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n < D; ++n) {
    v(n) = c;
    c *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  return v;
}

Vec squeezed_vacuum(double r, int D) {
  // ratio recursion; factorials overflow long before interesting cutoffs
  Vec v = Vec::Zero(D);
  const double t = std::tanh(r);
  double c = 1.0;
  for (int n = 0; n < D; n += 2) {
    v(n) = c;
    c *= t * std::sqrt((n + 1.0) * (n + 2.0)) / (n + 2.0);
  }
  v.normalize();
  return v;
}

Mat squeeze_op(double r, int D) {
  const Mat a = annihilation(D);
  const Mat ad = a.adjoint();
  return mat_exp(0.5 * (a * a - ad * ad), r);
}

FockOperator build_nullifier(const NullifierSpec& spec, int D) {
  spec.validate();
  const Mat a = annihilation(D);
  const Mat ad = a.adjoint();
  const double s2 = std::sqrt(2.0);
  switch (spec.family) {
    case Family::SqVac: return std::cosh(spec.r) * a - std::sinh(spec.r) * ad;
    case Family::CPS: {
      auto [x, p] = quadratures(D);
      return I1 * (std::exp(spec.r) / s2) * (p - spec.eta * x * x) + (std::exp(-spec.r) / s2) * x;
    }
    case Family::TSS: return a - spec.xi * ad * ad;
    case Family::CAT: return a * a - spec.alpha * spec.alpha * Mat::Identity(D, D);
    case Family::SqCAT: {
      const Mat b = std::cosh(spec.r) * a + std::sinh(spec.r) * ad;
      const cplx be = spec.beta();
      return b * b - be * be * Mat::Identity(D, D);
    }
  }
  throw Error(ErrorKind::SpecError, "unhandled family");
}

namespace {

Vec cat_vector(cplx alpha, int sign, int D) {
  Vec v = coherent_state(alpha, D) + static_cast<double>(sign) * coherent_state(-alpha, D);
  const double n = v.norm();
  if (n < 1e-300) throw Error(ErrorKind::SpecError, "odd cat with zero amplitude does not exist");
  return v / n;
}

int default_work_cutoff(const NullifierSpec& spec, int D) {
  switch (spec.family) {
    case Family::CPS: return std::max(500, D + 100);
    case Family::TSS: return std::max(240, 3 * D);
    case Family::SqCAT: return D + 80;
    default: return D;
  }
}

double tail_weight(const Vec& w, int D) {
  const int lo = D - std::max(1, D / 10);
  return w.tail(w.size() - lo).squaredNorm() / w.squaredNorm();
}

}  // namespace

Vec build_state_vector(const NullifierSpec& spec, int D, const StateOptions& opt, double* tail) {
  spec.validate();
  if (D < 2) throw Error(ErrorKind::InvalidCutoff, "cutoff must be >= 2");
  const int Dw = opt.work_cutoff > 0 ? std::max(opt.work_cutoff, D) : default_work_cutoff(spec, D);
  Vec w;
  switch (spec.family) {
    case Family::SqVac: w = squeezed_vacuum(spec.r, Dw + 40); break;
    case Family::CPS: {
      // exp(i eta x^3/3) is diagonal in the eigenbasis of the truncated x
      Vec v = squeezed_vacuum(spec.r, Dw);
      auto [x, p] = quadratures(Dw);
      Eigen::SelfAdjointEigenSolver<Mat> es(x);
      const Mat& V = es.eigenvectors();
      Vec c = V.adjoint() * v;
      for (int k = 0; k < Dw; ++k) {
        const double xv = es.eigenvalues()(k);
        c(k) *= std::exp(I1 * spec.eta * xv * xv * xv / 3.0);
      }
      w = V * c;
      break;
    }
    case Family::TSS: {
      const Mat a = annihilation(Dw);
      const Mat ad = a.adjoint();
      const Mat gen = (ad * ad * ad - a * a * a) / 3.0;
      w = mat_exp(gen, spec.xi).col(0);
      break;
    }
    case Family::CAT: w = cat_vector(spec.alpha, spec.sign, Dw + 40); break;
    case Family::SqCAT: {
      const Vec c = cat_vector(spec.beta(), spec.sign, Dw);
      w = squeeze_op(spec.r, Dw) * c;
      break;
    }
  }
  const double tw = tail_weight(w, D);
  if (tail) *tail = tw;
  if (tw > opt.tail_tolerance)
    throw Error(ErrorKind::CutoffTooSmall, fmt::format("{} tail population {:.3g} exceeds tolerance {:.3g} at cutoff {}",
                                                           to_string(spec.family), tw, opt.tail_tolerance, D));
  Vec psi = w.head(D);
  psi.normalize();
  return psi;
}

QuantumState build_state(const NullifierSpec& spec, int D, const StateOptions& opt) {
  return QuantumState::pure(build_state_vector(spec, D, opt));
}

FockOperator code_projector(const NullifierSpec& spec, int D, const StateOptions& opt) {
  if (!spec.parity_symmetric()) throw Error(ErrorKind::SpecError, "code projector needs a CAT or SqCAT spec");
  NullifierSpec sp = spec, sm = spec;
  sp.sign = +1;
  sm.sign = -1;
  const Vec e1 = build_state_vector(sp, D, opt);
  Vec e2 = build_state_vector(sm, D, opt);
  e2 -= e1.dot(e2) * e1;
  e2.normalize();
  return e1 * e1.adjoint() + e2 * e2.adjoint();
}

double annihilation_residual(const FockOperator& delta, const Vec& psi, int rows) {
  return (delta * psi).head(rows).norm();
}

std::string state_to_json(const QuantumState& s) {
  json j;
  j["cutoff"] = s.cutoff();
  j["joint"] = s.joint();
  j["kind"] = s.kind() == QuantumState::Kind::Pure ? "pure" : "density";
  json data = json::array();
  if (s.kind() == QuantumState::Kind::Pure) {
    for (Eigen::Index i = 0; i < s.vector().size(); ++i) data.push_back({s.vector()(i).real(), s.vector()(i).imag()});
  } else {
    const Mat& m = s.matrix();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
      data.push_back(row);
    }
  }
  j["data"] = data;
  return j.dump();
}

QuantumState state_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ShapeError, std::string("bad state JSON: ") + e.what());
  }
  const int D = j.at("cutoff").get<int>();
  const bool joint = j.value("joint", false);
  const int n = joint ? 2 * D : D;
  const auto& data = j.at("data");
  auto entry = [](const json& e) { return cplx(e.at(0).get<double>(), e.at(1).get<double>()); };
  if (static_cast<int>(data.size()) != n) throw Error(ErrorKind::ShapeError, "state JSON size does not match cutoff");
  if (j.at("kind").get<std::string>() == "pure") {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = entry(data[i]);
    return QuantumState::pure(v, joint);
  }
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(data[i].size()) != n) throw Error(ErrorKind::ShapeError, "ragged density matrix in JSON");
    for (int k = 0; k < n; ++k) m(i, k) = entry(data[i][k]);
  }
  return QuantumState::density(m, joint);
}

}  // namespace daqec
