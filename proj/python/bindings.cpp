#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "mixedmc/datagen.hpp"
#include "mixedmc/errors.hpp"
#include "mixedmc/experiment.hpp"
#include "mixedmc/theory.hpp"
#include "mixedmc/typedetect.hpp"

namespace py = pybind11;
using namespace mixedmc;

namespace {

using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

ObservationMask to_mask(const BoolArray& a) {
  if (a.ndim() != 2) throw ConfigError("mask must be two-dimensional");
  const auto v = a.unchecked<2>();
  ObservationMask m{MaskArray(v.shape(0), v.shape(1))};
  for (py::ssize_t i = 0; i < v.shape(0); ++i)
    for (py::ssize_t j = 0; j < v.shape(1); ++j) m.observed(i, j) = v(i, j);
  return m;
}

BoolArray from_mask(const ObservationMask& m) {
  BoolArray out({m.rows(), m.cols()});
  auto v = out.mutable_unchecked<2>();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) v(i, j) = m(i, j);
  return out;
}

py::dict result_dict(const CompletionResult& r, const AdmmConfig& cfg) {
  py::dict d;
  d["theta_hat"] = r.theta_hat;
  d["completed"] = r.completed;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["stagnated"] = r.stagnated;
  d["primal"] = r.final_relative.primal;
  d["dual"] = r.final_relative.dual;
  d["mu"] = cfg.mu;
  d["lambda"] = cfg.lambda;
  return d;
}

py::dict error_dict(const ErrorReport& e) {
  py::dict d;
  d["per_block"] = e.per_block;
  d["average"] = e.average;
  d["overall"] = e.overall;
  return d;
}

AdmmConfig make_config(std::optional<double> mu, std::optional<double> lambda, double alpha, double tol,
                       int max_iter, const std::string& eig) {
  if (mu.has_value() != lambda.has_value()) throw ConfigError("mu and lambda must be given together");
  AdmmConfig cfg;
  cfg.alpha = alpha;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  cfg.eig_mode = EigMode::parse(eig);
  if (mu) {
    cfg.mu = *mu;
    cfg.lambda = *lambda;
  }
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_mixedmc, m) {
  m.doc() = "Mixed-type low-rank matrix completion";

  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<ExpFamModel>(m, "Model")
      .def(py::init(&ExpFamModel::parse), py::arg("spec"))
      .def_property_readonly("kind", [](const ExpFamModel& x) { return std::string(to_token(x.kind())); })
      .def_property_readonly("nuisance", &ExpFamModel::nuisance)
      .def("log_partition", &ExpFamModel::log_partition)
      .def("mean_map", &ExpFamModel::mean_map)
      .def("curvature", &ExpFamModel::curvature)
      .def("canonical_from_mean", &ExpFamModel::canonical_from_mean)
      .def("bregman", &ExpFamModel::bregman)
      .def("__repr__", [](const ExpFamModel& x) { return "Model('" + x.to_string() + "')"; })
      .def("__str__", &ExpFamModel::to_string);

  py::class_<ColumnBlockLayout>(m, "Layout")
      .def(py::init([](const std::string& text, int rows) { return ColumnBlockLayout::parse(text, rows); }),
           py::arg("text"), py::arg("rows"))
      .def_static("mixed", &mixed_layout, py::arg("rows"), py::arg("cols"), py::arg("gamma_shape") = 2.0,
                  py::arg("negbin_r") = 2.0)
      .def_property_readonly("rows", &ColumnBlockLayout::rows)
      .def_property_readonly("cols", &ColumnBlockLayout::cols)
      .def_property_readonly("blocks",
                             [](const ColumnBlockLayout& l) {
                               std::vector<std::pair<std::string, int>> out;
                               for (const auto& b : l.blocks()) out.emplace_back(b.model.to_string(), b.width);
                               return out;
                             })
      .def("to_text", &ColumnBlockLayout::to_text);

  m.def(
      "solve",
      [](const Matrix& y, const BoolArray& mask, const ColumnBlockLayout& layout, std::optional<double> mu,
         std::optional<double> lambda, double alpha, double tol, int max_iter, const std::string& eig,
         double gamma) {
        const ObservationMask mk = to_mask(mask);
        AdmmConfig cfg = make_config(mu, lambda, alpha, tol, max_iter, eig);
        if (!mu) {
          const double p = static_cast<double>(mk.count()) / (static_cast<double>(mk.rows()) * mk.cols());
          cfg = theory_config(layout, p, gamma, PenaltyRule{}, cfg);
        }
        CompletionResult r;
        {
          py::gil_scoped_release release;
          r = solve(y, mk, layout, cfg);
        }
        return result_dict(r, cfg);
      },
      py::arg("y"), py::arg("mask"), py::arg("layout"), py::arg("mu") = py::none(), py::arg("lam") = py::none(),
      py::arg("alpha") = 10.0, py::arg("tol") = 1e-4, py::arg("max_iter") = 2000, py::arg("eig") = "full",
      py::arg("gamma") = 8.0,
      "Completes y on the observed entries. Without mu/lam the theory penalties are used.");

  m.def(
      "make_instance",
      [](const ColumnBlockLayout& layout, int rank, double gamma, double p, std::uint64_t seed) {
        const SyntheticInstance inst = make_instance(layout, rank, gamma, SamplingScheme::uniform(p), seed);
        py::dict d;
        d["theta"] = inst.theta_true;
        d["y_full"] = inst.y_full;
        d["mask"] = from_mask(inst.mask);
        d["observed"] = inst.observed();
        d["shifted"] = inst.shifted;
        return d;
      },
      py::arg("layout"), py::arg("rank"), py::arg("gamma"), py::arg("p"), py::arg("seed"));

  m.def(
      "relative_error",
      [](const Matrix& hat, const Matrix& truth, const ColumnBlockLayout& layout) {
        return error_dict(relative_error(hat, truth, layout));
      },
      py::arg("theta_hat"), py::arg("theta_true"), py::arg("layout"));

  m.def(
      "detect",
      [](const std::vector<double>& values, double d_tol) {
        DetectOptions opts;
        opts.d_tol = d_tol;
        const DetectionReport r = detect(values, opts);
        py::dict d;
        d["kind"] = std::string(to_token(r.kind()));
        d["model"] = r.fit.model.to_string();
        d["score"] = r.score;
        d["rules"] = r.rules;
        return d;
      },
      py::arg("values"), py::arg("d_tol") = 0.5);

  m.def(
      "lambda_star",
      [](int n1, int n2, double U, double K, double c, bool sqrt_max) {
        theory::BoundInputs in;
        in.n1 = n1;
        in.n2 = n2;
        in.U_gamma = U;
        in.K = K;
        in.c_abs = c;
        return theory::lambda_star(in, sqrt_max ? theory::LambdaForm::SqrtMax : theory::LambdaForm::SqrtSum);
      },
      py::arg("n1"), py::arg("n2"), py::arg("U") = 1.0, py::arg("K") = 1.0, py::arg("c") = 1.0,
      py::arg("sqrt_max") = false);

  m.def(
      "theory_penalties",
      [](const ColumnBlockLayout& layout, double p, double gamma, double kappa, std::optional<double> neg_upper) {
        PenaltyRule rule;
        rule.kappa = kappa;
        rule.negative_upper = neg_upper;
        const AdmmConfig cfg = theory_config(layout, p, gamma, rule);
        return std::pair{cfg.mu, cfg.lambda};
      },
      py::arg("layout"), py::arg("p"), py::arg("gamma") = 8.0, py::arg("kappa") = 1.0,
      py::arg("negative_upper") = py::none(), "(mu, lambda) of the theory rule for this layout");

  m.def(
      "sweep",
      [](const std::string& axis, const std::vector<double>& values, const std::vector<std::uint64_t>& seeds, int rows,
         int cols, std::optional<double> mu, std::optional<double> lambda, int max_iter, int threads) {
        SweepConfig cfg;
        if (axis == "rate") {
          cfg.axis = SweepAxis::Rate;
          cfg.rates = values;
        } else if (axis == "rank") {
          cfg.axis = SweepAxis::Rank;
          cfg.ranks.assign(values.begin(), values.end());
        } else {
          throw ConfigError("axis must be 'rate' or 'rank'");
        }
        cfg.seeds = seeds;
        cfg.rows = rows;
        cfg.cols = cols;
        cfg.solver = make_config(mu, lambda, 10.0, 1e-4, max_iter, "full");
        cfg.theory_penalties = !mu.has_value();
        cfg.threads = threads;
        std::vector<SweepRecord> records;
        {
          py::gil_scoped_release release;
          records = run_sweep(cfg);
        }
        py::list out;
        for (const auto& r : records) {
          py::dict d;
          d[axis.c_str()] = r.value;
          d["seed"] = r.seed;
          d["error"] = error_dict(r.error);
          d["iterations"] = r.iterations;
          d["converged"] = r.converged;
          out.append(d);
        }
        return out;
      },
      py::arg("axis"), py::arg("values"), py::arg("seeds"), py::arg("rows") = 50, py::arg("cols") = 50,
      py::arg("mu") = py::none(), py::arg("lam") = py::none(), py::arg("max_iter") = 2000, py::arg("threads") = 1);
}
