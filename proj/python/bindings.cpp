#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "selfnorm/distributions.hpp"
#include "selfnorm/errors.hpp"
#include "selfnorm/exact_prefactor.hpp"
#include "selfnorm/exact_twopoint.hpp"
#include "selfnorm/geometry.hpp"
#include "selfnorm/legendre.hpp"
#include "selfnorm/shao_rate.hpp"
#include "selfnorm/simulate.hpp"

namespace py = pybind11;
using namespace selfnorm;

namespace {

py::dict mc_dict(const McEstimate& e) {
  py::dict d;
  d["method"] = to_string(e.method);
  d["n"] = e.n;
  d["trials"] = e.trials;
  d["hits"] = e.hits;
  d["seed"] = e.seed;
  d["value"] = e.value;
  d["log_value"] = e.log_value;
  d["std_error"] = e.std_error;
  d["rel_error"] = e.rel_error;
  d["ess"] = e.ess;
  d["tilt"] = py::make_tuple(e.tilt.lambda1, e.tilt.lambda2);
  return d;
}

py::tuple vec2(const Eigen::Vector2d& v) { return py::make_tuple(v(0), v(1)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Large deviations of self-normalized sums";

  static py::exception<PreconditionError> precondition(m, "PreconditionError", PyExc_ValueError);
  static py::exception<NumericFailure> numeric(m, "NumericFailure", PyExc_RuntimeError);
  static py::exception<ConfigError> config(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const PreconditionError& e) {
      py::set_error(precondition, e.what());
    } catch (const NumericFailure& e) {
      py::set_error(numeric, e.what());
    } catch (const ConfigError& e) {
      py::set_error(config, e.what());
    }
  });

  py::class_<ScalarDistribution>(m, "Distribution")
      .def_static("two_point", &ScalarDistribution::two_point, py::arg("a"), py::arg("b"), py::arg("q"))
      .def_static(
          "finite",
          [](const std::vector<std::pair<double, double>>& atoms) {
            std::vector<Atom> v;
            for (const auto& [x, p] : atoms) v.push_back({x, p});
            return ScalarDistribution::finite(v);
          },
          py::arg("atoms"))
      .def_static("gaussian", &ScalarDistribution::gaussian, py::arg("mu"), py::arg("sigma"))
      .def_static("pareto", &ScalarDistribution::pareto, py::arg("scale"), py::arg("tail_index"),
                  py::arg("shift") = 0.0)
      .def("mean", [](const ScalarDistribution& d) { return d.mean().to_double(); })
      .def("prob_zero", &ScalarDistribution::prob_zero)
      .def("prob_positive", &ScalarDistribution::prob_positive)
      .def("__repr__", &ScalarDistribution::describe);

  py::class_<Normalizer>(m, "Normalizer")
      .def_static("power_law", &Normalizer::power_law, py::arg("p"))
      .def_static("tabulated", &Normalizer::tabulated, py::arg("knots"))
      .def("__call__", &Normalizer::operator(), py::arg("x"))
      .def_property_readonly("p", [](const Normalizer& n) -> py::object {
        return n.is_power_law() ? py::cast(n.p()) : py::none();
      });

  m.def(
      "cumulant",
      [](const ScalarDistribution& d, const Normalizer& n, double l1, double l2) {
        return cumulant(d, n, {l1, l2}).to_double();
      },
      py::arg("dist"), py::arg("norm"), py::arg("lambda1"), py::arg("lambda2"));
  m.def("z_star", &z_star, py::arg("dist"), py::arg("norm"));
  m.def(
      "rate_at",
      [](const ScalarDistribution& d, const Normalizer& n, double a1, double a2) {
        const RatePoint r = rate_at(d, n, {a1, a2});
        py::dict out;
        out["rate"] = r.rate.to_double();
        out["tilt"] = py::make_tuple(r.tilt.lambda1, r.tilt.lambda2);
        out["converged"] = r.converged;
        out["iterations"] = r.iterations;
        return out;
      },
      py::arg("dist"), py::arg("norm"), py::arg("alpha1"), py::arg("alpha2"));
  m.def("in_target_set", [](double x1, double x2, double z, const Normalizer& n) {
    return in_target_set({x1, x2}, z, n);
  });

  m.def(
      "j_supinf", [](const ScalarDistribution& d, double p, double z) { return j_supinf(d, p, z).to_double(); },
      py::arg("dist"), py::arg("p"), py::arg("z"));
  m.def(
      "j_halfplane",
      [](const ScalarDistribution& d, double p, double z) { return j_halfplane(d, p, z).to_double(); },
      py::arg("dist"), py::arg("p"), py::arg("z"));
  m.def(
      "j_boundary",
      [](const ScalarDistribution& d, const Normalizer& n, double z) {
        const BoundarySolution s = dominating_point(d, n, z);
        py::dict out;
        out["y_hat"] = s.y_hat;
        out["alpha_hat"] = vec2(s.alpha_hat);
        out["tilt"] = py::make_tuple(s.tilt.lambda1, s.tilt.lambda2);
        out["rate"] = s.rate;
        out["unique"] = s.unique_flag;
        out["at_origin"] = s.at_origin;
        return out;
      },
      py::arg("dist"), py::arg("norm"), py::arg("z"));
  m.def(
      "rate_report_json",
      [](const ScalarDistribution& d, const Normalizer& n, double z) { return to_json(rate_report(d, n, z)); },
      py::arg("dist"), py::arg("norm"), py::arg("z"));

  m.def("exact_prob", py::overload_cast<double, double, double, double, double, long>(&exact_prob), py::arg("a"),
        py::arg("b"), py::arg("q"), py::arg("p"), py::arg("z"), py::arg("n"));
  m.def(
      "log_exact_prob",
      [](double a, double b, double q, double p, double z, long n) {
        return log_exact_prob(a, b, q, Normalizer::power_law(p), z, n);
      },
      py::arg("a"), py::arg("b"), py::arg("q"), py::arg("p"), py::arg("z"), py::arg("n"));
  m.def(
      "asymptotic_prob",
      [](double a, double b, double q, double p, double z, long n) {
        const BinomialAsymptotics r = asymptotic_prob(a, b, q, p, z, n);
        py::dict out;
        out["case"] = to_string(r.case_tag);
        out["alpha_upper"] = r.alpha_upper;
        out["alpha_lower"] = r.alpha_lower;
        out["log_total"] = r.log_total;
        out["log_exact"] = r.log_exact;
        out["ratio"] = r.ratio;
        return out;
      },
      py::arg("a"), py::arg("b"), py::arg("q"), py::arg("p"), py::arg("z"), py::arg("n"));

  m.def(
      "asymptotic_estimate_json",
      [](const ScalarDistribution& d, const Normalizer& n, double z, long steps) {
        return to_json(asymptotic_estimate(d, n, z, steps));
      },
      py::arg("dist"), py::arg("norm"), py::arg("z"), py::arg("n"));

  m.def(
      "direct_mc",
      [](const ScalarDistribution& d, const Normalizer& n, double z, long steps, long trials, std::uint64_t seed,
         unsigned threads) {
        McEstimate e;
        {
          py::gil_scoped_release release;
          e = direct_mc(d, n, z, steps, {trials, seed, threads});
        }
        return mc_dict(e);
      },
      py::arg("dist"), py::arg("norm"), py::arg("z"), py::arg("n"), py::arg("trials"), py::arg("seed") = 1,
      py::arg("threads") = 0);
  m.def(
      "importance_mc",
      [](const ScalarDistribution& d, const Normalizer& n, double z, long steps, long trials, std::uint64_t seed,
         unsigned threads) {
        McEstimate e;
        {
          py::gil_scoped_release release;
          e = importance_mc(d, n, z, steps, {trials, seed, threads});
        }
        return mc_dict(e);
      },
      py::arg("dist"), py::arg("norm"), py::arg("z"), py::arg("n"), py::arg("trials"), py::arg("seed") = 1,
      py::arg("threads") = 0);

  m.def(
      "contour",
      [](const ScalarDistribution& d, const Normalizer& n, std::pair<double, double> x1, std::pair<double, double> x2,
         int n1, int n2) {
        const ContourGrid g = contour(d, n, {{x1.first, x1.second}, {x2.first, x2.second}, n1, n2});
        std::vector<std::vector<double>> rates(n2, std::vector<double>(n1));
        for (int i2 = 0; i2 < n2; ++i2)
          for (int i1 = 0; i1 < n1; ++i1) {
            const RatePoint& c = g.at(i1, i2);
            rates[i2][i1] = c.converged ? c.rate.value() : std::numeric_limits<double>::infinity();
          }
        py::dict out;
        out["x1"] = g.x1s;
        out["x2"] = g.x2s;
        out["rate"] = rates;
        return out;
      },
      py::arg("dist"), py::arg("norm"), py::arg("x1"), py::arg("x2"), py::arg("n1"), py::arg("n2"));
}
