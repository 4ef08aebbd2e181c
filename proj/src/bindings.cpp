#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "xclust/instances.hpp"
#include "xclust/io.hpp"
#include "xclust/kmeans.hpp"
#include "xclust/kmedians.hpp"
#include "xclust/two_means.hpp"

namespace py = pybind11;
using namespace xclust;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointSet to_points(const Array& arr) {
  XCLUST_INPUT_CHECK(arr.ndim() == 2, "expected a 2-d array");
  PointSet pts(static_cast<std::size_t>(arr.shape(0)),
               static_cast<std::size_t>(arr.shape(1)));
  std::copy_n(arr.data(), arr.size(), pts.values().data());
  return pts;
}

py::array from_points(const PointSet& pts) {
  py::array_t<double> arr({pts.size(), pts.dim()});
  std::copy_n(pts.values().data(), pts.values().size(),
              arr.mutable_data());
  return arr;
}

std::vector<double> to_vector(const Array& arr) {
  XCLUST_INPUT_CHECK(arr.ndim() == 1, "expected a 1-d array");
  return {arr.data(), arr.data() + arr.size()};
}

py::dict bundle_to_dict(const InstanceBundle& b) {
  py::dict d;
  d["generator"] = b.generator;
  d["k"] = b.k;
  d["d"] = b.d;
  d["seed"] = b.seed;
  d["points"] = from_points(b.data);
  d["centers"] = from_points(b.centers);
  py::dict planted;
  for (const auto& [obj, cost] : b.planted_cost)
    planted[objective_name(obj).c_str()] = cost;
  d["planted_cost"] = planted;
  return d;
}

}  // namespace

PYBIND11_MODULE(_xclust, m) {
  m.doc() = "Explainable threshold-tree clustering";

  py::class_<ThresholdTree>(m, "ThresholdTree")
      .def_property_readonly("k", [](const ThresholdTree& t) { return t.k; })
      .def_property_readonly("dim",
                             [](const ThresholdTree& t) { return t.dim; })
      .def_property_readonly("height",
                             [](const ThresholdTree& t) { return t.height(); })
      .def("assign",
           [](const ThresholdTree& t, const Array& x) {
             XCLUST_INPUT_CHECK(x.ndim() == 1, "expected a 1-d array");
             std::vector<double> row(x.data(), x.data() + x.size());
             return t.assign(row);
           })
      .def("assign_all",
           [](const ThresholdTree& t, const Array& pts) {
             const auto data = to_points(pts);
             std::vector<int> out(data.size());
             for (std::size_t i = 0; i < data.size(); ++i)
               out[i] = t.assign(data[i]);
             return out;
           })
      .def("to_json",
           [](const ThresholdTree& t) { return tree_to_json(t).dump(); })
      .def_static("from_json", [](const std::string& s) {
        return tree_from_json(nlohmann::json::parse(s));
      });

  m.def(
      "build_kmedians_tree",
      [](const Array& centers, uint64_t seed, const std::string& method,
         std::optional<double> domain_bound) {
        const auto cs = to_points(centers);
        if (method == "fast") return build_fast(cs, seed);
        XCLUST_INPUT_CHECK(method == "simplified",
                           "method must be 'fast' or 'simplified'");
        const double bound =
            domain_bound ? *domain_bound : default_domain_bound(cs);
        return build_simplified(cs, bound, seed);
      },
      py::arg("centers"), py::arg("seed") = 0, py::arg("method") = "fast",
      py::arg("domain_bound") = std::nullopt);

  m.def(
      "build_kmeans_tree",
      [](const Array& points, const Array& centers, const std::string& method,
         uint64_t seed) {
        return build_kmeans_tree(to_points(points), to_points(centers),
                                 kmeans_method_from_name(method), seed);
      },
      py::arg("points"), py::arg("centers"), py::arg("method") = "sweep",
      py::arg("seed") = 0);

  m.def(
      "build_2means_tree",
      [](const Array& points, const Array& centers, bool refit) {
        auto res = exact_2means_tree(to_points(points), to_points(centers),
                                     refit ? TwoMeansCostModel::RefitCentroids
                                           : TwoMeansCostModel::FixedCenters);
        return py::make_tuple(std::move(res.tree), res.cost);
      },
      py::arg("points"), py::arg("centers"), py::arg("refit") = false);

  m.def(
      "tree_cost",
      [](const ThresholdTree& tree, const Array& points, const Array& centers,
         const std::string& objective) {
        return tree_cost(tree, to_points(points), to_points(centers),
                         objective_from_name(objective))
            .total_cost;
      },
      py::arg("tree"), py::arg("points"), py::arg("centers"),
      py::arg("objective"));

  m.def(
      "nearest_center_cost",
      [](const Array& points, const Array& centers,
         const std::string& objective) {
        return nearest_center_cost(to_points(points), to_points(centers),
                                   objective_from_name(objective))
            .total_cost;
      },
      py::arg("points"), py::arg("centers"), py::arg("objective"));

  m.def(
      "solve_reference",
      [](const Array& points, int k, const std::string& objective,
         uint64_t seed) {
        return from_points(solve_reference(to_points(points), k,
                                           objective_from_name(objective),
                                           seed));
      },
      py::arg("points"), py::arg("k"), py::arg("objective"),
      py::arg("seed") = 0);

  m.def(
      "gen_kmedians_lb",
      [](int k, uint64_t seed) { return bundle_to_dict(gen_kmedians_lb(k, seed)); },
      py::arg("k"), py::arg("seed") = 0);
  m.def(
      "gen_kmeans_lb",
      [](int k, std::optional<int> d, uint64_t seed) {
        return bundle_to_dict(
            gen_kmeans_lb(k, d ? *d : kmeans_lb_default_dim(k), seed));
      },
      py::arg("k"), py::arg("d") = std::nullopt, py::arg("seed") = 0);
  m.def(
      "gen_imm_adversarial",
      [](int k) { return bundle_to_dict(gen_imm_adversarial(k)); },
      py::arg("k"));
  m.def(
      "gen_blobs",
      [](int k, int d, int n, double spread, uint64_t seed) {
        return bundle_to_dict(gen_blobs(k, d, n, spread, seed));
      },
      py::arg("k"), py::arg("d"), py::arg("n"), py::arg("spread") = 0.5,
      py::arg("seed") = 0);

  m.def("f_cdf", &f_cdf, py::arg("x"));
  m.def("f_quantile", &f_quantile, py::arg("u"));
  m.def(
      "random_2means_split",
      [](const Array& centers, uint64_t seed) {
        const auto split = random_2means_split(to_points(centers), seed);
        return py::make_tuple(split.dim, split.threshold);
      },
      py::arg("centers"), py::arg("seed") = 0);
  m.def(
      "algebraic_lemma_check",
      [](const Array& R, const Array& alpha) {
        return algebraic_lemma_check(to_vector(R), to_vector(alpha));
      },
      py::arg("R"), py::arg("alpha"));

  py::register_exception<input_error>(m, "InputError", PyExc_ValueError);
  py::register_exception<internal_error>(m, "InternalError",
                                         PyExc_RuntimeError);
}
