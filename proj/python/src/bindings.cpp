#include "manifold_align/align.hpp"
#include "manifold_align/error.hpp"
#include "manifold_align/eval.hpp"
#include "manifold_align/graph.hpp"
#include "manifold_align/pendulum.hpp"
#include "manifold_align/spectral.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
namespace ma = manifold_align;

namespace {

using IndexPairs = Eigen::Matrix<Eigen::Index, Eigen::Dynamic, 2, Eigen::RowMajor>;

IndexPairs pairs_array(const ma::CorrespondenceSet& c) {
  IndexPairs out(static_cast<Eigen::Index>(c.size()), 2);
  for (std::size_t i = 0; i < c.size(); ++i) {
    out(static_cast<Eigen::Index>(i), 0) = c.pairs()[i].first;
    out(static_cast<Eigen::Index>(i), 1) = c.pairs()[i].second;
  }
  return out;
}

Eigen::MatrixXd angles_array(const std::vector<ma::JointAngles>& angles) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(angles.size()), 4);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const auto& a = angles[i];
    out.row(static_cast<Eigen::Index>(i)) << a.theta1y, a.theta1z, a.theta2y, a.theta2z;
  }
  return out;
}

ma::JointAngles to_angles(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }

ma::AlignOptions make_options(int d, int k, std::optional<double> t, double mu,
                              const std::string& distance_mode, bool procrustes_scale,
                              bool repair_graphs) {
  ma::AlignOptions o;
  o.d = d;
  o.k = k;
  o.t = t;
  o.mu = mu;
  o.distance_mode = ma::parse_distance_mode(distance_mode);
  o.procrustes_scale = procrustes_scale;
  o.repair_graphs = repair_graphs;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral manifold alignment of simulated double-pendulum datasets";
  m.attr("__version__") = MANIFOLD_ALIGN_VERSION;

  auto base = py::register_exception<ma::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ma::InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<ma::NumericalRank>(m, "NumericalRank", base.ptr());
  py::register_exception<ma::DegenerateInput>(m, "DegenerateInput", base.ptr());
  py::register_exception<ma::DisconnectedGraph>(m, "DisconnectedGraph", base.ptr());
  py::register_exception<ma::Unconstrained>(m, "Unconstrained", base.ptr());
  py::register_exception<ma::Unsupported>(m, "Unsupported", base.ptr());
  py::register_exception<ma::IoError>(m, "IoError", base.ptr());

  py::class_<ma::PendulumConfig>(m, "PendulumConfig")
      .def(py::init([](double l1, double l2) {
             ma::PendulumConfig c{l1, l2};
             c.validate();
             return c;
           }),
           py::arg("l1") = 1.25, py::arg("l2") = 0.75)
      .def_readonly("l1", &ma::PendulumConfig::l1)
      .def_readonly("l2", &ma::PendulumConfig::l2)
      .def("ratio", &ma::PendulumConfig::ratio)
      .def_static("pendulum1", &ma::PendulumConfig::pendulum1)
      .def_static("pendulum2", &ma::PendulumConfig::pendulum2)
      .def("__repr__", [](const ma::PendulumConfig& c) {
        return "PendulumConfig(l1=" + std::to_string(c.l1) + ", l2=" + std::to_string(c.l2) + ")";
      });

  m.def(
      "forward_kinematics",
      [](const ma::PendulumConfig& c, const std::array<double, 4>& a) {
        return Eigen::Vector3d(ma::forward_kinematics(c, to_angles(a)));
      },
      py::arg("config"), py::arg("angles"),
      "End-effector position for angles (theta1y, theta1z, theta2y, theta2z) in degrees.");
  m.def(
      "feature_vector",
      [](const ma::PendulumConfig& c, const std::array<double, 4>& a) {
        return Eigen::VectorXd(ma::feature_vector(c, to_angles(a)));
      },
      py::arg("config"), py::arg("angles"));

  py::class_<ma::Dataset>(m, "Dataset")
      .def_property_readonly("config", &ma::Dataset::config)
      .def_property_readonly("grid_step", &ma::Dataset::grid_step)
      .def_property_readonly("features", &ma::Dataset::features)
      .def_property_readonly("grid_angles",
                             [](const ma::Dataset& d) { return angles_array(d.grid_angles()); })
      .def_property_readonly("angles", [](const ma::Dataset& d) { return angles_array(d.angles()); })
      .def_property_readonly("noise_free", &ma::Dataset::noise_free)
      .def("__len__", &ma::Dataset::size);

  m.def("generate_dataset", &ma::generate_dataset, py::arg("config"), py::arg("step_degrees"));
  m.def(
      "add_noise",
      [](const ma::Dataset& d, const std::string& type, double range, std::uint64_t seed) {
        return ma::add_noise(d, ma::parse_noise_type(type), range, seed);
      },
      py::arg("dataset"), py::arg("type"), py::arg("range"), py::arg("seed"));

  py::class_<ma::CorrespondenceSet>(m, "CorrespondenceSet")
      .def(py::init([](const IndexPairs& pairs, Eigen::Index nx, Eigen::Index ny) {
             std::vector<std::pair<Eigen::Index, Eigen::Index>> v;
             for (Eigen::Index i = 0; i < pairs.rows(); ++i) v.emplace_back(pairs(i, 0), pairs(i, 1));
             return ma::CorrespondenceSet(std::move(v), nx, ny);
           }),
           py::arg("pairs"), py::arg("nx"), py::arg("ny"))
      .def_static("identity", &ma::CorrespondenceSet::identity)
      .def_property_readonly("pairs", &pairs_array)
      .def("swapped", &ma::CorrespondenceSet::swapped)
      .def("__len__", &ma::CorrespondenceSet::size);

  m.def("select_correspondences", &ma::select_correspondences, py::arg("x"), py::arg("y"),
        py::arg("corr_step_degrees"));
  m.def("grid_pairing", &ma::grid_pairing, py::arg("x"), py::arg("y"));

  py::class_<ma::Transform>(m, "Transform")
      .def_readonly("translation", &ma::Transform::translation)
      .def_readonly("rotation", &ma::Transform::rotation)
      .def_readonly("scale", &ma::Transform::scale)
      .def("apply", &ma::Transform::apply)
      .def("inverse", &ma::Transform::inverse);
  m.def("procrustes_fit", &ma::procrustes_fit, py::arg("source"), py::arg("target"),
        py::arg("allow_scale") = true);

  py::class_<ma::AlignmentResult>(m, "AlignmentResult")
      .def_property_readonly("sx", [](const ma::AlignmentResult& r) { return r.sx.coords(); })
      .def_property_readonly("sy", [](const ma::AlignmentResult& r) { return r.sy.coords(); })
      .def_property_readonly("method", [](const ma::AlignmentResult& r) { return ma::to_string(r.method); })
      .def_property_readonly("level", [](const ma::AlignmentResult& r) { return ma::to_string(r.level); })
      .def_readonly("map_x", &ma::AlignmentResult::map_x)
      .def_readonly("map_y", &ma::AlignmentResult::map_y)
      .def_readonly("offset_y", &ma::AlignmentResult::offset_y)
      .def_readonly("eigenvalues", &ma::AlignmentResult::eigenvalues)
      .def_readonly("transform", &ma::AlignmentResult::transform)
      .def_readonly("elapsed", &ma::AlignmentResult::elapsed)
      .def("rank_x", &ma::AlignmentResult::rank_x)
      .def("rank_y", &ma::AlignmentResult::rank_y);

  m.def(
      "align",
      [](const ma::Dataset& x, const ma::Dataset& y, const ma::CorrespondenceSet& corr,
         const std::string& method, const std::string& level, int d, int k, std::optional<double> t,
         double mu, const std::string& distance_mode, bool procrustes_scale, bool repair_graphs) {
        const ma::AlignOptions o =
            make_options(d, k, t, mu, distance_mode, procrustes_scale, repair_graphs);
        py::gil_scoped_release release;
        return ma::align(x, y, corr, ma::parse_method(method), ma::parse_level(level), o);
      },
      py::arg("x"), py::arg("y"), py::arg("corr"), py::arg("method"), py::arg("level") = "feature",
      py::arg("d") = 3, py::arg("k") = 8, py::arg("t") = py::none(), py::arg("mu") = 100.0,
      py::arg("distance_mode") = "geodesic", py::arg("procrustes_scale") = true,
      py::arg("repair_graphs") = false);

  m.def(
      "map_out_of_sample",
      [](const ma::AlignmentResult& r, const Eigen::VectorXd& feature, const std::string& side) {
        if (side != "x" && side != "y" && side != "X" && side != "Y") {
          throw ma::InvalidArgument("side must be 'x' or 'y'");
        }
        return ma::map_out_of_sample(r, feature, side == "x" || side == "X" ? ma::Side::x : ma::Side::y);
      },
      py::arg("result"), py::arg("feature"), py::arg("side"));

  m.def(
      "normalized_distances",
      [](const Eigen::MatrixXd& sx, const Eigen::MatrixXd& sy, const ma::CorrespondenceSet& pairing,
         bool exact, std::uint64_t seed) {
        ma::DenominatorOptions o;
        o.exact = exact;
        o.seed = seed;
        return ma::normalized_distances(ma::Embedding(sx), ma::Embedding(sy), pairing, o).values;
      },
      py::arg("sx"), py::arg("sy"), py::arg("pairing"), py::arg("exact") = false,
      py::arg("seed") = 0);

  m.def(
      "summarize",
      [](const std::vector<double>& distances, bool sample_std) {
        const ma::Metrics s = ma::summarize(distances, 0.0, {}, sample_std);
        return py::dict(py::arg("delta") = s.delta, py::arg("sigma") = s.sigma, py::arg("n") = s.n);
      },
      py::arg("distances"), py::arg("sample_std") = false);
}
