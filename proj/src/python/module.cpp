#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "corridor/bench.hpp"
#include "corridor/eizo.hpp"
#include "corridor/io.hpp"
#include "corridor/parallel.hpp"
#include "corridor/planner.hpp"
#include "corridor/scsopt.hpp"

namespace py = pybind11;
using namespace corridor;

namespace {

// Discs are (x, y, r) rows; spheres (x, y, z, r).
std::vector<Ball> balls_from(const Mat& rows) {
  if (rows.size() != 0 && rows.cols() != 3 && rows.cols() != 4) {
    throw Error(ErrorKind::DimensionMismatch, "obstacles must be (x, y, r) or (x, y, z, r) rows");
  }
  std::vector<Ball> out;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const bool flat = rows.cols() == 3;
    out.push_back({Vec3(rows(i, 0), rows(i, 1), flat ? 0.0 : rows(i, 2)), rows(i, rows.cols() - 1)});
  }
  return out;
}

std::vector<Config> rows_of(const Mat& m) {
  std::vector<Config> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(m.row(i).transpose());
  return out;
}

Mat stack(const std::vector<Config>& qs) {
  if (qs.empty()) return Mat();
  Mat m(qs.size(), qs.front().size());
  for (std::size_t i = 0; i < qs.size(); ++i) m.row(i) = qs[i].transpose();
  return m;
}

World point_world(const Vec& lower, const Vec& upper, const Mat& obstacles) {
  World w;
  w.robot = RobotModel::point_robot(static_cast<int>(lower.size()), lower, upper);
  w.obstacles = balls_from(obstacles);
  return w;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Corridor planning core: edge inflation, dynamic roadmaps and shortest paths through convex sets.";

  py::register_exception<Error>(m, "CorridorError", PyExc_RuntimeError);

  m.def("set_worker_threads", &set_worker_threads, py::arg("n"),
        "Worker threads for batch operations; 0 restores the default.");

  py::class_<HPolytope>(m, "HPolytope")
      .def(py::init<const Mat&, const Vec&>(), py::arg("A"), py::arg("b"))
      .def_static("box", &HPolytope::box, py::arg("lower"), py::arg("upper"))
      .def_property_readonly("A", &HPolytope::A)
      .def_property_readonly("b", &HPolytope::b)
      .def_property_readonly("dim", &HPolytope::dim)
      .def_property_readonly("num_faces", &HPolytope::num_faces)
      .def("contains", [](const HPolytope& P, const Vec& x, double tol) { return contains(P, x, tol); },
           py::arg("x"), py::arg("tol") = kMembershipTol)
      .def("vertices", [](const HPolytope& P) {
        const auto vs = polygon_vertices(P);
        Mat out(vs.size(), 2);
        for (std::size_t i = 0; i < vs.size(); ++i) out.row(i) = vs[i].transpose();
        return out;
      }, "Counter-clockwise vertices of a 2-D polytope.");

  py::class_<EizoParams>(m, "EizoParams")
      .def(py::init<>())
      .def_readwrite("delta", &EizoParams::delta)
      .def_readwrite("eps", &EizoParams::eps)
      .def_readwrite("tau", &EizoParams::tau)
      .def_readwrite("delta_max", &EizoParams::delta_max)
      .def_readwrite("n_p", &EizoParams::n_p)
      .def_readwrite("n_f", &EizoParams::n_f)
      .def_readwrite("n_b", &EizoParams::n_b)
      .def_readwrite("n_ms", &EizoParams::n_ms)
      .def_readwrite("t_col", &EizoParams::t_col)
      .def_readwrite("n_it", &EizoParams::n_it)
      .def_readwrite("seed", &EizoParams::seed);

  py::class_<World>(m, "World")
      .def_static("point", &point_world, py::arg("lower"), py::arg("upper"), py::arg("obstacles") = Mat(),
                  "Point robot in a box with sphere obstacles.")
      .def_static("forest", [](std::uint64_t seed) { return forest_world(gen_forest(seed)); }, py::arg("seed"))
      .def_property_readonly("dof", [](const World& w) { return w.robot.dof(); })
      .def("is_free", [](const World& w, const Config& q) { return check_config(w, q); }, py::arg("q"))
      .def("is_free_batch", [](const World& w, const Mat& Q) {
        const auto qs = rows_of(Q);
        const auto mask = check_config_batch(w, qs);
        return std::vector<bool>(mask.begin(), mask.end());
      }, py::arg("configs"));

  py::class_<InflationReport>(m, "InflationReport")
      .def_readonly("polytope", &InflationReport::polytope)
      .def_readonly("iterations", &InflationReport::iterations)
      .def_readonly("hyperplanes_added", &InflationReport::hyperplanes_added)
      .def_readonly("collision_checks", &InflationReport::collision_checks)
      .def_property_readonly("guarantee_holds", &InflationReport::guarantee_holds);

  m.def("inflate_edge", [](const World& world, const Config& v1, const Config& v2, const HPolytope& domain,
                           const EizoParams& params) {
    return inflate_edge({v1, v2}, domain, params, WorldChecker(world));
  }, py::arg("world"), py::arg("v1"), py::arg("v2"), py::arg("domain"), py::arg("params") = EizoParams{},
        py::call_guard<py::gil_scoped_release>());

  m.def("hit_and_run", [](const HPolytope& P, const Mat& seeds, std::size_t count, int mixing_steps,
                          std::uint64_t seed) {
    const auto starts = rows_of(seeds);
    return stack(hit_and_run_sample(P, starts, count, mixing_steps, seed).points);
  }, py::arg("polytope"), py::arg("seeds"), py::arg("count"), py::arg("mixing_steps") = 30, py::arg("seed") = 0);

  m.def("dist_to_segment", [](const Config& c, const Config& v1, const Config& v2) {
    return dist_to_segment(c, {v1, v2});
  }, py::arg("c"), py::arg("v1"), py::arg("v2"));
  m.def("dist_gradient", [](const Config& c, const Config& v1, const Config& v2) {
    return dist_gradient(c, {v1, v2});
  }, py::arg("c"), py::arg("v1"), py::arg("v2"));
  m.def("unadaptive_sample_count", &unadaptive_sample_count, py::arg("params"), py::arg("k"));

  m.def("lscs_shortest_path", [](const std::vector<HPolytope>& sets, const Config& s, const Config& g, double tol,
                                 int max_sweeps) {
    LscsOptions o;
    o.tol = tol;
    o.max_sweeps = max_sweeps;
    const ScsPath p = lscs_shortest_path(sets, s, g, o);
    py::dict out;
    out["knots"] = stack(p.knots);
    out["cost"] = p.cost;
    out["sweeps"] = p.sweeps;
    out["converged"] = p.converged;
    return out;
  }, py::arg("sets"), py::arg("start"), py::arg("goal"), py::arg("tol") = 1e-8, py::arg("max_sweeps") = 5000);

  m.def("gen_forest", [](std::uint64_t seed) {
    const ForestScene s = gen_forest(seed);
    Mat centers(s.centers.size(), 2);
    for (std::size_t i = 0; i < s.centers.size(); ++i) centers.row(i) = s.centers[i].transpose();
    py::dict out;
    out["centers"] = centers;
    out["radius"] = ForestScene::kRadius;
    out["start"] = s.start;
    out["goal"] = s.goal;
    return out;
  }, py::arg("seed"));

  m.def("_plan_forest_json", [](std::uint64_t env_seed, std::size_t drm_nodes, std::uint64_t drm_seed,
                                std::uint64_t seed, const EizoParams& params) {
    const ForestScene scene = gen_forest(env_seed);
    World empty = forest_world(scene);
    empty.obstacles.clear();
    DrmBuildOptions o;
    o.n_nodes = drm_nodes;
    o.grid = forest_grid(0.06);
    o.seed = drm_seed;
    const Drm drm = build_drm(empty, o);
    const auto discs = scene.discs();
    PlanRequest req;
    req.start = scene.start;
    req.goal = scene.goal;
    req.eizo = params;
    req.seed = seed;
    return to_json(plan(req, drm, empty.robot, voxelize_balls(discs, drm.grid), WorldChecker(forest_world(scene))))
        .dump();
  }, py::call_guard<py::gil_scoped_release>());

  m.def("_run_benchmark_json", [](const std::string& config) {
    const BenchRun run = run_benchmark(bench_config_from_json(json::parse(config)));
    std::ostringstream csv;
    write_csv(csv, run.records);
    return std::make_pair(csv.str(), to_json(run.summary).dump());
  }, py::call_guard<py::gil_scoped_release>());
}
