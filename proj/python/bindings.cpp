#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mlmimo/checkpoint.hpp"
#include "mlmimo/classic.hpp"
#include "mlmimo/config.hpp"
#include "mlmimo/harness.hpp"
#include "mlmimo/mld.hpp"
#include "mlmimo/training.hpp"

namespace py = pybind11;
using namespace mlmimo;

namespace {

// Python passes 1-D arrays as column vectors; the library works on rows.
RowVector as_row(const Eigen::VectorXd& v) { return v.transpose(); }
IntRowVector as_int_row(const Eigen::VectorXi& v) { return v.transpose(); }

py::tuple detection(const DetectionResult& r) {
  return py::make_tuple(Eigen::VectorXi(r.z_hat.transpose()), Eigen::VectorXd(r.z_soft.transpose()));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multilevel MIMO detection core";
  m.attr("SNR_DEFINITION") = kSnrDefinition;

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      error(e.what());
    }
  });

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream_id") = 0)
      .def("uniform", py::overload_cast<>(&RngStream::uniform))
      .def("gaussian", &RngStream::gaussian)
      .def("derive", &RngStream::derive);

  py::class_<Constellation>(m, "Constellation")
      .def(py::init<int>(), py::arg("M"))
      .def(py::init<int, int>(), py::arg("lowest_level"), py::arg("level_count"))
      .def_property_readonly("size", &Constellation::size)
      .def_property_readonly("levels", &Constellation::levels)
      .def_property_readonly("mean_energy", &Constellation::mean_energy);

  py::class_<ChannelModel>(m, "ChannelModel")
      .def(py::init<Matrix>(), py::arg("G"))
      .def_property_readonly("n", &ChannelModel::n)
      .def_property_readonly("G", &ChannelModel::g);

  m.def(
      "generate_channel",
      [](int n, std::uint64_t seed, std::optional<double> cond_min, std::optional<double> cond_max) {
        RngStream rng(seed, 0);
        std::optional<ConditionRange> range;
        if (cond_min || cond_max) range = ConditionRange{cond_min.value_or(1.0), cond_max.value_or(1e300)};
        return generate_channel(rng, n, range);
      },
      py::arg("n"), py::arg("seed"), py::arg("cond_min") = py::none(), py::arg("cond_max") = py::none());
  m.def("diagnostics", [](const ChannelModel& g) {
    const ChannelDiagnostics d = diagnostics(g);
    return py::dict(py::arg("condition") = d.condition, py::arg("hermite_db") = d.hermite_db);
  });
  m.def("channel_id", &channel_id);
  m.def(
      "snr_to_sigma",
      [](double snr_db, const Constellation& c, const ChannelModel& g) { return snr_to_sigma(snr_db, c, g).sigma; },
      py::arg("snr_db"), py::arg("constellation"), py::arg("channel"));
  m.def(
      "transmit",
      [](const Eigen::VectorXi& z, const ChannelModel& g, double sigma, RngStream& rng) {
        return Eigen::VectorXd(transmit(as_int_row(z), g, NoiseSpec{sigma}, rng).transpose());
      },
      py::arg("z"), py::arg("channel"), py::arg("sigma"), py::arg("rng"));

  m.def(
      "zf_detect",
      [](const Eigen::VectorXd& y, const ChannelModel& g, const Constellation& c) {
        return detection(zf_detect(as_row(y), g, c));
      },
      py::arg("y"), py::arg("channel"), py::arg("constellation"));
  m.def(
      "mmse_detect",
      [](const Eigen::VectorXd& y, const ChannelModel& g, const Constellation& c, double sigma) {
        return detection(mmse_detect(as_row(y), g, c, sigma));
      },
      py::arg("y"), py::arg("channel"), py::arg("constellation"), py::arg("sigma"));
  m.def(
      "sphere_decode",
      [](const Eigen::VectorXd& y, const ChannelModel& g, const Constellation& c) {
        return Eigen::VectorXi(sphere_decode(as_row(y), g, c).z_hat.transpose());
      },
      py::arg("y"), py::arg("channel"), py::arg("constellation"));
  m.def(
      "exhaustive_search",
      [](const Eigen::VectorXd& y, const ChannelModel& g, const Constellation& c) {
        return Eigen::VectorXi(exhaustive_search(as_row(y), g, c).z_hat.transpose());
      },
      py::arg("y"), py::arg("channel"), py::arg("constellation"));

  m.def(
      "sigma_c", [](double t, const Constellation& c) { return default_activation(c)(t); }, py::arg("t"),
      py::arg("constellation"));

  py::class_<DetectorNetwork>(m, "DetectorNetwork")
      .def_property_readonly("n", &DetectorNetwork::n)
      .def_property_readonly("iterations", &DetectorNetwork::iterations)
      .def_property_readonly("xi_size", &DetectorNetwork::xi_size)
      .def_property_readonly("head", [](const DetectorNetwork& net) { return to_string(net.shape.head); });
  m.def("load_checkpoint", [](const std::filesystem::path& p) { return load_checkpoint(p); });
  m.def(
      "count_parameters",
      [](int n, int iterations, int xi_size, const std::string& head, int levels) {
        const ParameterCount pc =
            count_parameters(NetworkShape{n, iterations, xi_size, parse_output_head(head)}, levels);
        return py::dict(py::arg("weights_only") = pc.weights_only, py::arg("with_biases") = pc.with_biases);
      },
      py::arg("n"), py::arg("iterations"), py::arg("xi_size"), py::arg("head") = "multilevel",
      py::arg("M") = 5);

  m.def(
      "calibrate_snr",
      [](const ChannelModel& g, const Constellation& c, double target_ser, std::uint64_t seed) {
        py::gil_scoped_release release;
        return calibrate_training_snr(g, c, target_ser, seed);
      },
      py::arg("channel"), py::arg("constellation"), py::arg("target_ser") = 1e-2, py::arg("seed") = 0);

  m.def(
      "detect",
      [](const std::string& spec, const Matrix& y, const ChannelModel& g, const Constellation& c, double sigma,
         std::uint64_t seed) {
        const auto det = make_detector(spec, g, c);
        RngStream rng(seed, 0);
        return det->detect(y, sigma, rng);
      },
      py::arg("detector"), py::arg("Y"), py::arg("channel"), py::arg("constellation"), py::arg("sigma"),
      py::arg("seed") = 0);

  py::class_<EvalRow>(m, "EvalRow")
      .def_readonly("detector", &EvalRow::detector)
      .def_readonly("snr_db", &EvalRow::snr_db)
      .def_readonly("trials", &EvalRow::trials)
      .def_readonly("symbol_errors", &EvalRow::symbol_errors)
      .def_readonly("vector_errors", &EvalRow::vector_errors)
      .def_readonly("ser", &EvalRow::ser)
      .def_readonly("vler", &EvalRow::vler)
      .def_readonly("ci_low", &EvalRow::ci_low)
      .def_readonly("ci_high", &EvalRow::ci_high)
      .def_readonly("bayes_ser", &EvalRow::bayes_ser)
      .def_readonly("channel_id", &EvalRow::channel_id);
  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("metadata", &EvalReport::metadata)
      .def_readonly("rows", &EvalReport::rows)
      .def("to_csv", &EvalReport::to_csv);

  m.def(
      "evaluate",
      [](const std::string& spec, const ChannelModel& g, const Constellation& c, std::vector<double> snr_db,
         std::int64_t min_errors, std::int64_t max_trials, std::uint64_t seed, int workers) {
        const auto det = make_detector(spec, g, c);
        EvalOptions opt;
        opt.snr_db = std::move(snr_db);
        opt.min_errors = min_errors;
        opt.max_trials = max_trials;
        opt.seed = seed;
        opt.workers = workers;
        py::gil_scoped_release release;
        return evaluate(*det, g, c, opt);
      },
      py::arg("detector"), py::arg("channel"), py::arg("constellation"), py::arg("snr_db"),
      py::arg("min_errors") = 100, py::arg("max_trials") = 1000000, py::arg("seed") = 1, py::arg("workers") = 0);

  m.def(
      "wilson_interval",
      [](std::int64_t k, std::int64_t n) {
        const WilsonInterval w = wilson_interval(k, n);
        return py::make_tuple(w.low, w.high);
      },
      py::arg("successes"), py::arg("trials"));

  m.def(
      "run_experiment",
      [](const std::map<std::string, std::string>& settings, const std::filesystem::path& workdir) {
        KeyValueConfig cfg;
        for (const auto& [k, v] : settings) cfg.set(k, v);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg, workdir);
        }
        return py::dict(py::arg("report") = r.report, py::arg("channel") = r.channel, py::arg("params") = r.params,
                        py::arg("checkpoints") = r.checkpoints, py::arg("calibrated_snr_db") = r.calibrated_snr_db,
                        py::arg("weights_only") = r.parameters.weights_only);
      },
      py::arg("settings"), py::arg("workdir"));
}
