// Python extension: numpy arrays in and out, JSON text for structured
// configs and reports. The pure-Python wrapper in trnn/__init__.py turns
// the JSON text into dicts.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "trnn/datagen.hpp"
#include "trnn/eval.hpp"
#include "trnn/gradcheck.hpp"
#include "trnn/json_io.hpp"
#include "trnn/model.hpp"
#include "trnn/tensor.hpp"

namespace py = pybind11;
using namespace trnn;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
    Shape shape(a.shape(), a.shape() + a.ndim());
    std::vector<double> data(a.data(), a.data() + a.size());
    return Tensor(std::move(shape), std::move(data));
}

Array to_array(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    Array out(shape);
    std::copy(t.data().begin(), t.data().end(), out.mutable_data());
    return out;
}

Json parse(const std::string& text) { return text.empty() ? Json::object() : Json::parse(text); }

std::string report_json(const TrainReport& r) {
    return Json{{"initial_loss", r.initial_loss},
                {"losses", r.losses},
                {"validation_rmse", r.validation_rmse},
                {"seconds", r.seconds},
                {"epochs_run", r.epochs_run},
                {"stopped_early", r.stopped_early},
                {"final_loss", r.final_loss()}}
        .dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Tensor-on-tensor regression networks (C++ core)";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);

    m.def(
        "mode_n_product",
        [](const Array& t, const Matrix& a, std::size_t mode) {
            return to_array(mode_n_product(to_tensor(t), a, mode));
        },
        py::arg("t"), py::arg("m"), py::arg("mode"));
    m.def(
        "contraction",
        [](const Array& x, const Array& c) {
            return to_array(contraction(to_tensor(x), to_tensor(c)));
        },
        py::arg("x"), py::arg("c"));
    m.def(
        "tucker_reconstruct",
        [](const Array& core, const std::vector<Matrix>& factors) {
            return to_array(tucker_reconstruct(to_tensor(core), factors));
        },
        py::arg("core"), py::arg("factors"));
    m.def(
        "rmse", [](const Array& y_hat, const Array& y) { return rmse(to_tensor(y_hat), to_tensor(y)); },
        py::arg("y_hat"), py::arg("y"));

    m.def(
        "generate",
        [](const std::string& generator, std::size_t n, double sigma, std::size_t grid_i,
           std::size_t grid_j, std::uint64_t seed, bool noise_on_x) {
            GenerateOptions o;
            o.n = n;
            o.sigma = sigma;
            o.grid_i = grid_i;
            o.grid_j = grid_j;
            o.seed = seed;
            o.noise_on_x = noise_on_x;
            const Dataset d = generate_dataset(generator_from_string(generator), o);
            return py::make_tuple(to_array(d.x), to_array(d.y), dataset_meta(d).dump());
        },
        py::arg("generator"), py::arg("n"), py::arg("sigma"), py::arg("grid_i"), py::arg("grid_j"),
        py::arg("seed"), py::arg("noise_on_x") = false);

    m.def(
        "default_network_spec",
        [](const Shape& in, const Shape& out, std::size_t n1, std::size_t n2,
           const std::string& activation) {
            return to_json(default_network_spec(in, out, n1, n2, activation_from_string(activation)))
                .dump();
        },
        py::arg("input_shape"), py::arg("output_shape"), py::arg("encoder_layers") = 2,
        py::arg("decoder_layers") = 2, py::arg("activation") = "relu");

    m.def(
        "gradcheck",
        [](const std::string& spec, std::uint64_t seed, double tolerance, std::size_t batch) {
            GradcheckOptions o;
            o.tolerance = tolerance;
            o.batch = batch;
            const GradcheckReport r = gradcheck(network_spec_from_json(parse(spec)), seed, o);
            Json groups = Json::array();
            for (const auto& g : r.groups) {
                groups.push_back({{"name", g.name}, {"size", g.size}, {"rel_error", g.rel_error}});
            }
            return Json{{"passed", r.passed},
                        {"max_rel_error", r.max_rel_error},
                        {"attempts", r.attempts},
                        {"groups", groups}}
                .dump();
        },
        py::arg("spec"), py::arg("seed"), py::arg("tolerance"), py::arg("batch") = 4);

    py::class_<TrnnModel>(m, "Model")
        .def(py::init([](const std::string& spec, std::uint64_t seed) {
                 return init_model(network_spec_from_json(parse(spec)), seed);
             }),
             py::arg("spec"), py::arg("seed"))
        .def_static("load", &load_model, py::arg("dir"))
        .def("save", [](const TrnnModel& model, const std::string& dir) { save_model(model, dir); },
             py::arg("dir"))
        .def(
            "train",
            [](TrnnModel& model, const Array& x, const Array& y, const std::string& config) {
                const TrainConfig c = train_config_from_json(parse(config));
                c.validate();
                const Tensor tx = to_tensor(x);
                const Tensor ty = to_tensor(y);
                TrainReport r;
                {
                    py::gil_scoped_release release;
                    r = train(model, tx, ty, c);
                }
                return report_json(r);
            },
            py::arg("x"), py::arg("y"), py::arg("config") = "")
        .def("predict",
             [](const TrnnModel& model, const Array& x) { return to_array(predict(model, to_tensor(x))); },
             py::arg("x"))
        .def_property_readonly("spec", [](const TrnnModel& model) { return to_json(model.spec).dump(); })
        .def_property_readonly("parameter_count", &TrnnModel::parameter_count)
        .def("__eq__", [](const TrnnModel& a, const TrnnModel& b) { return a == b; });

    m.def(
        "fit_predict",
        [](const std::string& method, const Array& x, const Array& y, const Array& x_new,
           std::uint64_t seed) {
            const MethodConfig c = method_config_from_json(parse(method));
            const FittedMethod f = fit_method(c, to_tensor(x), to_tensor(y), seed);
            return py::make_tuple(to_array(f.predict(to_tensor(x_new))), f.parameter_count);
        },
        py::arg("method"), py::arg("x"), py::arg("y"), py::arg("x_new"), py::arg("seed"));

    m.def(
        "run_benchmark",
        [](const std::string& plan, std::size_t jobs) {
            const BenchmarkPlan p = benchmark_plan_from_json(parse(plan));
            BenchmarkResult r;
            {
                py::gil_scoped_release release;
                r = run_benchmark(p, jobs);
            }
            Json records = Json::array();
            for (const auto& rec : r.records) {
                records.push_back({{"method", rec.method},
                                   {"generator", rec.generator},
                                   {"N", rec.n},
                                   {"sigma", rec.sigma},
                                   {"rep", rec.rep},
                                   {"seed", rec.seed},
                                   {"rmse", rec.rmse},
                                   {"train_seconds", rec.train_seconds}});
            }
            Json out{{"records", records}};
            out["summary"] = r.records.empty() ? Json() : to_json(summarize(r));
            return out.dump();
        },
        py::arg("plan"), py::arg("jobs") = 1);
}
