// Python bindings for the core operations: losses, metrics, the subword
// tokenizer, the gradient checker, and the data-generation entry points.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dualview/caption_metrics.hpp"
#include "dualview/config.hpp"
#include "dualview/gradcheck.hpp"
#include "dualview/losses.hpp"
#include "dualview/metrics.hpp"
#include "dualview/pipeline.hpp"
#include "dualview/vocab.hpp"

namespace py = pybind11;
using namespace dualview;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

grad::Var matrix_from(const Array& a, const char* name) {
  const auto buf = a.request();
  if (buf.ndim != 2) throw ShapeError(std::string(name) + ": expected a 2-d array");
  const auto* data = static_cast<const double*>(buf.ptr);
  std::vector<double> values(data, data + buf.shape[0] * buf.shape[1]);
  return grad::make_tensor({static_cast<int>(buf.shape[0]), static_cast<int>(buf.shape[1])},
                           std::move(values));
}

grad::Var flatten_groups(const Array& a, const char* name) {
  const auto buf = a.request();
  if (buf.ndim != 3) throw ShapeError(std::string(name) + ": expected a [B, M, d] array");
  const auto* data = static_cast<const double*>(buf.ptr);
  std::vector<double> values(data, data + buf.shape[0] * buf.shape[1] * buf.shape[2]);
  return grad::make_tensor(
      {static_cast<int>(buf.shape[0] * buf.shape[1]), static_cast<int>(buf.shape[2])},
      std::move(values));
}

double py_info_nce(const Array& chi, const Array& beta, double tau) {
  grad::Tape tape;
  const double v = objective::info_nce(tape, matrix_from(chi, "chi"), matrix_from(beta, "beta"),
                                       tau)->value[0];
  tape.clear();
  return v;
}

double py_mil_nce(const Array& chi, const Array& gamma, double tau) {
  grad::Tape tape;
  const auto gamma_var = flatten_groups(gamma, "gamma");
  const int m = static_cast<int>(gamma.request().shape[1]);
  const double v =
      objective::mil_nce(tape, matrix_from(chi, "chi"), gamma_var, m, tau)->value[0];
  tape.clear();
  return v;
}

double py_combined(const Array& chi, const Array& beta, const Array& gamma, double tau,
                   double epsilon) {
  grad::Tape tape;
  const auto gamma_var = flatten_groups(gamma, "gamma");
  const int m = static_cast<int>(gamma.request().shape[1]);
  const double v = objective::combined_loss(tape, matrix_from(chi, "chi"),
                                            matrix_from(beta, "beta"), gamma_var, m, tau,
                                            epsilon)->value[0];
  tape.clear();
  return v;
}

py::array py_cosine_matrix(const Array& u, const Array& v) {
  grad::Tape tape;
  const auto out = grad::cosine_matrix(tape, matrix_from(u, "u"), matrix_from(v, "v"));
  tape.clear();
  py::array_t<double> result({out->shape[0], out->shape[1]});
  std::copy(out->value.begin(), out->value.end(), result.mutable_data());
  return result;
}

RunConfig config_from_json_str(const std::string& text) {
  return RunConfig::from_json(nlohmann::json::parse(text));
}

}  // namespace

PYBIND11_MODULE(dualview, m) {
  m.doc() = "dual-text-view clip-text contrastive pretraining, desk scale";

  m.def("info_nce", &py_info_nce, py::arg("chi"), py::arg("beta"), py::arg("tau") = 0.3,
        "clip-to-text InfoNCE over cosine similarities");
  m.def("mil_nce", &py_mil_nce, py::arg("chi"), py::arg("gamma"), py::arg("tau") = 0.3,
        "multiple-instance NCE; gamma has shape [B, M, d]");
  m.def("combined_loss", &py_combined, py::arg("chi"), py::arg("beta"), py::arg("gamma"),
        py::arg("tau") = 0.3, py::arg("epsilon") = 0.5);
  m.def("cosine_matrix", &py_cosine_matrix, py::arg("u"), py::arg("v"));

  m.def("average_precision", &zeroshot::average_precision, py::arg("scores"), py::arg("labels"));
  m.def(
      "f1_per_class",
      [](const std::vector<int>& pred, const std::vector<int>& labels, int n_classes) {
        const auto r = zeroshot::f1_per_class(pred, labels, n_classes);
        return py::make_tuple(r.per_class, r.mean);
      },
      py::arg("predictions"), py::arg("labels"), py::arg("n_classes"));
  m.def("bleu_n", &caption::bleu_n, py::arg("candidate"), py::arg("references"), py::arg("n"));
  m.def("rouge_l", &caption::rouge_l, py::arg("candidate"), py::arg("reference"));
  m.def("meteor_basic", &caption::meteor_basic, py::arg("candidate"), py::arg("reference"));

  m.def("check_gradients", [](int n_configs) {
    return objective::check_gradients(n_configs).max_rel_err;
  }, py::arg("n_configs") = 5);

  py::class_<enc::SubwordVocab>(m, "Vocab")
      .def(py::init([](const std::vector<std::string>& texts, int target_size) {
             return enc::build_vocab(texts, target_size);
           }),
           py::arg("texts"), py::arg("target_size") = 320)
      .def_property_readonly("size", &enc::SubwordVocab::size)
      .def("tokenize",
           [](const enc::SubwordVocab& v, const std::string& text, int n) {
             return enc::tokenize(text, v, n);
           },
           py::arg("text"), py::arg("n") = 77)
      .def("detokenize", [](const enc::SubwordVocab& v, const std::vector<int>& ids) {
        return enc::detokenize(ids, v);
      });

  m.def(
      "gen_data",
      [](const std::string& config_json, bool force) {
        pipeline::cmd_gen_data(config_from_json_str(config_json), force);
      },
      py::arg("config_json"), py::arg("force") = true,
      "generate the synthetic corpus described by a run-config JSON string");
  m.def(
      "build_pairs",
      [](const std::string& config_json, bool force) {
        return pipeline::cmd_build_pairs(config_from_json_str(config_json), force).pairs;
      },
      py::arg("config_json"), py::arg("force") = true, "returns the number of pairs written");

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
}
