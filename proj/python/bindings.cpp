#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "editex/error.hpp"
#include "editex/features.hpp"
#include "editex/json_io.hpp"
#include "editex/pipeline.hpp"
#include "editex/post_parser.hpp"
#include "editex/text.hpp"

namespace py = pybind11;
using namespace editex;

namespace {

// Structured results cross the boundary as JSON text; the Python package
// decodes them into dicts.

EditPair make_pair(std::string before, std::string after, std::int64_t reputation, std::string user_name,
                   std::optional<std::string> other_party_name) {
    if (reputation < 0) throw Error(ErrorCode::InvalidArgument, "reputation must be non-negative");
    EditPair p;
    p.id = "python";
    p.body_before_html = std::move(before);
    p.body_after_html = std::move(after);
    p.editor_name = std::move(user_name);
    p.other_party_name = std::move(other_party_name);
    p.editor_reputation = reputation;
    return p;
}

ModelBundle train_from_file(const std::filesystem::path& data_path, const std::string& algo_name,
                            std::uint64_t seed, double train_fraction, int n_trees) {
    const auto algo = ml::parse_algo(algo_name);
    if (!algo) throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + algo_name + "'");
    ml::ModelParams params = ml::ModelParams::defaults(*algo);
    params.seed = seed;
    params.n_trees = n_trees;
    const IngestResult data = ingest(data_path, format_for(data_path));
    std::vector<IngestRecord> labelled;
    for (const auto& r : data.records) {
        if (r.label) labelled.push_back(r);
    }
    if (labelled.empty()) throw Error(ErrorCode::EmptyInput, "no labelled rows in " + data_path.string());
    const auto split = chronological_split(std::move(labelled), train_fraction);
    return fit_bundle(featurize(split.train, LinkCheckDisabled{}), params);
}

}  // namespace

PYBIND11_MODULE(_editex, m) {
    m.doc() = "Suggested-edit rejection prediction";

    static py::exception<Error> error_type(m, "EditexError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error_type, py::make_tuple(std::string(to_string(e.code())), e.what()));
        }
    });

    m.attr("MODEL_SCHEMA_VERSION") = kModelSchemaVersion;

    m.def("levenshtein", py::overload_cast<std::string_view, std::string_view>(&levenshtein), py::arg("a"),
          py::arg("b"), "Edit distance between two UTF-8 strings, counted in code points.");
    m.def("normalize_text", &normalize_text, py::arg("text"));
    m.def(
        "parse_post_json", [](std::string_view html) { return to_json(parse_post(html)).dump(); }, py::arg("html"));
    m.def(
        "extract_features_json",
        [](std::string before, std::string after, std::int64_t reputation, std::string user_name,
           std::optional<std::string> other_party_name) {
            const EditPair p = make_pair(std::move(before), std::move(after), reputation, std::move(user_name),
                                         std::move(other_party_name));
            py::gil_scoped_release release;
            return to_json(extract_features(p, LinkCheckDisabled{})).dump();
        },
        py::arg("text_before"), py::arg("text_after"), py::arg("reputation"), py::arg("user_name"),
        py::arg("other_party_name") = py::none());

    py::class_<ModelBundle>(m, "Model")
        .def_static("load", &load_model, py::arg("path"))
        .def_static(
            "from_json", [](std::string_view doc) { return deserialize_model(doc); }, py::arg("document"))
        .def_static(
            "train",
            [](const std::filesystem::path& data, const std::string& algo, std::uint64_t seed, double fraction,
               int n_trees) {
                py::gil_scoped_release release;
                return train_from_file(data, algo, seed, fraction, n_trees);
            },
            py::arg("data_path"), py::arg("algo") = "rf", py::arg("seed") = 42, py::arg("train_fraction") = 0.7,
            py::arg("n_trees") = 100)
        .def("save", &save_model, py::arg("path"))
        .def("to_json", &serialize_model)
        .def_property_readonly("algo", [](const ModelBundle& b) { return std::string(ml::algo_name(b.predictor.algo)); })
        .def_property_readonly("decision_threshold", [](const ModelBundle& b) { return b.decision_threshold; })
        .def(
            "predict_json",
            [](const ModelBundle& b, std::string before, std::string after, std::int64_t reputation,
               std::string user_name) {
                const EditPair p = make_pair(std::move(before), std::move(after), reputation, std::move(user_name),
                                             std::nullopt);
                py::gil_scoped_release release;
                return to_json(predict_edit(b, p, LinkCheckDisabled{})).dump();
            },
            py::arg("text_before"), py::arg("text_after"), py::arg("reputation"), py::arg("user_name"));

    m.def(
        "run_experiment_json",
        [](const std::filesystem::path& data, std::uint64_t seed, int n_trees, int permutations, bool ablation) {
            ExperimentOptions o;
            o.seed = seed;
            o.n_trees = n_trees;
            o.shapley_permutations = permutations;
            o.run_ablation = ablation;
            py::gil_scoped_release release;
            return to_json(run_experiment(data, o)).dump();
        },
        py::arg("data_path"), py::arg("seed") = 42, py::arg("n_trees") = 100, py::arg("permutations") = 200,
        py::arg("ablation") = true);
}
