// SPDX-License-Identifier: Apache-2.0
//
// Records cross the boundary as JSON text; the Python package decodes them.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dumpscout/discovery.hpp"
#include "dumpscout/dump.hpp"
#include "dumpscout/error.hpp"
#include "dumpscout/lab.hpp"
#include "dumpscout/report.hpp"
#include "dumpscout/scanner.hpp"
#include "dumpscout/signature.hpp"
#include "dumpscout/text.hpp"

namespace py = pybind11;
using namespace dumpscout;

namespace {

Bytes to_bytes(const py::bytes& b) {
  const std::string_view v = b;
  return Bytes(v.begin(), v.end());
}

py::bytes to_py(ByteView v) { return py::bytes(reinterpret_cast<const char*>(v.data()), v.size()); }

std::vector<Encoding> encodings_of(const std::vector<std::string>& names) {
  std::vector<Encoding> out;
  for (const auto& n : names) out.push_back(parse_encoding(n));
  return out;
}

SourceKind format_of(const std::string& s) {
  if (s == "minidump") return SourceKind::minidump;
  if (s == "raw") return SourceKind::raw;
  throw Error(Errc::InvalidArgument, "unknown dump format \"" + s + "\"");
}

std::vector<Finding> scan_dump(const Dump& dump, const Matcher& matcher, unsigned threads) {
  ScanOptions opt;
  opt.threads = threads;
  py::gil_scoped_release release;
  return scan(dump, matcher, opt);
}

}  // namespace

PYBIND11_MODULE(_dumpscout, m) {
  m.doc() = "dumpscout native core";

  static py::exception<Error> error(m, "DumpscoutError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error)(std::string(e.what()));
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::class_<Dump>(m, "Dump")
      .def_static(
          "from_regions",
          [](const std::vector<std::pair<std::uint64_t, py::bytes>>& regions, std::string name) {
            std::vector<std::pair<std::uint64_t, Bytes>> owned;
            for (const auto& [va, b] : regions) owned.emplace_back(va, to_bytes(b));
            return Dump::from_regions(std::move(owned), std::move(name));
          },
          py::arg("regions"), py::arg("name") = "memory")
      .def_static(
          "parse_minidump", [](const py::bytes& b, std::string name) { return parse_minidump(to_bytes(b), name); },
          py::arg("data"), py::arg("name") = "memory.dmp")
      .def_static(
          "load_raw", [](const py::bytes& b, std::string name) { return load_raw(to_bytes(b), name); },
          py::arg("data"), py::arg("name") = "memory.raw")
      .def_static("load", &load_dump_file, py::arg("path"))
      .def_property_readonly("name", &Dump::source_name)
      .def_property_readonly("kind",
                             [](const Dump& d) { return d.source_kind() == SourceKind::raw ? "raw" : "minidump"; })
      .def_property_readonly("total_bytes", &Dump::total_bytes)
      .def("regions",
           [](const Dump& d) {
             std::vector<std::pair<std::uint64_t, py::bytes>> out;
             for (const auto& [va, data] : iter_regions(d)) out.emplace_back(va, to_py(data));
             return out;
           })
      .def("to_minidump", [](const Dump& d) { return to_py(write_minidump(d)); })
      .def("to_raw", [](const Dump& d) { return to_py(write_raw(d)); })
      .def("__len__", [](const Dump& d) { return d.regions().size(); });

  py::class_<Matcher>(m, "Matcher")
      .def_property_readonly("state_count", &Matcher::state_count)
      .def_property_readonly("signature_ids", [](const Matcher& mt) {
        std::vector<std::string> ids;
        for (const auto& s : mt.signatures()) ids.push_back(s.id);
        return ids;
      });

  m.def(
      "compile_signatures", [](const std::string& text) { return compile(parse_signature_set(text)); },
      py::arg("signature_json"));
  m.def(
      "scan_jsonl",
      [](const Dump& d, const Matcher& mt, unsigned threads) { return to_json_lines(scan_dump(d, mt, threads)); },
      py::arg("dump"), py::arg("matcher"), py::arg("threads") = 1);
  m.def(
      "count_occurrences", [](const Dump& d, const py::bytes& needle) { return count_occurrences(d, to_bytes(needle)); },
      py::arg("dump"), py::arg("needle"));
  m.def(
      "find_occurrences",
      [](const Dump& d, const py::bytes& needle) {
        std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
        for (const auto& o : find_occurrences(d, to_bytes(needle))) out.emplace_back(o.region_index, o.offset);
        return out;
      },
      py::arg("dump"), py::arg("needle"));
  m.def(
      "decode_candidates",
      [](const py::bytes& window, const std::vector<std::string>& encodings, std::uint32_t min_run, unsigned phase) {
        std::vector<std::tuple<std::string, std::string, std::uint64_t>> out;
        for (const auto& c : decode_candidates(to_bytes(window), encodings_of(encodings), min_run, phase)) {
          out.emplace_back(std::string(to_string(c.encoding)), c.text, c.offset_in_window);
        }
        return out;
      },
      py::arg("window"), py::arg("encodings") = std::vector<std::string>{"utf8", "utf16le"},
      py::arg("min_run") = kDefaultMinPrintableRun, py::arg("utf16_phase") = 0);
  m.def(
      "encode_text", [](const std::string& text, const std::string& enc) { return to_py(encode_text(text, parse_encoding(enc))); },
      py::arg("text"), py::arg("encoding"));

  m.def(
      "new_vault", [](std::uint64_t seed, std::size_t n) { return to_json(new_vault(seed, n)).dump(); },
      py::arg("seed"), py::arg("n_entries"));
  m.def(
      "simulate",
      [](const std::string& profile_json, const std::string& scenario, const std::string& vault_json,
         std::uint64_t seed, const std::string& format) {
        const LeakProfile profile = leak_profile_from_json(nlohmann::json::parse(profile_json));
        const CredentialSet vault = credential_set_from_json(nlohmann::json::parse(vault_json));
        const SourceKind kind = format_of(format);
        const MemoryImage image = simulate(profile, parse_scenario(scenario), vault, seed);
        return std::make_pair(to_py(emit_dump(image, kind)), to_json(make_truth(image, kind)).dump());
      },
      py::arg("profile_json"), py::arg("scenario"), py::arg("vault_json"), py::arg("seed"),
      py::arg("format") = "minidump");
  m.def(
      "profile_pack", [](const std::string& text) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : parse_profile_pack(text)) arr.push_back(to_json(p));
        return arr.dump();
      },
      py::arg("pack_json"));

  m.def(
      "mine",
      [](const std::vector<const Dump*>& dumps, const std::vector<std::string>& secrets, std::size_t context_len,
         std::size_t min_len, std::size_t max_len, std::uint32_t window_len, const std::string& id_prefix) {
        std::vector<Dump> owned;
        for (const Dump* d : dumps) owned.push_back(*d);
        MiningOptions opt;
        opt.min_len = min_len;
        opt.max_len = max_len;
        opt.window_len = window_len;
        opt.id_prefix = id_prefix;
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : mine_stable_patterns(collect_contexts(owned, secrets, context_len), opt)) {
          arr.push_back(to_json(c));
        }
        return arr.dump();
      },
      py::arg("dumps"), py::arg("secrets"), py::arg("context_len") = kDefaultContextLen, py::arg("min_len") = 8,
      py::arg("max_len") = 32, py::arg("window_len") = kDefaultWindowLen, py::arg("id_prefix") = "mined");

  m.def(
      "classify",
      [](const std::string& findings_jsonl, const std::string& vault_json, std::optional<std::uint32_t> focus) {
        const SecretCounts c = classify_findings(parse_json_lines(findings_jsonl),
                                                 credential_set_from_json(nlohmann::json::parse(vault_json)), focus);
        py::dict d;
        d["master"] = c.master;
        d["entries"] = c.entries;
        d["focus_entry"] = c.focus_entry;
        d["unclassified"] = c.unclassified;
        return d;
      },
      py::arg("findings_jsonl"), py::arg("vault_json"), py::arg("focus_entry") = std::nullopt);

  m.def(
      "build_matrix",
      [](const py::list& runs, bool merge, const std::string& format) {
        std::vector<Run> native;
        for (const auto& item : runs) {
          const auto r = item.cast<py::dict>();
          Run run;
          run.target = r["target"].cast<std::string>();
          run.scenario = parse_scenario(r["scenario"].cast<std::string>());
          if (r.contains("applicable") && !r["applicable"].cast<bool>()) {
            run.applicability = Applicability::not_applicable;
          }
          if (r.contains("counts")) {
            const auto c = r["counts"].cast<py::dict>();
            run.counts.master = c["master"].cast<std::uint64_t>();
            run.counts.entries = c["entries"].cast<std::vector<std::uint64_t>>();
            if (c.contains("focus_entry") && !c["focus_entry"].is_none()) {
              run.counts.focus_entry = c["focus_entry"].cast<std::uint32_t>();
            }
            if (c.contains("unclassified")) run.counts.unclassified = c["unclassified"].cast<std::uint64_t>();
          }
          native.push_back(std::move(run));
        }
        const LeakMatrix matrix = build_leak_matrix(native, merge ? DuplicatePolicy::merge : DuplicatePolicy::reject);
        return render(matrix, parse_render_format(format));
      },
      py::arg("runs"), py::arg("merge") = false, py::arg("format") = "json");
  m.def(
      "render_matrix",
      [](const std::string& matrix_json, const std::string& format) {
        return render(parse_matrix_json(matrix_json), parse_render_format(format));
      },
      py::arg("matrix_json"), py::arg("format") = "markdown");
}
