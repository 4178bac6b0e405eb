/*
 * Copyright 2026 The cfhybrid Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CFHYBRID_TABULAR_IO_HPP
#define CFHYBRID_TABULAR_IO_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cfhybrid/tabular.hpp"

namespace cfhybrid {

using json = nlohmann::json;

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    return out + "\"";
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv_table(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::data, "csv: missing header row");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
    t.header = split_csv_line(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != t.header.size())
            fail(ErrorKind::data, "csv line " + std::to_string(lineno) + ": expected " +
                                      std::to_string(t.header.size()) + " cells, got " + std::to_string(cells.size()));
        for (const auto& c : cells)
            if (c.empty()) fail(ErrorKind::data, "csv line " + std::to_string(lineno) + ": missing value");
        t.rows.push_back(std::move(cells));
    }
    return t;
}

namespace detail {

inline const json* find_feature_json(const json& schema_json, const std::string& name) {
    if (!schema_json.contains("features")) return nullptr;
    for (const auto& f : schema_json.at("features"))
        if (f.value("name", std::string{}) == name) return &f;
    return nullptr;
}

/// Builds the spec and cell column for one CSV column.
inline FeatureSpec build_column(const std::string& name, const std::vector<std::string>& text, const json* decl,
                                std::vector<double>& cells) {
    bool numeric = true;
    for (const auto& s : text)
        if (!parse_double(s)) {
            numeric = false;
            break;
        }
    std::vector<std::string> tokens;
    bool declared_strings = false;
    if (decl && decl->contains("domain") && decl->at("domain").is_array()) {
        for (const auto& v : decl->at("domain"))
            if (v.is_string()) declared_strings = true;
    }
    const bool token_coded = !numeric || declared_strings;
    if (token_coded) {
        if (declared_strings) {
            for (const auto& v : decl->at("domain")) tokens.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        } else {
            std::set<std::string> distinct(text.begin(), text.end());
            tokens.assign(distinct.begin(), distinct.end());
        }
    }
    cells.clear();
    cells.reserve(text.size());
    for (const auto& s : text) {
        if (token_coded) {
            auto it = std::find(tokens.begin(), tokens.end(), s);
            if (it == tokens.end()) fail(ErrorKind::data, "value '" + s + "' not in declared domain of '" + name + "'");
            cells.push_back(static_cast<double>(it - tokens.begin()));
        } else {
            cells.push_back(*parse_double(s));
        }
    }
    const bool actionable = decl ? decl->value("actionable", true) : true;
    FeatureSpec spec = infer_feature(name, cells, tokens, actionable);
    if (decl && decl->contains("kind")) {
        const auto kind = parse_feature_kind(decl->at("kind").get<std::string>());
        if (kind == FeatureKind::numeric && token_coded)
            fail(ErrorKind::data, "feature '" + name + "' declared numeric but has non-numeric cells");
        if (kind == FeatureKind::numeric && spec.kind != FeatureKind::numeric) {
            spec.min = spec.values.empty() ? 0.0 : spec.values.front();
            spec.max = spec.values.empty() ? 0.0 : spec.values.back();
            spec.values.clear();
        } else if (kind != FeatureKind::numeric && spec.kind == FeatureKind::numeric) {
            std::set<double> distinct(cells.begin(), cells.end());
            spec.values.assign(distinct.begin(), distinct.end());
        }
        spec.kind = kind;
    }
    if (decl && decl->contains("domain") && decl->at("domain").is_array()) {
        const auto& dom = decl->at("domain");
        if (spec.kind == FeatureKind::numeric) {
            if (dom.size() != 2) fail(ErrorKind::data, "numeric domain of '" + name + "' must be [min, max]");
            spec.min = dom[0].get<double>();
            spec.max = dom[1].get<double>();
            for (double c : cells)
                if (c < spec.min || c > spec.max)
                    fail(ErrorKind::data, "value " + format_double(c) + " outside declared domain of '" + name + "'");
        } else {
            std::vector<double> values;
            for (std::size_t i = 0; i < dom.size(); ++i)
                values.push_back(declared_strings ? static_cast<double>(i) : dom[i].get<double>());
            for (double c : cells)
                if (std::find(values.begin(), values.end(), c) == values.end())
                    fail(ErrorKind::data, "value " + spec.format(c) + " outside declared domain of '" + name + "'");
            spec.values = std::move(values);
        }
    }
    return spec;
}

}  // namespace detail

struct LoadedTable {
    Dataset dataset;
    std::string label_column;  // empty when the table has no labels
};

/// Parses a CSV table. `schema_json` may be null (all kinds inferred).
inline LoadedTable load_dataset(std::istream& csv, const json& schema_json = json()) {
    const CsvTable t = read_csv_table(csv);
    std::string label_col;
    if (schema_json.is_object() && schema_json.contains("label")) {
        label_col = schema_json.at("label").get<std::string>();
    } else if (std::find(t.header.begin(), t.header.end(), "label") != t.header.end()) {
        label_col = "label";
    }
    std::vector<FeatureSpec> specs;
    std::vector<std::vector<double>> columns;
    std::vector<int> labels;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        std::vector<std::string> text;
        text.reserve(t.rows.size());
        for (const auto& r : t.rows) text.push_back(r[c]);
        if (t.header[c] == label_col) {
            for (const auto& s : text) {
                auto v = parse_double(s);
                if (!v || *v != std::floor(*v) || *v < 0)
                    fail(ErrorKind::data, "label '" + s + "' is not a class index");
                labels.push_back(static_cast<int>(*v));
            }
            continue;
        }
        const json* decl = schema_json.is_object() ? detail::find_feature_json(schema_json, t.header[c]) : nullptr;
        std::vector<double> cells;
        specs.push_back(detail::build_column(t.header[c], text, decl, cells));
        columns.push_back(std::move(cells));
    }
    if (!label_col.empty() && std::find(t.header.begin(), t.header.end(), label_col) == t.header.end())
        fail(ErrorKind::data, "label column '" + label_col + "' not found");
    if (schema_json.is_object() && schema_json.contains("features")) {
        for (const auto& f : schema_json.at("features")) {
            const auto name = f.value("name", std::string{});
            if (std::find(t.header.begin(), t.header.end(), name) == t.header.end())
                fail(ErrorKind::data, "schema feature '" + name + "' missing from csv");
        }
    }
    std::vector<Instance> rows(t.rows.size(), Instance(specs.size()));
    for (std::size_t j = 0; j < columns.size(); ++j)
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i][j] = columns[j][i];
    int num_classes = 2;
    for (int y : labels) num_classes = std::max(num_classes, y + 1);
    return {Dataset(FeatureSchema(std::move(specs)), std::move(rows), std::move(labels), num_classes), label_col};
}

inline LoadedTable load_dataset(const std::string& csv_path, const std::string& schema_path = {}) {
    std::ifstream in(csv_path);
    if (!in) fail(ErrorKind::data, "cannot open '" + csv_path + "'");
    json schema_json;
    if (!schema_path.empty()) {
        std::ifstream s(schema_path);
        if (!s) fail(ErrorKind::data, "cannot open '" + schema_path + "'");
        try {
            schema_json = json::parse(s);
        } catch (const json::exception& e) {
            fail(ErrorKind::data, "schema '" + schema_path + "': " + e.what());
        }
    }
    return load_dataset(in, schema_json);
}

inline json cell_to_json(const FeatureSpec& f, double cell) {
    if (f.token_coded()) return f.format(cell);
    return cell;
}

inline std::optional<double> cell_from_json(const FeatureSpec& f, const json& v) {
    if (v.is_string()) return f.parse(v.get<std::string>());
    if (v.is_number()) {
        const double d = v.get<double>();
        if (f.token_coded()) return std::nullopt;
        return d;
    }
    if (v.is_boolean()) return v.get<bool>() ? 1.0 : 0.0;
    return std::nullopt;
}

inline json schema_to_json(const FeatureSchema& schema, const std::string& label_column = {}) {
    json features = json::array();
    for (const auto& f : schema.features()) {
        json d = json::array();
        if (f.kind == FeatureKind::numeric) {
            d = json::array({f.min, f.max});
        } else {
            for (double v : f.values) d.push_back(cell_to_json(f, v));
        }
        features.push_back({{"name", f.name}, {"kind", to_string(f.kind)}, {"actionable", f.actionable}, {"domain", d}});
    }
    json out = {{"features", features}};
    if (!label_column.empty()) out["label"] = label_column;
    return out;
}

/// Reads an instance given as {"name": value, ...} or as an array in schema order.
inline Instance instance_from_json(const FeatureSchema& schema, const json& j) {
    Instance x(schema.size());
    if (j.is_array()) {
        if (j.size() != schema.size()) fail(ErrorKind::data, "instance array has wrong length");
        for (std::size_t k = 0; k < schema.size(); ++k) {
            auto v = cell_from_json(schema[k], j[k]);
            if (!v) fail(ErrorKind::data, "bad value for '" + schema[k].name + "'");
            x[k] = *v;
        }
    } else if (j.is_object()) {
        for (std::size_t k = 0; k < schema.size(); ++k) {
            if (!j.contains(schema[k].name)) fail(ErrorKind::data, "instance is missing '" + schema[k].name + "'");
            auto v = cell_from_json(schema[k], j.at(schema[k].name));
            if (!v) fail(ErrorKind::data, "bad value for '" + schema[k].name + "'");
            x[k] = *v;
        }
        for (const auto& [key, _] : j.items())
            if (!schema.index_of(key)) fail(ErrorKind::data, "instance has unknown feature '" + key + "'");
    } else {
        fail(ErrorKind::data, "instance must be an object or array");
    }
    check_instance(schema, x);
    return x;
}

inline json instance_to_json(const FeatureSchema& schema, const Instance& x) {
    json out = json::object();
    for (std::size_t k = 0; k < schema.size(); ++k) out[schema[k].name] = cell_to_json(schema[k], x[k]);
    return out;
}

inline void write_dataset_csv(std::ostream& out, const Dataset& data, const std::string& label_column = "label") {
    const auto& schema = data.schema();
    for (std::size_t j = 0; j < schema.size(); ++j) out << (j ? "," : "") << csv_escape(schema[j].name);
    const bool labels = data.has_labels() && !label_column.empty();
    if (labels) out << ',' << csv_escape(label_column);
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& r = data.row(i);
        for (std::size_t j = 0; j < schema.size(); ++j) out << (j ? "," : "") << csv_escape(schema[j].format(r[j]));
        if (labels) out << ',' << data.labels()[i];
        out << '\n';
    }
}

}  // namespace cfhybrid

#endif  // CFHYBRID_TABULAR_IO_HPP
