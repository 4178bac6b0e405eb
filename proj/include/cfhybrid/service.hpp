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

#ifndef CFHYBRID_SERVICE_HPP
#define CFHYBRID_SERVICE_HPP

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "httplib.h"
#include "json.hpp"

#include "cfhybrid/cf_hybrid.hpp"
#include "cfhybrid/evaluation.hpp"
#include "cfhybrid/gbm.hpp"
#include "cfhybrid/tabular_io.hpp"

namespace cfhybrid {

struct ServiceOptions {
    std::chrono::milliseconds request_timeout{30000};
    unsigned threads = 1;
    std::string cors_origin = "*";
    std::string static_dir;  // explorer assets, served under /ui when set
    MocConfig moc;
};

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

/// Read-only HTTP facade over one dataset and one model. handle() is the whole
/// routing table and can be exercised without a socket; bind() attaches it to
/// an httplib server.
class ApiService {
public:
    ApiService(Dataset data, GbmModel model, std::optional<EvalReport> metrics = std::nullopt,
               ServiceOptions opts = {})
        : data_(std::move(data)), model_(std::move(model)), metrics_(std::move(metrics)), opts_(std::move(opts)) {
        model_.check_schema(data_.schema());
        risk_ = model_.class_probabilities(data_.rows(), 1);
    }

    const Dataset& dataset() const { return data_; }
    const GbmModel& model() const { return model_; }

    /// Hash over dataset rows, labels and the serialized model.
    std::string state_hash() const {
        std::uint64_t h = fnv1a(model_to_json(model_).dump());
        for (const auto& r : data_.rows())
            for (double v : r) h = fnv1a(format_double(v), fnv1a(",", h));
        for (int y : data_.labels()) h = fnv1a(std::to_string(y), h);
        return hex64(h);
    }

    ApiResponse handle(std::string_view method, std::string_view path,
                       const std::multimap<std::string, std::string>& params = {}, std::string_view body = {}) const {
        try {
            if (method == "GET") {
                if (path == "/healthz") return {200, {{"status", "ok"}}};
                if (path == "/schema") return {200, schema_to_json(data_.schema(), "label")};
                if (path == "/patients") return list_patients(params);
                if (path.starts_with("/patients/")) return get_patient(path.substr(10));
                if (path == "/model/metrics") {
                    if (!metrics_) return error(404, "no evaluation report loaded");
                    return {200, to_json(*metrics_)};
                }
                return error(404, "no route for GET " + std::string(path));
            }
            if (method == "POST") {
                if (path != "/predict" && path != "/counterfactuals")
                    return error(404, "no route for POST " + std::string(path));
                nlohmann::json req;
                try {
                    req = nlohmann::json::parse(body);
                } catch (const nlohmann::json::exception& e) {
                    return error(400, std::string("invalid JSON body: ") + e.what());
                }
                if (!req.is_object()) return error(400, "request body must be a JSON object");
                if (path == "/predict") return predict(req);
                return counterfactuals(req);
            }
            return error(405, "method not allowed");
        } catch (const Error& e) {
            switch (e.kind()) {
                case ErrorKind::invalid_argument:
                case ErrorKind::data: return error(400, e.what());
                case ErrorKind::constraint: return error(422, e.what());
                case ErrorKind::not_found: return error(404, e.what());
                case ErrorKind::timeout: return error(504, e.what());
            }
            return error(500, e.what());
        } catch (const nlohmann::json::exception& e) {
            return error(400, e.what());
        } catch (const std::exception& e) {
            return error(500, e.what());
        }
    }

    void bind(httplib::Server& server) const {
        auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
            std::multimap<std::string, std::string> params(req.params.begin(), req.params.end());
            const auto out = handle(req.method, req.path, params, req.body);
            res.status = out.status;
            res.set_content(out.body.dump(), "application/json");
        };
        server.set_default_headers({{"Access-Control-Allow-Origin", opts_.cors_origin},
                                    {"Access-Control-Allow-Headers", "Content-Type"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
        if (!opts_.static_dir.empty()) server.set_mount_point("/ui", opts_.static_dir);
        server.Get(R"(/(healthz|schema|patients|patients/[^/]+|model/metrics))", dispatch);
        server.Post(R"(/(predict|counterfactuals))", dispatch);
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    }

private:
    static ApiResponse error(int status, const std::string& message) {
        return {status, {{"code", status}, {"message", message}}};
    }

    std::size_t parse_row_id(std::string_view text) const {
        auto v = parse_double(text);
        if (!v || *v < 0 || *v != std::floor(*v) || *v >= static_cast<double>(data_.size()))
            fail(ErrorKind::not_found, "unknown patient id '" + std::string(text) + "'");
        return static_cast<std::size_t>(*v);
    }

    nlohmann::json key_fields(std::size_t i) const {
        nlohmann::json out = nlohmann::json::object();
        const auto& schema = data_.schema();
        for (std::size_t j = 0; j < schema.size(); ++j)
            if (!schema[j].actionable) out[schema[j].name] = cell_to_json(schema[j], data_.row(i)[j]);
        return out;
    }

    ApiResponse list_patients(const std::multimap<std::string, std::string>& params) const {
        std::size_t limit = 100;
        if (auto it = params.find("limit"); it != params.end()) {
            auto v = parse_double(it->second);
            if (!v || *v < 0 || *v != std::floor(*v)) fail(ErrorKind::invalid_argument, "limit must be a count");
            limit = static_cast<std::size_t>(*v);
        }
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < std::min(limit, data_.size()); ++i) {
            nlohmann::json r = {{"id", i}, {"risk", risk_[i]}, {"fields", key_fields(i)}};
            if (data_.has_labels()) r["label"] = data_.labels()[i];
            rows.push_back(std::move(r));
        }
        return {200, {{"total", data_.size()}, {"patients", rows}}};
    }

    ApiResponse get_patient(std::string_view id) const {
        const auto i = parse_row_id(id);
        const auto probs = model_.predict_proba(data_.row(i));
        nlohmann::json out = {{"id", i}, {"instance", instance_to_json(data_.schema(), data_.row(i))}, {"prediction", probs}};
        if (data_.has_labels()) out["label"] = data_.labels()[i];
        return {200, out};
    }

    Instance instance_of(const nlohmann::json& req) const {
        if (req.contains("row_id")) {
            const auto& id = req.at("row_id");
            return data_.row(parse_row_id(id.is_string() ? id.get<std::string>() : id.dump()));
        }
        if (req.contains("instance")) return instance_from_json(data_.schema(), req.at("instance"));
        fail(ErrorKind::invalid_argument, "request needs 'row_id' or 'instance'");
    }

    ApiResponse predict(const nlohmann::json& req) const {
        const auto x = instance_of(req);
        return {200, {{"probabilities", model_.predict_proba(x)}}};
    }

    ApiResponse counterfactuals(const nlohmann::json& req) const {
        CfQuery q;
        q.x0 = instance_of(req);
        q.target_class = req.value("target_class", std::size_t{1});
        q.p_min = req.value("p_min", 0.0);
        q.p_max = req.value("p_max", metrics_ ? metrics_->operating.threshold : 0.5);
        q.k = req.value("k", std::size_t{5});
        q.alpha = req.value("alpha", 1.0);
        q.beta = req.value("beta", 1.0);
        q.m_max = req.value("m_max", std::size_t{16});
        q.seed = req.value("seed", std::uint64_t{0});
        if (req.contains("fixed")) {
            for (const auto& name : req.at("fixed")) {
                if (!name.is_string()) fail(ErrorKind::invalid_argument, "fixed must list feature names");
                q.fixed.push_back(data_.schema().require_index(name.get<std::string>()));
            }
        }
        HybridOptions ho;
        ho.threads = opts_.threads;
        ho.moc = opts_.moc;
        ho.deadline = Deadline(opts_.request_timeout);
        const auto report = generate(q, model_, data_, ho);
        return {200, to_json(report, q.x0, data_.schema(), true)};
    }

    Dataset data_;
    GbmModel model_;
    std::optional<EvalReport> metrics_;
    ServiceOptions opts_;
    std::vector<double> risk_;
};

}  // namespace cfhybrid

#endif  // CFHYBRID_SERVICE_HPP
