#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uqkit/calibration.hpp"
#include "uqkit/compare.hpp"
#include "uqkit/conformal.hpp"
#include "uqkit/io.hpp"
#include "uqkit/mcdropout.hpp"
#include "uqkit/mininet.hpp"
#include "uqkit/sparsity.hpp"

// Serialization of results to JSON/CSV artifacts. All writes go through
// atomic_write so partially written reports never appear on disk.

namespace uqkit {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Flags and inputs that produced a report; embedded into every JSON report.
struct RunManifest {
    std::string command;
    std::vector<std::string> inputs;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    std::size_t n_passes = 50;
    std::size_t ece_bins = 15;
    std::string out_dir;

    nlohmann::json to_json() const {
        return {{"command", command}, {"inputs", inputs},       {"seed", seed},
                {"alpha", alpha},     {"n_passes", n_passes},   {"ece_bins", ece_bins},
                {"out_dir", out_dir}, {"toolkit_version", kToolkitVersion}};
    }
};

inline nlohmann::json histogram_json(const SetSizeHistogram& h) {
    nlohmann::json global = nlohmann::json::object();
    for (const auto& [size, count] : h.global) global[std::to_string(size)] = count;
    nlohmann::json per_class = nlohmann::json::object();
    for (const auto& [cls, table] : h.per_class) {
        nlohmann::json t = nlohmann::json::object();
        for (const auto& [size, count] : table) t[std::to_string(size)] = count;
        per_class[std::to_string(cls)] = t;
    }
    return {{"global", global},
            {"per_class", per_class},
            {"keyed_by", h.keyed_by_predicted ? "predicted" : "true"}};
}

inline nlohmann::json conformal_report_json(const QuantileThreshold& q, double coverage,
                                            double mean_size, const SetSizeHistogram& hist,
                                            const RunManifest& manifest) {
    return {{"alpha", q.alpha},
            {"n_cal", q.n},
            {"k", q.k},
            {"q_hat", q.q_hat},
            {"coverage", coverage},
            {"mean_set_size", mean_size},
            {"histogram", histogram_json(hist)},
            {"manifest", manifest.to_json()}};
}

inline std::string set_size_histogram_csv(const SetSizeHistogram& h) {
    std::ostringstream out;
    out << "class,set_size,count\n";
    for (const auto& [size, count] : h.global) out << "all," << size << "," << count << "\n";
    for (const auto& [cls, table] : h.per_class)
        for (const auto& [size, count] : table) out << cls << "," << size << "," << count << "\n";
    return out.str();
}

inline std::string score_histogram_csv(const std::vector<std::size_t>& counts) {
    std::ostringstream out;
    out << "bin_lo,bin_hi,count\n";
    const double width = 1.0 / static_cast<double>(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b)
        out << static_cast<double>(b) * width << "," << static_cast<double>(b + 1) * width << ","
            << counts[b] << "\n";
    return out.str();
}

inline std::string uncertainty_table_csv(const UncertaintyTable& table, const Labels& labels) {
    std::ostringstream out;
    out.precision(17);
    out << "index,pred,label,predictive_entropy,expected_entropy,mutual_information,"
           "max_confidence,confidence_std\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        out << i << "," << r.pred << "," << labels.at(i) << "," << r.predictive_entropy << ","
            << r.expected_entropy << "," << r.mutual_information << "," << r.max_confidence << ","
            << r.confidence_std << "\n";
    }
    return out.str();
}

inline nlohmann::json class_summary_json(const ClassUncertaintySummary& summary) {
    nlohmann::json classes = nlohmann::json::object();
    for (const auto& [cls, s] : summary.classes) {
        nlohmann::json entry = {{"count_correct", s.count_correct},
                                {"count_incorrect", s.count_incorrect}};
        if (s.mean_entropy_correct) entry["mean_entropy_correct"] = *s.mean_entropy_correct;
        if (s.mean_entropy_incorrect) entry["mean_entropy_incorrect"] = *s.mean_entropy_incorrect;
        classes[std::to_string(cls)] = entry;
    }
    return {{"classes", classes},
            {"keyed_by", summary.keyed_by_predicted ? "predicted" : "true"}};
}

inline std::string confidence_profile_csv(const std::vector<ConfidencePoint>& profile) {
    std::ostringstream out;
    out.precision(17);
    out << "rank,mean_confidence,confidence_std\n";
    for (std::size_t i = 0; i < profile.size(); ++i)
        out << i << "," << profile[i].mean_confidence << "," << profile[i].confidence_std << "\n";
    return out.str();
}

inline std::string classwise_entropy_csv(const std::map<std::size_t, FiveNumberSummary>& dist) {
    std::ostringstream out;
    out.precision(17);
    out << "class,min,q1,median,q3,max\n";
    for (const auto& [cls, s] : dist)
        out << cls << "," << s.min << "," << s.q1 << "," << s.median << "," << s.q3 << "," << s.max
            << "\n";
    return out.str();
}

inline std::string reliability_csv(const ReliabilityBins& bins) {
    std::ostringstream out;
    out.precision(17);
    out << "bin_lo,bin_hi,count,conf,acc\n";
    for (const auto& b : bins.bins)
        out << b.lo << "," << b.hi << "," << b.count << "," << b.mean_confidence << ","
            << b.accuracy << "\n";
    return out.str();
}

namespace detail {

inline std::string range_label(const SparsityProfile::Range& r) {
    std::ostringstream label;
    if (std::isinf(r.hi))
        label << ">=" << r.lo;
    else if (r.lo == 0.0)
        label << "<" << r.hi;
    else
        label << r.lo << "-" << r.hi;
    return label.str();
}

inline std::string fixed2(double v) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << v;
    return out.str();
}

}  // namespace detail

// Columns follow the report table layout: range, count, percent, cumulative.
inline std::string sparsity_profile_csv(const SparsityProfile& p) {
    std::ostringstream out;
    out << "range,count,percent,cumulative\n";
    for (const auto& r : p.ranges)
        out << detail::range_label(r) << "," << r.count << "," << detail::fixed2(r.percent) << ","
            << detail::fixed2(r.cumulative_percent) << "\n";
    return out.str();
}

inline nlohmann::json sparsity_profile_json(const SparsityProfile& p) {
    nlohmann::json ranges = nlohmann::json::array();
    for (const auto& r : p.ranges) {
        nlohmann::json entry = {{"range", detail::range_label(r)},
                                {"lo", r.lo},
                                {"count", r.count},
                                {"percent", r.percent},
                                {"cumulative_percent", r.cumulative_percent}};
        if (!std::isinf(r.hi)) entry["hi"] = r.hi;
        ranges.push_back(entry);
    }
    return {{"total", p.total}, {"ranges", ranges}};
}

inline std::string joint_records_csv(const std::vector<JointRecord>& records) {
    std::ostringstream out;
    out.precision(17);
    out << "sample,set_size,entropy,correct\n";
    for (std::size_t i = 0; i < records.size(); ++i)
        out << i << "," << records[i].set_size << "," << records[i].predictive_entropy << ","
            << (records[i].correct ? 1 : 0) << "\n";
    return out.str();
}

inline nlohmann::json confusion_json(const ConfusionMatrix& cm) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t t = 0; t < cm.n_classes; ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t p = 0; p < cm.n_classes; ++p) row.push_back(cm.at(t, p));
        rows.push_back(row);
    }
    return rows;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    atomic_write(path, j.dump(2) + "\n");
}

// Checkpoint sidecar describing the network in the matching UQTK blob.
inline nlohmann::json mininet_sidecar_json(const MiniNet& net) {
    return {{"layer_dims", net.layer_dims()},
            {"dropout_rate", net.dropout_rate()},
            {"seed", net.seed()}};
}

inline MiniNet mininet_from_checkpoint(const std::string& weights_path,
                                       const std::string& sidecar_path) {
    auto buf = detail::read_all(sidecar_path);
    auto j = nlohmann::json::parse(buf.begin(), buf.end());
    MiniNet net(j.at("layer_dims").get<std::vector<std::size_t>>(),
                j.at("dropout_rate").get<double>(), j.at("seed").get<std::uint64_t>());
    net.import_weights(load_weight_vector(weights_path));
    return net;
}

}  // namespace uqkit
