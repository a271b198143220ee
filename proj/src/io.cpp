#include "pmatrix/io.hpp"

#include <fstream>
#include <sstream>

namespace pmatrix::io {

using nlohmann::json;

nlohmann::json instance_to_json(const Instance& inst) {
    const int n = inst.m.dim();
    json j;
    j["n"] = n;
    j["m"] = std::vector<double>(inst.m.entries().begin(), inst.m.entries().end());
    j["u"] = inst.u;
    j["v"] = inst.v;
    return j;
}

Instance instance_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("m"))
        throw std::invalid_argument("instance: expected an object with \"n\" and \"m\"");
    const int n = j.at("n").get<int>();
    if (n < 1 || n > 63) throw std::invalid_argument("instance: dimension out of range");
    const auto entries = j.at("m").get<std::vector<double>>();
    if (entries.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw std::invalid_argument("instance: matrix entry count does not match n*n");

    Instance inst;
    inst.m = Matrix(n);
    std::copy(entries.begin(), entries.end(), inst.m.entries().begin());
    inst.u = j.contains("u") ? j.at("u").get<std::vector<double>>()
                             : std::vector<double>(static_cast<std::size_t>(n), 0.0);
    inst.v = j.contains("v") ? j.at("v").get<std::vector<double>>()
                             : std::vector<double>(static_cast<std::size_t>(n), 0.0);
    inst.validate();
    return inst;
}

void save_instance(const Instance& inst, const std::filesystem::path& path) {
    write_text(path, instance_to_json(inst).dump(2) + "\n");
}

Instance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("malformed instance file " + path.string() + ": " + e.what());
    }
    return instance_from_json(j);
}

namespace {

json minor_record_to_json(const MinorRecord& r, const ViolationReport* report) {
    json j;
    j["mask_bits"] = r.alpha.bits;
    j["subset"] = r.alpha.to_string();
    j["value"] = r.value;
    if (report) j["marginal"] = report->is_marginal(r);
    return j;
}

} // namespace

nlohmann::json violation_report_to_json(const ViolationReport& report) {
    json j;
    j["n"] = report.n;
    j["tau"] = report.tau;
    j["total_minors"] = report.total_minors;
    j["regime"] = regime_name(report.regime);
    j["min_minor"] = minor_record_to_json(report.min_minor, &report);
    j["violations"] = json::array();
    for (const auto& v : report.violations)
        j["violations"].push_back(minor_record_to_json(v, &report));
    j["violation_count"] = report.violations.size();
    return j;
}

nlohmann::json forge_result_to_json(const ForgeResult& result) {
    json j;
    j["witness"] = result.witness.to_string();
    j["witness_mask_bits"] = result.witness.bits;
    j["witness_value"] = result.witness_value;
    j["lambda"] = result.lambda;
    j["alpha_star"] = result.alpha_star.to_string();
    j["alpha_star_mask_bits"] = result.alpha_star.bits;
    j["f_m"] = result.f_m;
    return j;
}

nlohmann::json first_hit_report_to_json(const FirstHitReport& report) {
    json j;
    j["n"] = report.n;
    j["p"] = report.p;
    j["trials"] = report.trials;
    j["strategy"] = report.strategy;
    j["seed"] = report.seed;
    j["mode"] = report.mode == OracleMode::sign ? "sign" : "value";
    j["mean_rounds"] = report.mean_rounds;
    j["mean_queries"] = report.mean_queries;
    if (report.exact_expectation) j["exact_expectation"] = *report.exact_expectation;
    json hist = json::object();
    for (const auto& [round, count] : report.histogram) hist[std::to_string(round)] = count;
    j["histogram"] = hist;
    return j;
}

nlohmann::json info_report_to_json(const InfoReport& report) {
    json j;
    j["n"] = report.n;
    j["candidates"] = report.candidates;
    j["q"] = report.q;
    j["prior_entropy_bits"] = report.prior_entropy_bits;
    if (report.mi_exact_bits) j["mi_exact_bits"] = *report.mi_exact_bits;
    if (report.mi_estimate_bits) {
        j["mi_estimate_bits"] = *report.mi_estimate_bits;
        j["mi_estimate_samples"] = *report.mi_estimate_samples;
    }
    j["mi_upper_bound_bits"] = report.mi_upper_bound_bits;
    j["fano_error_lower"] = report.fano_error_lower;
    j["all_zero_prob_exact"] = report.all_zero_prob_exact;
    j["all_zero_prob_union_bound"] = report.all_zero_prob_union_bound;
    return j;
}

nlohmann::json sign_report_to_json(const ConditionalSignReport& report) {
    json j;
    j["n"] = report.config.n;
    j["ensemble"] = ensemble_name(report.config.kind);
    j["samples"] = report.config.samples;
    j["seed"] = report.config.seed;
    j["pairs"] = json::array();
    for (const auto& p : report.pairs) {
        json pj;
        pj["alpha"] = p.alpha.to_string();
        pj["beta"] = p.beta.to_string();
        pj["overlap"] = p.overlap;
        pj["n_pp"] = p.counts[0][0];
        pj["n_pn"] = p.counts[0][1];
        pj["n_np"] = p.counts[1][0];
        pj["n_nn"] = p.counts[1][1];
        pj["cond_b_nonpos_given_a_pos"] = p.cond_b_given_a[0][1];
        pj["cond_b_pos_given_a_pos"] = p.cond_b_given_a[0][0];
        pj["mi_bits"] = p.mi_bits;
        j["pairs"].push_back(pj);
    }
    return j;
}

std::string format_double(double x) {
    // Reuse the JSON encoder's shortest-round-trip rendering.
    return json(x).dump();
}

std::string minors_csv(const std::vector<MinorRecord>& records, const std::string& config_line) {
    std::ostringstream os;
    os << "# artifact_version=" << kArtifactVersion << "\n";
    if (!config_line.empty()) os << "# " << config_line << "\n";
    os << "mask_bits,subset,value\n";
    for (const auto& r : records)
        os << r.alpha.bits << ",\"" << r.alpha.to_string() << "\"," << format_double(r.value)
           << "\n";
    return os.str();
}

std::string histogram_csv(const FirstHitReport& report) {
    std::ostringstream os;
    os << "# artifact_version=" << kArtifactVersion << "\n";
    os << "# n=" << report.n << " p=" << report.p << " trials=" << report.trials
       << " strategy=" << report.strategy << " seed=" << report.seed << "\n";
    os << "round,count\n";
    for (const auto& [round, count] : report.histogram) os << round << "," << count << "\n";
    return os.str();
}

std::string sign_report_csv(const ConditionalSignReport& report) {
    std::ostringstream os;
    os << "# artifact_version=" << kArtifactVersion << "\n";
    os << "# n=" << report.config.n << " ensemble=" << ensemble_name(report.config.kind)
       << " samples=" << report.config.samples << " seed=" << report.config.seed << "\n";
    os << "alpha,beta,overlap,n_pp,n_pn,n_np,n_nn,mi_bits\n";
    for (const auto& p : report.pairs)
        os << "\"" << p.alpha.to_string() << "\",\"" << p.beta.to_string() << "\"," << p.overlap
           << "," << p.counts[0][0] << "," << p.counts[0][1] << "," << p.counts[1][0] << ","
           << p.counts[1][1] << "," << format_double(p.mi_bits) << "\n";
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    out << text;
}

} // namespace pmatrix::io
