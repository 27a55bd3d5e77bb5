#ifndef SGCN_IO_HPP
#define SGCN_IO_HPP

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <openssl/evp.h>
#include <zlib.h>

#include "error.hpp"
#include "evaluation.hpp"
#include "signed_graph.hpp"
#include "training.hpp"

namespace sgcn {

/// Whole file as bytes; gzip input is inflated transparently.
inline std::string read_file_bytes(const std::filesystem::path& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (f == nullptr) throw IoError("cannot open " + path.string());
    std::string data;
    char buf[1 << 16];
    int got = 0;
    while ((got = gzread(f, buf, sizeof buf)) > 0) data.append(buf, static_cast<std::size_t>(got));
    const bool failed = got < 0;
    gzclose(f);
    if (failed) throw IoError("error reading " + path.string());
    return data;
}

inline std::vector<EdgeRecord> load_edge_list_file(const std::filesystem::path& path, EdgeFormat format) {
    std::istringstream in(read_file_bytes(path));
    return load_edge_list(in, format);
}

/// Git-style blob id: SHA-1 over "blob <size>\0" followed by the content.
inline std::string content_hash(std::string_view bytes) {
    const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw std::runtime_error("EVP_MD_CTX_new failed");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                    EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("SHA-1 digest failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return hex.str();
}

namespace detail {

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

} // namespace detail

/// Header `node_id,z_1,...,z_d`; one row per node keyed by its raw id.
inline void write_embedding_csv(std::ostream& out, const Matrix& z, const IdMap& ids) {
    if (static_cast<std::size_t>(z.rows()) != ids.size()) throw ShapeError("embedding rows do not match the id map");
    out << "node_id";
    for (Index c = 0; c < z.cols(); ++c) out << ",z_" << (c + 1);
    out << '\n';
    for (Index r = 0; r < z.rows(); ++r) {
        out << ids.raw(static_cast<NodeId>(r));
        for (Index c = 0; c < z.cols(); ++c) out << ',' << detail::format_double(z(r, c));
        out << '\n';
    }
}

/// Reads an embedding CSV back; rows are returned in file order with their raw ids.
inline std::pair<std::vector<RawId>, Matrix> read_embedding_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || !line.starts_with("node_id")) throw IoError("embedding CSV lacks its header");
    const auto width = static_cast<Index>(detail::split_fields(line, ",").size()) - 1;
    std::vector<RawId> ids;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_fields(line, ",");
        if (static_cast<Index>(fields.size()) != width + 1) throw ParseError(line_no, "wrong number of columns");
        ids.push_back(detail::parse_id(fields[0], line_no, "node"));
        for (std::size_t c = 1; c < fields.size(); ++c) {
            double v = 0.0;
            if (!detail::parse_number(fields[c], v)) throw ParseError(line_no, "invalid value '" + std::string(fields[c]) + "'");
            values.push_back(v);
        }
    }
    Matrix z(static_cast<Index>(ids.size()), width);
    for (Index r = 0; r < z.rows(); ++r)
        for (Index c = 0; c < width; ++c) z(r, c) = values[static_cast<std::size_t>(r * width + c)];
    return {std::move(ids), std::move(z)};
}

/// `epoch,mean_loss,mlg_part,margin_part,reg_part`. margin_part is the
/// un-weighted hinge sum; mean_loss = mlg + lambda * margin + reg.
inline void write_loss_history_csv(std::ostream& out, const std::vector<EpochLoss>& history) {
    out << "epoch,mean_loss,mlg_part,margin_part,reg_part\n";
    for (const auto& h : history)
        out << h.epoch << ',' << detail::format_double(h.loss.total) << ',' << detail::format_double(h.loss.mlg) << ','
            << detail::format_double(h.loss.margin) << ',' << detail::format_double(h.loss.reg) << '\n';
}

struct ReportRow {
    std::string dataset;
    std::string method;
    std::uint64_t seed = 0;
    EvalReport report;
};

inline void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
    out << "dataset,method,seed,auc,f1,n_test_pos,n_test_neg\n";
    for (const auto& r : rows)
        out << r.dataset << ',' << r.method << ',' << r.seed << ',' << detail::format_double(r.report.auc) << ','
            << detail::format_double(r.report.f1) << ',' << r.report.n_test_pos << ',' << r.report.n_test_neg << '\n';
}

struct AggregateRow {
    std::string dataset;
    std::string method;
    std::size_t runs = 0;
    double auc_mean = 0.0;
    double auc_std = 0.0;
    double f1_mean = 0.0;
    double f1_std = 0.0;
};

/// Mean and sample standard deviation per (dataset, method), first-seen order.
inline std::vector<AggregateRow> aggregate_reports(const std::vector<ReportRow>& rows) {
    std::vector<AggregateRow> out;
    std::vector<std::vector<const ReportRow*>> groups;
    for (const auto& r : rows) {
        std::size_t g = 0;
        while (g < out.size() && !(out[g].dataset == r.dataset && out[g].method == r.method)) ++g;
        if (g == out.size()) {
            out.push_back({r.dataset, r.method});
            groups.emplace_back();
        }
        groups[g].push_back(&r);
    }
    for (std::size_t g = 0; g < out.size(); ++g) {
        const auto& members = groups[g];
        const double k = static_cast<double>(members.size());
        double sa = 0.0, sf = 0.0;
        for (const auto* r : members) {
            sa += r->report.auc;
            sf += r->report.f1;
        }
        out[g].runs = members.size();
        out[g].auc_mean = sa / k;
        out[g].f1_mean = sf / k;
        if (members.size() > 1) {
            double va = 0.0, vf = 0.0;
            for (const auto* r : members) {
                va += std::pow(r->report.auc - out[g].auc_mean, 2);
                vf += std::pow(r->report.f1 - out[g].f1_mean, 2);
            }
            out[g].auc_std = std::sqrt(va / (k - 1.0));
            out[g].f1_std = std::sqrt(vf / (k - 1.0));
        }
    }
    return out;
}

inline void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
    out << "dataset,method,runs,auc_mean,auc_std,f1_mean,f1_std\n";
    for (const auto& r : rows)
        out << r.dataset << ',' << r.method << ',' << r.runs << ',' << detail::format_double(r.auc_mean) << ','
            << detail::format_double(r.auc_std) << ',' << detail::format_double(r.f1_mean) << ','
            << detail::format_double(r.f1_std) << '\n';
}

} // namespace sgcn

#endif // SGCN_IO_HPP
