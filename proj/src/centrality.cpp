#include "spectral_econ/centrality.hpp"

#include "spectral_econ/error.hpp"
#include "spectral_econ/matrix_core.hpp"

#include <fmt/format.h>

namespace spectral_econ {

namespace {

std::vector<std::string> labels_of(const SquareMatrix& m) {
    std::vector<std::string> out;
    out.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out.push_back(m.label(i));
    return out;
}

}  // namespace

CentralityResult degree_centrality(const SquareMatrix& m, DegreeDirection direction) {
    require_nonnegative(m, "degree_centrality");
    const auto n = static_cast<Eigen::Index>(m.size());
    CentralityResult result;
    result.kind = CentralityKind::degree;
    result.normalization = "raw";
    result.labels = labels_of(m);
    switch (direction) {
        case DegreeDirection::out: result.scores = m.entries().rowwise().sum(); break;
        case DegreeDirection::in: result.scores = m.entries().colwise().sum().transpose(); break;
        case DegreeDirection::undirected: {
            result.scores = Vector::Zero(n);
            for (std::size_t i = 0; i < m.size(); ++i) {
                for (std::size_t j = 0; j < m.size(); ++j) {
                    if (i != j && (m.has_edge(i, j) || m.has_edge(j, i))) {
                        result.scores[static_cast<Eigen::Index>(i)] += 1.0;
                    }
                }
            }
            break;
        }
    }
    return result;
}

CentralityResult eigenvector_centrality(const SquareMatrix& m) {
    require_nonnegative(m, "eigenvector_centrality");
    if (!is_irreducible(m)) {
        throw PreconditionViolation(
            "eigenvector centrality is unique only within a strongly connected component; "
            "the matrix is reducible, analyse each component separately");
    }
    CentralityResult result;
    result.kind = CentralityKind::eigenvector;
    result.normalization = "sum-1";
    result.scores = perron_pair(m).left;
    result.labels = labels_of(m);
    return result;
}

CentralityResult katz_bonacich(const SquareMatrix& m, double delta, const Vector& z,
                               Orientation orientation) {
    require_nonnegative(m, "katz_bonacich");
    CentralityResult result;
    result.kind = CentralityKind::katz_bonacich;
    result.normalization = "raw";
    result.params = KatzParams{delta, z};
    result.labels = labels_of(m);
    if (orientation == Orientation::as_given) {
        result.scores = resolvent_solve(m, z, delta, Side::left);
    } else {
        // Left solve on M^T equals a right solve on M.
        result.scores = resolvent_solve(m, z, delta, Side::right);
    }
    return result;
}

CentralityResult katz_bonacich(const SquareMatrix& m, double delta) {
    return katz_bonacich(m, delta, Vector::Ones(static_cast<Eigen::Index>(m.size())));
}

std::vector<KbLimitPoint> kb_eigenvector_limit(const SquareMatrix& m, const Vector& z,
                                               const std::vector<double>& deltas) {
    if (z.size() != static_cast<Eigen::Index>(m.size())) {
        throw InvalidInput("kb_eigenvector_limit: z has the wrong length");
    }
    if ((z.array() < 0.0).any() || z.sum() <= 0.0) {
        throw InvalidInput("kb_eigenvector_limit: z must be nonnegative and nonzero");
    }
    const Vector c = eigenvector_centrality(m).scores;
    const double rho = spectral_radius(m);
    std::vector<KbLimitPoint> points;
    points.reserve(deltas.size());
    for (double delta : deltas) {
        Vector k = resolvent_solve(m, z, delta, Side::left, rho);
        Vector rescaled = (1.0 - delta) * k;
        rescaled /= rescaled.sum();
        points.push_back({delta, rescaled, cosine_similarity(rescaled, c)});
    }
    return points;
}

const char* to_string(CentralityKind kind) {
    switch (kind) {
        case CentralityKind::degree: return "degree";
        case CentralityKind::eigenvector: return "eigenvector";
        case CentralityKind::katz_bonacich: return "katz_bonacich";
    }
    return "unknown";
}

CentralityKind centrality_kind_from_string(const std::string& s) {
    if (s == "degree") return CentralityKind::degree;
    if (s == "eigenvector") return CentralityKind::eigenvector;
    if (s == "katz_bonacich") return CentralityKind::katz_bonacich;
    throw InvalidInput(fmt::format("unknown centrality kind '{}'", s));
}

Json to_json(const CentralityResult& result) {
    Json j;
    j["kind"] = to_string(result.kind);
    j["normalization"] = result.normalization;
    if (result.params) {
        j["params"] = {{"delta", result.params->delta}, {"z", vector_to_json(result.params->z)}};
    }
    j["labels"] = result.labels;
    j["scores"] = vector_to_json(result.scores);
    return j;
}

CentralityResult centrality_from_json(const Json& j) {
    CentralityResult result;
    try {
        result.kind = centrality_kind_from_string(j.at("kind").get<std::string>());
        result.normalization = j.at("normalization").get<std::string>();
        result.scores = vector_from_json(j.at("scores"), "scores");
        result.labels = j.at("labels").get<std::vector<std::string>>();
        if (j.contains("params")) {
            result.params = KatzParams{j["params"].at("delta").get<double>(),
                                       vector_from_json(j["params"].at("z"), "z")};
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(fmt::format("malformed centrality report: {}", e.what()));
    }
    return result;
}

std::string to_csv(const CentralityResult& result) {
    std::string out = "node,score\n";
    for (Eigen::Index i = 0; i < result.scores.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        const std::string label = k < result.labels.size() ? result.labels[k] : std::to_string(k + 1);
        out += fmt::format("{},{}\n", label, format_double(result.scores[i]));
    }
    return out;
}

}  // namespace spectral_econ
