// Copyright (C) 2026 The DICL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dicl/eval.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include "dicl/error.hpp"
#include "dicl/set_ops.hpp"

namespace dicl::eval {

using nlohmann::json;

std::string_view counting_name(HitCounting counting) {
    return counting == HitCounting::kLiteral ? "literal" : "unique-gt";
}

HitCounting parse_counting(std::string_view name) {
    if (name == "literal") return HitCounting::kLiteral;
    if (name == "unique-gt" || name == "unique_gt") return HitCounting::kUniqueGroundTruth;
    throw UsageError("unknown hit counting '" + std::string(name) + "'");
}

HitResult is_hit(const ItemSet& pred, const std::vector<ItemSet>& gts) {
    HitResult r;
    if (pred.size() < 2) return r;
    Rational best;
    for (std::size_t g = 0; g < gts.size(); ++g) {
        if (!is_subset(pred, gts[g])) continue;
        const auto j = jaccard_exact(pred, gts[g]);
        if (!r.hit || j > best || (j == best && gts[g].size() < gts[*r.matched].size())) {
            r.hit = true;
            r.matched = g;
            best = j;
        }
    }
    return r;
}

Rational bundle_coverage(const ItemSet& pred, const ItemSet& matched) {
    if (pred.empty() || !is_subset(pred, matched)) {
        throw UsageError("coverage needs a non-empty prediction contained in its matched bundle");
    }
    return {static_cast<std::int64_t>(pred.size()), static_cast<std::int64_t>(matched.size())};
}

SessionMetrics session_metrics(const SessionInput& input, HitCounting counting) {
    SessionMetrics m;
    m.session_id = input.session_id;
    m.predicted = input.predictions.size();
    m.ground_truth = input.ground_truth.size();
    std::set<std::size_t> matched;
    for (std::size_t p = 0; p < input.predictions.size(); ++p) {
        const auto h = is_hit(input.predictions[p], input.ground_truth);
        if (!h.hit) continue;
        ++m.hits;
        matched.insert(*h.matched);
        m.hit_bundles.push_back({p, *h.matched, bundle_coverage(input.predictions[p], input.ground_truth[*h.matched])});
    }
    m.distinct_matched = matched.size();

    const auto numerator = counting == HitCounting::kLiteral ? m.hits : m.distinct_matched;
    m.precision = m.predicted == 0 ? Rational(0)
                                   : Rational(static_cast<std::int64_t>(numerator),
                                              static_cast<std::int64_t>(m.predicted));
    if (m.ground_truth > 0) {
        const auto capped = std::min(numerator, m.ground_truth);
        m.recall = Rational(static_cast<std::int64_t>(capped), static_cast<std::int64_t>(m.ground_truth));
    }
    return m;
}

namespace {

EvalReport aggregate(std::vector<SessionMetrics> per_session, HitCounting counting) {
    EvalReport r;
    r.counting = counting;
    r.sessions = per_session.size();
    Rational p_sum, r_sum, c_sum;
    for (const auto& m : per_session) {
        p_sum += m.precision;
        if (m.recall) {
            r_sum += *m.recall;
            ++r.recall_sessions;
        }
        for (const auto& h : m.hit_bundles) {
            c_sum += h.coverage;
            ++r.hit_bundles;
        }
    }
    if (r.sessions > 0) r.precision = p_sum / Rational(static_cast<std::int64_t>(r.sessions));
    if (r.recall_sessions > 0) r.recall = r_sum / Rational(static_cast<std::int64_t>(r.recall_sessions));
    if (r.hit_bundles > 0) r.coverage = c_sum / Rational(static_cast<std::int64_t>(r.hit_bundles));
    r.per_session = std::move(per_session);
    return r;
}

json rational_json(const Rational& q) { return {{"value", q.to_double()}, {"exact", q.str()}}; }

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

EvalReport evaluate(const std::vector<SessionInput>& sessions, HitCounting counting) {
    std::vector<SessionMetrics> per_session(sessions.size());
    const auto n = static_cast<std::ptrdiff_t>(sessions.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        per_session[static_cast<std::size_t>(i)] = session_metrics(sessions[static_cast<std::size_t>(i)], counting);
    }
    return aggregate(std::move(per_session), counting);
}

namespace reference {
EvalReport evaluate(const std::vector<SessionInput>& sessions, HitCounting counting) {
    std::vector<SessionMetrics> per_session;
    per_session.reserve(sessions.size());
    for (const auto& s : sessions) per_session.push_back(session_metrics(s, counting));
    return aggregate(std::move(per_session), counting);
}
}  // namespace reference

json EvalReport::to_json() const {
    json sessions_json = json::array();
    for (const auto& m : per_session) {
        json hits = json::array();
        for (const auto& h : m.hit_bundles) {
            hits.push_back({{"prediction", h.prediction}, {"ground_truth", h.ground_truth}, {"coverage", h.coverage.str()}});
        }
        sessions_json.push_back({{"session_id", m.session_id},
                                 {"predicted", m.predicted},
                                 {"ground_truth", m.ground_truth},
                                 {"hits", m.hits},
                                 {"distinct_matched", m.distinct_matched},
                                 {"precision", m.precision.str()},
                                 {"recall", m.recall ? json(m.recall->str()) : json(nullptr)},
                                 {"hit_bundles", std::move(hits)}});
    }
    return {{"counting", counting_name(counting)},
            {"precision", rational_json(precision)},
            {"recall", rational_json(recall)},
            {"coverage", rational_json(coverage)},
            {"sessions", sessions},
            {"recall_sessions", recall_sessions},
            {"hit_bundles", hit_bundles},
            {"failed_sessions", failed_sessions},
            {"per_session", std::move(sessions_json)}};
}

std::string EvalReport::table() const {
    std::ostringstream os;
    os << "metric     value   exact\n";
    os << "precision  " << fixed(precision.to_double()) << "  " << precision.str() << "\n";
    os << "recall     " << fixed(recall.to_double()) << "  " << recall.str() << "\n";
    os << "coverage   " << fixed(coverage.to_double()) << "  " << coverage.str() << "\n";
    os << "sessions " << sessions << ", with ground truth " << recall_sessions << ", hit bundles " << hit_bundles
       << ", failed " << failed_sessions << ", counting " << counting_name(counting) << "\n";
    return os.str();
}

}  // namespace dicl::eval
