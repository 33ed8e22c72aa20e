// Copyright (c) 2026 diffurank contributors
// SPDX-License-Identifier: Apache-2.0

#include "diffurank/evalx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace diffurank {

void Qrels::set(const std::string& query_id, const std::string& doc_id, int grade) {
    if (grade < 0) throw ValidationError("Qrels: negative grade for " + doc_id);
    table_[query_id][doc_id] = grade;
}

int Qrels::grade(const std::string& query_id, const std::string& doc_id) const {
    auto qit = table_.find(query_id);
    if (qit == table_.end()) return 0;
    auto dit = qit->second.find(doc_id);
    return dit == qit->second.end() ? 0 : dit->second;
}

std::vector<int> Qrels::grades_for(const std::string& query_id) const {
    std::vector<int> out;
    auto qit = table_.find(query_id);
    if (qit != table_.end())
        for (const auto& [_, g] : qit->second) out.push_back(g);
    return out;
}

bool Qrels::has_query(const std::string& query_id) const {
    return table_.count(query_id) > 0;
}

namespace {

double gain_of(int grade, GainConvention gain) {
    if (gain == GainConvention::kLinear) return static_cast<double>(grade);
    return std::pow(2.0, static_cast<double>(grade)) - 1.0;
}

}  // namespace

double ndcg_at_k(const RankedList& run, const Qrels& qrels, std::size_t k,
                 GainConvention gain) {
    if (k < 1) throw ValidationError("ndcg_at_k: k must be >= 1");

    double dcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, run.entries.size()); ++r) {
        const int g = qrels.grade(run.query_id, run.entries[r].doc_id);
        dcg += gain_of(g, gain) / std::log2(static_cast<double>(r) + 2.0);
    }

    std::vector<int> grades = qrels.grades_for(run.query_id);
    std::sort(grades.begin(), grades.end(), std::greater<int>());
    double idcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, grades.size()); ++r)
        idcg += gain_of(grades[r], gain) / std::log2(static_cast<double>(r) + 2.0);

    return idcg > 0.0 ? dcg / idcg : 0.0;
}

std::optional<double> correct_rate(const std::vector<WindowTrace>& traces) {
    if (traces.empty()) return std::nullopt;
    std::size_t valid = 0;
    for (const auto& t : traces)
        if (t.valid) ++valid;
    return 100.0 * static_cast<double>(valid) / static_cast<double>(traces.size());
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (x < 0.0 || x > 1.0)
        throw ValidationError("regularized_incomplete_beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    // continued fraction (modified Lentz)
    auto betacf = [](double a, double b, double x) {
        const double kTiny = 1e-300;
        const int kMaxIter = 500;
        const double kEps = 1e-15;
        double qab = a + b, qap = a + 1.0, qam = a - 1.0;
        double c = 1.0, d = 1.0 - qab * x / qap;
        if (std::abs(d) < kTiny) d = kTiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= kMaxIter; ++m) {
            const double m2 = 2.0 * m;
            double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if (std::abs(d) < kTiny) d = kTiny;
            c = 1.0 + aa / c;
            if (std::abs(c) < kTiny) c = kTiny;
            d = 1.0 / d;
            h *= d * c;
            aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if (std::abs(d) < kTiny) d = kTiny;
            c = 1.0 + aa / c;
            if (std::abs(c) < kTiny) c = kTiny;
            d = 1.0 / d;
            const double del = d * c;
            h *= del;
            if (std::abs(del - 1.0) < kEps) break;
        }
        return h;
    };

    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(ln_front) * betacf(a, b, x) / a;
    return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(b) - std::lgamma(a) +
                          b * std::log(1.0 - x) + a * std::log(x)) *
                     betacf(b, a, 1.0 - x) / b;
}

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("paired_ttest: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) throw ValidationError("paired_ttest: need at least 2 pairs");

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(n - 1);

    if (var == 0.0) {
        if (mean == 0.0) return {0.0, 1.0};
        return {mean > 0.0 ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity(),
                0.0};
    }

    const double t = mean / (std::sqrt(var) / std::sqrt(static_cast<double>(n)));
    const double nu = static_cast<double>(n - 1);
    const double p = regularized_incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t));
    return {t, p};
}

FillingDynamics filling_dynamics(const std::vector<WindowTrace>& traces, std::size_t k) {
    if (traces.empty()) throw ValidationError("filling_dynamics: no traces");
    const std::size_t n = traces[0].n;
    for (const auto& tr : traces) {
        if (tr.k != k)
            throw ValidationError("filling_dynamics: trace recorded with K=" +
                                  std::to_string(tr.k) + ", expected K=" + std::to_string(k));
        if (tr.n != n)
            throw ValidationError("filling_dynamics: traces mix window sizes");
        if (tr.mode != "constrained")
            throw ValidationError("filling_dynamics: non-constrained trace");
    }

    FillingDynamics out;
    out.steps = k;
    out.positions = n;
    out.first_fill.assign(k * n, 0);
    out.eligible.assign(k * n, 0);
    out.conditional.assign(k * n, 0.0);

    for (const auto& tr : traces) {
        // permanent fill step per position: filled in that step and not
        // remasked by it (surviving slots are never remasked again)
        std::vector<std::size_t> fill_step(n, 0);
        for (const auto& step : tr.steps) {
            if (step.step < 1 || step.step > k)
                throw ValidationError("filling_dynamics: step index outside 1..K");
            std::vector<bool> remasked(n, false);
            for (std::size_t pos : step.remasked) remasked[pos] = true;
            for (const auto& f : step.filled) {
                if (!remasked[f.pos] && fill_step[f.pos] == 0) fill_step[f.pos] = step.step;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (fill_step[i] == 0)
                throw ValidationError("filling_dynamics: position never filled");
            out.first_fill[(fill_step[i] - 1) * n + i] += 1;
            for (std::size_t t = 0; t < fill_step[i]; ++t) out.eligible[t * n + i] += 1;
        }
    }

    for (std::size_t idx = 0; idx < k * n; ++idx)
        out.conditional[idx] = out.eligible[idx] > 0
                                   ? static_cast<double>(out.first_fill[idx]) /
                                         static_cast<double>(out.eligible[idx])
                                   : 0.0;
    return out;
}

}  // namespace diffurank
