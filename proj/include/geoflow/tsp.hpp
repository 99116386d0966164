#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geoflow/core.hpp"

namespace geoflow {

class MatrixShape : public Error {
  public:
    explicit MatrixShape(const std::string& what) : Error(what) {}
};

/// An open tour over n stops starting at stop 0. Travel times come from
/// the (possibly asymmetric) matrix; each stop takes service_s[i] seconds
/// once reached; windows, when given, are [earliest, latest] arrival
/// bounds in seconds relative to the start. Arriving early means waiting
/// until the window opens; arriving after `latest` is infeasible. The
/// optional budget caps the total elapsed time including service.
struct TspProblem {
    std::vector<std::vector<double>> matrix;
    std::vector<double> service_s;
    std::vector<std::optional<std::pair<double, double>>> windows;
    double start_s = 0.0;
    std::optional<double> budget_s;

    std::size_t size() const { return matrix.size(); }
};

struct TspResult {
    std::vector<int> order;       // visited stops in sequence; order[0] == 0
    bool feasible_complete = false;
    double finish_s = 0.0;        // absolute: start_s + elapsed at last service end
};

namespace detail {

inline void check_problem(const TspProblem& p) {
    const std::size_t n = p.size();
    for (const auto& row : p.matrix)
        if (row.size() != n) throw MatrixShape("travel matrix must be square");
    for (std::size_t i = 0; i < n; ++i)
        if (p.matrix[i][i] != 0.0) throw MatrixShape("travel matrix diagonal must be zero");
    for (const auto& row : p.matrix)
        for (double v : row)
            if (v < 0.0) throw MatrixShape("travel times must be non-negative");
    if (p.service_s.size() != n)
        throw MatrixShape("service times must match the stop count");
    if (!p.windows.empty() && p.windows.size() != n)
        throw MatrixShape("windows must be empty or match the stop count");
}

// advance the clock through one stop; returns false if the window or
// budget rules it out
inline bool advance(const TspProblem& p, int stop, double arrival, double& t_done) {
    if (!p.windows.empty() && p.windows[stop]) {
        const auto& [earliest, latest] = *p.windows[stop];
        if (arrival > latest) return false;
        arrival = std::max(arrival, earliest);
    }
    t_done = arrival + p.service_s[stop];
    return !(p.budget_s && t_done > *p.budget_s);
}

struct ExactSearch {
    const TspProblem& p;
    std::vector<int> current, best;
    std::vector<bool> used;
    double best_cost = -1.0;

    explicit ExactSearch(const TspProblem& prob) : p(prob), used(prob.size(), false) {}

    // depth-first over permutations with a fixed first stop; candidate
    // stops are tried in index order, so the first tour reaching a given
    // cost is the lexicographically smallest one with that cost
    void dfs(double cost, double clock) {
        const std::size_t n = p.size();
        if (best_cost >= 0.0 && cost >= best_cost) return;
        if (current.size() == n) {
            best = current;
            best_cost = cost;
            return;
        }
        int from = current.back();
        for (int s = 0; s < static_cast<int>(n); ++s) {
            if (used[s]) continue;
            double t_done;
            if (!advance(p, s, clock + p.matrix[from][s], t_done)) continue;
            used[s] = true;
            current.push_back(s);
            dfs(cost + p.matrix[from][s], t_done);
            current.pop_back();
            used[s] = false;
        }
    }
};

inline TspResult greedy_tour(const TspProblem& p) {
    const std::size_t n = p.size();
    TspResult r;
    double clock = 0.0;
    double t_done;
    if (!advance(p, 0, 0.0, t_done)) {
        r.finish_s = p.start_s;
        return r;
    }
    r.order.push_back(0);
    clock = t_done;
    std::vector<bool> used(n, false);
    used[0] = true;
    for (;;) {
        int pick = -1;
        double pick_done = 0.0;
        for (int s = 0; s < static_cast<int>(n); ++s) {
            if (used[s]) continue;
            double done;
            if (!advance(p, s, clock + p.matrix[r.order.back()][s], done)) continue;
            if (pick == -1 || p.matrix[r.order.back()][s] < p.matrix[r.order.back()][pick]) {
                pick = s;
                pick_done = done;
            }
        }
        if (pick == -1) break;
        used[pick] = true;
        r.order.push_back(pick);
        clock = pick_done;
    }
    r.feasible_complete = r.order.size() == n;
    r.finish_s = p.start_s + clock;
    return r;
}

}  // namespace detail

/// Exact-threshold between branch-and-bound and the greedy fallback.
/// Ten stops keeps the worst case (9! partial tours) well under a second.
inline constexpr std::size_t kTspExactLimit = 10;

/// Solve the open tour: minimize total travel seconds over complete
/// feasible tours, exactly for up to kTspExactLimit stops. When no
/// complete tour is feasible (or the instance is larger than the exact
/// threshold), fall back to greedily appending the nearest feasible
/// unvisited stop; the partial tour still honors every window and the
/// budget, and feasible_complete reports whether all stops were kept.
inline TspResult tsp_tw(const TspProblem& p) {
    detail::check_problem(p);
    const std::size_t n = p.size();
    if (n == 0) {
        TspResult r;
        r.feasible_complete = true;
        r.finish_s = p.start_s;
        return r;
    }
    if (n <= kTspExactLimit) {
        detail::ExactSearch search(p);
        double t_done;
        if (detail::advance(p, 0, 0.0, t_done)) {
            search.current.push_back(0);
            search.used[0] = true;
            search.dfs(0.0, t_done);
        }
        if (search.best_cost >= 0.0) {
            TspResult r;
            r.order = search.best;
            r.feasible_complete = true;
            double clock = 0.0;
            detail::advance(p, 0, 0.0, clock);
            for (std::size_t i = 1; i < r.order.size(); ++i) {
                double done;
                detail::advance(p, r.order[i], clock + p.matrix[r.order[i - 1]][r.order[i]],
                                done);
                clock = done;
            }
            r.finish_s = p.start_s + clock;
            return r;
        }
    }
    return detail::greedy_tour(p);
}

}  // namespace geoflow
