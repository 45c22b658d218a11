#include "lts/solver.hpp"

#include "lts/heuristics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <limits>
#include <memory>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace lts {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using Clock = std::chrono::steady_clock;

struct Node {
    std::vector<RowFix> fix;
    int remaining_budget = 0;
    double lb = -kInf;
    long id = 0;
    Vector z_warm;
    std::shared_ptr<const WeightVector> weights;  // subtree re-tuned weights
    int tuned_zero_count = -1;
};

struct NodeOrder {
    // Best bound first; creation order breaks ties deterministically.
    bool operator()(const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b) const {
        if (a->lb != b->lb) return a->lb > b->lb;
        return a->id > b->id;
    }
};

int zero_count(const std::vector<RowFix>& fix) {
    return static_cast<int>(std::count(fix.begin(), fix.end(), RowFix::Zero));
}

// Shared branch-and-bound state; guarded by one mutex in parallel mode.
struct BnbState {
    std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>, NodeOrder>
        queue;
    Solution incumbent;
    double ub = kInf;
    double lb = -kInf;
    long nodes = 0;
    long next_id = 1;
    bool numeric_warning = false;
    bool hit_node_limit = false;
    bool hit_time_limit = false;
    std::mutex mu;
    std::condition_variable cv;
    int in_flight = 0;
};

double prune_threshold(double ub, double gap_tol) {
    if (!std::isfinite(ub)) return kInf;
    return ub - gap_tol * std::max(std::abs(ub), 1e-12);
}

}  // namespace

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::TimeLimit: return "time_limit";
        case SolveStatus::NodeLimit: return "node_limit";
        case SolveStatus::WarningNumerical: return "warning_numerical";
    }
    return "unknown";
}

Solution enumerate_oracle(const SolveInstance& inst) {
    const Index m = inst.rows();
    std::vector<Index> flaggable;
    for (Index i = 0; i < m; ++i) {
        if (inst.is_flaggable(i)) flaggable.push_back(i);
    }
    const int mf = static_cast<int>(flaggable.size());
    const int b = inst.budget;

    double combos = 1.0;
    for (int k = 1; k <= b; ++k) combos *= static_cast<double>(mf - k + 1) / k;
    if (combos * (b + 1) > 1e6) {
        throw PreconditionError("enumerate_oracle: instance too large to enumerate");
    }

    std::vector<std::uint8_t> discard(static_cast<size_t>(m), 0);
    std::vector<std::uint8_t> best_discard = discard;
    double best = ridge_on_subset(inst, discard).objective;

    std::vector<int> pick;
    for (int k = 1; k <= b; ++k) {
        pick.assign(static_cast<size_t>(k), 0);
        for (int j = 0; j < k; ++j) pick[static_cast<size_t>(j)] = j;
        while (true) {
            std::fill(discard.begin(), discard.end(), 0);
            for (int j : pick) discard[static_cast<size_t>(flaggable[static_cast<size_t>(j)])] = 1;
            const double obj = ridge_on_subset(inst, discard).objective;
            if (obj < best) {
                best = obj;
                best_discard = discard;
            }
            int j = k - 1;
            while (j >= 0 && pick[static_cast<size_t>(j)] == mf - k + j) --j;
            if (j < 0) break;
            ++pick[static_cast<size_t>(j)];
            for (int t = j + 1; t < k; ++t) {
                pick[static_cast<size_t>(t)] = pick[static_cast<size_t>(t - 1)] + 1;
            }
        }
    }

    const RidgeFit fit = ridge_on_subset(inst, best_discard);
    Vector z = Vector::Zero(m);
    Vector w = Vector::Zero(m);
    for (Index i = 0; i < m; ++i) {
        if (best_discard[static_cast<size_t>(i)]) {
            z(i) = 1.0;
            w(i) = inst.A.row(i).dot(fit.x) - inst.y(i);
        }
    }
    return inst.to_solution(fit.x, z, w, fit.objective);
}

SolveReport solve_mio(const SolveInstance& inst, const BnbParams& params) {
    const auto t0 = Clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(Clock::now() - t0).count();
    };
    auto out_of_time = [&] { return elapsed() >= params.time_limit_s; };

    if (params.formulation != Method::BigM && params.formulation != Method::Conic &&
        params.formulation != Method::ConicPlus) {
        throw PreconditionError("solve_mio: formulation must be big-m, conic or conic-plus");
    }

    SolveReport report;
    BnbState st;
    const NodeState root_state = NodeState::root(inst);

    auto update_incumbent = [&](const Solution& sol) {
        if (sol.objective < st.ub) {
            st.ub = sol.objective;
            st.incumbent = sol;
        }
    };

    // Root setup: conic-plus first tunes the weights, which also yields the
    // root bound and a starting incumbent.
    std::shared_ptr<const WeightVector> weights;
    auto root = std::make_shared<Node>();
    root->fix = root_state.fix;
    root->remaining_budget = root_state.remaining_budget;
    root->id = 0;
    root->tuned_zero_count = zero_count(root->fix);

    try {
        if (params.formulation == Method::ConicPlus) {
            const double tune_deadline = 0.5 * params.time_limit_s;
            const TuneResult tune =
                tune_conic_plus(inst, [&] { return elapsed() >= tune_deadline; });
            weights = std::make_shared<WeightVector>(tune.weights);
            report.alg1_iterations = tune.iterations;
            report.d_weights = tune.weights.d;
            st.numeric_warning = tune.sdp_warning;
            update_incumbent(tune.best_solution);
            root->lb = tune.best_lb;
            root->z_warm = tune.last_z;
        } else if (params.formulation == Method::Conic) {
            weights = std::make_shared<WeightVector>(
                make_weight_vector(inst, initial_weights(inst)));
        }
        if (params.warm_start) update_incumbent(alt_opt(inst));
    } catch (const std::exception&) {
        st.numeric_warning = true;
        if (!weights && params.formulation != Method::BigM) {
            weights = std::make_shared<WeightVector>(
                make_weight_vector(inst, initial_weights(inst)));
        }
    }
    root->weights = weights;
    st.queue.push(root);

    // Processes one node; returns children to enqueue. Called with the state
    // mutex released.
    auto process = [&](const std::shared_ptr<Node>& node, double current_ub,
                       std::vector<std::shared_ptr<Node>>& children, Solution& found,
                       bool& has_found, double& node_lb, bool& warn) {
        NodeState ns;
        ns.fix = node->fix;
        ns.remaining_budget = node->remaining_budget;

        std::shared_ptr<const WeightVector> node_weights =
            node->weights ? node->weights : weights;

        RelaxationResult relax;
        if (params.formulation == Method::BigM) {
            relax = solve_bigM_relaxation(inst, params.big_m, ns, inst.tol.relax_tol,
                                          inst.tol.relax_max_iters);
        } else {
            relax = solve_perspective_relaxation(
                inst, *node_weights, ns, inst.tol.relax_tol, inst.tol.relax_max_iters,
                node->z_warm.size() > 0 ? &node->z_warm : nullptr);
        }
        node_lb = std::max(node->lb, relax.certified_lb);

        // Subtree strengthening: rows fixed to retained act as reliable data.
        if (params.node_retune && params.formulation == Method::ConicPlus) {
            const int zc = zero_count(node->fix);
            if (zc > node->tuned_zero_count) {
                bool sdp_warn = false;
                const WeightVector retuned =
                    solve_weight_sdp(inst, relax.z, relax.w, node->fix, inst.tol.u_floor,
                                     inst.tol.psd_tol, &sdp_warn);
                warn = warn || sdp_warn;
                node_weights = std::make_shared<WeightVector>(retuned);
                node->tuned_zero_count = zc;
                const RelaxationResult again = solve_perspective_relaxation(
                    inst, *node_weights, ns, inst.tol.relax_tol, inst.tol.relax_max_iters,
                    &relax.z);
                if (again.certified_lb > node_lb) node_lb = again.certified_lb;
                relax = again;
            }
        }

        const double threshold = prune_threshold(current_ub, params.gap_tol);
        if (node_lb >= threshold) return;

        found = round_heuristic(inst, relax, ns);
        has_found = true;
        const double new_ub = std::min(current_ub, found.objective);

        const bool leaf = node->remaining_budget == 0 || ns.free_count() == 0 ||
                          node->remaining_budget >= ns.free_count();
        if (leaf) return;
        if (node_lb >= prune_threshold(new_ub, params.gap_tol)) return;

        // Most fractional free variable, ties to the lowest index.
        Index branch = -1;
        double best_frac = -1.0;
        for (Index i = 0; i < inst.rows(); ++i) {
            if (node->fix[static_cast<size_t>(i)] != RowFix::Free) continue;
            const double frac = std::min(relax.z(i), 1.0 - relax.z(i));
            if (frac > best_frac + 1e-15) {
                best_frac = frac;
                branch = i;
            }
        }
        if (branch < 0) return;

        // If the relaxation already sits at an (almost) binary point, the
        // rounded solution matches its value; branch only when the bound
        // still leaves room.
        if (best_frac <= params.integrality_tol &&
            node_lb >= prune_threshold(new_ub, params.gap_tol)) {
            return;
        }

        auto child0 = std::make_shared<Node>();
        child0->fix = node->fix;
        child0->fix[static_cast<size_t>(branch)] = RowFix::Zero;
        child0->remaining_budget = node->remaining_budget;
        child0->lb = node_lb;
        child0->z_warm = relax.z;
        child0->weights = node_weights;
        child0->tuned_zero_count = node->tuned_zero_count;

        auto child1 = std::make_shared<Node>();
        child1->fix = node->fix;
        child1->fix[static_cast<size_t>(branch)] = RowFix::One;
        child1->remaining_budget = node->remaining_budget - 1;
        child1->lb = node_lb;
        child1->z_warm = relax.z;
        child1->weights = node_weights;
        child1->tuned_zero_count = node->tuned_zero_count;

        children.push_back(std::move(child1));
        children.push_back(std::move(child0));
    };

    auto worker = [&] {
        std::unique_lock<std::mutex> lock(st.mu);
        while (true) {
            if (st.queue.empty()) {
                if (st.in_flight == 0) break;
                st.cv.wait(lock, [&] { return !st.queue.empty() || st.in_flight == 0; });
                if (st.queue.empty() && st.in_flight == 0) break;
                continue;
            }
            if (st.hit_time_limit || st.hit_node_limit) break;
            if (out_of_time()) {
                st.hit_time_limit = true;
                break;
            }
            if (st.nodes >= params.node_limit) {
                st.hit_node_limit = true;
                break;
            }

            auto node = st.queue.top();
            st.queue.pop();
            st.lb = std::max(st.lb, node->lb);
            if (node->lb >= prune_threshold(st.ub, params.gap_tol)) {
                // Best-bound order: every remaining node is at least as high.
                while (!st.queue.empty()) st.queue.pop();
                break;
            }
            ++st.nodes;
            ++st.in_flight;
            const double ub_snapshot = st.ub;
            lock.unlock();

            std::vector<std::shared_ptr<Node>> children;
            Solution found;
            bool has_found = false;
            double node_lb = node->lb;
            bool warn = false;
            bool failed = false;
            try {
                process(node, ub_snapshot, children, found, has_found, node_lb, warn);
            } catch (const std::exception&) {
                failed = true;
            }

            lock.lock();
            --st.in_flight;
            st.numeric_warning = st.numeric_warning || warn || failed;
            if (has_found) update_incumbent(found);
            for (auto& ch : children) {
                ch->id = st.next_id++;
                st.queue.push(std::move(ch));
            }
            st.cv.notify_all();
        }
        st.cv.notify_all();
    };

    if (params.parallel) {
        const unsigned hw = std::max(2u, std::min(8u, std::thread::hardware_concurrency()));
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < hw; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    } else {
        worker();
    }

    // Remaining open nodes bound the optimum from below.
    if (!st.queue.empty()) {
        st.lb = std::max(st.lb, st.queue.top()->lb);
    } else if (!st.hit_time_limit && !st.hit_node_limit) {
        st.lb = st.ub;
    }
    st.lb = std::min(st.lb, st.ub);

    report.incumbent = st.incumbent;
    report.lower_bound = st.lb;
    report.gap = std::max(0.0, (st.ub - st.lb) / std::max(st.ub, 1e-12));
    report.nodes = st.nodes;
    report.time_s = elapsed();
    if (st.hit_time_limit) {
        report.status = SolveStatus::TimeLimit;
    } else if (st.hit_node_limit) {
        report.status = SolveStatus::NodeLimit;
    } else if (st.numeric_warning) {
        report.status = SolveStatus::WarningNumerical;
    } else {
        report.status = SolveStatus::Optimal;
    }
    return report;
}

}  // namespace lts
