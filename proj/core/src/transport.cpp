#include "wgmm/transport.hpp"

#include "wgmm/errors.hpp"
#include "wgmm/gaussian.hpp"
#include "wgmm/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace wgmm {

namespace {

/// Transportation simplex on a reduced problem with strictly positive
/// marginals. Nodes are rows (0..m-1) and columns (m..m+n-1); the basis is
/// a spanning tree with exactly m + n - 1 cells.
class TransportSimplex {
public:
    TransportSimplex(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                     const Eigen::MatrixXd& C)
        : a_(a),
          b_(b),
          C_(C),
          m_(static_cast<int>(a.size())),
          n_(static_cast<int>(b.size())),
          flow_(Eigen::MatrixXd::Zero(a.size(), b.size())),
          basic_(Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
              a.size(), b.size(), false)) {}

    Eigen::MatrixXd solve() {
        northwest_corner();
        const double eps = 1e-12 * (1.0 + C_.cwiseAbs().maxCoeff());
        const int max_pivots = 1000 * (m_ + n_) + 1000;
        for (int pivot = 0; pivot <= max_pivots; ++pivot) {
            compute_duals();
            int ei = -1;
            int ej = -1;
            if (!find_entering(eps, ei, ej)) {
                recompute_flows();
                return flow_;
            }
            pivot_on(ei, ej);
        }
        throw NumericError("transport solver exceeded its pivot limit");
    }

private:
    void northwest_corner() {
        Eigen::VectorXd ra = a_;
        Eigen::VectorXd rb = b_;
        int i = 0;
        int j = 0;
        while (true) {
            const double f = std::min(ra[i], rb[j]);
            flow_(i, j) = f;
            basic_(i, j) = true;
            ra[i] -= f;
            rb[j] -= f;
            if (i == m_ - 1 && j == n_ - 1) break;
            if (i == m_ - 1) {
                ++j;
            } else if (j == n_ - 1) {
                ++i;
            } else if (ra[i] <= rb[j]) {
                ++i;
            } else {
                ++j;
            }
        }
    }

    /// Tree BFS for the dual potentials: u[i] + v[j] = C(i, j) on basic cells.
    void compute_duals() {
        u_.assign(static_cast<std::size_t>(m_), 0.0);
        v_.assign(static_cast<std::size_t>(n_), 0.0);
        std::vector<bool> seen_row(static_cast<std::size_t>(m_), false);
        std::vector<bool> seen_col(static_cast<std::size_t>(n_), false);
        std::vector<int> stack;
        stack.push_back(0);  // node id: rows 0..m-1, columns m..m+n-1
        seen_row[0] = true;
        while (!stack.empty()) {
            const int node = stack.back();
            stack.pop_back();
            if (node < m_) {
                for (int j = 0; j < n_; ++j) {
                    if (basic_(node, j) && !seen_col[static_cast<std::size_t>(j)]) {
                        v_[static_cast<std::size_t>(j)] =
                            C_(node, j) - u_[static_cast<std::size_t>(node)];
                        seen_col[static_cast<std::size_t>(j)] = true;
                        stack.push_back(m_ + j);
                    }
                }
            } else {
                const int j = node - m_;
                for (int i = 0; i < m_; ++i) {
                    if (basic_(i, j) && !seen_row[static_cast<std::size_t>(i)]) {
                        u_[static_cast<std::size_t>(i)] =
                            C_(i, j) - v_[static_cast<std::size_t>(j)];
                        seen_row[static_cast<std::size_t>(i)] = true;
                        stack.push_back(i);
                    }
                }
            }
        }
        for (bool s : seen_row) {
            if (!s) throw NumericError("transport basis lost connectivity");
        }
        for (bool s : seen_col) {
            if (!s) throw NumericError("transport basis lost connectivity");
        }
    }

    /// Bland's rule: first cell in row-major order with negative reduced cost.
    bool find_entering(double eps, int& ei, int& ej) const {
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < n_; ++j) {
                if (basic_(i, j)) continue;
                const double reduced =
                    C_(i, j) - u_[static_cast<std::size_t>(i)] - v_[static_cast<std::size_t>(j)];
                if (reduced < -eps) {
                    ei = i;
                    ej = j;
                    return true;
                }
            }
        }
        return false;
    }

    void pivot_on(int ei, int ej) {
        // Unique tree path from column ej back to row ei; with the entering
        // cell it closes the pivot cycle.
        const int nodes = m_ + n_;
        std::vector<int> parent(static_cast<std::size_t>(nodes), -2);
        std::vector<int> queue;
        queue.push_back(ei);
        parent[static_cast<std::size_t>(ei)] = -1;
        for (std::size_t at = 0; at < queue.size(); ++at) {
            const int node = queue[at];
            if (node == m_ + ej) break;
            if (node < m_) {
                for (int j = 0; j < n_; ++j) {
                    if (basic_(node, j) && parent[static_cast<std::size_t>(m_ + j)] == -2) {
                        parent[static_cast<std::size_t>(m_ + j)] = node;
                        queue.push_back(m_ + j);
                    }
                }
            } else {
                const int j = node - m_;
                for (int i = 0; i < m_; ++i) {
                    if (basic_(i, j) && parent[static_cast<std::size_t>(i)] == -2) {
                        parent[static_cast<std::size_t>(i)] = m_ + j;
                        queue.push_back(i);
                    }
                }
            }
        }
        if (parent[static_cast<std::size_t>(m_ + ej)] == -2) {
            throw NumericError("transport basis lost connectivity");
        }

        // Walk the path, collecting cells with alternating signs; the
        // entering cell itself carries +1.
        std::vector<int> ci{ei};
        std::vector<int> cj{ej};
        std::vector<int> sign{+1};
        int node = m_ + ej;
        int s = -1;
        while (parent[static_cast<std::size_t>(node)] != -1) {
            const int up = parent[static_cast<std::size_t>(node)];
            if (node >= m_) {
                ci.push_back(up);
                cj.push_back(node - m_);
            } else {
                ci.push_back(node);
                cj.push_back(up - m_);
            }
            sign.push_back(s);
            s = -s;
            node = up;
        }

        double theta = std::numeric_limits<double>::infinity();
        int leave = -1;
        for (std::size_t t = 0; t < ci.size(); ++t) {
            if (sign[t] != -1) continue;
            const double f = flow_(ci[t], cj[t]);
            const bool better =
                f < theta ||
                (f == theta && leave >= 0 &&
                 (ci[t] < ci[static_cast<std::size_t>(leave)] ||
                  (ci[t] == ci[static_cast<std::size_t>(leave)] &&
                   cj[t] < cj[static_cast<std::size_t>(leave)])));
            if (better) {
                theta = f;
                leave = static_cast<int>(t);
            }
        }
        if (leave < 0) throw NumericError("transport pivot found no leaving cell");

        for (std::size_t t = 0; t < ci.size(); ++t) {
            flow_(ci[t], cj[t]) += sign[t] * theta;
        }
        basic_(ei, ej) = true;
        flow_(ci[static_cast<std::size_t>(leave)], cj[static_cast<std::size_t>(leave)]) = 0.0;
        basic_(ci[static_cast<std::size_t>(leave)], cj[static_cast<std::size_t>(leave)]) = false;
    }

    /// Re-derives the basic flows from the tree and the original marginals
    /// by stripping leaves, removing the drift accumulated by pivot updates.
    void recompute_flows() {
        std::vector<int> deg(static_cast<std::size_t>(m_ + n_), 0);
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < n_; ++j) {
                if (basic_(i, j)) {
                    ++deg[static_cast<std::size_t>(i)];
                    ++deg[static_cast<std::size_t>(m_ + j)];
                }
            }
        }
        Eigen::VectorXd ra = a_;
        Eigen::VectorXd rb = b_;
        auto live = basic_;
        std::vector<int> leaves;
        for (int node = 0; node < m_ + n_; ++node) {
            if (deg[static_cast<std::size_t>(node)] == 1) leaves.push_back(node);
        }
        flow_.setZero();
        for (std::size_t at = 0; at < leaves.size(); ++at) {
            const int node = leaves[at];
            if (deg[static_cast<std::size_t>(node)] != 1) continue;
            int i = -1;
            int j = -1;
            if (node < m_) {
                i = node;
                for (int j2 = 0; j2 < n_; ++j2) {
                    if (live(i, j2)) {
                        j = j2;
                        break;
                    }
                }
            } else {
                j = node - m_;
                for (int i2 = 0; i2 < m_; ++i2) {
                    if (live(i2, j)) {
                        i = i2;
                        break;
                    }
                }
            }
            if (i < 0 || j < 0) continue;  // a final isolated node carries no cell
            const double f = std::max(node < m_ ? ra[i] : rb[j], 0.0);
            flow_(i, j) = f;
            ra[i] -= f;
            rb[j] -= f;
            live(i, j) = false;
            --deg[static_cast<std::size_t>(i)];
            --deg[static_cast<std::size_t>(m_ + j)];
            if (deg[static_cast<std::size_t>(i)] == 1) leaves.push_back(i);
            if (deg[static_cast<std::size_t>(m_ + j)] == 1) leaves.push_back(m_ + j);
        }
    }

    Eigen::VectorXd a_;
    Eigen::VectorXd b_;
    Eigen::MatrixXd C_;
    int m_;
    int n_;
    Eigen::MatrixXd flow_;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> basic_;
    std::vector<double> u_;
    std::vector<double> v_;
};

}  // namespace

TransportPlan solve_exact_ot(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
                             const Eigen::VectorXd& q) {
    if (cost.rows() != p.size() || cost.cols() != q.size()) {
        throw std::invalid_argument("solve_exact_ot: cost shape does not match marginals");
    }
    check_simplex(p, "solve_exact_ot: p");
    check_simplex(q, "solve_exact_ot: q");
    if (!cost.allFinite()) throw NumericError("solve_exact_ot: non-finite cost");

    // Reduce to the strictly positive support.
    std::vector<Eigen::Index> rows;
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) rows.push_back(i);
    }
    for (Eigen::Index j = 0; j < q.size(); ++j) {
        if (q[j] > 0.0) cols.push_back(j);
    }
    Eigen::VectorXd a(rows.size());
    Eigen::VectorXd b(cols.size());
    Eigen::MatrixXd C(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) a[static_cast<Eigen::Index>(i)] = p[rows[i]];
    for (std::size_t j = 0; j < cols.size(); ++j) b[static_cast<Eigen::Index>(j)] = q[cols[j]];
    a /= a.sum();
    b /= b.sum();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cost(rows[i], cols[j]);
        }
    }

    Eigen::MatrixXd reduced = TransportSimplex(a, b, C).solve();

    TransportPlan out;
    out.omega = Eigen::MatrixXd::Zero(p.size(), q.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out.omega(rows[i], cols[j]) =
                reduced(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    out.cost_value = (out.omega.array() * cost.array()).sum();
    return out;
}

Eigen::MatrixXd w2_cost_matrix(const Gmm& P, const Gmm& Q) {
    if (P.dim() != Q.dim()) {
        throw std::invalid_argument("w2_cost_matrix: dimension mismatch");
    }
    Eigen::MatrixXd C(P.num_components(), Q.num_components());
    for (int i = 0; i < P.num_components(); ++i) {
        for (int j = 0; j < Q.num_components(); ++j) {
            C(i, j) = w2_diag_sq(P.components[static_cast<std::size_t>(i)],
                                 Q.components[static_cast<std::size_t>(j)]);
        }
    }
    return C;
}

Eigen::MatrixXd smw2_cost_matrix(const LabeledGmm& P, const LabeledGmm& Q, double beta) {
    if (beta < 0.0) throw std::invalid_argument("smw2_cost_matrix: beta must be nonnegative");
    if (P.num_classes() != Q.num_classes()) {
        throw std::invalid_argument("smw2_cost_matrix: class count mismatch");
    }
    Eigen::MatrixXd C = w2_cost_matrix(P.base, Q.base);
    if (beta > 0.0) {
        for (Eigen::Index i = 0; i < C.rows(); ++i) {
            for (Eigen::Index j = 0; j < C.cols(); ++j) {
                C(i, j) += beta * (P.labels.row(i) - Q.labels.row(j)).squaredNorm();
            }
        }
    }
    return C;
}

TransportPlan mw2_plan(const Gmm& P, const Gmm& Q) {
    return solve_exact_ot(w2_cost_matrix(P, Q), P.weights, Q.weights);
}

double mw2_sq(const Gmm& P, const Gmm& Q) { return mw2_plan(P, Q).cost_value; }

TransportPlan smw2_plan(const LabeledGmm& P, const LabeledGmm& Q, double beta) {
    return solve_exact_ot(smw2_cost_matrix(P, Q, beta), P.base.weights, Q.base.weights);
}

double smw2_sq(const LabeledGmm& P, const LabeledGmm& Q, double beta) {
    return smw2_plan(P, Q, beta).cost_value;
}

}  // namespace wgmm
