"""Deterministic LP instance generators.

The PageRank instance encodes the stationary distribution of a damped
random surfer on a Barabasi-Albert preferential-attachment graph as an LP:

    find x    s.t.  x_i >= lambda (S x)_i + (1 - lambda)/n   for all i,
                    sum x = 1,  x >= 0,

with S the column-normalized adjacency matrix.  Every vertex of the graph
has positive degree, so S is well defined.  The objective is zero; any
feasible point is the PageRank vector.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import InvalidGeneratorSpec
from .problem import LpProblem
from .sparse import SparseMatrix


@dataclass(frozen=True)
class PagerankSpec:
    num_nodes: int
    attach_degree: int = 3
    damping: float = 0.85
    seed: int = 0

    def validate(self):
        if self.num_nodes < 2:
            raise InvalidGeneratorSpec("num_nodes must be at least 2")
        if not 1 <= self.attach_degree < self.num_nodes:
            raise InvalidGeneratorSpec("attach_degree must be in [1, num_nodes)")
        if not 0.0 < self.damping < 1.0:
            raise InvalidGeneratorSpec("damping must lie strictly between 0 and 1")
        return self


def barabasi_albert_edges(num_nodes, attach_degree, seed=0):
    """Edge list of a preferential-attachment graph.

    Starts from ``attach_degree`` isolated vertices; each newcomer attaches
    to ``attach_degree`` distinct existing vertices sampled proportionally
    to degree (the first newcomer connects to all seed vertices, which have
    degree zero).  Deterministic for a fixed seed.
    """
    d = attach_degree
    rng = np.random.default_rng(seed)
    edges = []
    repeated = []  # one entry per edge endpoint; sampling from it is degree-proportional
    for new in range(d, num_nodes):
        if not repeated:
            targets = list(range(d))
        else:
            chosen = {}
            while len(chosen) < d:
                pick = repeated[rng.integers(len(repeated))]
                chosen[pick] = None
            targets = list(chosen)
        for t in targets:
            edges.append((new, t))
            repeated.append(new)
            repeated.append(t)
    return edges


def generate_pagerank(spec):
    """Build the PageRank LP for a PagerankSpec."""
    spec.validate()
    n = spec.num_nodes
    edges = barabasi_albert_edges(n, spec.attach_degree, spec.seed)
    rows = np.fromiter((e[0] for e in edges), dtype=np.int64, count=len(edges))
    cols = np.fromiter((e[1] for e in edges), dtype=np.int64, count=len(edges))
    ones = np.ones(len(edges))
    adj = sp.coo_matrix(
        (np.concatenate([ones, ones]), (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(n, n),
    ).tocsr()
    degree = np.asarray(adj.sum(axis=0)).ravel()
    if np.any(degree == 0):
        raise InvalidGeneratorSpec("graph has an isolated vertex; cannot column-normalize")
    stochastic = adj @ sp.diags(1.0 / degree)
    ineq = sp.eye(n, format="csr") - spec.damping * stochastic.tocsr()
    problem = LpProblem(
        c=np.zeros(n),
        ineq_matrix=SparseMatrix(ineq),
        ineq_rhs=np.full(n, (1.0 - spec.damping) / n),
        eq_matrix=SparseMatrix(sp.csr_matrix(np.ones((1, n)))),
        eq_rhs=np.array([1.0]),
        lower=np.zeros(n),
        upper=np.full(n, np.inf),
        name=f"pagerank_n{n}_d{spec.attach_degree}_seed{spec.seed}",
    )
    return problem


def generate_bilinear_toy():
    """The one-variable LP {min 0 : x = 3, x >= 0} whose saddle dynamics are
    a pure rotation around (3, 0)."""
    return LpProblem(
        c=np.array([0.0]),
        eq_matrix=SparseMatrix(np.array([[1.0]])),
        eq_rhs=np.array([3.0]),
        lower=np.array([0.0]),
        upper=np.array([np.inf]),
        name="bilinear_toy",
    )


def generate_primal_infeasible_toy():
    """{min 0 : x = -1, x >= 0}; the dual ray y = -1 certifies infeasibility."""
    return LpProblem(
        c=np.array([0.0]),
        eq_matrix=SparseMatrix(np.array([[1.0]])),
        eq_rhs=np.array([-1.0]),
        lower=np.array([0.0]),
        upper=np.array([np.inf]),
        name="primal_infeasible_toy",
    )


def generate_dual_infeasible_toy():
    """{min -x : x >= 0, x <= inf} with a harmless inequality row; the primal
    ray d = 1 drives the objective to -inf."""
    return LpProblem(
        c=np.array([-1.0]),
        ineq_matrix=SparseMatrix(np.array([[1.0]])),
        ineq_rhs=np.array([0.0]),
        lower=np.array([0.0]),
        upper=np.array([np.inf]),
        name="dual_infeasible_toy",
    )
