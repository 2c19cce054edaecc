"""Exact discrete OT: transportation network simplex and a brute-force oracle."""

from __future__ import annotations

import itertools
from collections import deque

import numpy as np

from .errors import Infeasible, SolverError, TooLarge
from .measures import as_cost, as_weights, check_shapes, finalize

# consecutive degenerate pivots before switching to Bland's rule
_DEGENERATE_STREAK = 30


class TransportSimplex:
    """Primal network simplex on the bipartite transportation graph.

    The basis is a spanning tree over ``n`` row nodes and ``k`` column nodes
    (``n + k - 1`` cells, zero-flow cells allowed).  Marginals are fixed at
    construction; :meth:`solve` may be called repeatedly with different costs
    and restarts from the last optimal basis, which is what Frank-Wolfe needs.
    Costs may be signed.
    """

    def __init__(self, mu, nu):
        self.mu = np.asarray(mu, dtype=float)
        self.nu = np.asarray(nu, dtype=float)
        self.n, self.k = self.mu.size, self.nu.size
        self.flow = None
        self.adj = None
        self.pivots = 0

    # basis bookkeeping ------------------------------------------------------

    def _set_basis(self, cells, flows):
        n, k = self.n, self.k
        self.flow = np.zeros((n, k))
        self.basic = np.zeros((n, k), dtype=bool)
        self.adj = [set() for _ in range(n + k)]
        for (i, j), x in zip(cells, flows):
            self.flow[i, j] = x
            self.basic[i, j] = True
            self.adj[i].add(n + j)
            self.adj[n + j].add(i)
        if len(cells) != n + k - 1:
            raise Infeasible(f"initial basis has {len(cells)} cells, need {n + k - 1}")

    def _initial_basis(self, C):
        """Least-cost rule; crossing out one line per step keeps the cells a tree."""
        n, k = self.n, self.k
        supply = self.mu.copy()
        demand = self.nu.copy()
        row_open = np.ones(n, dtype=bool)
        col_open = np.ones(k, dtype=bool)
        rows_left, cols_left = n, k
        cells, flows = [], []
        order = np.argsort(C, axis=None, kind="stable")
        for idx in order:
            i, j = divmod(int(idx), k)
            if not (row_open[i] and col_open[j]):
                continue
            x = min(supply[i], demand[j])
            cells.append((i, j))
            flows.append(x)
            supply[i] -= x
            demand[j] -= x
            if rows_left == 1 and cols_left == 1:
                break
            # close exactly one line; prefer the exhausted one
            if (supply[i] <= demand[j] and rows_left > 1) or cols_left == 1:
                row_open[i] = False
                rows_left -= 1
                demand[j] += supply[i]
                supply[i] = 0.0
            else:
                col_open[j] = False
                cols_left -= 1
                supply[i] += demand[j]
                demand[j] = 0.0
        self._set_basis(cells, flows)
        self._recompute_flows()

    def _tree(self, C):
        """Potentials with u[0] = 0, plus BFS parent/depth arrays for cycle search."""
        n, k = self.n, self.k
        m = n + k
        pot = np.zeros(m)
        parent = np.full(m, -1)
        depth = np.zeros(m, dtype=int)
        seen = np.zeros(m, dtype=bool)
        seen[0] = True
        queue = deque([0])
        adj = self.adj
        while queue:
            a = queue.popleft()
            for b in adj[a]:
                if seen[b]:
                    continue
                seen[b] = True
                parent[b] = a
                depth[b] = depth[a] + 1
                if a < n:
                    pot[b] = C[a, b - n] - pot[a]
                else:
                    pot[b] = C[b, a - n] - pot[a]
                queue.append(b)
        if not seen.all():
            raise Infeasible("basis is not a spanning tree")
        return pot[:n], pot[n:], parent, depth

    def _recompute_flows(self):
        """Solve tree flows exactly by leaf elimination (removes drift)."""
        n = self.n
        deg = np.array([len(a) for a in self.adj])
        rem = np.concatenate([self.mu, self.nu])
        adj = [set(a) for a in self.adj]
        leaves = deque(int(a) for a in np.flatnonzero(deg == 1))
        flow = np.zeros_like(self.flow)
        done = 0
        while leaves and done < n + self.k - 1:
            a = leaves.popleft()
            if not adj[a]:
                continue
            (b,) = adj[a]
            x = rem[a]
            i, j = (a, b - n) if a < n else (b, a - n)
            flow[i, j] = x
            rem[b] -= x
            adj[a].discard(b)
            adj[b].discard(a)
            done += 1
            if len(adj[b]) == 1:
                leaves.append(b)
        # zero-out roundoff on exact-zero marginals only
        self.flow = np.where(self.basic, np.maximum(flow, 0.0), 0.0)

    def _reattach(self, la, lb, ea, eb, delta, pot, parent, depth):
        """Update potentials/parent/depth after the pivot swapped arc (la, lb) for (ea, eb).

        Removing the leaving arc splits the tree in two; only the smaller side
        is touched.  It is re-hung from the entering arc and its potentials
        shift by the entering reduced cost (potentials are defined up to a
        constant, so either side may move).
        """
        n = self.n
        adj = self.adj
        mark = self._mark
        self._stamp += 2
        tag = (self._stamp, self._stamp + 1)
        mark[la], mark[lb] = tag
        sides = ([la], [lb])
        stacks = ([la], [lb])
        # interleaved DFS from both endpoints, skipping the entering arc
        while stacks[0] and stacks[1]:
            for side in (0, 1):
                x = stacks[side].pop()
                t = tag[side]
                for y in adj[x]:
                    if mark[y] != t and not ((x == ea and y == eb) or (x == eb and y == ea)):
                        mark[y] = t
                        stacks[side].append(y)
                        sides[side].append(y)
        side = 0 if not stacks[0] else 1
        small, t = sides[side], tag[side]
        top, other = (la, lb) if side == 0 else (lb, la)
        if parent[other] == top:
            # the large side hung below the small one: its top becomes the root
            parent[other] = -1
        q, p = (ea, eb) if mark[ea] == t else (eb, ea)
        # rows on the moved side shift by +delta and columns by -delta, or the reverse
        d_row = delta if q < n else -delta
        for x in small:
            pot[x] += d_row if x < n else -d_row
        parent[q] = p
        depth[q] = depth[p] + 1
        stack = [q]
        while stack:
            x = stack.pop()
            dx = depth[x] + 1
            for y in adj[x]:
                if mark[y] == t and y != parent[x]:
                    parent[y] = x
                    depth[y] = dx
                    stack.append(y)

    # main loop ----------------------------------------------------------------

    def solve(self, C, max_pivots=None, warm=True):
        C = np.asarray(C, dtype=float)
        n, k = self.n, self.k
        if C.shape != (n, k):
            raise SolverError(f"cost shape {C.shape} != ({n}, {k})")
        if self.flow is None or not warm:
            self._initial_basis(C)
        eps = 1e-12 * (1.0 + np.abs(C).max())
        if max_pivots is None:
            max_pivots = 100 * (n * k) + 10_000
        degenerate = 0
        pivots = 0
        u, v, parent, depth = self._tree(C)
        pot = np.concatenate([u, v]).tolist()
        parent, depth = parent.tolist(), depth.tolist()
        self._mark = [0] * (n + k)
        self._stamp = 0
        while True:
            pot_a = np.asarray(pot)
            red = C - pot_a[:n, None] - pot_a[None, n:]
            red[self.basic] = 0.0
            if degenerate >= _DEGENERATE_STREAK:
                cand = np.flatnonzero(red.ravel() < -eps)
                if cand.size == 0:
                    break
                e = int(cand[0])
            else:
                e = int(np.argmin(red))
                if red.flat[e] >= -eps:
                    break
            if pivots >= max_pivots:
                raise SolverError(f"network simplex exceeded {max_pivots} pivots")
            i, j = divmod(e, k)
            # tree path from column node j to row node i
            a, b = n + j, i
            left, right = [a], [b]
            while a != b:
                if depth[a] >= depth[b]:
                    a = parent[a]
                    left.append(a)
                else:
                    b = parent[b]
                    right.append(b)
            path = left + right[-2::-1]
            cells = []
            for s_ in range(len(path) - 1):
                x, y = path[s_], path[s_ + 1]
                cells.append((x, y - n) if x < n else (y, x - n))
            minus = cells[0::2]
            plus = cells[1::2]
            theta = min(self.flow[c] for c in minus)
            leave = min((c for c in minus if self.flow[c] == theta), key=lambda c: c[0] * k + c[1])
            for c in minus:
                self.flow[c] -= theta
            for c in plus:
                self.flow[c] += theta
            self.flow[i, j] = theta
            self.flow[leave] = 0.0
            li, lj = leave
            self.basic[li, lj] = False
            self.adj[li].discard(n + lj)
            self.adj[n + lj].discard(li)
            self.basic[i, j] = True
            self.adj[i].add(n + j)
            self.adj[n + j].add(i)
            self._reattach(li, n + lj, i, n + j, float(red[i, j]), pot, parent, depth)
            degenerate = degenerate + 1 if theta == 0 else 0
            pivots += 1
        u, v = np.asarray(pot[:n]), np.asarray(pot[n:])
        self._recompute_flows()
        self.pivots = pivots
        self.u, self.v = u, v
        return self.flow.copy()


def solve_lp(mu, nu, M, allow_negative: bool = False):
    """Exact OT plan minimizing <P, M> over the transport polytope."""
    mu, nu = as_weights(mu), as_weights(nu)
    M = as_cost(M, allow_negative=allow_negative)
    check_shapes(mu, nu, M)
    solver = TransportSimplex(mu, nu)
    P = solver.solve(M)
    res = finalize(
        P, M, mu, nu,
        objective=float(np.sum(P * M)),
        iterations=solver.pivots,
        converged=True,
        method="lp",
        u=solver.u,
        v=solver.v,
    )
    if res.marginal_violation > 1e-9:
        raise Infeasible(f"LP plan violates marginals by {res.marginal_violation:.3e}")
    return res


def _tree_flows(cells, mu, nu):
    """Flows of a candidate basis, or None if the cells do not form a spanning tree."""
    n = mu.size
    m = n + nu.size
    adj = [[] for _ in range(m)]
    for e, (i, j) in enumerate(cells):
        adj[i].append(e)
        adj[n + j].append(e)
    deg = [len(a) for a in adj]
    if 0 in deg:
        return None
    rem = list(mu) + list(nu)
    used = [False] * len(cells)
    flows = [0.0] * len(cells)
    stack = [a for a in range(m) if deg[a] == 1]
    count = 0
    while stack:
        a = stack.pop()
        if deg[a] != 1:
            continue
        e = next(e for e in adj[a] if not used[e])
        used[e] = True
        i, j = cells[e]
        b = n + j if a == i else i
        flows[e] = rem[a]
        rem[b] -= rem[a]
        rem[a] = 0.0
        deg[a] -= 1
        deg[b] -= 1
        count += 1
        if deg[b] == 1:
            stack.append(b)
    if count != len(cells):
        return None
    return flows


def brute_force_oracle(mu, nu, M, allow_negative: bool = False):
    """Minimum over all basic feasible solutions (``n * k <= 16``)."""
    mu, nu = as_weights(mu), as_weights(nu)
    M = as_cost(M, allow_negative=allow_negative)
    check_shapes(mu, nu, M)
    n, k = M.shape
    if n * k > 16:
        raise TooLarge(f"brute force limited to n*k <= 16, got {n * k}")
    all_cells = [(i, j) for i in range(n) for j in range(k)]
    best, best_cost, count = None, np.inf, 0
    for cells in itertools.combinations(all_cells, n + k - 1):
        flows = _tree_flows(cells, mu, nu)
        if flows is None or min(flows) < -1e-14:
            continue
        count += 1
        cost = sum(f * M[c] for c, f in zip(cells, flows))
        if cost < best_cost - 1e-15:
            best_cost = cost
            best = (cells, flows)
    if best is None:
        raise Infeasible("no basic feasible solution found")
    P = np.zeros((n, k))
    for c, f in zip(*best):
        P[c] = max(f, 0.0)
    return finalize(P, M, mu, nu, objective=float(np.sum(P * M)), iterations=count,
                    converged=True, method="brute-force")
