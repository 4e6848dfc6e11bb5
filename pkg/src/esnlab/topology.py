"""Modular random graphs with exact node degree and a tunable bridge fraction.

Networks are built by planted-partition stub matching: every node emits
``node_degree`` stubs, an exact global number of undirected edges is
designated inter-community, and collisions left by the random matching are
removed with degree-preserving edge swaps. Weights are drawn per directed
edge, so the reservoir matrix is asymmetric unless requested otherwise.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class GraphConstructionError(RuntimeError):
    """Raised when a graph spec is infeasible or repair attempts run out."""


@dataclass(frozen=True)
class ModularGraphSpec:
    """Parameters of a planted-partition graph with uniform degree."""

    n_nodes: int
    n_communities: int
    community_sizes: tuple[int, ...]
    node_degree: int
    mu: float
    rng_seed: int

    def __post_init__(self):
        object.__setattr__(self, "community_sizes", tuple(int(s) for s in self.community_sizes))
        if len(self.community_sizes) != self.n_communities:
            raise ValueError("community_sizes length must equal n_communities")
        if sum(self.community_sizes) != self.n_nodes:
            raise ValueError("community_sizes must sum to n_nodes")
        if any(s <= 0 for s in self.community_sizes):
            raise ValueError("community sizes must be positive")
        if not 0.0 <= self.mu < 1.0:
            raise ValueError("mu must lie in [0, 1)")
        if self.node_degree < 1:
            raise ValueError("node_degree must be >= 1")
        if self.mu == 0.0 and self.node_degree >= min(self.community_sizes):
            raise ValueError(
                "node_degree must be < min community size when mu == 0 "
                "(intra-community wiring is otherwise impossible)"
            )

    @staticmethod
    def flat(n_nodes, n_communities, node_degree, mu, rng_seed):
        """Spec with equally sized communities (n_nodes must divide evenly)."""
        if n_nodes % n_communities != 0:
            raise ValueError("n_nodes must be divisible by n_communities for flat sizes")
        size = n_nodes // n_communities
        return ModularGraphSpec(
            n_nodes=n_nodes,
            n_communities=n_communities,
            community_sizes=(size,) * n_communities,
            node_degree=node_degree,
            mu=mu,
            rng_seed=rng_seed,
        )


@dataclass(frozen=True)
class WeightParams:
    """Uniform weight bounds and the global scale applied on top."""

    w_min: float = -0.2
    w_max: float = 1.0
    weight_scale: float = 1.13

    def __post_init__(self):
        if not self.w_min < self.w_max:
            raise ValueError("w_min must be < w_max")
        # weight_scale == 0 is allowed: it yields the all-zero (dead) reservoir.
        if self.weight_scale < 0:
            raise ValueError("weight_scale must be >= 0")


@dataclass(frozen=True)
class SpectrumReport:
    lambda1_abs: float
    lambda2_abs: float
    spectral_gap: float


@dataclass(frozen=True)
class WeightedNetwork:
    """Directed weighted network with a community assignment.

    ``sources``/``targets`` list each directed edge once, lexicographically
    sorted by (source, target); both orientations of every undirected edge
    are present. ``weights`` is None until :func:`assign_weights` runs.
    """

    n_nodes: int
    community_of: np.ndarray
    sources: np.ndarray
    targets: np.ndarray
    weights: np.ndarray | None = None
    spec: ModularGraphSpec | None = field(default=None, compare=False)

    @property
    def n_communities(self):
        return int(self.community_of.max()) + 1 if self.n_nodes else 0

    @property
    def n_directed_edges(self):
        return len(self.sources)

    def undirected_edges(self):
        """(E, 2) array of undirected edges with u < v, sorted."""
        mask = self.sources < self.targets
        und = np.stack([self.sources[mask], self.targets[mask]], axis=1)
        order = np.lexsort((und[:, 1], und[:, 0]))
        return und[order]

    def degrees(self):
        """Undirected degree per node."""
        und = self.undirected_edges()
        return np.bincount(und.ravel(), minlength=self.n_nodes)

    def weight_matrix(self, dense=False):
        """Reservoir matrix W with W[target, source] = edge weight."""
        if self.weights is None:
            raise ValueError("weights have not been assigned")
        w = sp.csr_matrix(
            (self.weights, (self.targets, self.sources)),
            shape=(self.n_nodes, self.n_nodes),
        )
        return w.toarray() if dense else w

    def community_members(self, c):
        return np.flatnonzero(self.community_of == c)

    def with_weights(self, weights):
        return WeightedNetwork(
            n_nodes=self.n_nodes,
            community_of=self.community_of,
            sources=self.sources,
            targets=self.targets,
            weights=np.asarray(weights, dtype=float),
            spec=self.spec,
        )


def _inter_stub_counts(spec, rng):
    """Per-node inter-community stub counts hitting the exact global target.

    Returns (counts, n_inter_edges). Stochastic rounding of mu * degree per
    node, then a correction pass to reach the global stub total, a balance
    pass (two communities must hold equal counts), and parity repair so every
    community is left with an even number of intra stubs.
    """
    n, d, c = spec.n_nodes, spec.node_degree, spec.n_communities
    sizes = np.asarray(spec.community_sizes)
    comm_of = np.repeat(np.arange(c), sizes)
    n_edges = n * d // 2

    if spec.mu == 0.0 or c == 1:
        counts = np.zeros(n, dtype=np.int64)
        intra = sizes * d - np.array([counts[comm_of == i].sum() for i in range(c)])
        if np.any(intra % 2):
            raise GraphConstructionError("odd intra-stub count with no inter pool to repair into")
        return counts, 0

    target_edges = int(round(spec.mu * n_edges))
    if c == 2:
        # Both communities hold exactly target_edges inter stubs, so the intra
        # remainder s*d - target_edges must be even; shift by one edge if not.
        if (sizes[0] * d - target_edges) % 2:
            target_edges += 1 if spec.mu * n_edges >= target_edges else -1
        if target_edges < 0:
            target_edges += 2
    target_edges = min(target_edges, n_edges)
    target_stubs = 2 * target_edges

    base = int(np.floor(spec.mu * d))
    frac = spec.mu * d - base
    counts = base + (rng.random(n) < frac).astype(np.int64)
    np.clip(counts, 0, d, out=counts)

    def adjust(indices, delta, how_many):
        # Shift `how_many` stubs by `delta` on randomly chosen feasible nodes.
        for _ in range(how_many):
            ok = indices[(counts[indices] > 0) if delta < 0 else (counts[indices] < d)]
            if len(ok) == 0:
                raise GraphConstructionError("cannot reach the inter-stub target")
            counts[rng.choice(ok)] += delta

    all_nodes = np.arange(n)
    if c == 2:
        for i in range(2):
            members = all_nodes[comm_of == i]
            diff = int(counts[members].sum()) - target_edges
            adjust(members, -1 if diff > 0 else 1, abs(diff))
    else:
        diff = int(counts.sum()) - target_stubs
        adjust(all_nodes, -1 if diff > 0 else 1, abs(diff))
        # Parity repair: communities with an odd intra remainder are paired;
        # one gains an inter stub, the other loses one, keeping the total.
        per_comm = np.array([counts[comm_of == i].sum() for i in range(c)])
        odd = [i for i in range(c) if (sizes[i] * d - per_comm[i]) % 2]
        for first, second in zip(odd[::2], odd[1::2]):
            gain = all_nodes[(comm_of == first) & (counts < d)]
            lose = all_nodes[(comm_of == second) & (counts > 0)]
            if len(gain) == 0 or len(lose) == 0:
                gain = all_nodes[(comm_of == second) & (counts < d)]
                lose = all_nodes[(comm_of == first) & (counts > 0)]
            if len(gain) == 0 or len(lose) == 0:
                raise GraphConstructionError("parity repair failed: no adjustable node")
            counts[rng.choice(gain)] += 1
            counts[rng.choice(lose)] -= 1
        # Matching across communities needs no community to hold the majority.
        per_comm = np.array([counts[comm_of == i].sum() for i in range(c)])
        if per_comm.max() > target_stubs // 2:
            raise GraphConstructionError("one community holds too many inter stubs to match")

    return counts, target_edges


def _pair_stubs(stubs, rng):
    stubs = np.asarray(stubs)
    perm = rng.permutation(len(stubs))
    shuffled = stubs[perm]
    return [[int(shuffled[i]), int(shuffled[i + 1])] for i in range(0, len(shuffled), 2)]


def _repair_pairs(pairs, pools, comm_of, swap_cap, rng):
    """Degree-preserving swap repair of self-loops, duplicates and
    same-community inter pairs. ``pools[i]`` identifies the pool pair i was
    matched in (intra pools by community id, inter pool as -1); swaps stay
    within one pool so stub counts never change."""

    def key(p):
        return (p[0], p[1]) if p[0] <= p[1] else (p[1], p[0])

    edge_count = Counter(key(p) for p in pairs)
    pool_index = {}
    for i, pool in enumerate(pools):
        pool_index.setdefault(pool, []).append(i)

    def valid(i):
        u, v = pairs[i]
        if u == v or edge_count[key(pairs[i])] > 1:
            return False
        if pools[i] == -1 and comm_of[u] == comm_of[v]:
            return False
        return True

    attempts = 0
    while attempts < swap_cap:
        defects = [i for i in range(len(pairs)) if not valid(i)]
        if not defects:
            return
        for i in defects:
            if valid(i):
                continue
            candidates = pool_index[pools[i]]
            if len(candidates) < 2:
                break
            while attempts < swap_cap:
                attempts += 1
                j = candidates[rng.integers(len(candidates))]
                if j == i:
                    continue
                a, b = pairs[i]
                x, y = pairs[j]
                if rng.random() < 0.5:
                    new_i, new_j = [a, x], [b, y]
                else:
                    new_i, new_j = [a, y], [b, x]
                if new_i[0] == new_i[1] or new_j[0] == new_j[1]:
                    continue
                if pools[i] == -1 and (
                    comm_of[new_i[0]] == comm_of[new_i[1]]
                    or comm_of[new_j[0]] == comm_of[new_j[1]]
                ):
                    continue
                edge_count[key(pairs[i])] -= 1
                edge_count[key(pairs[j])] -= 1
                ki, kj = key(new_i), key(new_j)
                if edge_count[ki] > 0 or edge_count[kj] > 0 or ki == kj:
                    edge_count[key(pairs[i])] += 1
                    edge_count[key(pairs[j])] += 1
                    continue
                edge_count[ki] += 1
                edge_count[kj] += 1
                pairs[i], pairs[j] = new_i, new_j
                break
            if attempts >= swap_cap:
                break
    defects = [i for i in range(len(pairs)) if not valid(i)]
    if defects:
        raise GraphConstructionError(
            f"could not repair matching: {len(defects)} defective pairs left "
            f"after {attempts} swap attempts"
        )


def generate_modular_graph(spec: ModularGraphSpec) -> WeightedNetwork:
    """Build the planted-partition topology (weights left unset).

    Every node ends with exactly ``spec.node_degree`` undirected neighbors and
    the number of inter-community edges equals round(mu * E) (shifted by at
    most one edge when parity forces it in the two-community case). The graph
    is simple and the edge list is a deterministic function of the seed.
    """
    rng = np.random.default_rng(spec.rng_seed)
    n, d = spec.n_nodes, spec.node_degree
    if (n * d) % 2:
        raise GraphConstructionError("n_nodes * node_degree must be even")
    sizes = np.asarray(spec.community_sizes)
    comm_of = np.repeat(np.arange(spec.n_communities), sizes)

    inter_counts, n_inter_edges = _inter_stub_counts(spec, rng)
    intra_counts = d - inter_counts

    pairs, pools = [], []
    for c in range(spec.n_communities):
        members = np.flatnonzero(comm_of == c)
        stubs = np.repeat(members, intra_counts[members])
        if len(stubs) % 2:
            raise GraphConstructionError("internal error: odd intra pool")
        for p in _pair_stubs(stubs, rng):
            pairs.append(p)
            pools.append(c)
    inter_stubs = np.repeat(np.arange(n), inter_counts)
    for p in _pair_stubs(inter_stubs, rng):
        pairs.append(p)
        pools.append(-1)

    n_edges = n * d // 2
    _repair_pairs(pairs, pools, comm_of, swap_cap=100 * n_edges, rng=rng)

    und = np.array([[min(u, v), max(u, v)] for u, v in pairs], dtype=np.int64)
    sources = np.concatenate([und[:, 0], und[:, 1]])
    targets = np.concatenate([und[:, 1], und[:, 0]])
    order = np.lexsort((targets, sources))
    network = WeightedNetwork(
        n_nodes=n,
        community_of=comm_of,
        sources=sources[order],
        targets=targets[order],
        weights=None,
        spec=spec,
    )

    degrees = network.degrees()
    if not np.all(degrees == d):
        raise GraphConstructionError("internal error: degree sequence is not uniform")
    inter = comm_of[und[:, 0]] != comm_of[und[:, 1]]
    if int(inter.sum()) != n_inter_edges:
        raise GraphConstructionError("internal error: inter-edge count drifted during repair")
    return network


def assign_weights(network: WeightedNetwork, params: WeightParams, rng_seed,
                   symmetric=False) -> WeightedNetwork:
    """Draw Uniform[w_min, w_max] * weight_scale per directed edge.

    Draws iterate the canonical (source, target) edge order, so the result
    depends only on the seed. With ``symmetric=True`` one draw per undirected
    edge is shared by both orientations (an alternative, untested reading).
    """
    rng = np.random.default_rng(rng_seed)
    n_dir = network.n_directed_edges
    if symmetric:
        und = network.undirected_edges()
        draws = rng.uniform(params.w_min, params.w_max, size=len(und))
        lookup = {(int(u), int(v)): w for (u, v), w in zip(und, draws)}
        weights = np.array(
            [lookup[(min(s, t), max(s, t))]
             for s, t in zip(network.sources, network.targets)]
        )
    else:
        weights = rng.uniform(params.w_min, params.w_max, size=n_dir)
    return network.with_weights(weights * params.weight_scale)


def measured_mu(network: WeightedNetwork) -> float:
    """Fraction of undirected edges whose endpoints lie in different communities."""
    und = network.undirected_edges()
    if len(und) == 0:
        return 0.0
    inter = network.community_of[und[:, 0]] != network.community_of[und[:, 1]]
    return float(inter.sum() / len(und))


def spectrum_of_matrix(w) -> SpectrumReport:
    """Magnitudes of the two largest eigenvalues of an arbitrary square matrix."""
    w = np.asarray(w.toarray() if sp.issparse(w) else w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("matrix must be square")
    try:
        eigenvalues = np.linalg.eigvals(w)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigenvalue computation failed to converge: {exc}") from exc
    mags = np.sort(np.abs(eigenvalues))[::-1]
    lam1 = float(mags[0])
    lam2 = float(mags[1]) if len(mags) > 1 else 0.0
    return SpectrumReport(lambda1_abs=lam1, lambda2_abs=lam2, spectral_gap=lam1 - lam2)


def spectrum(network: WeightedNetwork) -> SpectrumReport:
    return spectrum_of_matrix(network.weight_matrix())


def rescale_to_spectral_radius(network: WeightedNetwork, rho_target) -> WeightedNetwork:
    """Multiply all weights so the spectral radius becomes rho_target."""
    if rho_target <= 0:
        raise ValueError("rho_target must be positive")
    lam1 = spectrum(network).lambda1_abs
    if lam1 == 0.0:
        raise ValueError("cannot rescale a network with zero spectral radius")
    return network.with_weights(network.weights * (rho_target / lam1))


def to_text(network: WeightedNetwork) -> str:
    """Edge-list serialization: header with n_nodes and the community map,
    then one `source target weight` line per directed edge (17 significant
    digits, round-trip safe)."""
    if network.weights is None:
        raise ValueError("cannot serialize a network without weights")
    lines = [f"n_nodes {network.n_nodes}"]
    for node in range(network.n_nodes):
        lines.append(f"{node} {int(network.community_of[node])}")
    for s, t, w in zip(network.sources, network.targets, network.weights):
        lines.append(f"{s} {t} {w:.17g}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> WeightedNetwork:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if len(head) != 2 or head[0] != "n_nodes":
        raise ValueError("expected 'n_nodes <count>' header")
    n = int(head[1])
    community_of = np.empty(n, dtype=np.int64)
    for ln in lines[1:1 + n]:
        node, comm = ln.split()
        community_of[int(node)] = int(comm)
    sources, targets, weights = [], [], []
    for ln in lines[1 + n:]:
        s, t, w = ln.split()
        sources.append(int(s))
        targets.append(int(t))
        weights.append(float(w))
    return WeightedNetwork(
        n_nodes=n,
        community_of=community_of,
        sources=np.asarray(sources, dtype=np.int64),
        targets=np.asarray(targets, dtype=np.int64),
        weights=np.asarray(weights, dtype=float),
    )


def save(network: WeightedNetwork, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_text(network))


def load(path) -> WeightedNetwork:
    with open(path, encoding="utf-8") as fh:
        return from_text(fh.read())
