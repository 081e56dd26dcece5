"""Congestion networks with load-dependent edge costs.

A network is a directed graph whose edges carry affine cost functions
``slope * load + intercept`` and a catalog of named origin-destination
routes.  All costs, payoffs and regrets are exact integers for the two
canonical games, so the whole module works in plain ``int`` arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

Edge = tuple[str, str]


class InvalidProfileError(ValueError):
    """A joint action profile does not fit the network it is applied to."""


class NetworkDefinitionError(ValueError):
    """A network definition violates a structural invariant."""


@dataclass(frozen=True)
class EdgeCost:
    """Affine congestion cost ``slope * load + intercept``."""

    slope: int
    intercept: int

    def __post_init__(self) -> None:
        if self.slope < 0 or self.intercept < 0:
            raise NetworkDefinitionError(
                f"edge cost coefficients must be nonnegative, got {self}"
            )

    def cost(self, load: int) -> int:
        return self.slope * load + self.intercept


@dataclass(frozen=True)
class Route:
    """A directed path from origin to destination, displayed as the
    hyphen-joined node sequence (e.g. ``O-L-D``)."""

    name: str
    edges: tuple[Edge, ...]

    @classmethod
    def from_nodes(cls, nodes: Sequence[str]) -> Route:
        if len(nodes) < 2:
            raise NetworkDefinitionError(f"route needs at least two nodes: {nodes}")
        edges = tuple((nodes[i], nodes[i + 1]) for i in range(len(nodes) - 1))
        return cls(name="-".join(nodes), edges=edges)

    @property
    def nodes(self) -> tuple[str, ...]:
        return (self.edges[0][0],) + tuple(b for _, b in self.edges)

    def __post_init__(self) -> None:
        if not self.edges:
            raise NetworkDefinitionError("route has no edges")
        for (_, b), (c, _) in zip(self.edges, self.edges[1:]):
            if b != c:
                raise NetworkDefinitionError(f"route edges are not connected: {self.edges}")
        if self.name != "-".join(self.nodes):
            raise NetworkDefinitionError(
                f"route name {self.name!r} does not match its node sequence"
            )


@dataclass(frozen=True)
class CongestionNetwork:
    """Directed congestion network plus a route catalog and per-round endowment."""

    name: str
    nodes: frozenset[str]
    edges: Mapping[Edge, EdgeCost]
    routes: tuple[Route, ...]
    endowment: int = 400

    def __post_init__(self) -> None:
        if not self.routes:
            raise NetworkDefinitionError("network has no routes")
        names = [r.name for r in self.routes]
        if len(set(names)) != len(names):
            raise NetworkDefinitionError(f"duplicate route names: {names}")
        origin, dest = self.routes[0].nodes[0], self.routes[0].nodes[-1]
        for route in self.routes:
            if route.nodes[0] != origin or route.nodes[-1] != dest:
                raise NetworkDefinitionError(
                    f"route {route.name} does not run {origin} -> {dest}"
                )
            for edge in route.edges:
                if edge not in self.edges:
                    raise NetworkDefinitionError(
                        f"route {route.name} uses undefined edge {edge}"
                    )
        for a, b in self.edges:
            if a not in self.nodes or b not in self.nodes:
                raise NetworkDefinitionError(f"edge ({a}, {b}) uses undefined nodes")

    @property
    def route_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.routes)

    def route_index(self, name: str) -> int:
        for i, route in enumerate(self.routes):
            if route.name == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class ActionProfile:
    """One route choice per agent, stored as indexes into the route catalog."""

    choices: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.choices)

    def route_counts(self, network: CongestionNetwork) -> tuple[int, ...]:
        counts = [0] * len(network.routes)
        for agent, choice in enumerate(self.choices):
            if not 0 <= choice < len(network.routes):
                raise InvalidProfileError(
                    f"agent {agent} chose route index {choice}, "
                    f"network has {len(network.routes)} routes"
                )
            counts[choice] += 1
        return tuple(counts)


def edge_loads(network: CongestionNetwork, profile: ActionProfile) -> dict[Edge, int]:
    """Number of agents traversing each edge; edges on no chosen route get 0."""
    counts = profile.route_counts(network)
    return _loads_from_counts(network, counts)


def _loads_from_counts(network: CongestionNetwork, counts: Sequence[int]) -> dict[Edge, int]:
    loads = {edge: 0 for edge in network.edges}
    for route, count in zip(network.routes, counts):
        for edge in route.edges:
            loads[edge] += count
    return loads


def route_cost(network: CongestionNetwork, route: Route, loads: Mapping[Edge, int]) -> int:
    """Total cost of a route under the given edge loads."""
    return sum(network.edges[edge].cost(loads[edge]) for edge in route.edges)


def _route_costs_from_counts(
    network: CongestionNetwork, counts: Sequence[int]
) -> tuple[int, ...]:
    loads = _loads_from_counts(network, counts)
    return tuple(route_cost(network, route, loads) for route in network.routes)


def payoffs(network: CongestionNetwork, profile: ActionProfile) -> tuple[int, ...]:
    """Per-agent payoff: endowment minus the cost of the chosen route.

    Payoffs depend on the profile only through route counts, so agents on
    the same route always receive identical payoffs.
    """
    counts = profile.route_counts(network)
    costs = _route_costs_from_counts(network, counts)
    return tuple(network.endowment - costs[choice] for choice in profile.choices)


def counterfactual_payoffs(
    network: CongestionNetwork, profile: ActionProfile, agent: int
) -> dict[str, int]:
    """Payoff the agent would receive on each route, peers' choices fixed.

    The deviating agent is counted in the load of the route it evaluates
    and removed from its actual route, so the entry for the agent's actual
    route equals the realized payoff.
    """
    counts = list(profile.route_counts(network))
    own = profile.choices[agent]
    counts[own] -= 1
    result: dict[str, int] = {}
    for i, route in enumerate(network.routes):
        counts[i] += 1
        loads = _loads_from_counts(network, counts)
        result[route.name] = network.endowment - route_cost(network, route, loads)
        counts[i] -= 1
    return result


def regret(network: CongestionNetwork, profile: ActionProfile, agent: int) -> int:
    """Best payoff in hindsight (peers fixed) minus the realized payoff."""
    counterfactuals = counterfactual_payoffs(network, profile, agent)
    realized = counterfactuals[network.routes[profile.choices[agent]].name]
    return max(counterfactuals.values()) - realized


def game_a(endowment: int = 400) -> CongestionNetwork:
    """Two-route network: O-L-D and O-R-D, each mixing a 10x edge and a 210 edge."""
    edges = {
        ("O", "L"): EdgeCost(10, 0),
        ("O", "R"): EdgeCost(0, 210),
        ("L", "D"): EdgeCost(0, 210),
        ("R", "D"): EdgeCost(10, 0),
    }
    routes = (Route.from_nodes(["O", "L", "D"]), Route.from_nodes(["O", "R", "D"]))
    return CongestionNetwork(
        name="A",
        nodes=frozenset(["O", "L", "R", "D"]),
        edges=edges,
        routes=routes,
        endowment=endowment,
    )


def game_b(endowment: int = 400) -> CongestionNetwork:
    """Game A plus a free L-R bridge edge and the O-L-R-D route."""
    base = game_a(endowment)
    edges = dict(base.edges)
    edges[("L", "R")] = EdgeCost(0, 0)
    routes = base.routes + (Route.from_nodes(["O", "L", "R", "D"]),)
    return CongestionNetwork(
        name="B",
        nodes=base.nodes,
        edges=edges,
        routes=routes,
        endowment=endowment,
    )
