"""Network domain types: layers, connection groups, trials, construction.

A network is an ordered list of layers (first = input, last = output) plus
dense connection groups, each carrying a weight matrix and a delay matrix.
Delays keep a real-valued "shadow" parameter for the optimizer and a
grid-rounded integer slot count used by the simulation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_DELAY_HEADROOM = 50  # extra slots beyond the initial maximum delay


@dataclass
class NeuronParams:
    """Membrane/synaptic time constants and firing threshold.

    threshold=None marks a leaky integrator (no spikes, used for voltage
    readouts); a finite threshold gives the usual LIF with reset to 0.
    """

    tau_m: float
    tau_s: float
    threshold: float | None = 1.0

    @property
    def is_li(self) -> bool:
        return self.threshold is None


@dataclass
class Layer:
    name: str
    size: int
    kind: str  # "input" | "lif" | "li"
    params: NeuronParams | None = None


class ConnectionGroup:
    """Dense all-to-all connections between two layers.

    weights[j, i] and delays[j, i] are indexed post j, pre i. The delay
    matrix holds continuous shadow values in ms; `slots` is the
    round-to-nearest (ties to even) grid version used by both passes.
    """

    def __init__(self, pre: str, post: str, weights, delays, dt: float,
                 max_delay_slots: int, trainable_weights: bool = True,
                 trainable_delays: bool = True):
        self.pre = pre
        self.post = post
        self.weights = np.asarray(weights, dtype=float)
        self.delays = np.asarray(delays, dtype=float)
        if self.weights.shape != self.delays.shape:
            raise ValueError(
                f"weights {self.weights.shape} and delays {self.delays.shape} differ")
        self.dt = float(dt)
        self.max_delay_slots = int(max_delay_slots)
        self.trainable_weights = bool(trainable_weights)
        self.trainable_delays = bool(trainable_delays)
        self._slots = None
        self.refresh_slots()

    @property
    def shape(self):
        return self.weights.shape

    @property
    def slots(self) -> np.ndarray:
        return self._slots

    def refresh_slots(self) -> None:
        self._slots = np.round(self.delays / self.dt).astype(np.int64)

    def project(self) -> None:
        """Clip shadow delays into [0, max_delay_slots*dt] and re-grid."""
        np.clip(self.delays, 0.0, self.max_delay_slots * self.dt, out=self.delays)
        self.refresh_slots()


@dataclass
class TrialInput:
    """Input events (channel, time in ms), time-sorted, with a class label."""

    events: list[tuple[int, float]]
    label: int

    def sorted_events(self) -> list[tuple[int, float]]:
        return sorted(self.events, key=lambda e: (e[1], e[0]))


class Network:
    def __init__(self, layers: list[Layer], groups: list[ConnectionGroup],
                 dt: float, duration: float, seed: int | None = None):
        self.layers = layers
        self.groups = groups
        self.dt = float(dt)
        self.duration = float(duration)
        self.seed = seed
        self._index = {lay.name: k for k, lay in enumerate(layers)}

    # -- basic structure helpers -------------------------------------------

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    def layer(self, name: str) -> Layer:
        return self.layers[self._index[name]]

    def layer_index(self, name: str) -> int:
        return self._index[name]

    @property
    def input_layer(self) -> Layer:
        return self.layers[0]

    @property
    def output_layer(self) -> Layer:
        return self.layers[-1]

    def state_layers(self) -> list[Layer]:
        """Layers carrying (V, I) state, i.e. everything but the input."""
        return self.layers[1:]

    def incoming(self, name: str) -> list[ConnectionGroup]:
        return [g for g in self.groups if g.post == name]

    def outgoing(self, name: str) -> list[ConnectionGroup]:
        return [g for g in self.groups if g.pre == name]

    def buffer_depth(self, name: str) -> int:
        """Ring-buffer depth for a post layer: max incoming D_max + 1."""
        dmax = 0
        for g in self.incoming(name):
            dmax = max(dmax, g.max_delay_slots)
        return dmax + 1

    def trainable_parameter_count(self) -> int:
        n = 0
        for g in self.groups:
            if g.trainable_weights:
                n += g.weights.size
            if g.trainable_delays:
                n += g.delays.size
        return n

    # -- validation ---------------------------------------------------------

    def validate(self) -> list[str]:
        """Return a list of invariant violations (empty iff valid)."""
        out = []
        if not self.layers or self.layers[0].kind != "input":
            out.append("first layer must be the input layer")
        for lay in self.layers[1:]:
            if lay.kind == "input":
                out.append(f"layer {lay.name}: only the first layer may be input")
        for lay in self.layers[1:-1]:
            if lay.kind != "lif":
                out.append(f"hidden layer {lay.name} must be kind 'lif'")
        if self.layers and self.layers[-1].kind not in ("lif", "li"):
            out.append("output layer must be kind 'lif' or 'li'")
        for lay in self.layers:
            if lay.size <= 0:
                out.append(f"layer {lay.name}: size must be positive")
            if lay.kind == "input":
                continue
            p = lay.params
            if p is None:
                out.append(f"layer {lay.name}: missing neuron parameters")
                continue
            if not p.tau_m > 0:
                out.append(f"layer {lay.name}: tau_m must be > 0, got {p.tau_m}")
            if not p.tau_s > 0:
                out.append(f"layer {lay.name}: tau_s must be > 0, got {p.tau_s}")
            if lay.kind == "lif" and (p.threshold is None or not math.isfinite(p.threshold)):
                out.append(f"layer {lay.name}: lif layer needs a finite threshold")
            if lay.kind == "li" and p.threshold is not None:
                out.append(f"layer {lay.name}: li layer must have threshold=None")
        if self.dt <= 0:
            out.append(f"dt must be > 0, got {self.dt}")
        else:
            steps = self.duration / self.dt
            if self.duration <= 0 or abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
                out.append(
                    f"duration {self.duration} must be a positive integer multiple of dt {self.dt}")
        names = {lay.name for lay in self.layers}
        for g in self.groups:
            tag = f"connection {g.pre}->{g.post}"
            if g.pre not in names or g.post not in names:
                out.append(f"{tag}: unknown layer reference")
                continue
            if g.post == self.layers[0].name:
                out.append(f"{tag}: input layer cannot be postsynaptic")
            pre_i, post_i = self._index[g.pre], self._index[g.post]
            if pre_i > post_i:
                out.append(f"{tag}: backward connections are not supported "
                           "(recurrent groups must have pre == post)")
            expect = (self.layer(g.post).size, self.layer(g.pre).size)
            if g.shape != expect:
                out.append(f"{tag}: matrix shape {g.shape} != {expect}")
                continue
            dmax_ms = g.max_delay_slots * self.dt
            bad = np.where((g.delays < 0) | (g.delays > dmax_ms))
            for j, i in zip(*bad):
                out.append(f"{tag}: delay[{j}][{i}]={g.delays[j, i]} outside "
                           f"[0, {dmax_ms}]")
            if g.slots.min(initial=0) < 0 or g.slots.max(initial=0) > g.max_delay_slots:
                out.append(f"{tag}: rounded slots outside [0, {g.max_delay_slots}]")
            if not np.all(np.isfinite(g.weights)):
                out.append(f"{tag}: non-finite weights")
        return out


# -- construction -----------------------------------------------------------

def _init_matrix(desc, shape, rng: np.random.Generator, what: str) -> np.ndarray:
    if desc is None:
        return np.zeros(shape)
    if isinstance(desc, dict) and "values" in desc:
        vals = np.asarray(desc["values"], dtype=float).reshape(shape)
        return vals.copy()
    kind = desc.get("init")
    if kind == "normal":
        return rng.normal(desc["mean"], desc["sd"], size=shape)
    if kind == "uniform":
        return rng.uniform(desc["low"], desc["high"], size=shape)
    if kind == "constant":
        return np.full(shape, float(desc["value"]))
    raise ValueError(f"unknown {what} initializer: {desc!r}")


def build_network(spec: dict) -> Network:
    """Build and validate a Network from a plain-dict description.

    Weight initializers: normal/constant or explicit values; delay
    initializers: uniform/constant or explicit values. A single seed drives
    all random draws, in declaration order.
    """
    dt = float(spec["dt"])
    duration = float(spec["duration"])
    seed = spec.get("seed")
    rng = np.random.default_rng(seed)
    layers = []
    for ldesc in spec["layers"]:
        kind = ldesc["kind"]
        if kind == "input":
            layers.append(Layer(ldesc["name"], int(ldesc["size"]), "input"))
            continue
        thr = ldesc.get("threshold")
        if kind == "li":
            thr = None
        params = NeuronParams(float(ldesc["tau_m"]), float(ldesc["tau_s"]),
                              None if thr is None else float(thr))
        layers.append(Layer(ldesc["name"], int(ldesc["size"]), kind, params))
    index = {lay.name: lay for lay in layers}
    groups = []
    for gdesc in spec["connections"]:
        pre, post = gdesc["pre"], gdesc["post"]
        if pre not in index or post not in index:
            raise ValueError(f"connection {pre}->{post}: unknown layer")
        shape = (index[post].size, index[pre].size)
        weights = _init_matrix(gdesc.get("weights"), shape, rng, "weight")
        delays = _init_matrix(gdesc.get("delays"), shape, rng, "delay")
        dmax = gdesc.get("max_delay_slots")
        if dmax is None:
            dmax = int(math.ceil(delays.max(initial=0.0) / dt)) + DEFAULT_DELAY_HEADROOM
        groups.append(ConnectionGroup(
            pre, post, weights, delays, dt, dmax,
            trainable_weights=gdesc.get("trainable_weights", True),
            trainable_delays=gdesc.get("trainable_delays", True)))
    net = Network(layers, groups, dt, duration, seed)
    problems = net.validate()
    if problems:
        raise ValueError("invalid network spec:\n  " + "\n  ".join(problems))
    return net


# -- serialization ----------------------------------------------------------

def network_to_dict(net: Network) -> dict:
    layers = []
    for lay in net.layers:
        d = {"name": lay.name, "size": lay.size, "kind": lay.kind}
        if lay.params is not None:
            d["tau_m"] = lay.params.tau_m
            d["tau_s"] = lay.params.tau_s
            if lay.params.threshold is not None:
                d["threshold"] = lay.params.threshold
        layers.append(d)
    conns = []
    for g in net.groups:
        conns.append({
            "pre": g.pre, "post": g.post,
            "weights": {"values": g.weights.ravel().tolist()},
            "delays": {"values": g.delays.ravel().tolist()},
            "max_delay_slots": g.max_delay_slots,
            "trainable_weights": g.trainable_weights,
            "trainable_delays": g.trainable_delays,
        })
    return {"dt": net.dt, "duration": net.duration, "seed": net.seed,
            "layers": layers, "connections": conns}


def save_network(net: Network, path) -> None:
    with open(path, "w") as fh:
        json.dump(network_to_dict(net), fh, indent=1)


def load_network(path) -> Network:
    with open(path) as fh:
        return build_network(json.load(fh))
