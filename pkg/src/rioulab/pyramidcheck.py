"""Symbolic dataflow graph for the two-pronged pyramid wiring.

Each transductive block aggregates a level with its two upper neighbors:
the first neighbor is upsampled, channel-aligned with a 1x1 conv, and summed
with the current level; the second neighbor is upsampled, aligned, and summed
with the block's forward-transfer input; the two aggregations are
concatenated and passed through a ReLU.  A stride-2 conv carries each block's
output forward as the next block's transfer input.  A fusion chain
(upsample + sum, top-down) then produces the final pyramid.

Shapes are (channels, height, width); every node's output shape is resolved
at construction and re-checkable via ``validate``.  ``forward_smoke``
executes a small graph numerically with naive convolutions as a witness that
the symbolic shapes are achievable.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, NumericFailure, ShapeMismatch

__all__ = [
    "NodeKind",
    "TensorShape",
    "Node",
    "DataflowGraph",
    "TpnetGraph",
    "default_levels",
    "build_tblock",
    "build_forward_transfer",
    "build_tpnet",
    "validate",
    "tblock_operator_census",
    "downscale_for_smoke",
    "smoke_materials",
    "run_graph",
    "forward_smoke",
    "SmokeResult",
]

DEFAULT_T_BLOCKS = 5

# channel widths follow the usual 50-layer residual backbone stages, then
# progressively narrower constructed layers; config, not contract
DEFAULT_CHANNELS = (256, 512, 1024, 2048, 512, 256, 256)

_MAX_SMOKE_ELEMENTS = 4_000_000


class NodeKind(enum.Enum):
    INPUT = "INPUT"
    CONV = "CONV"
    UPSAMPLE = "UPSAMPLE"
    SUM = "SUM"
    CONCAT = "CONCAT"
    RELU = "RELU"


@dataclass(frozen=True)
class TensorShape:
    channels: int
    height: int
    width: int

    def __post_init__(self):
        if min(self.channels, self.height, self.width) < 1:
            raise ConfigError(f"tensor dims must be >= 1, got {self}")

    def __str__(self):
        return f"({self.channels}, {self.height}, {self.width})"


@dataclass
class Node:
    node_id: int
    kind: NodeKind
    inputs: tuple[int, ...]
    shape: TensorShape
    label: str
    block: int | None = None
    # CONV parameters
    kernel: int = 0
    stride: int = 0
    padding: int = 0
    out_channels: int = 0
    # UPSAMPLE target
    target_h: int = 0
    target_w: int = 0


def _conv_out(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


def _infer_shape(kind: NodeKind, node: Node, in_shapes: list[TensorShape]) -> TensorShape:
    """Output shape per node rule; raises ValueError with the violation."""
    if kind is NodeKind.INPUT:
        if in_shapes:
            raise ValueError("INPUT takes no inputs")
        return node.shape
    if kind is NodeKind.CONV:
        if len(in_shapes) != 1:
            raise ValueError("CONV takes exactly one input")
        s = in_shapes[0]
        if node.kernel < 1 or node.stride < 1 or node.padding < 0 or node.out_channels < 1:
            raise ValueError(f"bad conv parameters on {node.label}")
        oh = _conv_out(s.height, node.kernel, node.stride, node.padding)
        ow = _conv_out(s.width, node.kernel, node.stride, node.padding)
        if oh < 1 or ow < 1:
            raise ValueError(f"conv collapses {s} to non-positive spatial dims")
        return TensorShape(node.out_channels, oh, ow)
    if kind is NodeKind.UPSAMPLE:
        if len(in_shapes) != 1:
            raise ValueError("UPSAMPLE takes exactly one input")
        if node.target_h < 1 or node.target_w < 1:
            raise ValueError("UPSAMPLE target must be >= 1")
        return TensorShape(in_shapes[0].channels, node.target_h, node.target_w)
    if kind is NodeKind.SUM:
        if len(in_shapes) < 2:
            raise ValueError("SUM takes at least two inputs")
        first = in_shapes[0]
        for s in in_shapes[1:]:
            if s != first:
                raise ValueError(f"SUM inputs differ: {first} vs {s}")
        return first
    if kind is NodeKind.CONCAT:
        if len(in_shapes) < 2:
            raise ValueError("CONCAT takes at least two inputs")
        first = in_shapes[0]
        channels = first.channels
        for s in in_shapes[1:]:
            if (s.height, s.width) != (first.height, first.width):
                raise ValueError(f"CONCAT spatial dims differ: {first} vs {s}")
            channels += s.channels
        return TensorShape(channels, first.height, first.width)
    # RELU
    if len(in_shapes) != 1:
        raise ValueError("RELU takes exactly one input")
    return in_shapes[0]


class DataflowGraph:
    """Append-only DAG; node ids are topologically ordered by construction."""

    def __init__(self):
        self.nodes: list[Node] = []
        self.outputs: list[int] = []

    def _shape_of(self, node_id: int) -> TensorShape:
        return self.nodes[node_id].shape

    def _append(self, node: Node) -> int:
        for i in node.inputs:
            if not 0 <= i < node.node_id:
                raise ShapeMismatch(node.node_id, node.label,
                                    f"input id {i} out of range")
        try:
            shape = _infer_shape(node.kind, node, [self._shape_of(i) for i in node.inputs])
        except ValueError as exc:
            raise ShapeMismatch(node.node_id, node.label, str(exc)) from None
        node.shape = shape
        self.nodes.append(node)
        return node.node_id

    def add_input(self, shape: TensorShape, label: str, block: int | None = None) -> int:
        return self._append(Node(len(self.nodes), NodeKind.INPUT, (), shape, label, block))

    def add_conv(self, src: int, kernel: int, stride: int, padding: int,
                 out_channels: int, label: str, block: int | None = None) -> int:
        node = Node(len(self.nodes), NodeKind.CONV, (src,), TensorShape(1, 1, 1),
                    label, block, kernel=kernel, stride=stride, padding=padding,
                    out_channels=out_channels)
        return self._append(node)

    def add_upsample(self, src: int, target_h: int, target_w: int,
                     label: str, block: int | None = None) -> int:
        node = Node(len(self.nodes), NodeKind.UPSAMPLE, (src,), TensorShape(1, 1, 1),
                    label, block, target_h=target_h, target_w=target_w)
        return self._append(node)

    def add_sum(self, srcs: list[int], label: str, block: int | None = None) -> int:
        return self._append(Node(len(self.nodes), NodeKind.SUM, tuple(srcs),
                                 TensorShape(1, 1, 1), label, block))

    def add_concat(self, srcs: list[int], label: str, block: int | None = None) -> int:
        return self._append(Node(len(self.nodes), NodeKind.CONCAT, tuple(srcs),
                                 TensorShape(1, 1, 1), label, block))

    def add_relu(self, src: int, label: str, block: int | None = None) -> int:
        return self._append(Node(len(self.nodes), NodeKind.RELU, (src,),
                                 TensorShape(1, 1, 1), label, block))


class TpnetGraph(DataflowGraph):
    """Full network graph plus provenance of levels, blocks, and pyramid."""

    def __init__(self):
        super().__init__()
        self.level_ids: list[int] = []
        self.block_out_ids: list[int] = []
        self.block_xstar_ids: list[int] = []
        self.block_forward_ids: list[int | None] = []
        self.pyramid_ids: list[int] = []


def validate(g: DataflowGraph) -> list[ShapeMismatch]:
    """Re-check every node rule; empty list means the graph is consistent."""
    problems = []
    for node in g.nodes:
        for i in node.inputs:
            if not 0 <= i < node.node_id:
                problems.append(ShapeMismatch(node.node_id, node.label,
                                              f"input id {i} out of range"))
                break
        else:
            try:
                expect = _infer_shape(node.kind, node,
                                      [g.nodes[i].shape for i in node.inputs])
            except ValueError as exc:
                problems.append(ShapeMismatch(node.node_id, node.label, str(exc)))
                continue
            if expect != node.shape:
                problems.append(ShapeMismatch(
                    node.node_id, node.label,
                    f"recorded shape {node.shape} != derived {expect}"))
    return problems


def default_levels(input_size: int) -> tuple[TensorShape, ...]:
    """Seven-level feature table for a 320 or 512 square input.

    Spatial dims start at input/4 and halve (ceiling) per level; channel
    widths come from ``DEFAULT_CHANNELS``.
    """
    if input_size not in (320, 512):
        raise ConfigError(f"input_size must be 320 or 512, got {input_size}")
    h = input_size // 4
    shapes = []
    for ch in DEFAULT_CHANNELS:
        shapes.append(TensorShape(ch, h, h))
        h = (h + 1) // 2
    return tuple(shapes)


def _check_levels(levels) -> tuple[TensorShape, ...]:
    levels = tuple(levels)
    if not levels:
        raise ConfigError("level table is empty")
    for prev, cur in zip(levels, levels[1:]):
        if cur.height > prev.height or cur.width > prev.width:
            raise ConfigError(
                f"level spatial dims must be non-increasing: {prev} then {cur}")
    return levels


def _add_tblock(g: DataflowGraph, xl: int, xl1: int, xl2: int, xstar: int,
                block: int) -> int:
    """Wire one transductive block onto the graph; returns the ReLU output."""
    lvl = g.nodes[xl].shape
    star = g.nodes[xstar].shape
    up1 = g.add_upsample(xl1, lvl.height, lvl.width,
                         f"t{block}/up_first_neighbor", block)
    al1 = g.add_conv(up1, 1, 1, 0, lvl.channels, f"t{block}/align_first", block)
    k1 = g.add_sum([xl, al1], f"t{block}/k1_sum", block)
    up2 = g.add_upsample(xl2, star.height, star.width,
                         f"t{block}/up_second_neighbor", block)
    al2 = g.add_conv(up2, 1, 1, 0, star.channels, f"t{block}/align_second", block)
    k2 = g.add_sum([xstar, al2], f"t{block}/k2_sum", block)
    cat = g.add_concat([k1, k2], f"t{block}/concat", block)
    return g.add_relu(cat, f"t{block}/relu", block)


def build_tblock(levels, l: int, forward_in: TensorShape | None = None) -> DataflowGraph:
    """Standalone fragment for the block at level ``l``.

    The fragment's INPUT nodes are the consumed features.  ``forward_in`` is
    the transfer-input shape; when absent (the first block has no
    predecessor) the transfer input defaults to a 1x1 conv of the current
    level.
    """
    levels = _check_levels(levels)
    if l < 0 or l + 2 >= len(levels):
        raise ConfigError(
            f"block at level {l} needs levels {l + 1} and {l + 2}; table has "
            f"{len(levels)} levels")
    g = DataflowGraph()
    xl = g.add_input(levels[l], f"t{l}/X_l", l)
    xl1 = g.add_input(levels[l + 1], f"t{l}/X_l+1", l)
    xl2 = g.add_input(levels[l + 2], f"t{l}/X_l+2", l)
    if forward_in is None:
        xstar = g.add_conv(xl, 1, 1, 0, levels[l].channels, f"t{l}/xstar_seed", l)
    else:
        xstar = g.add_input(forward_in, f"t{l}/X_l_star", l)
    g.outputs = [_add_tblock(g, xl, xl1, xl2, xstar, l)]
    return g


def _forward_transfer_stride(src: TensorShape, dst: TensorShape,
                             kernel: int = 3, padding: int = 1) -> int:
    for stride in (1, 2, 3, 4):
        if (_conv_out(src.height, kernel, stride, padding) == dst.height
                and _conv_out(src.width, kernel, stride, padding) == dst.width):
            return stride
    raise ShapeMismatch(
        -1, "forward_transfer",
        f"no stride in 1..4 bridges {src} to spatial "
        f"({dst.height}, {dst.width}) with kernel {kernel}, padding {padding}")


def build_forward_transfer(x_out: TensorShape, next_level: TensorShape) -> DataflowGraph:
    """Fragment carrying a block output up to the next level's shape."""
    stride = _forward_transfer_stride(x_out, next_level)
    g = DataflowGraph()
    src = g.add_input(x_out, "forward_transfer/in")
    g.outputs = [g.add_conv(src, 3, stride, 1, next_level.channels,
                            "forward_transfer/conv")]
    return g


def build_tpnet(levels, num_t_blocks: int = DEFAULT_T_BLOCKS) -> TpnetGraph:
    """Chained blocks plus the top-down fusion pyramid, fully shape-resolved."""
    levels = _check_levels(levels)
    if num_t_blocks < 1:
        raise ConfigError("need at least one block")
    if len(levels) < num_t_blocks + 2:
        raise ConfigError(
            f"{num_t_blocks} blocks need {num_t_blocks + 2} levels (two upper "
            f"neighbors each); table has {len(levels)}")
    g = TpnetGraph()
    g.level_ids = [g.add_input(s, f"level{i}") for i, s in enumerate(levels)]

    xstar = g.add_conv(g.level_ids[0], 1, 1, 0, levels[0].channels, "t0/xstar_seed", 0)
    for l in range(num_t_blocks):
        out = _add_tblock(g, g.level_ids[l], g.level_ids[l + 1], g.level_ids[l + 2],
                          xstar, l)
        g.block_out_ids.append(out)
        g.block_xstar_ids.append(xstar)
        if l + 1 < num_t_blocks:
            stride = _forward_transfer_stride(g.nodes[out].shape, levels[l + 1])
            ft = g.add_conv(out, 3, stride, 1, levels[l + 1].channels,
                            f"t{l}/forward_transfer", l)
            g.block_forward_ids.append(ft)
            xstar = ft
        else:
            g.block_forward_ids.append(None)

    sources = [g.block_out_ids[l] if l < num_t_blocks else g.level_ids[l]
               for l in range(len(levels))]
    pyramid = [0] * len(levels)
    top = sources[-1]
    pyramid[-1] = top
    for l in range(len(levels) - 2, -1, -1):
        tgt = g.nodes[sources[l]].shape
        up = g.add_upsample(top, tgt.height, tgt.width, f"fuse{l}/up")
        al = g.add_conv(up, 1, 1, 0, tgt.channels, f"fuse{l}/align")
        top = g.add_sum([sources[l], al], f"fuse{l}/sum")
        pyramid[l] = top
    g.pyramid_ids = pyramid
    g.outputs = list(pyramid)
    return g


def tblock_operator_census(g: DataflowGraph) -> dict[int, dict[str, int]]:
    """Per-block counts of the four aggregation operators (convs excluded)."""
    census: dict[int, dict[str, int]] = {}
    for node in g.nodes:
        if node.block is None:
            continue
        counts = census.setdefault(
            node.block, {"UPSAMPLE": 0, "SUM": 0, "CONCAT": 0, "RELU": 0})
        if node.kind.name in counts:
            counts[node.kind.name] += 1
    return census


def downscale_for_smoke(levels, num_t_blocks: int, max_spatial: int = 16,
                        max_channels: int = 8) -> tuple[tuple[TensorShape, ...], int]:
    """Shrink a level table for numeric execution.

    Spatial dims restart from at most ``max_spatial`` and halve per level;
    the ladder stops where halving bottoms out at 1, so very deep tables
    also lose levels (and blocks) in the down-scaled graph.
    """
    levels = _check_levels(levels)
    h = min(levels[0].height, max_spatial)
    w = min(levels[0].width, max_spatial)
    shapes = []
    for lvl in levels:
        ch = min(max_channels, max(2, lvl.channels // 128))
        shapes.append(TensorShape(ch, h, w))
        nh, nw = (h + 1) // 2, (w + 1) // 2
        if (nh, nw) == (h, w):
            break
        h, w = nh, nw
    blocks = min(num_t_blocks, len(shapes) - 2)
    if blocks < 1:
        raise ConfigError("down-scaled table too small for any block")
    return tuple(shapes), blocks


def smoke_materials(g: DataflowGraph, seed: int):
    """Deterministic random inputs and conv weights for numeric execution."""
    rng = np.random.default_rng(seed)
    inputs: dict[int, np.ndarray] = {}
    weights: dict[int, np.ndarray] = {}
    for node in g.nodes:
        if node.kind is NodeKind.INPUT:
            s = node.shape
            inputs[node.node_id] = rng.standard_normal((s.channels, s.height, s.width))
        elif node.kind is NodeKind.CONV:
            in_c = g.nodes[node.inputs[0]].shape.channels
            fan_in = in_c * node.kernel * node.kernel
            weights[node.node_id] = rng.standard_normal(
                (node.out_channels, in_c, node.kernel, node.kernel)) / np.sqrt(fan_in)
    return inputs, weights


def _conv_forward(x: np.ndarray, wt: np.ndarray, stride: int, padding: int) -> np.ndarray:
    k = wt.shape[2]
    xp = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    win = sliding_window_view(xp, (k, k), axis=(1, 2))[:, ::stride, ::stride]
    return np.einsum("chwuv,ocuv->ohw", win, wt)


def _upsample_nearest(x: np.ndarray, th: int, tw: int) -> np.ndarray:
    _, h, w = x.shape
    rows = (np.arange(th) * h) // th
    cols = (np.arange(tw) * w) // tw
    return x[:, rows][:, :, cols]


def run_graph(g: DataflowGraph, inputs: dict, weights: dict) -> dict[int, np.ndarray]:
    """Execute the graph in node order, checking shape and finiteness."""
    out: dict[int, np.ndarray] = {}
    for node in g.nodes:
        s = node.shape
        if s.channels * s.height * s.width > _MAX_SMOKE_ELEMENTS:
            raise ConfigError(f"node {node.node_id} too large for numeric execution")
        if node.kind is NodeKind.INPUT:
            val = inputs[node.node_id]
        elif node.kind is NodeKind.CONV:
            val = _conv_forward(out[node.inputs[0]], weights[node.node_id],
                                node.stride, node.padding)
        elif node.kind is NodeKind.UPSAMPLE:
            val = _upsample_nearest(out[node.inputs[0]], node.target_h, node.target_w)
        elif node.kind is NodeKind.SUM:
            val = out[node.inputs[0]]
            for i in node.inputs[1:]:
                val = val + out[i]
        elif node.kind is NodeKind.CONCAT:
            val = np.concatenate([out[i] for i in node.inputs], axis=0)
        else:  # RELU
            val = np.maximum(out[node.inputs[0]], 0.0)
        if val.shape != (s.channels, s.height, s.width):
            raise NumericFailure(node.node_id, node.label,
                                 f"concrete shape {val.shape} != symbolic {s}")
        if not np.all(np.isfinite(val)):
            raise NumericFailure(node.node_id, node.label, "non-finite values")
        if node.kind is NodeKind.RELU and val.min(initial=0.0) < 0.0:
            raise NumericFailure(node.node_id, node.label, "negative relu output")
        out[node.node_id] = val
    return out


@dataclass(frozen=True)
class SmokeResult:
    shapes: dict[int, TensorShape]
    digests: dict[int, str]
    digest: str


def forward_smoke(g: DataflowGraph, seed: int) -> SmokeResult:
    """Numeric witness for the symbolic shapes; deterministic per seed."""
    problems = validate(g)
    if problems:
        raise problems[0]
    inputs, weights = smoke_materials(g, seed)
    outputs = run_graph(g, inputs, weights)
    digests = {}
    total = hashlib.sha256()
    for node in g.nodes:
        raw = outputs[node.node_id].tobytes()
        digests[node.node_id] = hashlib.sha256(raw).hexdigest()
        total.update(raw)
    return SmokeResult(
        shapes={n.node_id: n.shape for n in g.nodes},
        digests=digests,
        digest=total.hexdigest(),
    )
